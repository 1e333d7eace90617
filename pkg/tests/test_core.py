from fractions import Fraction
from itertools import permutations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from pairbounds import (
    BivariateSpec,
    JointDistribution,
    LevelDistribution,
    partial_moments,
    validate_marginals,
)
from pairbounds.core import reduce_degenerate, snap_ceil, snap_floor
from pairbounds.errors import DimensionMismatch, EmptyInput, IndexOutOfRange, OutOfRange

probs = st.lists(st.floats(0, 1, allow_nan=False), min_size=1, max_size=8)


def test_validate_sorts_and_records_permutation():
    p = validate_marginals([0.35, 0.19, 0.13, 0.2])
    assert p.probs == (0.13, 0.19, 0.2, 0.35)
    assert p.perm == (2, 1, 3, 0)
    assert p.original() == (0.35, 0.19, 0.13, 0.2)


def test_validate_single_and_errors():
    p = validate_marginals([0.5])
    assert p.probs == (0.5,) and p.perm == (0,)
    with pytest.raises(OutOfRange):
        validate_marginals([1.2])
    with pytest.raises(OutOfRange):
        validate_marginals([float("nan")])
    with pytest.raises(EmptyInput):
        validate_marginals([])


def test_exact_mode_from_strings():
    p = validate_marginals(["1/2", "1/3"])
    assert p.exact
    assert p.probs == (Fraction(1, 3), Fraction(1, 2))
    mixed = validate_marginals([Fraction(1, 2), 0.25])
    assert mixed.exact and mixed.probs[0] == Fraction(1, 4)


@pytest.mark.parametrize(
    "r, s1, s2",
    [(0, 0.9, 0.26), (1, 0.5, 0.06), (2, 0.2, 0.0)],
)
def test_partial_moments(r, s1, s2):
    m = partial_moments(validate_marginals([0.2, 0.3, 0.4]), r)
    assert m.s1 == pytest.approx(s1, abs=1e-15)
    assert m.s2 == pytest.approx(s2, abs=1e-15)


def test_partial_moments_single():
    m = partial_moments(validate_marginals([0.5]), 0)
    assert m.s1 == 0.5 and m.s2 == 0


def test_partial_moments_range():
    with pytest.raises(IndexOutOfRange):
        partial_moments(validate_marginals([0.2, 0.3]), 2)


@given(probs)
def test_moment_invariants(raw):
    p = validate_marginals(raw)
    prev = None
    for r in range(p.n):
        m = partial_moments(p, r)
        assert 2 * m.s2 <= m.s1 ** 2 + 1e-12
        if prev is not None:
            assert m.s1 <= prev.s1 + 1e-15 and m.s2 <= prev.s2 + 1e-15
        prev = m


@given(probs, st.randoms())
def test_permutation_invariance(raw, rnd):
    shuffled = list(raw)
    rnd.shuffle(shuffled)
    assert validate_marginals(raw).probs == validate_marginals(shuffled).probs


def test_reduce_degenerate():
    kept, k, red = reduce_degenerate(validate_marginals([0.0, 1.0, 0.3, 1.0, 0.6]), 3)
    assert kept == (0.3, 0.6) and k == 1
    assert red.dropped_zero == 1 and red.dropped_one == 2


def test_snap():
    assert snap_ceil(2.0000000001) == 2
    assert snap_ceil(2.1) == 3
    assert snap_floor(1.9999999999) == 2
    assert snap_ceil(Fraction(7, 2)) == 4


def test_bivariate_constructors():
    b = BivariateSpec.pairwise_independent([0.2, 0.5])
    assert b.value(1, 0) == pytest.approx(0.1)
    s = BivariateSpec.scaled([0.2, 0.5], 0.5)
    assert s.value(0, 1) == pytest.approx(0.2)
    g = BivariateSpec.general(3, [(0, 2, 0.1)])
    assert g.value(0, 1) == 0.0 and g.value(2, 0) == 0.1
    with pytest.raises(IndexOutOfRange):
        BivariateSpec.general(3, [(0, 3, 0.1)])
    with pytest.raises(IndexOutOfRange):
        g.value(1, 1)


def test_frechet_violations():
    g = BivariateSpec.general(2, [(0, 1, 0.2)])
    assert g.frechet_violations([0.1, 0.1]) == [(0, 1)]
    assert BivariateSpec.pairwise_independent([0.1, 0.9]).frechet_violations([0.1, 0.9]) == []


def test_joint_distribution_queries():
    d = JointDistribution(3, {0b000: 0.25, 0b011: 0.25, 0b101: 0.25, 0b110: 0.25})
    assert d.marginal(0) == 0.5
    assert d.bivariate(0, 1) == 0.25
    assert d.mass_at_least(2) == 0.75
    assert d.bitstring(0b011) == "110"
    assert d.levels().levels == (0.25, 0.0, 0.75, 0.0)
    assert d.flipped().mass_at(0b111) == 0.25


def test_level_distribution():
    lv = LevelDistribution(2, (Fraction(1, 4), Fraction(1, 2), Fraction(1, 4)))
    assert lv.binomial_moment(1) == 1
    assert lv.binomial_moment(2) == Fraction(1, 4)
    joint = lv.expand()
    assert joint.mass_at(0b01) == Fraction(1, 4)
    with pytest.raises(DimensionMismatch):
        LevelDistribution(3, (1.0,))


def test_permutations_of_small_vector_agree():
    base = validate_marginals([0.3, 0.1, 0.2]).probs
    assert all(validate_marginals(list(q)).probs == base for q in permutations([0.3, 0.1, 0.2]))
