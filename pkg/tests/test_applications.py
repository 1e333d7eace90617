import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pairbounds import (
    FeasibleSet,
    bottleneck_approx,
    correlation_gap,
    improvement_scan,
    ratio_boole_over_tight,
    ratio_scan,
    solve_exact,
    union_tight,
)
from pairbounds.errors import DegenerateDenominator, EmptySet, IndexOutOfRange

marginals = st.lists(st.floats(0.001, 1, allow_nan=False), min_size=1, max_size=10)


def test_ratio_examples():
    assert ratio_boole_over_tight(["1/2", "1/2"]) == Fraction(4, 3)
    assert ratio_boole_over_tight([0.6, 0.7, 0.8]) == 1.0
    assert ratio_boole_over_tight([0.1]) == 1.0


@given(marginals)
def test_ratio_range(p):
    r = ratio_boole_over_tight(p)
    assert 1 - 1e-12 <= r <= 4 / 3 + 1e-12


@given(marginals)
def test_gap_ordering(p):
    assert correlation_gap(p, "pairwise") <= correlation_gap(p, "arbitrary") + 1e-12


def test_gap_examples():
    assert correlation_gap(["1/2", "1/2"], "arbitrary") == Fraction(4, 3)
    assert correlation_gap(["1/2", "1/2"], "pairwise") == 1
    with pytest.raises(DegenerateDenominator):
        correlation_gap([0.0, 0.0])
    with pytest.raises(ValueError):
        correlation_gap([0.5], "other")


def test_gap_limit_large_n():
    n = 10_000
    limit = math.e / (math.e - 1)
    for mode in ("arbitrary", "pairwise"):
        assert correlation_gap([1 / n] * n, mode) == pytest.approx(limit, abs=1e-3)


def test_bottleneck_examples():
    res = bottleneck_approx(FeasibleSet.of([(1, 0), (0, 1)]), [0.5, 0.5])
    assert res.ratio == 1.0
    res = bottleneck_approx(FeasibleSet.of([(1, 1, 0), (0, 1, 1)]), [0.3, 0.2, 0.4])
    assert res.chosen == (1, 1, 0)
    assert res.f_hat == pytest.approx(0.44)
    assert res.opt == pytest.approx(0.44)
    assert res.ratio == pytest.approx(1.0)


def test_bottleneck_errors():
    with pytest.raises(EmptySet):
        bottleneck_approx(FeasibleSet(2, ()), [0.5, 0.5])
    with pytest.raises(IndexOutOfRange):
        bottleneck_approx(FeasibleSet.of([(1, 0)]), [0.5, 0.5, 0.5])


def test_bottleneck_opt_matches_lp(rng):
    for _ in range(10):
        n = int(rng.integers(2, 7))
        X = FeasibleSet.of({tuple(int(v) for v in rng.integers(0, 2, n)) for _ in range(6)} - {(0,) * n} or {(1,) * n})
        p = rng.random(n)
        res = bottleneck_approx(X, p)
        lp_opt = min(solve_exact([q * v for q, v in zip(p, x)], None, 1).value for x in X.solutions)
        assert res.opt == pytest.approx(lp_opt, abs=1e-6)
        assert 1 <= res.ratio <= 4 / 3 + 1e-12


def test_feasible_set_builders(tmp_path):
    A = FeasibleSet.assignments(3)
    assert A.n == 9 and len(A.solutions) == 6
    paths = FeasibleSet.st_paths([(0, 1), (1, 2), (0, 2)], 0, 2)
    assert sorted(paths.solutions) == [(0, 0, 1), (1, 1, 0)]
    path = tmp_path / "x.json"
    path.write_text(json.dumps(paths.to_dict()))
    assert FeasibleSet.from_json(path).solutions == paths.solutions
    with pytest.raises(EmptySet):
        FeasibleSet.st_paths([(0, 1)], 1, 0)


def test_ratio_scan_determinism():
    a = ratio_scan(4, 500, seed=3, workers=1)
    b = ratio_scan(4, 500, seed=3, workers=4)
    assert json.dumps(a.summary()) == json.dumps(b.summary())
    assert np.array_equal(a.ratio, b.ratio)
    assert a.max_ratio <= 4 / 3 + 1e-12


def test_ratio_scan_attains_max():
    s = ratio_scan(2, 200, seed=0, extra_points=[(0.5, 0.5)])
    assert s.max_ratio == pytest.approx(4 / 3, abs=1e-12)
    assert s.argmax_p == [0.5, 0.5]


def test_improvement_scan():
    s = improvement_scan(20, 20, 100, seed=1, low=0.01, high=0.05, workers=3)
    assert np.all(s.improvement["sss"] > 0)
    t = improvement_scan(20, 20, 100, seed=1, low=0.01, high=0.05, workers=1)
    assert s.rows() == t.rows()
    assert s.summary()["ordered_bp_always_best"]
    for a, b in zip(s.values["ordered_bp"], s.values["ordered_sss"]):
        assert a <= b + 1e-12


def test_union_on_masked_marginals():
    p = [0.3, 0.2, 0.4]
    x = (1, 1, 0)
    assert union_tight([q * v for q, v in zip(p, x)]).value == pytest.approx(0.44)
