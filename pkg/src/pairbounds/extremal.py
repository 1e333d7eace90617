"""Distributions that attain the tight bounds, plus a moment checker.

Constructions work on the sorted marginals and translate bitmasks back to
the caller's variable order at the end, so bit ``i`` of every returned
atom refers to the ``i``-th entry of the vector the caller passed in.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from itertools import combinations
from typing import Sequence

import numpy as np

from .closed import _identical_value, almost_identical_case
from .core import (
    EPS,
    EXPAND_LIMIT,
    BivariateSpec,
    JointDistribution,
    LevelDistribution,
    MarginalVector,
    Number,
    snap_ceil,
    unify,
    validate_marginals,
    zero_like,
)
from .errors import (
    CaseViolation,
    DimensionCap,
    DimensionMismatch,
    OutOfRange,
    ScaleOutOfRange,
)

NEG_TOL = 1e-12
"""Negative masses down to this size are rounded to zero in float mode."""


def _product(probs: Sequence[Number], one: Number = 1.0) -> dict:
    """Mutually independent law of ``len(probs)`` Bernoulli variables."""
    if len(probs) > EXPAND_LIMIT:
        raise DimensionCap(f"refusing to materialise 2^{len(probs)} atoms")
    if probs and isinstance(probs[0], Fraction):
        one = Fraction(1)
    atoms = {0: one}
    for bit, q in enumerate(probs):
        nxt = {}
        for mask, m in atoms.items():
            if q != 1:
                nxt[mask] = m * (1 - q)
            if q != 0:
                nxt[mask | 1 << bit] = m * q
        atoms = nxt
    return atoms


def _mix(a: dict, b: dict, lam: Number) -> dict:
    out = {}
    if lam != 0:
        for mask, m in a.items():
            out[mask] = out.get(mask, 0) + lam * m
    if lam != 1:
        for mask, m in b.items():
            out[mask] = out.get(mask, 0) + (1 - lam) * m
    return out


def _to_original(atoms: dict, perm: Sequence[int]) -> dict:
    """Relabel bit ``s`` (sorted position) as bit ``perm[s]``."""
    if list(perm) == list(range(len(perm))):
        return dict(sorted(atoms.items()))
    out = {}
    for mask, m in atoms.items():
        new = 0
        for s, orig in enumerate(perm):
            if mask >> s & 1:
                new |= 1 << orig
        out[new] = out.get(new, 0) + m
    return dict(sorted(out.items()))


def _check_nonneg(atoms: dict, what: str) -> dict:
    for mask, m in list(atoms.items()):
        if m < 0:
            if isinstance(m, Fraction) or m < -NEG_TOL:
                raise CaseViolation(f"{what}: negative mass {m} at atom {mask:b}")
            atoms[mask] = 0.0
    return atoms


def _scaled_sorted(probs: tuple, scale: Number) -> dict:
    """Construction behind :func:`build_scaled_bivariate` in input bit order.

    The conditioning variable is the last position holding the maximum.
    """
    one = Fraction(1) if isinstance(scale, Fraction) else 1.0
    top = max(probs)
    if top == 0:
        return {0: one}
    independent = _product(probs, one)
    if scale == 1:
        return independent
    # conditioned law: all zeros w.p. 1 - top, else the top variable is one
    # and the rest are independent with marginals p_i / top
    pivot = max(range(len(probs)), key=lambda i: (probs[i], i))
    inner = _product([q / top for i, q in enumerate(probs) if i != pivot], one)
    low = (1 << pivot) - 1
    bar = {((mask & low) | (mask & ~low) << 1 | 1 << pivot): top * m for mask, m in inner.items()}
    if top != 1:
        bar[0] = bar.get(0, 0) + (1 - top)
    lam = (1 / scale - 1) / (1 / top - 1)
    return _mix(bar, independent, lam)


def build_scaled_bivariate(p, scale) -> JointDistribution:
    """Law with marginals ``p_i`` and bivariates ``p_i p_j / scale``.

    A mixture of the product law and the law that is all zeros with
    probability ``p_max`` complement and otherwise sets the largest variable
    to one with the others independent at ``p_i / p_max``. The mixing weight
    solves ``1/scale = lam/p_max + (1 - lam)``.
    """
    p = validate_marginals(p)
    probs = p.probs
    (scale,) = unify([probs[0], scale])[1:]
    if scale <= 0 or scale > 1 or scale < probs[-1]:
        raise ScaleOutOfRange(f"scale = {scale} must lie in [max p = {probs[-1]}, 1] and be positive")
    atoms = _scaled_sorted(probs, scale)
    return JointDistribution(p.n, _to_original(atoms, p.perm))


def build_complement_scaled(p, scale) -> JointDistribution:
    """Law with bivariates ``p_i p_j + scale/(1-scale) (1-p_i)(1-p_j)``.

    Built by applying :func:`build_scaled_bivariate` to the complements
    ``1 - p_i`` at scale ``1 - scale`` and flipping every bit.
    """
    p = validate_marginals(p)
    (scale,) = unify([p.probs[0], scale])[1:]
    if scale < 0 or scale > p.probs[0]:
        raise ScaleOutOfRange(f"scale = {scale} must lie in [0, min p = {p.probs[0]}]")
    comp = validate_marginals([1 - q for q in p.original()])
    if scale == 1:
        full = (1 << p.n) - 1
        return JointDistribution(p.n, {full: Fraction(1) if p.exact else 1.0})
    return build_scaled_bivariate(comp, 1 - scale).flipped()


def _union_sorted(probs: tuple, table: bool = False) -> dict:
    """Union extremal on sorted marginals, in sorted bit order.

    ``table=True`` forces the scenario-table branch; the split below uses it
    for a prefix summing to exactly one, which rounding could push over.
    """
    n = len(probs)
    zero = zero_like(probs[0])
    one = zero + 1
    top = probs[-1]
    head = sum(probs[:-1], zero)
    if table or head <= 1:
        if top == 0:
            return {0: one}
        atoms = {0: 1 - head - top + top * head}
        for i in range(n - 1):
            atoms[1 << i] = probs[i] * (1 - top)
        if n > 1:
            inner = _scaled_sorted(probs[:-1], top)
        else:
            inner = {0: one}
        for mask, m in inner.items():
            key = mask | 1 << (n - 1)
            atoms[key] = atoms.get(key, 0) + top * m
        return _check_nonneg(atoms, "union extremal")
    # the first t marginals already sum past one
    t, acc = 0, zero
    while acc + probs[t] <= 1:
        acc += probs[t]
        t += 1
    # t is now the 0-based position of the entry that crosses one
    delta = 1 - acc
    sub = list(probs[:t]) + [delta, probs[t + 1]]
    core = _union_sorted(tuple(sub), table=True)
    q = (probs[t] - delta) / (1 - delta)
    widened = {}
    for mask, m in core.items():
        has = mask >> t & 1
        if has or q == 0:
            widened[mask] = widened.get(mask, 0) + m
        else:
            if q != 1:
                widened[mask] = widened.get(mask, 0) + m * (1 - q)
            widened[mask | 1 << t] = widened.get(mask | 1 << t, 0) + m * q
    # sub-vector positions t, t+1 map to sorted positions t, t+1 already
    pad = _product(probs[t + 2 :], one)
    atoms = {}
    shift = t + 2
    for a, ma in widened.items():
        for b, mb in pad.items():
            atoms[a | b << shift] = ma * mb
    return _check_nonneg(atoms, "union extremal")


def build_union_extremal(p) -> JointDistribution:
    """Pairwise independent law whose union probability is the tight bound.

    When the ``n - 1`` smallest marginals sum to at most one the scenario
    table is followed exactly. Otherwise the smallest prefix crossing one is
    cut at ``delta = 1 - (sum before it)``, the shorter problem is solved so
    that all-zeros has no mass, the cut variable is raised back to its
    marginal by OR-ing it with an independent coin, and the remaining
    variables are drawn independently.
    """
    p = validate_marginals(p)
    if p.n > EXPAND_LIMIT:
        raise DimensionCap(f"n = {p.n} exceeds {EXPAND_LIMIT}")
    atoms = _union_sorted(p.probs)
    return JointDistribution(p.n, _to_original(atoms, p.perm))


def build_intersection_extremal(p) -> JointDistribution:
    """Pairwise independent law minimising ``P(all ones)``.

    The union extremal for the complemented marginals with every bit flipped.
    """
    p = validate_marginals(p)
    comp = validate_marginals([1 - q for q in p.original()])
    return build_union_extremal(comp).flipped()


def build_identical_extremal(n: int, k: int, p) -> LevelDistribution:
    """Level distribution attaining :func:`~pairbounds.closed.identical_tight`.

    Supports: case a on levels ``{j-1, j, n}`` with ``j = ceil((n-1)p)``,
    case b on ``{0, k, n}``, case c on ``{i-1, i, k}`` (level ``-1`` is
    dropped when ``i = 0``; its mass is zero there).
    """
    from .closed import _identical_args

    p = _identical_args(n, k, p)
    zero = p * 0
    levels = [zero] * (n + 1)
    if p == 0 or p == 1:
        levels[n if p == 1 else 0] = zero + 1
        return LevelDistribution(n, tuple(levels))
    value, case, i = _identical_value(n, k, p)
    masses = {}
    if case == "a":
        j = snap_ceil((n - 1) * p)
        masses[j - 1] = comb(n, j - 1) * (1 - p) * (j - (n - 1) * p) / comb(n - 1, j - 1)
        masses[j] = comb(n, j) * (1 - p) * (1 + (n - 1) * p - j) / comb(n - 1, j)
        masses[n] = (n * (n - 1) * p * p + (j - 1) * (j - 2 * n * p)) / ((n - j) ** 2 + (n - j))
    elif case == "b":
        masses[0] = (1 - p) * (k - (n - 1) * p) / k
        masses[k] = comb(n, k) * p * (1 - p) / comb(n - 2, k - 1)
        masses[n] = p * ((n - 1) * p - (k - 1)) / (n - k)
    else:
        masses[i - 1] = (n * p * ((n - 1) * p - (k + i - 1)) + i * k) / (k - i + 1)
        masses[i] = (n * p * ((k + i - 2) - (n - 1) * p) - k * (i - 1)) / (k - i)
        masses[k] = value
    for level, m in masses.items():
        bad = m < 0 and (isinstance(m, Fraction) or m < -1e-10)
        if bad or (level < 0 and abs(m) > 1e-10):
            raise CaseViolation(f"case {case}: mass {m} at level {level}")
        if level >= 0:
            levels[level] += m if m > 0 else zero
    return LevelDistribution(n, tuple(levels))


def build_almost_identical_extremal(n: int, k: int, p, q) -> JointDistribution:
    """Law attaining the bound for ``n - 1`` marginals ``p`` and one ``q``.

    The variable with marginal ``q`` is the last one (bit ``n - 1``).
    Scenario masses ``x, y, z, u, v`` follow the two published tables, one
    for cases a/b and one for case c; ``detail`` of the matching bound holds
    the case letter.
    """
    p, q = unify([p, q])
    case = almost_identical_case(n, k, p, q)
    last = 1 << (n - 1)
    rest = last - 1
    atoms: dict = {}

    def put(mask, m):
        atoms[mask] = atoms.get(mask, 0) + m

    if case in ("a", "b"):
        x = (1 - q) * (1 - (n - 1) * p)
        y = p * (1 - q)
        z = q * (1 - (n - 1) * p) + (n - 1) * (n - 2) * p * p / (k - 1)
        u = p * (q - Fraction(n - 2, k - 2) * p) if isinstance(p, Fraction) else p * (q - (n - 2) / (k - 2) * p)
        v = p * p / comb(n - 3, k - 3)
        put(0, x)
        for i in range(n - 1):
            put(1 << i, y)
            put(1 << i | last, u)
        put(last, z)
        for idx in combinations(range(n - 1), k - 1):
            put(sum(1 << i for i in idx) | last, v)
    else:
        put(0, (1 - p) * (1 - (n - 2) * p - q))
        for i in range(n - 1):
            put(1 << i, p * (1 - p))
        put(last, q * (1 - p))
        put(rest, p * (p - q))
        put(rest | last, p * q)
    for mask, m in list(atoms.items()):
        if m < 0:
            if isinstance(m, Fraction) or m < -EPS:
                raise CaseViolation(f"case {case}: negative mass {m} at {mask:b}")
            atoms[mask] = m * 0
    return JointDistribution(n, dict(sorted(atoms.items())))


# -- verification ---------------------------------------------------------------


@dataclass(frozen=True)
class MomentCheckReport:
    """Errors of a distribution against marginal and bivariate targets."""

    total_mass_error: float
    max_univariate_error: float
    max_bivariate_error: float
    objective_mass: Number
    min_mass: float
    passed: bool

    @property
    def pass_(self) -> bool:
        return self.passed


def _moments_exact(dist: JointDistribution):
    n = dist.n
    uni = [Fraction(0)] * n
    biv = {(i, j): Fraction(0) for i in range(n) for j in range(i + 1, n)}
    for mask, m in dist.atoms.items():
        on = [i for i in range(n) if mask >> i & 1]
        for i in on:
            uni[i] += m
        for a, b in combinations(on, 2):
            biv[(a, b)] += m
    return uni, biv


def _moments_float(dist: JointDistribution):
    n = dist.n
    masks = np.fromiter(dist.atoms.keys(), dtype=np.int64, count=len(dist.atoms))
    mass = np.fromiter((float(m) for m in dist.atoms.values()), dtype=float, count=len(dist.atoms))
    bits = ((masks[:, None] >> np.arange(n)) & 1).astype(float)
    uni = bits.T @ mass
    second = bits.T @ (bits * mass[:, None])
    biv = {(i, j): second[i, j] for i in range(n) for j in range(i + 1, n)}
    return list(uni), biv


def verify_distribution(
    dist: JointDistribution | LevelDistribution,
    p,
    biv: BivariateSpec | None = None,
    k: int = 1,
    tol: float = EPS,
) -> MomentCheckReport:
    """Check total mass, marginals and bivariates of ``dist``.

    ``biv`` defaults to pairwise independence. A level distribution is
    read as the symmetric law, so every marginal is ``E[S]/n`` and every
    bivariate ``E[C(S,2)]/C(n,2)``. In exact mode all errors are exact and
    ``passed`` requires them to vanish.
    """
    p = validate_marginals(p)
    if dist.n != p.n:
        raise DimensionMismatch(f"distribution has n = {dist.n}, marginals n = {p.n}")
    if biv is None:
        biv = BivariateSpec.pairwise_independent(p)
    if biv.n != p.n:
        raise DimensionMismatch(f"bivariates have n = {biv.n}, marginals n = {p.n}")
    target = p.original()
    n = p.n
    if isinstance(dist, LevelDistribution):
        total = dist.total_mass()
        s1 = dist.binomial_moment(1)
        s2 = dist.binomial_moment(2)
        uni = [s1 / n] * n
        pair = s2 / comb(n, 2) if n > 1 else None
        bivs = {key: pair for key in biv.pairs}
        objective = dist.mass_at_least(k)
        masses = dist.levels
    else:
        total = dist.total_mass()
        exact = dist.exact and p.exact
        uni, bivs = _moments_exact(dist) if exact else _moments_float(dist)
        objective = dist.mass_at_least(k)
        masses = list(dist.atoms.values())
    exact = all(isinstance(v, Fraction) for v in list(masses) + list(target))
    tot_err = abs(total - 1)
    uni_err = max((abs(uni[i] - target[i]) for i in range(n)), default=0)
    biv_err = max((abs(bivs[key] - biv.pairs[key]) for key in biv.pairs), default=0)
    min_mass = min(masses) if len(masses) else 0
    if exact:
        ok = tot_err == 0 and uni_err == 0 and biv_err == 0 and min_mass >= 0
    else:
        ok = tot_err <= tol and uni_err <= tol and biv_err <= tol and min_mass >= -NEG_TOL
    return MomentCheckReport(float(tot_err), float(uni_err), float(biv_err), objective, float(min_mass), bool(ok))


# -- serialization ------------------------------------------------------------


def _num_out(v: Number):
    return str(v) if isinstance(v, Fraction) else float(v)


def _num_in(v) -> Number:
    if isinstance(v, str) and "/" in v:
        return Fraction(v)
    return Fraction(v) if isinstance(v, str) and v.isdigit() else float(v)


def distribution_to_csv(dist: JointDistribution) -> str:
    """Rows ``bitmask,probability``; the bitstring lists variable 0 first."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["bitmask", "probability"])
    for mask, m in dist.items_sorted():
        w.writerow([dist.bitstring(mask), _num_out(m)])
    return buf.getvalue()


def distribution_from_csv(text: str) -> JointDistribution:
    rows = list(csv.reader(io.StringIO(text)))
    body = [r for r in rows[1:] if r]
    if not body:
        raise OutOfRange("no atoms in CSV")
    n = len(body[0][0])
    atoms = {}
    for bits, mass in body:
        mask = sum(1 << i for i, ch in enumerate(bits) if ch == "1")
        atoms[mask] = _num_in(mass)
    return JointDistribution(n, atoms)


def distribution_to_dict(dist: JointDistribution | LevelDistribution) -> dict:
    if isinstance(dist, LevelDistribution):
        return {"n": dist.n, "levels": [_num_out(v) for v in dist.levels]}
    return {
        "n": dist.n,
        "atoms": [{"bits": dist.bitstring(mask), "p": _num_out(m)} for mask, m in dist.items_sorted()],
    }


def distribution_from_dict(data: dict) -> JointDistribution | LevelDistribution:
    if "levels" in data:
        levels = tuple(_num_in(v) for v in data["levels"])
        return LevelDistribution(int(data.get("n", len(levels) - 1)), levels)
    n = int(data["n"])
    atoms = {}
    for item in data["atoms"]:
        mask = sum(1 << i for i, ch in enumerate(item["bits"]) if ch == "1")
        atoms[mask] = _num_in(item["p"])
    return JointDistribution(n, atoms)


def distribution_to_json(dist: JointDistribution | LevelDistribution) -> str:
    return json.dumps(distribution_to_dict(dist), indent=2)
