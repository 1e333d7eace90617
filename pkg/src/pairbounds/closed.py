"""Closed-form upper and lower bounds on ``P(c_1 + ... + c_n >= k)``.

Every function takes marginals in any order (they are sorted internally)
and returns a :class:`~pairbounds.core.BoundReport`. Unless noted otherwise
the bivariate probabilities are the pairwise independent ones, ``p_i p_j``.

Moment-based bounds first drop degenerate marginals: a variable with
``p_i = 0`` never contributes, one with ``p_i = 1`` always does and lowers
``k`` by one. The reduction is recorded in ``detail["reduction"]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb

from .core import (
    EPS,
    BoundReport,
    MarginalVector,
    Number,
    prefix_moments,
    reduce_degenerate,
    snap_ceil,
    snap_floor,
    unify,
    validate_marginals,
)
from .errors import (
    CaseUnsupported,
    IndexOutOfRange,
    MomentInconsistency,
    OutOfRange,
    RegionUnsupported,
)


def _clip(v: Number) -> Number:
    if v < 0:
        return v * 0
    if v > 1:
        return v * 0 + 1
    return v


def _check_k(k: int, n: int, lo: int = 1) -> None:
    if not lo <= k <= n:
        raise IndexOutOfRange(f"k = {k} outside [{lo}, {n}]")


def _one(probs) -> Number:
    return Fraction(1) if probs and isinstance(probs[0], Fraction) else 1.0


class _Reduced:
    """Marginals after dropping 0/1 entries, with the adjusted threshold.

    ``settled`` is the bound value when the reduced problem is trivial.
    """

    def __init__(self, p: MarginalVector, k: int):
        self.exact = p.exact
        self.probs, self.k, self.reduction = reduce_degenerate(p, k)
        self.n = len(self.probs)
        one = Fraction(1) if self.exact else 1.0
        if self.k <= 0:
            self.settled = one
        elif self.k > self.n:
            self.settled = one * 0
        elif self.n == 1:
            self.settled = self.probs[0]
        else:
            self.settled = None
        if self.probs:
            self.s1, self.s2 = prefix_moments(self.probs)

    def report(self, method: str, value: Number, **detail) -> BoundReport:
        if self.reduction:
            detail["reduction"] = self.reduction.as_dict()
        return BoundReport(method, _clip(value), detail)

    def moments(self, r: int) -> tuple[Number, Number]:
        m = self.n - r
        return self.s1[m], self.s2[m]


# -- k = 1 and k = n ---------------------------------------------------------


def boole_union(p) -> BoundReport:
    """``min(sum p_i, 1)``: the union bound under arbitrary dependence."""
    p = validate_marginals(p)
    return BoundReport("boole_union", min(p.sum(), _one(p.probs)))


def _union_value(probs) -> Number:
    if not probs:
        return 0.0
    head = sum(probs[:-1], probs[0] * 0)
    return min(head + probs[-1] - probs[-1] * head, _one(probs))


def union_tight(p, certify: bool = False) -> BoundReport:
    """Tightest upper bound on the union of pairwise independent events.

    With sorted marginals this is
    ``min(sum_i p_i - p_max * sum_{i<n} p_i, 1)``.
    """
    p = validate_marginals(p)
    cert = None
    if certify:
        from .extremal import build_union_extremal

        cert = build_union_extremal(p)
    head = sum(p.probs[:-1], p.probs[0] * 0)
    return BoundReport(
        "union_tight",
        _union_value(p.probs),
        {"trivial": bool(head > 1)},
        cert,
    )


def intersection_tight_lower(p, certify: bool = False) -> BoundReport:
    """Tightest lower bound on ``P(all c_i = 1)`` under pairwise independence."""
    p = validate_marginals(p)
    rest = sum(p.probs[1:], p.probs[0] * 0)
    value = max(p.probs[0] * (rest - (p.n - 2)), p.probs[0] * 0)
    cert = None
    if certify:
        from .extremal import build_intersection_extremal

        cert = build_intersection_extremal(p)
    return BoundReport("intersection_tight_lower", value, {}, cert)


def frechet_intersection_lower(p) -> BoundReport:
    p = validate_marginals(p)
    return BoundReport("frechet_intersection_lower", max(p.sum() - (p.n - 1), p.probs[0] * 0))


# -- moment bounds ------------------------------------------------------------


def _cheb_term(s1: Number, s2: Number, kk: int) -> Number:
    """Chebyshev bound on ``P(X >= kk)`` from binomial moments of ``X``."""
    if kk < s1:
        return s1 * 0 + 1
    var = s1 - (s1 * s1 - 2 * s2)
    gap = kk - s1
    denom = var + gap * gap
    if denom == 0:
        return s1 * 0 + 1
    return var / denom


def chebyshev(p, k: int, r: int = 0) -> BoundReport:
    """One-sided Chebyshev bound applied to the ``n - r`` smallest marginals.

    ``r = 0`` is the classical bound with variance ``sum p_i (1 - p_i)``.
    """
    p = validate_marginals(p)
    _check_k(k, p.n)
    if not 0 <= r <= k - 1:
        raise IndexOutOfRange(f"r = {r} outside [0, {k - 1}]")
    red = _Reduced(p, k)
    if red.settled is not None:
        return red.report("chebyshev", red.settled, r=r)
    rr = min(max(r - red.reduction.dropped_one, 0), red.k - 1)
    s1, s2 = red.moments(rr)
    return red.report("chebyshev", _cheb_term(s1, s2, red.k - rr), r=r)


def ordered_chebyshev(p, k: int) -> BoundReport:
    p = validate_marginals(p)
    _check_k(k, p.n)
    red = _Reduced(p, k)
    if red.settled is not None:
        return red.report("ordered_chebyshev", red.settled, r=0)
    best, arg = None, 0
    for r in range(red.k):
        v = _cheb_term(*red.moments(r), red.k - r)
        if best is None or v < best:
            best, arg = v, r
    return red.report("ordered_chebyshev", best, r=arg)


def sss(p, k: int) -> BoundReport:
    """Schmidt-Siegel-Srinivasan bound ``min(1, S1/k, S2/C(k,2))``."""
    p = validate_marginals(p)
    _check_k(k, p.n)
    red = _Reduced(p, k)
    if red.settled is not None:
        return red.report("sss", red.settled)
    s1, s2 = red.moments(0)
    one = s1 * 0 + 1
    terms = [one, s1 / red.k]
    if red.k >= 2:
        terms.append(s2 / comb(red.k, 2))
    return red.report("sss", min(terms))


def ordered_sss(p, k: int) -> BoundReport:
    """SSS bound minimised over truncations of the largest marginals.

    ``detail`` holds the best first-moment shift ``r1`` and second-moment
    shift ``r2`` and which of the two attains the value (``term``).
    """
    p = validate_marginals(p)
    _check_k(k, p.n)
    red = _Reduced(p, k)
    if red.settled is not None:
        return red.report("ordered_sss", red.settled, r1=0, r2=None, term="trivial")
    kk = red.k
    b1, r1 = None, 0
    for r in range(kk):
        v = red.moments(r)[0] / (kk - r)
        if b1 is None or v < b1:
            b1, r1 = v, r
    b2, r2 = None, None
    for r in range(kk - 1):
        v = red.moments(r)[1] / comb(kk - r, 2)
        if b2 is None or v < b2:
            b2, r2 = v, r
    one = b1 * 0 + 1
    value, term = one, "trivial"
    if b1 < value:
        value, term = b1, "first"
    if b2 is not None and b2 < value:
        value, term = b2, "second"
    return red.report("ordered_sss", value, r1=r1, r2=r2, term=term)


def ruger(p, k: int) -> BoundReport:
    """Tight bound under arbitrary dependence: ``min(1, min_r S_1r/(k-r))``."""
    p = validate_marginals(p)
    _check_k(k, p.n)
    red = _Reduced(p, k)
    if red.settled is not None:
        return red.report("ruger", red.settled, r=0)
    best, arg = None, 0
    for r in range(red.k):
        v = red.moments(r)[0] / (red.k - r)
        if best is None or v < best:
            best, arg = v, r
    return red.report("ruger", min(best, best * 0 + 1), r=arg)


def _bp_value(n: int, k: int, s1: Number, s2: Number) -> tuple[Number, int, int | None]:
    """Boros-Prekopa bound; returns ``(value, branch, index)``."""
    one = s1 * 0 + 1
    if s1 == 0:
        return one * 0, 0, None
    if s1 >= n:
        return one, 1, None
    if k < ((n - 1) * s1 - 2 * s2) / (n - s1):
        return one, 1, None
    if k < 1 + 2 * s2 / s1:
        return ((k + n - 1) * s1 - 2 * s2) / (k * n), 2, None
    if k - s1 == 0:
        # the second branch always fires first for consistent moments
        raise MomentInconsistency(f"k = s1 = {s1} reached the third branch")
    i = snap_ceil(((k - 1) * s1 - 2 * s2) / (k - s1))
    value = ((i - 1) * (i - 2 * s1) + 2 * s2) / ((k - i) ** 2 + (k - i))
    return value, 3, i


def boros_prekopa_from_moments(n: int, k: int, s1, s2) -> BoundReport:
    """Tightest bound on ``P(X >= k)`` for an integer ``X`` on ``[0, n]``.

    ``s1 = E[X]`` and ``s2 = E[C(X, 2)]``. ``detail["branch"]`` is 1, 2 or 3
    following the order of the three formula cases.
    """
    s1, s2 = unify([s1, s2])
    if n < 1:
        raise IndexOutOfRange(f"n = {n} must be at least 1")
    _check_k(k, n)
    tol = 0 if isinstance(s1, Fraction) else EPS
    if not -tol <= s1 <= n + tol:
        raise MomentInconsistency(f"s1 = {s1} outside [0, {n}]")
    if 2 * s2 < -tol or 2 * s2 > (n - 1) * s1 + tol:
        raise MomentInconsistency(f"s2 = {s2} outside [0, (n-1) s1 / 2]")
    if 2 * s2 + s1 - s1 * s1 < -tol:
        raise MomentInconsistency("moments imply a negative variance")
    value, branch, i = _bp_value(n, k, s1, s2)
    return BoundReport("bp", _clip(value), {"branch": branch, "i": i})


def boros_prekopa(p, k: int) -> BoundReport:
    """Boros-Prekopa bound evaluated at the pairwise independent moments."""
    p = validate_marginals(p)
    _check_k(k, p.n)
    red = _Reduced(p, k)
    if red.settled is not None:
        return red.report("bp", red.settled, branch=None, i=None)
    value, branch, i = _bp_value(red.n, red.k, *red.moments(0))
    return red.report("bp", value, branch=branch, i=i)


def ordered_bp(p, k: int) -> BoundReport:
    p = validate_marginals(p)
    _check_k(k, p.n)
    red = _Reduced(p, k)
    if red.settled is not None:
        return red.report("ordered_bp", red.settled, r=0, i=None, branch=None)
    best = None
    for r in range(red.k):
        v, branch, i = _bp_value(red.n - r, red.k - r, *red.moments(r))
        if best is None or v < best[0]:
            best = (v, r, i, branch)
    return red.report("ordered_bp", best[0], r=best[1], i=best[2], branch=best[3])


TIGHTENABLE = ("sss", "bp", "chebyshev")


def tightened_ordered(p, k: int, base: str = "bp") -> BoundReport:
    """Ordered bound whose ``r = k - 1`` term is the tight union bound.

    The last term bounds ``P(sum of the n-k+1 smallest >= 1)``, for which
    the exact pairwise independent value is available in closed form.
    """
    if base not in TIGHTENABLE:
        raise ValueError(f"base must be one of {TIGHTENABLE}, got {base!r}")
    p = validate_marginals(p)
    _check_k(k, p.n)
    red = _Reduced(p, k)
    method = f"tightened_{base}"
    if red.settled is not None:
        return red.report(method, red.settled, r=0)
    kk = red.k
    union_term = _union_value(red.probs[: red.n - kk + 1])
    best, arg = union_term, kk - 1
    for r in range(kk - 1):
        s1, s2 = red.moments(r)
        if base == "sss":
            v = min(s1 / (kk - r), s2 / comb(kk - r, 2))
        elif base == "bp":
            v = _bp_value(red.n - r, kk - r, s1, s2)[0]
        else:
            v = _cheb_term(s1, s2, kk - r)
        if v < best or (v == best and r < arg):
            best, arg = v, r
    return red.report(method, min(best, best * 0 + 1), r=arg, union_term=union_term)


# -- identical marginals ------------------------------------------------------


def _identical_args(n: int, k: int, p) -> Number:
    if n < 1:
        raise IndexOutOfRange(f"n = {n} must be at least 1")
    _check_k(k, n)
    (p,) = unify([p if not isinstance(p, str) else validate_marginals([p]).probs[0]])
    if not 0 <= p <= 1:
        raise OutOfRange(f"p = {p} outside [0, 1]")
    return p


def _identical_value(n: int, k: int, p: Number) -> tuple[Number, str, int | None]:
    one = p * 0 + 1
    if k < (n - 1) * p:
        return one, "a", None
    if k < 1 + (n - 1) * p:
        return ((n - 1) * (1 - p) + k) * p / k, "b", None
    i = snap_ceil(n * p * (k - 1 - (n - 1) * p) / (k - n * p))
    value = ((i - 1) * (i - 2 * n * p) + n * (n - 1) * p * p) / ((k - i) ** 2 + (k - i))
    return value, "c", i


def identical_tight(n: int, k: int, p, certify: bool = False) -> BoundReport:
    """Exact maximum of ``P(sum >= k)`` for ``n`` identical pairwise
    independent Bernoulli(p) variables.

    ``detail["case"]`` is ``"a"``, ``"b"`` or ``"c"``; case ``"c"`` also
    records the index ``i``. Endpoints ``p in {0, 1}`` are settled directly.
    """
    p = _identical_args(n, k, p)
    if p == 0 or p == 1 or n == 1:
        value = p if n == 1 else p * 0 + (1 if p == 1 else 0)
        return BoundReport("identical_tight", value, {"case": "degenerate", "i": None})
    value, case, i = _identical_value(n, k, p)
    cert = None
    if certify:
        from .extremal import build_identical_extremal

        cert = build_identical_extremal(n, k, p)
    return BoundReport("identical_tight", _clip(value), {"case": case, "i": i}, cert)


def identical_tight_lower(n: int, k: int, p, lp_fallback: bool = False) -> BoundReport:
    """Exact minimum of ``P(sum >= k)`` for identical marginals.

    Closed form only for ``k >= 1 + (n-1) p``. Outside that region raises
    :class:`RegionUnsupported`, or with ``lp_fallback=True`` solves the
    aggregated minimisation LP instead.
    """
    p = _identical_args(n, k, p)
    if p == 0 or p == 1:
        return BoundReport("identical_tight_lower", p * 0 + (1 if p == 1 else 0), {"region": "degenerate"})
    if k < 1 + (n - 1) * p:
        if not lp_fallback:
            raise RegionUnsupported(f"no closed form for k = {k} < 1 + (n-1)p = {1 + (n - 1) * p}")
        from .lp import solve_aggregated_twise

        out = solve_aggregated_twise(n, k, p, 2, "min")
        return BoundReport("identical_tight_lower", _clip(out.value), {"region": "lp"}, out.primal)
    if k < 2 + (n - 1) * p:
        return BoundReport("identical_tight_lower", (2 + (n - 1) * p - k) * p / (n - k + 1), {"region": "closed"})
    return BoundReport("identical_tight_lower", p * 0, {"region": "closed"})


@dataclass(frozen=True)
class TightnessFlags:
    """Which unordered closed forms provably equal the exact bound.

    ``alpha`` is ``(n-1)p`` when it is an integer in ``[1, n-2]``;
    ``sss_range`` is the inclusive ``k`` range on which SSS is tight.
    """

    n: int
    k: int
    p: float
    chebyshev: bool
    sss: bool
    alpha: int | None
    sss_range: tuple[int, int] | None


def tight_instance_check(n: int, k: int, p, tol: float = EPS) -> TightnessFlags:
    p = _identical_args(n, k, p)
    alpha = None
    sss_range = None
    if n >= 3 and 0 < p < 1:
        a = (n - 1) * p
        if abs(a - round(a)) <= tol and 1 <= round(a) <= n - 2:
            alpha = int(round(a))
        if p <= 1 / (n - 1) + (0 if isinstance(p, Fraction) else tol):
            sss_range = (2, n)
        else:
            lo = snap_ceil(1 + (n - 1) * p, tol)
            hi = min(snap_floor(n * (n - 1) * p * p / (n * p - 1), tol), n)
            if lo <= hi:
                sss_range = (lo, hi)
    cheb = alpha is not None and k in (alpha + 1, n)
    sss_flag = sss_range is not None and sss_range[0] <= k <= sss_range[1]
    return TightnessFlags(n, k, float(p), cheb, sss_flag, alpha, sss_range)


# -- n - 1 identical marginals plus one --------------------------------------


def almost_identical_case(n: int, k: int, p, q, tol: float = EPS) -> str:
    """Classify ``(n, k, p, q)`` into case ``"a"``, ``"b"`` or ``"c"``.

    ``n - 1`` marginals equal ``p`` and one equals ``q``. Raises
    :class:`CaseUnsupported` when no case applies.
    """
    p, q = unify([p, q])
    if isinstance(p, Fraction):
        tol = 0
    if n < 2:
        raise CaseUnsupported("need n >= 2")
    if not (0 < p <= 1 / Fraction(n - 1) + tol if isinstance(p, Fraction) else 0 < p <= 1 / (n - 1) + tol):
        raise CaseUnsupported(f"p = {p} outside (0, 1/(n-1)]")
    if not 0 < q < 1:
        raise CaseUnsupported(f"q = {q} outside (0, 1)")
    if not 1 <= k <= n:
        raise CaseUnsupported(f"k = {k} outside [1, {n}]")
    if k >= 3 and q >= (n - 2) * p:
        return "a"
    if p <= q < (n - 2) * p and snap_ceil(2 + (n - 2) * p / q, tol or EPS) <= k <= n:
        return "b"
    if k == n and q < p:
        return "c"
    raise CaseUnsupported(f"(n={n}, k={k}, p={p}, q={q}) matches no tight case")


def almost_identical_tight(n: int, k: int, p, q, certify: bool = False) -> BoundReport:
    """Exact bound when ``n - 1`` marginals equal ``p`` and one equals ``q``.

    Valid on three parameter regions only; elsewhere raises
    :class:`CaseUnsupported` and the LP oracle is the route to an answer.
    """
    p, q = unify([p, q])
    case = almost_identical_case(n, k, p, q)
    if case in ("a", "b"):
        value = comb(n - 1, 2) * p * p / comb(k - 1, 2)
    else:
        value = p * q
    cert = None
    if certify:
        from .extremal import build_almost_identical_extremal

        cert = build_almost_identical_extremal(n, k, p, q)
    return BoundReport("almost_identical_tight", value, {"case": case}, cert)


UPPER_METHODS = {
    "chebyshev": lambda p, k: chebyshev(p, k, 0),
    "ordered_chebyshev": ordered_chebyshev,
    "sss": sss,
    "ordered_sss": ordered_sss,
    "bp": boros_prekopa,
    "ordered_bp": ordered_bp,
    "ruger": ruger,
    "tightened_sss": lambda p, k: tightened_ordered(p, k, "sss"),
    "tightened_bp": lambda p, k: tightened_ordered(p, k, "bp"),
    "tightened_chebyshev": lambda p, k: tightened_ordered(p, k, "chebyshev"),
}
"""Upper bounds defined for every ``(p, k)``, keyed by method name."""
