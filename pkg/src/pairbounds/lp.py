"""Brute-force linear programs over all ``2^n`` scenarios.

The solver is a dense-tableau two-phase primal simplex. It is meant for
desk-scale certification (``n`` up to 14 by default) where every closed
form can be checked against the optimum of the full moment LP.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb

import numpy as np

from .core import (
    BivariateSpec,
    JointDistribution,
    LevelDistribution,
    validate_marginals,
)
from .errors import DimensionCap, IndexOutOfRange, OutOfRange, SolverFailure

DEFAULT_CAP = 14
HARD_CAP = 20
TOL = 1e-9
INFEASIBLE_TOL = 1e-7
STALL_LIMIT = 500
MAX_ITER = 200_000


@dataclass
class SimplexResult:
    status: str
    x: np.ndarray | None
    value: float
    iterations: int
    duals: np.ndarray | None


def _pivot(T: np.ndarray, row: int, col: int) -> None:
    T[row] /= T[row, col]
    f = T[:, col].copy()
    f[row] = 0.0
    T -= np.outer(f, T[row])


def _run(T, basis, lex, allowed, tol, stall_limit, max_iter, start_iter):
    """Minimise over the tableau ``T`` whose last row is the cost row.

    ``lex`` selects the columns holding ``B^{-1}``; ratio-test ties are
    broken by the lexicographically smallest scaled row of ``B^{-1}``,
    which rules out cycling whatever the entering rule.
    """
    m = T.shape[0] - 1
    it = start_iter
    stalled = 0
    bland = False
    while True:
        d = T[m, :-1]
        cand = np.flatnonzero((d < -tol) & allowed)
        if cand.size == 0:
            return "optimal", it
        if bland:
            col = int(cand[0])
        else:
            col = int(cand[np.argmin(d[cand])])
        column = T[:m, col]
        pos = np.flatnonzero(column > tol)
        if pos.size == 0:
            return "unbounded", it
        ratios = T[pos, -1] / column[pos]
        best = ratios.min()
        ties = pos[ratios <= best + tol]
        if ties.size > 1:
            keys = T[ties][:, lex] / column[ties][:, None]
            ties = ties[np.lexsort(keys.T[::-1])]
        row = int(ties[0])
        # a pivot that barely moves the objective counts as degenerate
        if best * -d[col] <= tol:
            stalled += 1
            if stalled >= stall_limit:
                bland = True
        else:
            stalled = 0
        _pivot(T, row, col)
        rhs = T[:m, -1]
        rhs[np.abs(rhs) < tol] = 0.0
        basis[row] = col
        it += 1
        if it >= max_iter:
            raise SolverFailure(f"simplex exceeded {max_iter} iterations")


def simplex(
    A,
    b,
    c,
    *,
    tol: float = TOL,
    infeasible_tol: float = INFEASIBLE_TOL,
    stall_limit: int = STALL_LIMIT,
    max_iter: int = MAX_ITER,
) -> SimplexResult:
    """Minimise ``c @ x`` subject to ``A x = b``, ``x >= 0``.

    Dantzig's rule picks the entering column until ``stall_limit``
    consecutive degenerate pivots occur, after which Bland's rule takes
    over. Rows are scaled to unit max-norm first. ``duals`` are the
    multipliers ``y`` with ``c - A^T y >= 0`` at optimality; rows found
    redundant during phase one get a zero multiplier.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float).copy()
    c = np.asarray(c, dtype=float)
    m, n = A.shape
    scale = np.abs(A).max(axis=1)
    scale[scale == 0] = 1.0
    sign = np.where(b < 0, -1.0, 1.0)
    rs = sign / scale
    As = A * rs[:, None]
    bs = b * rs

    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = As
    T[:m, n : n + m] = np.eye(m)
    T[:m, -1] = bs
    T[m, :n] = -As.sum(axis=0)
    T[m, -1] = -bs.sum()
    basis = list(range(n, n + m))
    allowed = np.ones(n + m, dtype=bool)
    allowed[n:] = False

    _, it = _run(T, basis, slice(n, n + m), np.r_[np.ones(n, bool), np.zeros(m, bool)], tol, stall_limit, max_iter, 0)
    if -T[m, -1] > infeasible_tol:
        return SimplexResult("infeasible", None, math.nan, it, None)

    # drive remaining artificials out of the basis; drop redundant rows
    keep = []
    for r in range(m):
        if basis[r] >= n:
            row = T[r, :n]
            j = int(np.argmax(np.abs(row)))
            if abs(row[j]) > tol:
                _pivot(T, r, j)
                basis[r] = j
                it += 1
                keep.append(r)
        else:
            keep.append(r)
    dropped = sorted(set(range(m)) - set(keep))
    if dropped:
        T = np.vstack([T[keep], T[m : m + 1]])
        basis = [basis[r] for r in keep]
    mm = len(keep)

    cb = c[basis]
    T[mm, :n] = c - cb @ T[:mm, :n]
    T[mm, n:-1] = -(cb @ T[:mm, n:-1])
    T[mm, -1] = -(cb @ T[:mm, -1])
    status, it = _run(T, basis, slice(n, n + m), allowed, tol, stall_limit, max_iter, it)
    if status != "optimal":
        return SimplexResult(status, None, -math.inf, it, None)

    # polish the basic solution against the unscaled system
    x = np.zeros(n)
    B = As[keep][:, basis]
    try:
        xb = np.linalg.solve(B, bs[keep])
    except np.linalg.LinAlgError:
        xb = T[:mm, -1]
    xb[np.abs(xb) < 1e-14] = 0.0
    if xb.min() < -1e-7:
        xb = T[:mm, -1]
    x[basis] = np.maximum(xb, 0.0)

    # B^{-1} occupies the artificial columns; undo the row scaling
    binv = T[:mm, n:][:, :m]
    y_scaled = c[basis] @ binv
    y = y_scaled * rs
    return SimplexResult("optimal", x, float(c @ x), it, y)


# -- domain wrappers ----------------------------------------------------------


@dataclass(eq=False)
class DualSolution:
    """Multipliers of the total-mass, marginal and bivariate constraints."""

    lambda0: float
    lambda_i: np.ndarray
    lambda_ij: np.ndarray

    def __post_init__(self):
        self.lambda_i = np.asarray(self.lambda_i, dtype=float)
        L = np.asarray(self.lambda_ij, dtype=float)
        self.lambda_ij = np.triu(L, 1) + np.triu(L, 1).T
        if not (np.isfinite(self.lambda0) and np.all(np.isfinite(self.lambda_i)) and np.all(np.isfinite(self.lambda_ij))):
            raise OutOfRange("dual multipliers must be finite")

    @property
    def n(self) -> int:
        return len(self.lambda_i)

    def objective(self, p, biv: BivariateSpec | None = None) -> float:
        """``sum lambda_ij p_ij + sum lambda_i p_i + lambda0``."""
        p = validate_marginals(p)
        if biv is None:
            biv = BivariateSpec.pairwise_independent(p)
        q = np.array([float(v) for v in p.original()])
        total = self.lambda0 + float(self.lambda_i @ q)
        for (i, j), v in biv.pairs.items():
            total += self.lambda_ij[i, j] * float(v)
        return total

    def scenario_values(self) -> np.ndarray:
        """Left-hand side of every dual constraint, indexed by bitmask."""
        bits = _bit_matrix(self.n)
        return self.lambda0 + bits @ self.lambda_i + 0.5 * np.einsum("si,ij,sj->s", bits, self.lambda_ij, bits)


def star_tree_dual(p) -> DualSolution:
    """``lambda_i = 1`` and ``lambda_{i,top} = -1`` with ``top`` the largest marginal."""
    p = validate_marginals(p)
    n = p.n
    top = p.perm[-1]
    L = np.zeros((n, n))
    for i in range(n):
        if i != top:
            L[i, top] = L[top, i] = -1.0
    return DualSolution(0.0, np.ones(n), L)


@dataclass
class DualCheck:
    feasible: bool
    max_violation: float
    witness: int | None
    dual: DualSolution

    def objective_for(self, p, biv: BivariateSpec | None = None) -> float:
        return self.dual.objective(p, biv)

    def __iter__(self):
        yield self.feasible
        yield self.objective_for


def _check_cap(n: int, cap: int) -> None:
    if cap > HARD_CAP:
        raise DimensionCap(f"cap {cap} exceeds the absolute limit {HARD_CAP}")
    if n > cap:
        raise DimensionCap(f"n = {n} exceeds the cap {cap}")


def _bit_matrix(n: int) -> np.ndarray:
    masks = np.arange(1 << n)
    return ((masks[:, None] >> np.arange(n)) & 1).astype(float)


def check_dual_feasible(dual: DualSolution, k: int, sense: str = "max", cap: int = DEFAULT_CAP, tol: float = TOL) -> DualCheck:
    """Check the dual constraints of the ``sense`` LP at every scenario.

    For ``max`` the left-hand side must be at least 1 on ``{sum c >= k}``
    and at least 0 elsewhere; for ``min`` at most 1 and at most 0. Any
    feasible ``max`` dual bounds the primal maximum from above.
    """
    _check_cap(dual.n, cap)
    if not 1 <= k <= dual.n:
        raise IndexOutOfRange(f"k = {k} outside [1, {dual.n}]")
    vals = dual.scenario_values()
    counts = _bit_matrix(dual.n).sum(axis=1)
    rhs = (counts >= k).astype(float)
    slack = vals - rhs if sense == "max" else rhs - vals
    worst = int(np.argmin(slack))
    viol = max(0.0, -float(slack[worst]))
    feasible = viol <= tol
    return DualCheck(feasible, viol, None if feasible else worst, dual)


@dataclass
class LpOutcome:
    """Result of one LP solve. ``value`` is NaN when infeasible."""

    status: str
    value: float
    primal: JointDistribution | LevelDistribution | None = None
    iterations: int = 0
    dual: DualSolution | None = None
    detail: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.status == "optimal" and self.detail.get("probability", True):
            if not -1e-7 <= self.value <= 1 + 1e-7:
                raise SolverFailure(f"optimal value {self.value} outside [0, 1]")

    def to_dict(self) -> dict:
        from .extremal import distribution_to_csv, distribution_to_dict

        out = {"status": self.status, "value": None if math.isnan(self.value) else self.value, "iterations": self.iterations}
        if isinstance(self.primal, JointDistribution):
            out["distribution_csv"] = distribution_to_csv(self.primal)
        elif isinstance(self.primal, LevelDistribution):
            out["distribution"] = distribution_to_dict(self.primal)
        return out


def _moment_system(p, biv: BivariateSpec):
    n = p.n
    bits = _bit_matrix(n)
    rows = [np.ones(1 << n)]
    target = [1.0]
    q = p.original()
    for i in range(n):
        rows.append(bits[:, i])
        target.append(float(q[i]))
    for i, j in combinations(range(n), 2):
        rows.append(bits[:, i] * bits[:, j])
        target.append(float(biv.value(i, j)))
    return np.array(rows), np.array(target), bits


def _primal(n: int, x: np.ndarray) -> JointDistribution:
    idx = np.flatnonzero(x > 0)
    return JointDistribution(n, {int(i): float(x[i]) for i in idx})


def solve_exact(p, biv: BivariateSpec | None = None, k: int = 1, sense: str = "max", cap: int = DEFAULT_CAP) -> LpOutcome:
    """Optimise ``P(sum c >= k)`` over all laws matching ``p`` and ``biv``.

    ``biv`` defaults to pairwise independence. The returned ``dual`` is
    the optimal multiplier set; for ``max`` it is feasible for the dual
    program and its objective equals ``value``.
    """
    p = validate_marginals(p)
    n = p.n
    _check_cap(n, cap)
    if not 1 <= k <= n:
        raise IndexOutOfRange(f"k = {k} outside [1, {n}]")
    if sense not in ("max", "min"):
        raise ValueError(f"sense must be 'max' or 'min', got {sense!r}")
    if biv is None:
        biv = BivariateSpec.pairwise_independent(p)
    A, b, bits = _moment_system(p, biv)
    obj = (bits.sum(axis=1) >= k).astype(float)
    c = -obj if sense == "max" else obj
    res = simplex(A, b, c)
    if res.status != "optimal":
        return LpOutcome(res.status, math.nan, None, res.iterations)
    value = float(obj @ res.x)
    y = -res.duals if sense == "max" else res.duals
    lam_i = y[1 : n + 1]
    L = np.zeros((n, n))
    for r, (i, j) in enumerate(combinations(range(n), 2)):
        L[i, j] = L[j, i] = y[n + 1 + r]
    dual = DualSolution(float(y[0]), lam_i, L)
    return LpOutcome("optimal", min(max(value, 0.0), 1.0), _primal(n, res.x), res.iterations, dual)


def check_bivariate_feasibility(p, biv: BivariateSpec, cap: int = DEFAULT_CAP) -> LpOutcome:
    """Phase-one test for a joint law with marginals ``p`` and bivariates ``biv``."""
    p = validate_marginals(p)
    _check_cap(p.n, cap)
    A, b, _ = _moment_system(p, biv)
    res = simplex(A, b, np.zeros(A.shape[1]))
    if res.status != "optimal":
        return LpOutcome("infeasible", math.nan, None, res.iterations)
    return LpOutcome("optimal", 0.0, _primal(p.n, res.x), res.iterations)


def solve_aggregated_twise(n: int, k: int, p, t: int = 2, sense: str = "max") -> LpOutcome:
    """Optimise ``sum_{l >= k} v_l`` over level distributions of ``n``
    identical ``t``-wise independent Bernoulli(p) variables.

    Constraints: ``sum_l C(l, m) v_l = C(n, m) p^m`` for ``m = 0..t``.
    """
    if n < 1:
        raise IndexOutOfRange("n must be at least 1")
    if not 1 <= k <= n:
        raise IndexOutOfRange(f"k = {k} outside [1, {n}]")
    if not 1 <= t <= n:
        raise IndexOutOfRange(f"t = {t} outside [1, {n}]")
    if sense not in ("max", "min"):
        raise ValueError(f"sense must be 'max' or 'min', got {sense!r}")
    pf = float(Fraction(p)) if isinstance(p, (str, Fraction)) else float(p)
    if not 0 <= pf <= 1:
        raise OutOfRange(f"p = {p} outside [0, 1]")
    A = np.array([[comb(l, m) for l in range(n + 1)] for m in range(t + 1)], dtype=float)
    b = np.array([comb(n, m) * pf**m for m in range(t + 1)])
    obj = np.array([1.0 if l >= k else 0.0 for l in range(n + 1)])
    res = simplex(A, b, -obj if sense == "max" else obj)
    if res.status != "optimal":
        raise SolverFailure(f"aggregated LP ended with status {res.status}")
    value = float(obj @ res.x)
    levels = LevelDistribution(n, tuple(float(v) for v in res.x))
    return LpOutcome("optimal", min(max(value, 0.0), 1.0), levels, res.iterations)
