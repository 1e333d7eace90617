"""Union-bound ratios, correlation gaps and the bottleneck approximation.

Also hosts the seeded random scans behind the ``scan`` command. Scans draw
every sample from a single generator up front, so splitting the work
across threads never changes the result.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import permutations
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import closed
from .core import MarginalVector, Number, validate_marginals
from .errors import DegenerateDenominator, EmptySet, IndexOutOfRange, OutOfRange

FOUR_THIRDS = 4 / 3


def ratio_boole_over_tight(p) -> Number:
    """Boole's union bound divided by the pairwise independent tight bound.

    Never exceeds 4/3.
    """
    p = validate_marginals(p)
    tight = closed.union_tight(p).value
    if tight == 0:
        raise DegenerateDenominator("union bound is zero (all marginals are 0)")
    return closed.boole_union(p).value / tight


def independent_union(p) -> Number:
    """``1 - prod(1 - p_i)``: the union probability under mutual independence."""
    p = validate_marginals(p)
    miss = p.probs[0] * 0 + 1
    for q in p.probs:
        miss *= 1 - q
    return 1 - miss


def correlation_gap(p, mode: str = "pairwise") -> Number:
    """Worst-case over independent expected value of ``max_i c_i``.

    ``mode="arbitrary"`` allows any dependence (numerator ``min(sum p, 1)``);
    ``mode="pairwise"`` restricts to pairwise independent laws (numerator
    the tight union bound).
    """
    p = validate_marginals(p)
    denom = independent_union(p)
    if denom == 0:
        raise DegenerateDenominator("independent union probability is zero")
    if mode == "arbitrary":
        num = closed.boole_union(p).value
    elif mode == "pairwise":
        num = closed.union_tight(p).value
    else:
        raise ValueError(f"mode must be 'arbitrary' or 'pairwise', got {mode!r}")
    return num / denom


# -- bottleneck optimisation --------------------------------------------------


@dataclass(frozen=True)
class FeasibleSet:
    """Explicit list of binary solution vectors of length ``n``."""

    n: int
    solutions: tuple

    def __post_init__(self):
        if not self.solutions:
            raise EmptySet("feasible set has no solutions")
        for s in self.solutions:
            if len(s) != self.n or any(v not in (0, 1) for v in s):
                raise OutOfRange(f"solution {s} is not a 0/1 vector of length {self.n}")

    @classmethod
    def of(cls, solutions: Iterable[Sequence[int]]) -> "FeasibleSet":
        sols = tuple(tuple(int(v) for v in s) for s in solutions)
        if not sols:
            raise EmptySet("feasible set has no solutions")
        return cls(len(sols[0]), sols)

    @classmethod
    def from_dict(cls, data: dict) -> "FeasibleSet":
        sols = tuple(tuple(int(v) for v in s) for s in data.get("solutions", ()))
        return cls(int(data["n"]), sols)

    @classmethod
    def from_json(cls, path) -> "FeasibleSet":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        return {"n": self.n, "solutions": [list(s) for s in self.solutions]}

    @classmethod
    def assignments(cls, m: int) -> "FeasibleSet":
        """Perfect matchings of the complete bipartite graph ``K_{m,m}``.

        Edge ``(i, j)`` is coordinate ``i * m + j``.
        """
        if m < 1:
            raise IndexOutOfRange("m must be at least 1")
        sols = []
        for perm in permutations(range(m)):
            x = [0] * (m * m)
            for i, j in enumerate(perm):
                x[i * m + j] = 1
            sols.append(tuple(x))
        return cls(m * m, tuple(sols))

    @classmethod
    def st_paths(cls, edges: Sequence[tuple[int, int]], s: int, t: int, directed: bool = True) -> "FeasibleSet":
        """Simple ``s``-``t`` paths; coordinate ``e`` is the ``e``-th edge."""
        adj: dict[int, list[tuple[int, int]]] = {}
        for idx, (u, v) in enumerate(edges):
            adj.setdefault(u, []).append((v, idx))
            if not directed:
                adj.setdefault(v, []).append((u, idx))
        sols = []

        def walk(node, seen, used):
            if node == t:
                x = [0] * len(edges)
                for e in used:
                    x[e] = 1
                sols.append(tuple(x))
                return
            for nxt, e in adj.get(node, ()):
                if nxt not in seen:
                    walk(nxt, seen | {nxt}, used + [e])

        walk(s, {s}, [])
        if not sols:
            raise EmptySet(f"no path from {s} to {t}")
        return cls(len(edges), tuple(sols))


@dataclass(frozen=True)
class BottleneckResult:
    """Surrogate choice ``chosen`` with its worst-case value against the optimum."""

    chosen: tuple
    f_hat: float
    opt: float
    ratio: float


def _masked_union(p: tuple, x: Sequence[int]) -> Number:
    return closed.union_tight([q * v for q, v in zip(p, x)]).value


def bottleneck_approx(X: FeasibleSet, p) -> BottleneckResult:
    """Pick the solution minimising ``sum p_i x_i`` and compare it with the
    best worst-case bottleneck value over ``X``.

    For binary costs the worst-case pairwise independent expectation of
    ``max_i c_i x_i`` is the tight union bound on the masked marginals
    ``p_i x_i``, so both sides are evaluated in closed form.
    """
    if not X.solutions:
        raise EmptySet("feasible set has no solutions")
    q = validate_marginals(p).original()
    if len(q) != X.n:
        raise IndexOutOfRange(f"p has length {len(q)}, solutions have length {X.n}")
    chosen = min(X.solutions, key=lambda x: (sum(a * b for a, b in zip(q, x)), x))
    f_hat = float(_masked_union(q, chosen))
    opt = float(min(_masked_union(q, x) for x in X.solutions))
    ratio = f_hat / opt if opt > 0 else 1.0
    return BottleneckResult(chosen, f_hat, opt, ratio)


# -- scans --------------------------------------------------------------------


def _union_tight_rows(P: np.ndarray) -> np.ndarray:
    S = np.sort(P, axis=1)
    total = S.sum(axis=1)
    top = S[:, -1]
    return np.minimum(total - top * (total - top), 1.0)


def _chunks(m: int, workers: int) -> list[slice]:
    workers = max(1, min(workers, m))
    edges = np.linspace(0, m, workers + 1).astype(int)
    return [slice(a, b) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def _parallel(fn, m: int, workers: int) -> list:
    parts = _chunks(m, workers)
    if len(parts) == 1:
        return [fn(parts[0])]
    with ThreadPoolExecutor(max_workers=len(parts)) as pool:
        return list(pool.map(fn, parts))


@dataclass
class RatioScan:
    """Per-instance Boole and tight union values with the largest ratio."""

    n: int
    samples: int
    seed: int
    marginals: np.ndarray
    boole: np.ndarray
    tight: np.ndarray
    ratio: np.ndarray
    max_ratio: float = field(init=False)
    argmax: int = field(init=False)

    def __post_init__(self):
        self.argmax = int(np.argmax(self.ratio))
        self.max_ratio = float(self.ratio[self.argmax])

    @property
    def argmax_p(self) -> list:
        return [float(v) for v in self.marginals[self.argmax]]

    def summary(self) -> dict:
        return {
            "n": self.n,
            "samples": self.samples,
            "seed": self.seed,
            "instances": int(len(self.ratio)),
            "max_ratio": self.max_ratio,
            "argmax_p": self.argmax_p,
            "mean_ratio": float(self.ratio.mean()),
        }


def ratio_scan(
    n: int,
    samples: int,
    seed: int,
    workers: int = 1,
    extra_points: Iterable[Sequence[float]] = (),
) -> RatioScan:
    """Largest ``boole_union / union_tight`` over uniform random marginals.

    ``extra_points`` are appended after the random samples (for instance the
    known maximiser ``(0.5, 0.5)``). Instances whose tight bound is zero are
    skipped. The result depends only on ``(n, samples, seed, extra_points)``.
    """
    if samples < 1:
        raise IndexOutOfRange("samples must be at least 1")
    if n < 1:
        raise IndexOutOfRange("n must be at least 1")
    rng = np.random.default_rng(seed)
    P = rng.random((samples, n))
    extra = [list(map(float, e)) for e in extra_points]
    for e in extra:
        if len(e) != n:
            raise IndexOutOfRange(f"extra point {e} does not have length {n}")
    if extra:
        P = np.vstack([P, np.array(extra)])

    def work(sl: slice):
        chunk = P[sl]
        return np.minimum(chunk.sum(axis=1), 1.0), _union_tight_rows(chunk)

    parts = _parallel(work, len(P), workers)
    boole = np.concatenate([a for a, _ in parts])
    tight = np.concatenate([b for _, b in parts])
    keep = tight > 0
    ratio = np.where(keep, boole / np.where(keep, tight, 1.0), 1.0)
    return RatioScan(n, samples, seed, P, boole, tight, ratio)


IMPROVEMENT_PAIRS = (
    ("sss", "ordered_sss"),
    ("bp", "ordered_bp"),
    ("chebyshev", "ordered_chebyshev"),
)


@dataclass
class ImprovementScan:
    """Unordered and ordered bound values per random instance.

    ``improvement[name]`` is ``(unordered - ordered) / unordered * 100``
    (0 where the unordered bound is 0).
    """

    n: int
    k: int
    samples: int
    seed: int
    low: float
    high: float
    values: dict
    improvement: dict

    def columns(self) -> list[str]:
        names = []
        for a, b in IMPROVEMENT_PAIRS:
            names += [a, b]
        return names + [f"improvement_{a}" for a, _ in IMPROVEMENT_PAIRS]

    def rows(self) -> list[list[float]]:
        out = []
        for i in range(self.samples):
            row = []
            for a, b in IMPROVEMENT_PAIRS:
                row += [self.values[a][i], self.values[b][i]]
            row += [self.improvement[a][i] for a, _ in IMPROVEMENT_PAIRS]
            out.append(row)
        return out

    def summary(self) -> dict:
        ordered = np.array([self.values[b] for _, b in IMPROVEMENT_PAIRS])
        bp_best = np.all(ordered[1] <= ordered.min(axis=0) + 1e-12)
        return {
            "n": self.n,
            "k": self.k,
            "samples": self.samples,
            "seed": self.seed,
            "low": self.low,
            "high": self.high,
            "mean_improvement": {a: float(np.mean(self.improvement[a])) for a, _ in IMPROVEMENT_PAIRS},
            "min_improvement": {a: float(np.min(self.improvement[a])) for a, _ in IMPROVEMENT_PAIRS},
            "ordered_bp_always_best": bool(bp_best),
        }


def improvement_scan(
    n: int,
    k: int,
    samples: int,
    seed: int,
    low: float = 0.0,
    high: float = 1.0,
    workers: int = 1,
) -> ImprovementScan:
    """Compare ordered with unordered bounds on uniform ``[low, high]`` marginals."""
    if samples < 1:
        raise IndexOutOfRange("samples must be at least 1")
    if not 1 <= k <= n:
        raise IndexOutOfRange(f"k = {k} outside [1, {n}]")
    if not 0 <= low <= high <= 1:
        raise OutOfRange(f"need 0 <= low <= high <= 1, got [{low}, {high}]")
    rng = np.random.default_rng(seed)
    P = low + (high - low) * rng.random((samples, n))
    names = [m for pair in IMPROVEMENT_PAIRS for m in pair]

    def work(sl: slice):
        res = {m: [] for m in names}
        for row in P[sl]:
            mv = validate_marginals(row.tolist())
            for m in names:
                res[m].append(float(closed.UPPER_METHODS[m](mv, k).value))
        return res

    parts = _parallel(work, samples, workers)
    values = {m: np.array([v for part in parts for v in part[m]]) for m in names}
    improvement = {}
    for a, b in IMPROVEMENT_PAIRS:
        u, o = values[a], values[b]
        improvement[a] = np.where(u > 0, (u - o) / np.where(u > 0, u, 1.0) * 100, 0.0)
    return ImprovementScan(n, k, samples, seed, low, high, values, improvement)
