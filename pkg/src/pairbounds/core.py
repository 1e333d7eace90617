"""Domain types shared by every bound, construction and solver.

Probabilities are carried either as Python floats or as ``fractions.Fraction``.
A vector whose entries are all fractions is in *exact* mode: closed-form
bounds, constructions and moment checks then run in rational arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from numbers import Rational, Real
from typing import Iterable, Iterator, Mapping, Sequence, Union

from .errors import (
    DimensionMismatch,
    EmptyInput,
    IndexOutOfRange,
    OutOfRange,
)

Number = Union[float, Fraction]

EPS = 1e-9
"""Default comparison tolerance in floating-point mode."""

EXPAND_LIMIT = 25
"""Largest dimension for which a level distribution is expanded to atoms."""


def parse_probability(value) -> Number:
    """Convert one raw entry to a float or an exact fraction.

    Strings containing ``/`` (``"1/3"``) and ``Fraction``/``int`` inputs stay
    exact; anything else becomes a float.
    """
    if isinstance(value, bool):
        raise OutOfRange(f"boolean is not a probability: {value!r}")
    if isinstance(value, str):
        text = value.strip()
        if "/" in text:
            try:
                return Fraction(text)
            except (ValueError, ZeroDivisionError) as exc:
                raise OutOfRange(f"cannot parse probability {value!r}") from exc
        try:
            return float(text)
        except ValueError as exc:
            raise OutOfRange(f"cannot parse probability {value!r}") from exc
    if isinstance(value, Fraction):
        return value
    if isinstance(value, Rational):
        return Fraction(value)
    if isinstance(value, Real):
        return float(value)
    raise OutOfRange(f"not a real number: {value!r}")


def is_exact(values: Iterable) -> bool:
    return all(isinstance(v, Fraction) for v in values)


def unify(values: Sequence[Number]) -> tuple:
    """Return ``values`` in one arithmetic: all fractions or all floats.

    Mixed input is promoted to fractions when at least one entry is a
    fraction; floats convert through their shortest decimal repr.
    """
    if any(isinstance(v, Fraction) for v in values):
        return tuple(v if isinstance(v, Fraction) else Fraction(repr(float(v))) for v in values)
    return tuple(float(v) for v in values)


def snap_ceil(x: Number, tol: float = EPS) -> int:
    """Ceiling that first snaps ``x`` onto an integer within ``tol``."""
    if isinstance(x, Fraction):
        return math.ceil(x)
    nearest = round(x)
    if abs(x - nearest) <= tol:
        return int(nearest)
    return math.ceil(x)


def snap_floor(x: Number, tol: float = EPS) -> int:
    if isinstance(x, Fraction):
        return math.floor(x)
    nearest = round(x)
    if abs(x - nearest) <= tol:
        return int(nearest)
    return math.floor(x)


def one_like(x: Number) -> Number:
    return Fraction(1) if isinstance(x, Fraction) else 1.0


def zero_like(x: Number) -> Number:
    return Fraction(0) if isinstance(x, Fraction) else 0.0


@dataclass(frozen=True)
class MarginalVector:
    """Marginal probabilities sorted increasingly.

    ``perm[i]`` is the position in the caller's original vector of the
    ``i``-th smallest probability. Ties keep their original order.
    """

    probs: tuple
    perm: tuple

    @property
    def n(self) -> int:
        return len(self.probs)

    @property
    def exact(self) -> bool:
        return is_exact(self.probs)

    def original(self) -> tuple:
        """The probabilities in the caller's original order."""
        out = [None] * self.n
        for sorted_pos, orig in enumerate(self.perm):
            out[orig] = self.probs[sorted_pos]
        return tuple(out)

    def __len__(self) -> int:
        return self.n

    def __iter__(self) -> Iterator:
        return iter(self.probs)

    def sum(self) -> Number:
        return sum(self.probs, zero_like(self.probs[0]))


def validate_marginals(raw) -> MarginalVector:
    """Validate and sort raw marginal probabilities.

    Accepts an existing ``MarginalVector`` unchanged. Raises ``EmptyInput``
    for an empty vector and ``OutOfRange`` for entries outside [0, 1] or
    non-finite ones.
    """
    if isinstance(raw, MarginalVector):
        return raw
    if isinstance(raw, str):
        raw = [t for t in raw.split(",") if t.strip()]
    values = [parse_probability(v) for v in raw]
    if not values:
        raise EmptyInput("marginal vector is empty")
    for i, v in enumerate(values):
        if isinstance(v, float) and not math.isfinite(v):
            raise OutOfRange(f"p[{i}] = {v!r} is not finite")
        if v < 0 or v > 1:
            raise OutOfRange(f"p[{i}] = {v} lies outside [0, 1]")
    values = unify(values)
    order = sorted(range(len(values)), key=lambda i: (values[i], i))
    return MarginalVector(tuple(values[i] for i in order), tuple(order))


def identical(n: int, p) -> MarginalVector:
    if n < 1:
        raise EmptyInput("n must be at least 1")
    return validate_marginals([p] * n)


@dataclass(frozen=True)
class PartialMoments:
    """First two binomial moments of the ``n - r`` smallest probabilities."""

    r: int
    s1: Number
    s2: Number


def prefix_moments(probs: Sequence[Number]) -> tuple[list, list]:
    """Binomial moments of every prefix of ``probs``.

    Returns lists ``s1`` and ``s2`` of length ``len(probs) + 1`` where
    index ``m`` holds the moments of the first ``m`` entries.
    """
    zero = zero_like(probs[0]) if probs else 0.0
    s1 = [zero]
    s2 = [zero]
    for q in probs:
        s2.append(s2[-1] + q * s1[-1])
        s1.append(s1[-1] + q)
    return s1, s2


def partial_moments(p: MarginalVector, r: int) -> PartialMoments:
    p = validate_marginals(p)
    if not 0 <= r <= p.n - 1:
        raise IndexOutOfRange(f"r = {r} outside [0, {p.n - 1}]")
    s1, s2 = prefix_moments(p.probs)
    m = p.n - r
    return PartialMoments(r, s1[m], s2[m])


@dataclass(frozen=True)
class Reduction:
    """Record of degenerate marginals removed before a bound is evaluated."""

    dropped_zero: int = 0
    dropped_one: int = 0

    def __bool__(self) -> bool:
        return bool(self.dropped_zero or self.dropped_one)

    def as_dict(self) -> dict:
        return {"dropped_zero": self.dropped_zero, "dropped_one": self.dropped_one}


def reduce_degenerate(p: MarginalVector, k: int) -> tuple[tuple, int, Reduction]:
    """Drop marginals equal to 0 or 1.

    A certain variable (p = 1) also lowers the threshold ``k`` by one.
    Returns the sorted remaining probabilities, the new threshold and the
    reduction record.
    """
    zeros = sum(1 for q in p.probs if q == 0)
    ones = sum(1 for q in p.probs if q == 1)
    kept = tuple(q for q in p.probs if 0 < q < 1)
    return kept, k - ones, Reduction(zeros, ones)


@dataclass(frozen=True)
class BivariateSpec:
    """Pairwise probabilities ``P(c_i = 1, c_j = 1)`` in original indices.

    ``pairs`` maps ``(i, j)`` with ``i < j`` to the joint probability.
    ``kind`` is one of ``pairwise_independent``, ``scaled`` or ``general``.
    """

    n: int
    pairs: Mapping[tuple, Number]
    kind: str = "general"
    scale: Number | None = None

    def value(self, i: int, j: int) -> Number:
        if i == j:
            raise IndexOutOfRange("bivariate entries need i != j")
        return self.pairs[(i, j) if i < j else (j, i)]

    @classmethod
    def pairwise_independent(cls, p) -> "BivariateSpec":
        p = validate_marginals(p)
        q = p.original()
        pairs = {(i, j): q[i] * q[j] for i in range(p.n) for j in range(i + 1, p.n)}
        return cls(p.n, pairs, "pairwise_independent")

    @classmethod
    def scaled(cls, p, scale) -> "BivariateSpec":
        """Targets ``p_i p_j / scale``."""
        p = validate_marginals(p)
        q = p.original()
        scale = unify([q[0], scale])[1]
        pairs = {(i, j): q[i] * q[j] / scale for i in range(p.n) for j in range(i + 1, p.n)}
        return cls(p.n, pairs, "scaled", scale)

    @classmethod
    def complement_scaled(cls, p, scale) -> "BivariateSpec":
        """Targets ``p_i p_j + scale/(1 - scale) (1 - p_i)(1 - p_j)``."""
        p = validate_marginals(p)
        q = p.original()
        scale = unify([q[0], scale])[1]
        w = scale / (1 - scale)
        pairs = {
            (i, j): q[i] * q[j] + w * (1 - q[i]) * (1 - q[j])
            for i in range(p.n)
            for j in range(i + 1, p.n)
        }
        return cls(p.n, pairs, "general", scale)

    @classmethod
    def general(cls, n: int, triples: Iterable) -> "BivariateSpec":
        """Build from ``(i, j, value)`` triples with 0-based indices.

        Pairs not listed default to 0.
        """
        pairs = {(i, j): 0.0 for i in range(n) for j in range(i + 1, n)}
        given = []
        for i, j, v in triples:
            i, j = int(i), int(j)
            if i == j or not (0 <= i < n and 0 <= j < n):
                raise IndexOutOfRange(f"bivariate index ({i}, {j}) invalid for n = {n}")
            v = parse_probability(v)
            if v < 0 or v > 1:
                raise OutOfRange(f"p[{i},{j}] = {v} lies outside [0, 1]")
            given.append(v)
            pairs[(min(i, j), max(i, j))] = v
        if given and is_exact(given):
            pairs = {key: Fraction(val) if not isinstance(val, Fraction) else val for key, val in pairs.items()}
        return cls(n, pairs, "general")

    def frechet_violations(self, p, tol: float = EPS) -> list:
        """Pairs violating ``max(p_i + p_j - 1, 0) <= p_ij <= min(p_i, p_j)``."""
        q = validate_marginals(p).original()
        if len(q) != self.n:
            raise DimensionMismatch(f"marginals have n = {len(q)}, bivariates n = {self.n}")
        bad = []
        for (i, j), v in self.pairs.items():
            lo = max(q[i] + q[j] - 1, 0)
            hi = min(q[i], q[j])
            if v < lo - tol or v > hi + tol:
                bad.append((i, j))
        return bad


def _bits(mask: int, n: int) -> str:
    return "".join("1" if mask >> i & 1 else "0" for i in range(n))


@dataclass(frozen=True)
class JointDistribution:
    """Sparse distribution over ``{0,1}^n``.

    Keys of ``atoms`` are bitmasks: bit ``i`` is the value of variable ``i``.
    """

    n: int
    atoms: Mapping[int, Number]

    @property
    def exact(self) -> bool:
        return is_exact(self.atoms.values())

    def total_mass(self) -> Number:
        return sum(self.atoms.values(), self._zero())

    def _zero(self) -> Number:
        return Fraction(0) if self.exact else 0.0

    def marginal(self, i: int) -> Number:
        return sum((m for a, m in self.atoms.items() if a >> i & 1), self._zero())

    def bivariate(self, i: int, j: int) -> Number:
        both = (1 << i) | (1 << j)
        return sum((m for a, m in self.atoms.items() if a & both == both), self._zero())

    def mass_at_least(self, k: int) -> Number:
        return sum((m for a, m in self.atoms.items() if a.bit_count() >= k), self._zero())

    def mass_at(self, mask: int) -> Number:
        return self.atoms.get(mask, self._zero())

    def levels(self) -> "LevelDistribution":
        """Distribution of the number of ones."""
        out = [self._zero()] * (self.n + 1)
        for a, m in self.atoms.items():
            out[a.bit_count()] += m
        return LevelDistribution(self.n, tuple(out))

    def flipped(self) -> "JointDistribution":
        """Distribution of ``1 - c``."""
        full = (1 << self.n) - 1
        return JointDistribution(self.n, {full ^ a: m for a, m in self.atoms.items()})

    def items_sorted(self) -> list:
        return sorted(self.atoms.items())

    def bitstring(self, mask: int) -> str:
        return _bits(mask, self.n)


@dataclass(frozen=True)
class LevelDistribution:
    """Distribution of the sum ``c_1 + ... + c_n``: ``levels[l] = P(sum = l)``."""

    n: int
    levels: tuple

    def __post_init__(self):
        if len(self.levels) != self.n + 1:
            raise DimensionMismatch(f"need {self.n + 1} levels, got {len(self.levels)}")

    @property
    def exact(self) -> bool:
        return is_exact(self.levels)

    def total_mass(self) -> Number:
        return sum(self.levels, zero_like(self.levels[0]))

    def mass_at_least(self, k: int) -> Number:
        return sum(self.levels[max(k, 0):], zero_like(self.levels[0]))

    def binomial_moment(self, m: int) -> Number:
        """``E[C(sum, m)]``."""
        return sum((comb(l, m) * v for l, v in enumerate(self.levels)), zero_like(self.levels[0]))

    def expand(self) -> JointDistribution:
        """Spread each level uniformly over its ``C(n, l)`` bitmasks."""
        if self.n > EXPAND_LIMIT:
            raise DimensionMismatch(f"refusing to expand n = {self.n} > {EXPAND_LIMIT} to 2^n atoms")
        atoms = {}
        for mask in range(1 << self.n):
            l = mask.bit_count()
            v = self.levels[l]
            if v != 0:
                atoms[mask] = v / comb(self.n, l)
        return JointDistribution(self.n, atoms)


@dataclass(frozen=True)
class BoundReport:
    """Value of one bound together with how it was obtained.

    ``detail`` carries method-specific fields such as the minimising shift
    ``r``, the Boros-Prekopa index ``i``, the formula branch, and any
    degenerate-marginal reduction. ``certificate`` optionally holds a
    distribution attaining ``value``.
    """

    method: str
    value: Number
    detail: dict = field(default_factory=dict)
    certificate: JointDistribution | LevelDistribution | None = None

    def __post_init__(self):
        if not (-EPS <= self.value <= 1 + EPS):
            raise OutOfRange(f"{self.method} produced {self.value}, outside [0, 1]")

    def __float__(self) -> float:
        return float(self.value)
