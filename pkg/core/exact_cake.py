"""
Exact model of the cake [0,1]: intervals, pieces, valuations and allocations.

Every coordinate and value is a fractions.Fraction. Pieces are kept in
canonical form (sorted, disjoint, non-adjacent intervals) so structural
equality is set equality.
"""

from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Union

from core.exceptions import InvalidPiece, InvalidValuation, TauOutOfRange, Unsatisfiable

ExactScalar = Fraction
ScalarLike = Union[Fraction, int, str]

ZERO = Fraction(0)
ONE = Fraction(1)


def to_scalar(value: ScalarLike) -> Fraction:
    if isinstance(value, (float, bool)):
        raise InvalidPiece(f"Inexact or non-numeric coordinate {value!r}")
    return Fraction(value)


@dataclass(frozen=True, order=True)
class Interval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        lo, hi = to_scalar(self.lo), to_scalar(self.hi)
        if not (ZERO <= lo < hi <= ONE):
            raise InvalidPiece(f"Interval [{lo}, {hi}] must satisfy 0 <= lo < hi <= 1")
        object.__setattr__(self, 'lo', lo)
        object.__setattr__(self, 'hi', hi)

    @property
    def length(self) -> Fraction:
        return self.hi - self.lo

    def __str__(self) -> str:
        return f"[{self.lo},{self.hi}]"


def _canonical(intervals: Iterable[Interval]) -> tuple[Interval, ...]:
    merged: list[list[Fraction]] = []
    for iv in sorted(intervals):
        if merged and iv.lo <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], iv.hi)
        else:
            merged.append([iv.lo, iv.hi])
    return tuple(Interval(lo, hi) for lo, hi in merged)


@dataclass(frozen=True)
class Piece:
    """A finite union of disjoint intervals; the empty tuple is the empty piece."""
    intervals: tuple[Interval, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, 'intervals', _canonical(self.intervals))

    @classmethod
    def of(cls, *pairs: tuple[ScalarLike, ScalarLike]) -> "Piece":
        """Build a piece from (lo, hi) pairs; zero-width pairs are dropped."""
        intervals = []
        for lo, hi in pairs:
            lo, hi = to_scalar(lo), to_scalar(hi)
            if lo > hi:
                raise InvalidPiece(f"Interval [{lo}, {hi}] has lo > hi")
            if lo < hi:
                intervals.append(Interval(lo, hi))
        return cls(tuple(intervals))

    @classmethod
    def empty(cls) -> "Piece":
        return cls(())

    @classmethod
    def whole(cls) -> "Piece":
        return cls((Interval(ZERO, ONE),))

    @property
    def is_empty(self) -> bool:
        return not self.intervals

    @property
    def measure(self) -> Fraction:
        return sum((iv.length for iv in self.intervals), ZERO)

    def __iter__(self) -> Iterator[Interval]:
        return iter(self.intervals)

    def __len__(self) -> int:
        return len(self.intervals)

    def __str__(self) -> str:
        return "{" + ",".join(str(iv) for iv in self.intervals) + "}"

    def union(self, other: "Piece") -> "Piece":
        return piece_union(self, other)

    def subtract(self, other: "Piece") -> "Piece":
        return piece_subtract(self, other)

    def intersect(self, other: "Piece") -> "Piece":
        return piece_intersect(self, other)

    def is_subset_of(self, other: "Piece") -> bool:
        return piece_subtract(self, other).is_empty


EMPTY = Piece()
WHOLE = Piece.whole()


def piece_union(a: Piece, b: Piece) -> Piece:
    return Piece(a.intervals + b.intervals)


def union_all(pieces: Iterable[Piece]) -> Piece:
    intervals: list[Interval] = []
    for piece in pieces:
        intervals.extend(piece.intervals)
    return Piece(tuple(intervals))


def piece_subtract(a: Piece, b: Piece) -> Piece:
    result = []
    cuts = b.intervals
    j = 0
    for iv in a.intervals:
        lo = iv.lo
        while j < len(cuts) and cuts[j].hi <= lo:
            j += 1
        k = j
        while k < len(cuts) and cuts[k].lo < iv.hi:
            if cuts[k].lo > lo:
                result.append(Interval(lo, cuts[k].lo))
            lo = max(lo, cuts[k].hi)
            if lo >= iv.hi:
                break
            k += 1
        if lo < iv.hi:
            result.append(Interval(lo, iv.hi))
    return Piece(tuple(result))


def piece_intersect(a: Piece, b: Piece) -> Piece:
    result = []
    i = j = 0
    left, right = a.intervals, b.intervals
    while i < len(left) and j < len(right):
        lo = max(left[i].lo, right[j].lo)
        hi = min(left[i].hi, right[j].hi)
        if lo < hi:
            result.append(Interval(lo, hi))
        if left[i].hi < right[j].hi:
            i += 1
        else:
            j += 1
    return Piece(tuple(result))


@dataclass(frozen=True)
class Valuation:
    """
    Piecewise-constant density on [0,1].

    densities[s] is the density on [breakpoints[s], breakpoints[s+1]]. The
    total integral must be exactly 1.
    """
    breakpoints: tuple[Fraction, ...]
    densities: tuple[Fraction, ...]
    cumulative: tuple[Fraction, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        try:
            breakpoints = tuple(to_scalar(b) for b in self.breakpoints)
            densities = tuple(to_scalar(d) for d in self.densities)
        except (InvalidPiece, ValueError, TypeError) as e:
            raise InvalidValuation(f"Valuation entries must be exact rationals: {e}") from e

        if len(breakpoints) < 2 or breakpoints[0] != ZERO or breakpoints[-1] != ONE:
            raise InvalidValuation(f"Breakpoints must start at 0 and end at 1, got {[str(b) for b in breakpoints]}")
        if any(b >= c for b, c in zip(breakpoints, breakpoints[1:])):
            raise InvalidValuation("Breakpoints must be strictly increasing")
        if len(densities) != len(breakpoints) - 1:
            raise InvalidValuation(f"Expected {len(breakpoints) - 1} densities, got {len(densities)}")
        if any(d < 0 for d in densities):
            raise InvalidValuation("Densities must be non-negative")

        cumulative = [ZERO]
        for s, density in enumerate(densities):
            cumulative.append(cumulative[-1] + density * (breakpoints[s + 1] - breakpoints[s]))
        if cumulative[-1] != ONE:
            raise InvalidValuation(f"Valuation must integrate to 1, integrates to {cumulative[-1]}")

        object.__setattr__(self, 'breakpoints', breakpoints)
        object.__setattr__(self, 'densities', densities)
        object.__setattr__(self, 'cumulative', tuple(cumulative))

    @classmethod
    def uniform(cls) -> "Valuation":
        return cls((ZERO, ONE), (ONE,))

    @property
    def segments(self) -> int:
        return len(self.densities)

    def cdf(self, x: Fraction) -> Fraction:
        """Value of [0, x]."""
        if x <= ZERO:
            return ZERO
        if x >= ONE:
            return ONE
        s = bisect_right(self.breakpoints, x) - 1
        return self.cumulative[s] + self.densities[s] * (x - self.breakpoints[s])

    def value(self, lo: Fraction, hi: Fraction) -> Fraction:
        return self.cdf(hi) - self.cdf(lo)

    def cut_point(self, x: Fraction, tau: Fraction) -> Fraction:
        """
        Leftmost y >= x with value([x, y]) = tau.

        Raises Unsatisfiable when [x, 1] holds less than tau.
        """
        if tau < ZERO:
            raise TauOutOfRange(f"Cut value must be non-negative, got {tau}")
        if tau == ZERO:
            return x
        target = self.cdf(x) + tau
        if target > ONE:
            raise Unsatisfiable(f"Only {ONE - self.cdf(x)} of value remains right of {x}, asked for {tau}")
        # cumulative[s] < target <= cumulative[s+1], so segment s has positive density
        s = bisect_left(self.cumulative, target) - 1
        return self.breakpoints[s] + (target - self.cumulative[s]) / self.densities[s]


def value_of(v: Valuation, p: Piece) -> Fraction:
    return sum((v.value(iv.lo, iv.hi) for iv in p.intervals), ZERO)


def inverse_cut(v: Valuation, p: Piece, tau: Fraction) -> tuple[Piece, Piece]:
    """
    Split p into the smallest left prefix worth exactly tau and the rest.

    Args:
        v: Valuation used to measure the prefix
        p: Piece to split
        tau: Target value, 0 <= tau <= value_of(v, p)

    Returns:
        (prefix, suffix) with prefix ∪ suffix = p
    """
    tau = to_scalar(tau)
    total = value_of(v, p)
    if tau < ZERO or tau > total:
        raise TauOutOfRange(f"Cut value {tau} outside [0, {total}] for piece {p}")
    if tau == ZERO:
        return EMPTY, p

    prefix: list[Interval] = []
    acc = ZERO
    for position, iv in enumerate(p.intervals):
        worth = v.value(iv.lo, iv.hi)
        if acc + worth < tau:
            prefix.append(iv)
            acc += worth
            continue
        y = v.cut_point(iv.lo, tau - acc)
        if y > iv.lo:
            prefix.append(Interval(iv.lo, y))
        suffix = list(p.intervals[position + 1:])
        if y < iv.hi:
            suffix.insert(0, Interval(y, iv.hi))
        return Piece(tuple(prefix)), Piece(tuple(suffix))

    # Unreachable: tau <= total guarantees the loop returns
    raise TauOutOfRange(f"Cut value {tau} exceeds piece value {total}")


@dataclass(frozen=True)
class Allocation:
    """bundles[i - 1] is the bundle of agent a_i."""
    bundles: tuple[Piece, ...]

    @classmethod
    def from_mapping(cls, n: int, bundles: dict[int, Piece]) -> "Allocation":
        return cls(tuple(bundles.get(i, EMPTY) for i in range(1, n + 1)))

    @property
    def n(self) -> int:
        return len(self.bundles)

    def bundle(self, agent: int) -> Piece:
        return self.bundles[agent - 1]

    def union(self) -> Piece:
        return union_all(self.bundles)

    def is_disjoint(self) -> bool:
        # Intervals overlap in positive measure iff the measures fail to add up
        return sum((b.measure for b in self.bundles), ZERO) == self.union().measure

    def is_complete_over(self, region: Piece) -> bool:
        return self.is_disjoint() and self.union() == region
