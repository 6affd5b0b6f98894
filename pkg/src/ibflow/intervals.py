"""Exact interval-union arithmetic over rational endpoints.

Time supports of the iteration are tracked as closed intervals with
``fractions.Fraction`` endpoints so that neighborhood inclusions are
decided exactly, never by floating-point comparison.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

Rational = Union[int, Fraction]


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x)  # exact binary-float conversion
    raise TypeError(f"cannot convert {x!r} to an exact rational")


@dataclass(frozen=True)
class IntervalUnion:
    """Finite union of disjoint closed intervals [a_i, b_i], a_i <= b_i."""

    intervals: tuple[tuple[Fraction, Fraction], ...]

    @classmethod
    def empty(cls) -> "IntervalUnion":
        return cls(())

    @classmethod
    def closed(cls, a, b) -> "IntervalUnion":
        a, b = _frac(a), _frac(b)
        if a > b:
            raise ValueError("interval endpoints out of order")
        return cls(((a, b),))

    @classmethod
    def from_pairs(cls, pairs: Iterable[Sequence]) -> "IntervalUnion":
        out = cls.empty()
        for a, b in pairs:
            out = out.union(cls.closed(a, b))
        return out

    def is_empty(self) -> bool:
        return not self.intervals

    def union(self, other: "IntervalUnion") -> "IntervalUnion":
        items = sorted(self.intervals + other.intervals)
        merged: list[tuple[Fraction, Fraction]] = []
        for a, b in items:
            if merged and a <= merged[-1][1]:
                merged[-1] = (merged[-1][0], max(merged[-1][1], b))
            else:
                merged.append((a, b))
        return IntervalUnion(tuple(merged))

    def neighborhood(self, delta) -> "IntervalUnion":
        """Closure of the delta-neighborhood (endpoints widened by delta)."""
        d = _frac(delta)
        if d < 0:
            raise ValueError("neighborhood width must be nonnegative")
        return IntervalUnion.from_pairs((a - d, b + d) for a, b in self.intervals)

    def pad(self, delta) -> "IntervalUnion":
        return self.neighborhood(delta)

    def contains_point(self, t) -> bool:
        x = _frac(t)
        return any(a <= x <= b for a, b in self.intervals)

    def contains(self, other: "IntervalUnion") -> bool:
        return all(
            any(sa <= a and b <= sb for sa, sb in self.intervals)
            for a, b in other.intervals
        )

    def measure(self) -> Fraction:
        return sum((b - a for a, b in self.intervals), Fraction(0))

    def endpoints_float(self) -> list[tuple[float, float]]:
        return [(float(a), float(b)) for a, b in self.intervals]

    def __repr__(self):
        if not self.intervals:
            return "IntervalUnion(empty)"
        body = " u ".join(f"[{a}, {b}]" for a, b in self.intervals)
        return f"IntervalUnion({body})"
