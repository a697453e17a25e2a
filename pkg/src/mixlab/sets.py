"""Exact subsets of the unit interval.

Sets are finite disjoint unions of half-open rational intervals [lo, hi).
The canonical form is sorted by left endpoint with adjacent pieces merged,
so equal sets compare equal structurally and every measure query is an
exact ``Fraction``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

from .errors import PreconditionError

ZERO = Fraction(0)
ONE = Fraction(1)


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    return Fraction(x)


@dataclass(frozen=True)
class RationalInterval:
    """Half-open interval [lo, hi) with rational endpoints, 0 <= lo < hi <= 1."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", _frac(self.lo))
        object.__setattr__(self, "hi", _frac(self.hi))
        if not (ZERO <= self.lo < self.hi <= ONE):
            raise PreconditionError(
                f"invalid interval [{self.lo}, {self.hi}): need 0 <= lo < hi <= 1"
            )

    @property
    def length(self) -> Fraction:
        return self.hi - self.lo

    def contains(self, x: Fraction) -> bool:
        return self.lo <= x < self.hi

    def __repr__(self):
        return f"[{self.lo}, {self.hi})"


class IntervalSet:
    """Canonical finite union of disjoint half-open rational intervals."""

    __slots__ = ("pieces",)

    def __init__(self, pieces: Iterable[RationalInterval] = (), _canonical: bool = False):
        pieces = tuple(pieces)
        if not _canonical:
            pieces = _canonicalize(pieces)
        self.pieces: tuple[RationalInterval, ...] = pieces

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple]) -> "IntervalSet":
        """Build from (lo, hi) pairs; empty pairs (lo == hi) are dropped."""
        ivs = [RationalInterval(_frac(a), _frac(b)) for a, b in pairs if _frac(a) != _frac(b)]
        return cls(ivs)

    @classmethod
    def empty(cls) -> "IntervalSet":
        return cls((), _canonical=True)

    @classmethod
    def unit(cls) -> "IntervalSet":
        return cls((RationalInterval(ZERO, ONE),), _canonical=True)

    def measure(self) -> Fraction:
        return sum((p.length for p in self.pieces), ZERO)

    def is_empty(self) -> bool:
        return not self.pieces

    def contains_point(self, x) -> bool:
        x = _frac(x)
        return any(p.contains(x) for p in self.pieces)

    def boundaries(self) -> Iterator[Fraction]:
        for p in self.pieces:
            yield p.lo
            yield p.hi

    # -- algebra ---------------------------------------------------------

    def union(self, other: "IntervalSet") -> "IntervalSet":
        return IntervalSet(self.pieces + other.pieces)

    def intersect(self, other: "IntervalSet") -> "IntervalSet":
        out = []
        a, b = self.pieces, other.pieces
        i = j = 0
        while i < len(a) and j < len(b):
            lo = max(a[i].lo, b[j].lo)
            hi = min(a[i].hi, b[j].hi)
            if lo < hi:
                out.append(RationalInterval(lo, hi))
            if a[i].hi <= b[j].hi:
                i += 1
            else:
                j += 1
        return IntervalSet(out, _canonical=True)

    def difference(self, other: "IntervalSet") -> "IntervalSet":
        out = []
        b = other.pieces
        j = 0
        for p in self.pieces:
            lo = p.lo
            while j < len(b) and b[j].hi <= lo:
                j += 1
            k = j
            while k < len(b) and b[k].lo < p.hi:
                if b[k].lo > lo:
                    out.append(RationalInterval(lo, b[k].lo))
                lo = max(lo, b[k].hi)
                if lo >= p.hi:
                    break
                k += 1
            if lo < p.hi:
                out.append(RationalInterval(lo, p.hi))
        return IntervalSet(out, _canonical=True)

    def symmetric_difference(self, other: "IntervalSet") -> "IntervalSet":
        return self.difference(other).union(other.difference(self))

    def complement(self) -> "IntervalSet":
        """Complement within [0, 1)."""
        return IntervalSet.unit().difference(self)

    def is_subset(self, other: "IntervalSet") -> bool:
        return self.difference(other).is_empty()

    def intersects(self, other: "IntervalSet") -> bool:
        a, b = self.pieces, other.pieces
        i = j = 0
        while i < len(a) and j < len(b):
            if max(a[i].lo, b[j].lo) < min(a[i].hi, b[j].hi):
                return True
            if a[i].hi <= b[j].hi:
                i += 1
            else:
                j += 1
        return False

    def translate(self, offset: Fraction) -> "IntervalSet":
        offset = _frac(offset)
        return IntervalSet(
            tuple(RationalInterval(p.lo + offset, p.hi + offset) for p in self.pieces),
            _canonical=True,
        )

    # -- dunder ----------------------------------------------------------

    def __eq__(self, other):
        return isinstance(other, IntervalSet) and self.pieces == other.pieces

    def __hash__(self):
        return hash(self.pieces)

    def __or__(self, other):
        return self.union(other)

    def __and__(self, other):
        return self.intersect(other)

    def __sub__(self, other):
        return self.difference(other)

    def __xor__(self, other):
        return self.symmetric_difference(other)

    def __len__(self):
        return len(self.pieces)

    def __iter__(self):
        return iter(self.pieces)

    def __repr__(self):
        if not self.pieces:
            return "IntervalSet()"
        return "IntervalSet(" + " u ".join(map(repr, self.pieces)) + ")"


def _canonicalize(pieces: Sequence[RationalInterval]) -> tuple[RationalInterval, ...]:
    """Sort, then merge overlapping or adjacent pieces."""
    if not pieces:
        return ()
    items = sorted(pieces, key=lambda p: (p.lo, p.hi))
    out = [items[0]]
    for p in items[1:]:
        last = out[-1]
        if p.lo <= last.hi:
            if p.hi > last.hi:
                out[-1] = RationalInterval(last.lo, p.hi)
        else:
            out.append(p)
    return tuple(out)


def set_measure(s: IntervalSet) -> Fraction:
    """Lebesgue measure of a canonical set, exactly."""
    return s.measure()


def set_algebra(a: IntervalSet, b: IntervalSet, kind: str) -> IntervalSet:
    """Dispatch union / intersect / difference / symmetricDifference by name."""
    ops = {
        "union": IntervalSet.union,
        "intersect": IntervalSet.intersect,
        "difference": IntervalSet.difference,
        "symmetricDifference": IntervalSet.symmetric_difference,
    }
    try:
        op = ops[kind]
    except KeyError:
        raise PreconditionError(f"unknown set algebra kind {kind!r}") from None
    return op(a, b)


# -- serialization --------------------------------------------------------
#
# Line-oriented text form: a header with the piece count, then one piece per
# line as "lo_num/lo_den hi_num/hi_den".  Round trips are bit exact because
# Fraction normalizes.


def _fmt(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def parse_fraction(text: str) -> Fraction:
    text = text.strip()
    if "/" in text:
        num, den = text.split("/", 1)
        den_i = int(den)
        if den_i <= 0:
            raise PreconditionError(f"fraction denominator must be positive: {text!r}")
        return Fraction(int(num), den_i)
    return Fraction(int(text))


def dump_interval_set(s: IntervalSet) -> str:
    lines = [f"intervalset {len(s.pieces)}"]
    for p in s.pieces:
        lines.append(f"{_fmt(p.lo)} {_fmt(p.hi)}")
    return "\n".join(lines) + "\n"


def load_interval_set(text: str) -> IntervalSet:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("intervalset "):
        raise PreconditionError("missing intervalset header")
    count = int(lines[0].split()[1])
    if len(lines) - 1 != count:
        raise PreconditionError(f"expected {count} pieces, found {len(lines) - 1}")
    pieces = []
    for ln in lines[1:]:
        lo, hi = ln.split()
        pieces.append(RationalInterval(parse_fraction(lo), parse_fraction(hi)))
    out = IntervalSet(pieces)
    if out.pieces != tuple(pieces):
        raise PreconditionError("serialized interval set was not canonical")
    return out
