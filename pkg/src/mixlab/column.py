"""Column view of a cutting-and-stacking stage.

At any finite stage the whole construction is a stack of equal-width levels
("cells") laid out in [0, 1): the transformation sends level i onto level
i+1 by translation and is undefined on the top level and on the unused
spacer reserve.  The column records the spatial cell index of every level,
so sets built from levels ("level sets") admit exact integer-arithmetic
correlation sweeps that never touch the spatial representation.

Within-level structure is kept on a rational subgrid (plus an exact list of
exceptional fragments), so all bulk computation is int64 work in numpy while
every returned measure is an exact ``Fraction``.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import PartiallyUndefined, PreconditionError
from .maps import MapPiece, PiecewiseTranslation
from .sets import IntervalSet, RationalInterval, _frac


class Column:
    """Levels of one cutting-and-stacking stage as a permutation of cells."""

    __slots__ = ("width", "pos", "cell_to_level", "h")

    def __init__(self, width: Fraction, pos: np.ndarray):
        self.width = _frac(width)
        self.pos = np.asarray(pos, dtype=np.int64)
        self.h = int(len(self.pos))
        inv = np.empty(self.h, dtype=np.int64)
        inv[self.pos] = np.arange(self.h, dtype=np.int64)
        self.cell_to_level = inv

    @property
    def used_measure(self) -> Fraction:
        return self.h * self.width

    @property
    def reserve(self) -> IntervalSet:
        """Unused spacer mass, spatially [h*w, 1)."""
        lo = self.used_measure
        if lo >= 1:
            return IntervalSet.empty()
        return IntervalSet.from_pairs([(lo, 1)])

    def level_interval(self, i: int) -> RationalInterval:
        p = int(self.pos[i])
        return RationalInterval(p * self.width, (p + 1) * self.width)

    def levels_to_interval_set(self, levels: Iterable[int]) -> IntervalSet:
        cells = np.sort(self.pos[np.asarray(list(levels), dtype=np.int64)])
        return self._cells_to_interval_set(cells)

    def _cells_to_interval_set(self, cells: np.ndarray) -> IntervalSet:
        if len(cells) == 0:
            return IntervalSet.empty()
        breaks = np.flatnonzero(np.diff(cells) != 1)
        starts = np.concatenate(([0], breaks + 1))
        stops = np.concatenate((breaks, [len(cells) - 1]))
        w = self.width
        return IntervalSet(
            tuple(
                RationalInterval(int(cells[a]) * w, (int(cells[b]) + 1) * w)
                for a, b in zip(starts, stops)
            ),
            _canonical=True,
        )

    def to_map(self) -> PiecewiseTranslation:
        """Materialize the stage map: level i -> level i+1, top level undefined."""
        if self.h == 1:
            return PiecewiseTranslation([])
        lvl = self.cell_to_level
        w = self.width
        offs = np.full(self.h, np.iinfo(np.int64).min, dtype=np.int64)
        not_top = lvl < self.h - 1
        src_levels = lvl[not_top]
        offs[not_top] = self.pos[src_levels + 1] - self.pos[src_levels]
        pieces = []
        start = 0
        for c in range(1, self.h + 1):
            if c == self.h or offs[c] != offs[start]:
                if offs[start] != np.iinfo(np.int64).min:
                    pieces.append(
                        MapPiece(
                            RationalInterval(start * w, c * w),
                            Fraction(1),
                            int(offs[start]) * w,
                        )
                    )
                start = c
        return PiecewiseTranslation(pieces, _canonical=True)


# -- level sets ------------------------------------------------------------

_MIN_I64 = np.iinfo(np.int64).min


def _pack_frags(frags: Sequence[Sequence[tuple[int, int]]], k: int):
    n = len(frags)
    lo = np.zeros((n, k), dtype=np.int64)
    hi = np.zeros((n, k), dtype=np.int64)
    for i, f in enumerate(frags):
        for j, (a, b) in enumerate(f):
            lo[i, j] = a
            hi[i, j] = b
    return lo, hi


def merge_slots(slots: Iterable[tuple[int, int]]) -> tuple[tuple[int, int], ...]:
    """Canonicalize within-level fragment slots: sorted, disjoint, merged."""
    items = sorted((a, b) for a, b in slots if b > a)
    out: list[list[int]] = []
    for a, b in items:
        if out and a <= out[-1][1]:
            out[-1][1] = max(out[-1][1], b)
        else:
            out.append([a, b])
    return tuple((a, b) for a, b in out)


def subtract_slots(slots, other) -> tuple[tuple[int, int], ...]:
    out = []
    for a, b in merge_slots(slots):
        lo = a
        for c, d in merge_slots(other):
            if d <= lo or c >= b:
                continue
            if c > lo:
                out.append((lo, c))
            lo = max(lo, d)
            if lo >= b:
                break
        if lo < b:
            out.append((lo, b))
    return tuple(out)


class LevelSet:
    """A set expressed in column coordinates: runs of levels with a shared
    within-level fragment pattern on an integer subgrid, plus an exact list
    of exceptional fragments.

    Runs are half-open index ranges [start, stop) of consecutive levels; the
    fragment pattern is a list of [lo, hi) subintervals of the level in
    units of width/grid.  ``extras`` carries fragments whose endpoints do
    not live on the grid, exactly, as (level, ((lo, hi), ...)) with Fraction
    endpoints in [0, width).
    """

    __slots__ = ("column", "grid", "starts", "stops", "frag_lo", "frag_hi", "extras")

    def __init__(self, column, grid, starts, stops, frag_lo, frag_hi, extras=()):
        self.column = column
        self.grid = int(grid)
        self.starts = np.asarray(starts, dtype=np.int64)
        self.stops = np.asarray(stops, dtype=np.int64)
        self.frag_lo = np.asarray(frag_lo, dtype=np.int64)
        self.frag_hi = np.asarray(frag_hi, dtype=np.int64)
        self.extras = tuple(
            (int(lvl), tuple((_frac(a), _frac(b)) for a, b in frs))
            for lvl, frs in extras
        )
        if len(self.starts) and np.any(self.starts[1:] < self.stops[:-1]):
            raise PreconditionError("level set runs must be sorted and disjoint")
        for lvl, frs in self.extras:
            covered = _frags_at_level_runs_only(self, lvl)
            for a, b in frs:
                for c, d in covered:
                    if max(a, c) < min(b, d):
                        raise PreconditionError(
                            "exceptional fragment overlaps run fragments at level "
                            f"{lvl}; the representation must be disjoint"
                        )

    @classmethod
    def from_runs(cls, column, grid, runs, extras=()):
        """runs: iterable of (start, stop, slots) with slots in grid units."""
        runs = sorted(runs, key=lambda r: r[0])
        k = max((len(r[2]) for r in runs), default=1)
        k = max(k, 1)
        starts = [r[0] for r in runs]
        stops = [r[1] for r in runs]
        lo, hi = _pack_frags([merge_slots(r[2]) for r in runs], k)
        return cls(column, grid, starts, stops, lo, hi, extras)

    @classmethod
    def from_cells(cls, column, levels: np.ndarray, grid: int = 1):
        """Full-level set from a sorted array of level indices."""
        levels = np.asarray(levels, dtype=np.int64)
        if len(levels) == 0:
            return cls(column, grid, [], [], np.zeros((0, 1)), np.zeros((0, 1)))
        breaks = np.flatnonzero(np.diff(levels) != 1)
        starts = levels[np.concatenate(([0], breaks + 1))]
        stops = levels[np.concatenate((breaks, [len(levels) - 1]))] + 1
        n = len(starts)
        lo = np.zeros((n, 1), dtype=np.int64)
        hi = np.full((n, 1), grid, dtype=np.int64)
        return cls(column, grid, starts, stops, lo, hi)

    @property
    def nruns(self) -> int:
        return len(self.starts)

    def level_bounds(self) -> tuple[int, int]:
        """(min level, max level + 1) over runs and extras."""
        lo = int(self.starts[0]) if self.nruns else None
        hi = int(self.stops[-1]) if self.nruns else None
        for lvl, _ in self.extras:
            lo = lvl if lo is None else min(lo, lvl)
            hi = lvl + 1 if hi is None else max(hi, lvl + 1)
        if lo is None:
            return (0, 0)
        return lo, hi

    def is_empty(self) -> bool:
        return self.nruns == 0 and not self.extras

    def measure(self) -> Fraction:
        w = self.column.width
        lengths = self.stops - self.starts
        per_run = (self.frag_hi - self.frag_lo).sum(axis=1)
        total = int(np.dot(lengths, per_run)) if self.nruns else 0
        m = Fraction(total, self.grid) * w
        for _, frs in self.extras:
            for a, b in frs:
                m += b - a
        return m

    def shift(self, n: int) -> "LevelSet":
        """Image under n steps of the column map; fails where the orbit
        leaves the defined part (top level forward, bottom level backward)."""
        lo, hi = self.level_bounds()
        h = self.column.h
        if n > 0 and hi - 1 + n > h - 1:
            raise PartiallyUndefined(
                f"shift by {n} leaves the column (top level reached)", n=n
            )
        if n < 0 and lo + n < 0:
            raise PartiallyUndefined(
                f"shift by {n} leaves the column (bottom level reached)", n=n
            )
        return LevelSet(
            self.column,
            self.grid,
            self.starts + n,
            self.stops + n,
            self.frag_lo,
            self.frag_hi,
            tuple((lvl + n, frs) for lvl, frs in self.extras),
        )

    def max_shift(self) -> tuple[int, int]:
        """(max backward steps, max forward steps) staying defined."""
        lo, hi = self.level_bounds()
        if hi == 0:
            return (0, 0)
        return lo, (self.column.h - 1) - (hi - 1)

    def to_interval_set(self) -> IntervalSet:
        col = self.column
        w = col.width
        g = self.grid
        pieces = []
        for r in range(self.nruns):
            slots = [
                (int(self.frag_lo[r, j]), int(self.frag_hi[r, j]))
                for j in range(self.frag_lo.shape[1])
                if self.frag_hi[r, j] > self.frag_lo[r, j]
            ]
            for lvl in range(int(self.starts[r]), int(self.stops[r])):
                base = int(col.pos[lvl]) * w
                for a, b in slots:
                    pieces.append((base + Fraction(a, g) * w, base + Fraction(b, g) * w))
        for lvl, frs in self.extras:
            base = int(col.pos[lvl]) * w
            for a, b in frs:
                pieces.append((base + a, base + b))
        return IntervalSet.from_pairs(pieces)

    def union(self, other: "LevelSet") -> "LevelSet":
        """Union of two disjoint level sets on the same column and grid."""
        if self.column is not other.column or self.grid != other.grid:
            raise PreconditionError("level set union requires a shared column and grid")
        runs: list[tuple[int, int, tuple]] = []
        for ls in (self, other):
            for r in range(ls.nruns):
                slots = tuple(
                    (int(ls.frag_lo[r, j]), int(ls.frag_hi[r, j]))
                    for j in range(ls.frag_lo.shape[1])
                    if ls.frag_hi[r, j] > ls.frag_lo[r, j]
                )
                runs.append((int(ls.starts[r]), int(ls.stops[r]), slots))
        # refine overlapping index ranges so each output run has one pattern
    # (the inputs are disjoint as sets, but their runs may share levels)
        cuts = sorted({r[0] for r in runs} | {r[1] for r in runs})
        refined = []
        for a, b in zip(cuts, cuts[1:]):
            slots: list[tuple[int, int]] = []
            for s, e, f in runs:
                if s <= a and b <= e:
                    slots.extend(f)
            if slots:
                refined.append((a, b, merge_slots(slots)))
        extras = self.extras + other.extras
        return LevelSet.from_runs(self.column, self.grid, refined, extras)


def cross_measure(a: LevelSet, b: LevelSet, lag: int = 0) -> Fraction:
    """Exact measure of (T^lag a) intersect b, assuming the shift is defined.

    Computed entirely in column coordinates: run ranges are intersected with
    int64 arithmetic, fragment slots pairwise, and the exceptional fragments
    by exact rational arithmetic.
    """
    if a.column is not b.column:
        raise PreconditionError("cross measure requires a shared column")
    lo_a, hi_a = a.level_bounds()
    fwd_ok = lag <= 0 or hi_a - 1 + lag <= a.column.h - 1
    bwd_ok = lag >= 0 or lo_a + lag >= 0
    if not (fwd_ok and bwd_ok):
        raise PartiallyUndefined(f"shift by {lag} leaves the column", n=lag)

    g = a.grid if a.grid == b.grid else a.grid * b.grid // math.gcd(a.grid, b.grid)
    sa = 1 if a.grid == g else g // a.grid
    sb = 1 if b.grid == g else g // b.grid
    total = 0
    if a.nruns and b.nruns:
        astarts = a.starts + lag
        astops = a.stops + lag
        first = np.searchsorted(b.stops, astarts, side="right")
        last = np.searchsorted(b.starts, astops, side="left")
        counts = last - first
        idx_a = np.repeat(np.arange(a.nruns), counts)
        if len(idx_a):
            group_start = np.cumsum(counts) - counts
            offsets = np.arange(len(idx_a)) - np.repeat(group_start, counts)
            idx_b = np.repeat(first, counts) + offsets
            ov = np.minimum(astops[idx_a], b.stops[idx_b]) - np.maximum(
                astarts[idx_a], b.starts[idx_b]
            )
            fa_lo = a.frag_lo[idx_a] * sa
            fa_hi = a.frag_hi[idx_a] * sa
            fb_lo = b.frag_lo[idx_b] * sb
            fb_hi = b.frag_hi[idx_b] * sb
            frag = np.zeros(len(idx_a), dtype=np.int64)
            for i in range(fa_lo.shape[1]):
                for j in range(fb_lo.shape[1]):
                    frag += np.maximum(
                        0,
                        np.minimum(fa_hi[:, i], fb_hi[:, j])
                        - np.maximum(fa_lo[:, i], fb_lo[:, j]),
                    )
            per = ov * frag
            bound = (
                int(np.max(ov)) * int(np.max(frag)) * len(per) if len(per) else 0
            )
            if bound < 2**62:
                total = int(per.sum())
            else:
                total = int(sum(int(x) for x in per))
    m = Fraction(total, g) * a.column.width if total else Fraction(0)

    if a.extras or b.extras:
        m += _extras_cross(a, b, lag)
    return m


def _slots_of_run(ls: LevelSet, r: int) -> list[tuple[Fraction, Fraction]]:
    w = ls.column.width
    g = ls.grid
    return [
        (Fraction(int(ls.frag_lo[r, j]), g) * w, Fraction(int(ls.frag_hi[r, j]), g) * w)
        for j in range(ls.frag_lo.shape[1])
        if ls.frag_hi[r, j] > ls.frag_lo[r, j]
    ]


def _frags_at_level_runs_only(ls: LevelSet, lvl: int) -> list[tuple[Fraction, Fraction]]:
    i = int(np.searchsorted(ls.stops, lvl, side="right"))
    if i < ls.nruns and ls.starts[i] <= lvl < ls.stops[i]:
        return _slots_of_run(ls, i)
    return []


def _frags_at_level(ls: LevelSet, lvl: int) -> list[tuple[Fraction, Fraction]]:
    out = _frags_at_level_runs_only(ls, lvl)
    for xl, frs in ls.extras:
        if xl == lvl:
            out = out + list(frs)
    return out


def _extras_cross(a: LevelSet, b: LevelSet, lag: int) -> Fraction:
    """Exact cross terms involving at least one exceptional fragment."""
    total = Fraction(0)
    for lvl, frs in a.extras:
        for c, d in frs:
            for e, f in _frags_at_level(b, lvl + lag):
                total += max(Fraction(0), min(d, f) - max(c, e))
    for lvl, frs in b.extras:
        for e, f in frs:
            i = int(np.searchsorted(a.stops, lvl - lag, side="right"))
            if i < a.nruns and a.starts[i] <= lvl - lag < a.stops[i]:
                for c, d in _slots_of_run(a, i):
                    total += max(Fraction(0), min(d, f) - max(c, e))
    return total
