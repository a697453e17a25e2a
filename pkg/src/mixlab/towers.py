"""Rokhlin towers for staged transformations.

A tower is a base set whose first ``height`` forward images are pairwise
disjoint.  For cut-and-stack columns the native column supplies towers by
regrouping levels; for arbitrary piecewise translations a greedy refinement
shrinks a candidate base until the levels are disjoint.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional

import numpy as np

from .builders import StagedTransformation
from .errors import CoverageUnattainable, PreconditionError, TargetTooLarge
from .maps import iterate
from .sets import IntervalSet, _frac


@dataclass
class Tower:
    """Base set, height, and lazily computed levels T^i(base)."""

    transformation: StagedTransformation
    base: IntervalSet
    height: int
    base_cells: Optional[np.ndarray] = None

    def level(self, i: int) -> IntervalSet:
        if not (0 <= i < self.height):
            raise PreconditionError(f"level {i} outside tower of height {self.height}")
        if self.base_cells is not None:
            col = self.transformation.column
            return col.levels_to_interval_set(self.base_cells + i)
        out = self.base
        for _ in range(i):
            out = self.transformation.map.image(out)
        return out

    def levels(self) -> Iterator[IntervalSet]:
        if self.base_cells is not None:
            for i in range(self.height):
                yield self.level(i)
            return
        out = self.base
        yield out
        for _ in range(self.height - 1):
            out = self.transformation.map.image(out)
            yield out

    def level_cells(self, i: int) -> np.ndarray:
        if self.base_cells is None:
            raise PreconditionError("tower has no column view")
        return self.base_cells + i

    @property
    def coverage(self) -> Fraction:
        return self.height * self.base.measure()

    def swept(self) -> IntervalSet:
        out = IntervalSet.empty()
        for lv in self.levels():
            out = out.union(lv)
        return out


def extract_tower(
    t: StagedTransformation,
    height: int,
    min_coverage,
    guard: int = 0,
) -> Tower:
    """Extract a height-``height`` tower with coverage strictly above
    ``min_coverage``.

    For column-backed transformations the native column is regrouped: the
    base is every ``height``-th level starting at ``guard``, and the top
    ``guard`` levels are also left out so sets built inside the tower keep
    |n| <= guard of exact sweep reach in both directions.
    """
    if height < 1:
        raise PreconditionError("tower height must be >= 1")
    min_coverage = _frac(min_coverage)
    if t.column is not None:
        h = t.column.h
        avail = h - 2 * guard
        q = avail // height if avail > 0 else 0
        if q < 1:
            raise CoverageUnattainable(
                f"stage height {h} cannot hold a guarded tower of height {height}"
            )
        cells = guard + height * np.arange(q, dtype=np.int64)
        coverage = q * height * t.column.width
        if coverage <= min_coverage:
            raise CoverageUnattainable(
                f"native tower coverage {coverage} <= required {min_coverage} "
                f"(stage {t.stage}; build deeper)"
            )
        base = t.column.levels_to_interval_set(cells)
        return Tower(t, base, height, base_cells=cells)
    return _greedy_tower(t, height, min_coverage)


def _greedy_tower(t: StagedTransformation, height: int, min_coverage) -> Tower:
    """Greedy base refinement: start from a candidate and subtract the
    preimages that violate level disjointness."""
    m = t.map
    base = IntervalSet.unit() if height == 1 else iterate(m, height - 1).domain()
    # candidate: the left part of the admissible domain of mass 1/height
    target = Fraction(1, height)
    picked = []
    acc = Fraction(0)
    for p in base.pieces:
        if acc >= target:
            break
        take = min(p.length, target - acc)
        picked.append((p.lo, p.lo + take))
        acc += take
    base = IntervalSet.from_pairs(picked)
    for _ in range(4 * height + 8):
        levels = [base]
        for _ in range(height - 1):
            levels.append(m.image(levels[-1]))
        overlap_fix = None
        for i in range(height):
            for j in range(i + 1, height):
                o = levels[i].intersect(levels[j])
                if not o.is_empty():
                    overlap_fix = iterate(m, -j).image(o)
                    break
            if overlap_fix is not None:
                break
        if overlap_fix is None:
            coverage = height * base.measure()
            if coverage <= min_coverage:
                raise CoverageUnattainable(
                    f"greedy tower coverage {coverage} <= required {min_coverage}"
                )
            return Tower(t, base, height)
        base = base.difference(overlap_fix)
        if base.is_empty():
            break
    raise CoverageUnattainable("greedy tower refinement did not converge")


def select_base_subset(
    tower: Tower,
    t: StagedTransformation,
    avoid: IntervalSet,
    target_sweep_measure,
) -> IntervalSet:
    """Left-anchored base prefix whose sweep (orbit through the tower,
    avoiding ``avoid``) has exactly the requested measure.

    The sweep measure of the prefix base intersect [0, c) is piecewise
    linear in c; the exact cut is found by evaluating at all breakpoints
    and inverting the bracketing linear segment.
    """
    target = _frac(target_sweep_measure)
    if target < 0:
        raise PreconditionError("target sweep measure must be >= 0")
    if target == 0:
        return IntervalSet.empty()
    base = tower.base
    m = t.map

    iterates = [None]
    cur = None
    cuts = set()
    for p in base.pieces:
        cuts.add(p.lo)
        cuts.add(p.hi)
    for i in range(tower.height):
        it = iterate(m, i)
        inv = it.invert()
        for piece in it.pieces:
            for x in (piece.src.lo, piece.src.hi):
                if base.contains_point(x):
                    cuts.add(x)
        for piece_set in avoid.pieces:
            for e in (piece_set.lo, piece_set.hi):
                p = inv.piece_for(e)
                if p is not None:
                    x = p.apply(e)
                    if base.contains_point(x):
                        cuts.add(x)
    points = sorted(cuts)

    def sweep_measure(c) -> Fraction:
        prefix = base.intersect(IntervalSet.from_pairs([(0, c)])) if c > 0 else IntervalSet.empty()
        if prefix.is_empty():
            return Fraction(0)
        total = Fraction(0)
        s = prefix
        total += s.difference(avoid).measure()
        for _ in range(tower.height - 1):
            s = m.image(s)
            total += s.difference(avoid).measure()
        return total

    lo_c = points[0]
    lo_v = Fraction(0)
    full = sweep_measure(points[-1])
    if target > full:
        raise TargetTooLarge(f"target {target} exceeds full-base sweep {full}")
    for c in points[1:]:
        v = sweep_measure(c)
        if v >= target:
            cut = lo_c + (target - lo_v) * (c - lo_c) / (v - lo_v)
            prefix = base.intersect(IntervalSet.from_pairs([(0, cut)]))
            return prefix
        lo_c, lo_v = c, v
    raise TargetTooLarge(f"target {target} exceeds full-base sweep {full}")
