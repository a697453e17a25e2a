from fractions import Fraction as F

import numpy as np
import pytest

from mixlab.builders import build_stage, odometer, staircase
from mixlab.column import LevelSet, cross_measure, merge_slots, subtract_slots
from mixlab.errors import PartiallyUndefined
from mixlab.maps import iterate
from mixlab.sets import IntervalSet


def test_odometer_stage2_map_pieces():
    t = build_stage(odometer(), 2)
    m = t.map
    # levels: [0,1/4) [1/2,3/4) [1/4,1/2) [3/4,1); adjacent equal offsets merge
    assert [(p.src.lo, p.src.hi, p.offset) for p in m.pieces] == [
        (F(0), F(1, 2), F(1, 2)),
        (F(1, 2), F(3, 4), F(-1, 4)),
    ]


def test_slot_helpers():
    assert merge_slots([(0, 2), (2, 4), (6, 8)]) == ((0, 4), (6, 8))
    assert subtract_slots([(0, 10)], [(2, 4), (6, 7)]) == ((0, 2), (4, 6), (7, 10))


def test_levelset_measure_and_interval_view():
    t = build_stage(staircase(depth=3), 3)
    col = t.column
    ls = LevelSet.from_cells(col, np.array([0, 1, 2, 7, 9]))
    assert ls.measure() == 5 * col.width
    assert ls.to_interval_set() == col.levels_to_interval_set([0, 1, 2, 7, 9])


def test_levelset_shift_matches_map_image():
    t = build_stage(staircase(depth=3), 3)
    col = t.column
    ls = LevelSet.from_cells(col, np.array([1, 4, 5, 11]))
    shifted = ls.shift(3)
    via_map = iterate(t.map, 3).image(ls.to_interval_set())
    assert shifted.to_interval_set() == via_map


def test_levelset_shift_definedness():
    t = build_stage(odometer(), 3)
    ls = LevelSet.from_cells(t.column, np.array([5, 6]))
    with pytest.raises(PartiallyUndefined):
        ls.shift(2)
    with pytest.raises(PartiallyUndefined):
        ls.shift(-6)
    assert ls.max_shift() == (5, 1)


def fragment_set(col, grid, runs, extras=()):
    return LevelSet.from_runs(col, grid, runs, extras)


def test_cross_measure_matches_generic_engine():
    t = build_stage(staircase(depth=4), 4)
    col = t.column
    g = 12
    a = fragment_set(
        col,
        g,
        [(2, 9, [(0, 5)]), (15, 40, [(3, 7), (9, 12)]), (52, 60, [(0, 12)])],
        extras=[(41, ((F(1, 7) * col.width, F(2, 7) * col.width),))],
    )
    b = fragment_set(
        col,
        g,
        [(0, 30, [(2, 6)]), (33, 61, [(0, 4), (8, 12)])],
        extras=[(31, ((F(1, 9) * col.width, F(5, 9) * col.width),))],
    )
    A = a.to_interval_set()
    B = b.to_interval_set()
    m = t.map
    for lag in [0, 1, 2, 5, 17, -1, -2]:
        fast = cross_measure(a, b, lag)
        slow = iterate(m, lag).image(A).intersect(B).measure()
        assert fast == slow, f"lag {lag}"


def test_cross_measure_mixed_grids():
    t = build_stage(staircase(depth=3), 3)
    col = t.column
    a = fragment_set(col, 4, [(0, 10, [(1, 3)])])
    b = fragment_set(col, 6, [(0, 10, [(2, 5)])])
    v = cross_measure(a, b, 0)
    # [1/4,3/4) meet [1/3,5/6) within each level = 5/12 of a level, 10 levels
    assert v == 10 * F(5, 12) * col.width


def test_levelset_union_refines_runs():
    t = build_stage(staircase(depth=3), 3)
    col = t.column
    a = fragment_set(col, 10, [(0, 20, [(0, 3)])])
    b = fragment_set(col, 10, [(10, 30, [(5, 8)])])
    u = a.union(b)
    assert u.measure() == a.measure() + b.measure()
    assert u.to_interval_set() == a.to_interval_set().union(b.to_interval_set())
    for lag in [0, 3, 7]:
        assert cross_measure(u, u, lag) == (
            cross_measure(a, a, lag)
            + cross_measure(a, b, lag)
            + cross_measure(b, a, lag)
            + cross_measure(b, b, lag)
        )
