from fractions import Fraction as F

import pytest

from mixlab.builders import (
    build,
    build_stage,
    chacon,
    odometer,
    parse_recipe,
    recipe_by_name,
    rigidity_defect_bound,
    rigidity_sequence,
    rotation,
    staircase,
)
from mixlab.errors import NotRigid, PreconditionError, StageTooLarge
from mixlab.maps import disagreement
from mixlab.sets import IntervalSet


def test_odometer_stage1_map():
    t = build_stage(odometer(), 1)
    m = t.map
    assert len(m.pieces) == 1
    p = m.pieces[0]
    assert (p.src.lo, p.src.hi, p.offset) == (0, F(1, 2), F(1, 2))
    assert m.undefined_residual == IntervalSet.from_pairs([(F(1, 2), 1)])
    assert t.column.h == 2


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6])
def test_odometer_heights(n):
    assert build_stage(odometer(), n).column.h == 2 ** n


def test_staircase_heights_match_recipe_recursion():
    # independent oracle: h' = (cuts) h + (cuts choose 2) spacers, cuts = round+1
    h = 1
    heights = [h]
    for r in range(1, 7):
        h = (r + 1) * h + r * (r + 1) // 2
        heights.append(h)
    assert staircase(depth=6).heights(6) == heights


def test_chacon_heights_and_mass():
    rec = chacon()
    hs = rec.heights(4)
    for a, b in zip(hs, hs[1:]):
        assert b == 3 * a + 1
    assert rec.base_mass() == F(2, 3)


def test_staircase_full_depth_tiles_unit_interval():
    t = build_stage(staircase(depth=4), 4)
    col = t.column
    assert col.used_measure == 1
    assert col.reserve.is_empty()
    # levels partition [0,1): positions are a permutation of 0..h-1
    assert sorted(col.pos.tolist()) == list(range(col.h))


def test_staircase_mid_depth_reserve():
    rec = staircase(depth=4)
    t = build_stage(rec, 2)
    col = t.column
    assert col.used_measure == col.h * col.width
    assert col.reserve.measure() == 1 - col.used_measure
    assert col.reserve.measure() > 0


def test_stage_consistency_bound():
    # stage-m map agrees with stage-n map except on the stage-n top level
    # plus the spacer mass added in between, exactly quantified
    rec = staircase(depth=5)
    for n, m in [(1, 2), (2, 3), (2, 4)]:
        tn = build_stage(rec, n)
        tm = build_stage(rec, m)
        diff = disagreement(tn.map, tm.map).measure()
        top = tn.column.width
        spacer_added = tm.column.used_measure - tn.column.used_measure
        assert diff <= top + spacer_added


def test_odometer_stage_consistency_is_exactly_top_level():
    # the deeper stage resolves the old top level except its own top level;
    # both-undefined points are not disagreements
    tn = build_stage(odometer(), 2)
    tm = build_stage(odometer(), 5)
    assert disagreement(tn.map, tm.map).measure() == tn.column.width - tm.column.width


def test_base_orbit_is_levels():
    t = build_stage(staircase(depth=3), 3)
    col = t.column
    m = t.map
    s = col.levels_to_interval_set([0])
    for i in range(1, col.h):
        s = m.image(s)
        assert s == col.levels_to_interval_set([i])


def test_rigidity_sequence_examples():
    assert rigidity_sequence(odometer(), 3) == [2, 4, 8]
    assert rigidity_sequence(odometer(), 0) == []
    with pytest.raises(NotRigid):
        rigidity_sequence(staircase(depth=3), 2)


def test_rigidity_on_levels_with_wrap_oracle():
    # oracle: the stage-3 odometer column with cyclic closing is the +1
    # cycle on 8 levels, so T^4 fixes every union of stage-2 levels
    t = build_stage(odometer(), 3)
    col = t.column
    h = col.h
    rho = 4
    for r in range(4):
        levels = [r, r + 4]
        cyc = {(l + rho) % h for l in levels}
        assert cyc == set(levels)
    # library side: honest-partial sweep recovers all mass except the
    # single carry copy per level, bounded by rigidity_defect_bound
    deep = build_stage(odometer(), 6)
    bound = rigidity_defect_bound(deep, 2)
    assert bound == F(4, 64)
    a = deep.column.levels_to_interval_set(
        [l for l in range(deep.column.h) if l % 4 == 1 and l + rho < deep.column.h]
    )
    img = deep.map
    s = a
    for _ in range(rho):
        s = img.image(s)
    full = deep.column.levels_to_interval_set(range(1, deep.column.h, 4))
    assert s.intersect(full).measure() >= (1 - bound) * full.measure()


def test_budget_and_stage_validation():
    with pytest.raises(StageTooLarge):
        build_stage(odometer(), 10, piece_budget=100)
    with pytest.raises(StageTooLarge):
        build_stage(staircase(depth=3), 4)
    with pytest.raises(PreconditionError):
        build_stage(odometer(), 0)


def test_rotation_builder():
    t = rotation(4)
    assert t.map.domain() == IntervalSet.unit()
    assert t.map.undefined_residual.is_empty()
    assert rigidity_sequence(t.recipe, 3) == [4, 8, 12]


def test_recipe_parsing_round_trip():
    rec = parse_recipe("name: twocut\ncuts: 2\nspacers: 0\n")
    assert rec.heights(3) == [1, 2, 4, 8]
    assert rec.produces_rigidity
    stair = parse_recipe("cuts: n+1\nspacers: j\ndepth: 4\n")
    assert stair.heights(2) == staircase(4).heights(2)
    assert stair.mixing_type
    const = parse_recipe("cuts: 3\nspacers: 1\n")
    assert const.series_sum == F(3, 2)


def test_recipe_parsing_errors():
    with pytest.raises(PreconditionError):
        parse_recipe("cuts: j\nspacers: 0\n")
    with pytest.raises(PreconditionError):
        parse_recipe("cuts: 2\n")
    with pytest.raises(PreconditionError):
        parse_recipe("cuts: n+1\nspacers: j\n")  # needs depth


def test_recipe_by_name():
    assert recipe_by_name("odometer").name == "odometer"
    assert recipe_by_name("staircase@5").depth == 5
    assert recipe_by_name("rotation3").q == 3
    assert build("rotation2", 1).map.apply_point(0) == F(1, 2)
