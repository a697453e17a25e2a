"""Canonical transformations built by cutting and stacking.

A recipe gives the number of subcolumns and the spacer counts per round.
Rounds are indexed from 1; stage s means s rounds applied to the unit-height
starting column.  The base column lives at the left of [0, 1) and spacer
levels are carved from a reserved interval on the right, consumed left to
right, so at every stage the used cells tile an initial segment of [0, 1)
exactly and total measure is one.

Recipes whose total spacer series is irrational (the staircase) are
normalized at a finite realization depth: the base mass is chosen so the
reserve is exhausted exactly at that depth.  Stages of one recipe object
are geometrically nested, so stage consistency holds within a recipe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from .column import Column
from .errors import NotRigid, PreconditionError, StageTooLarge
from .maps import PiecewiseTranslation
from .sets import _frac

DEFAULT_PIECE_BUDGET = 2_000_000


@dataclass(frozen=True)
class CuttingStackingRecipe:
    """Cut-and-stack recipe: cuts(n) subcolumns and spacers(n, j) spacers
    atop subcolumn j at round n (j = 0 .. cuts(n)-1)."""

    name: str
    cuts: Callable[[int], int]
    spacers: Callable[[int, int], int]
    depth: Optional[int] = None
    series_sum: Optional[Fraction] = None
    produces_rigidity: bool = False
    mixing_type: bool = False
    dyadic_only: bool = False

    def cuts_at(self, n: int) -> int:
        k = self.cuts(n)
        if k < 2:
            raise PreconditionError(f"recipe {self.name}: cuts({n}) = {k} < 2")
        return k

    def total_spacers(self, n: int) -> int:
        k = self.cuts_at(n)
        total = 0
        for j in range(k):
            s = self.spacers(n, j)
            if s < 0:
                raise PreconditionError(f"recipe {self.name}: negative spacer count")
            total += s
        return total

    def heights(self, stage: int) -> list[int]:
        """Heights h_0 .. h_stage with h_0 = 1."""
        hs = [1]
        for n in range(1, stage + 1):
            hs.append(self.cuts_at(n) * hs[-1] + self.total_spacers(n))
        return hs

    def base_mass(self) -> Fraction:
        """Mass of the initial column so total measure is exactly one."""
        if self.series_sum is not None:
            return 1 / (1 + self.series_sum)
        if self.depth is None:
            raise PreconditionError(
                f"recipe {self.name} needs a realization depth (irrational spacer series)"
            )
        s = Fraction(0)
        denom = 1
        for n in range(1, self.depth + 1):
            denom *= self.cuts_at(n)
            s += Fraction(self.total_spacers(n), denom)
        return 1 / (1 + s)


def odometer() -> CuttingStackingRecipe:
    """Dyadic odometer: cut in two, no spacers."""
    return CuttingStackingRecipe(
        name="odometer",
        cuts=lambda n: 2,
        spacers=lambda n, j: 0,
        series_sum=Fraction(0),
        produces_rigidity=True,
        dyadic_only=True,
    )


def chacon() -> CuttingStackingRecipe:
    """Chacon's transformation: cut in three, one spacer on the middle
    subcolumn.  Spacer series sum_{n>=1} 3^-n = 1/2, so the base mass is 2/3."""
    return CuttingStackingRecipe(
        name="chacon",
        cuts=lambda n: 3,
        spacers=lambda n, j: 1 if j == 1 else 0,
        series_sum=Fraction(1, 2),
    )


def staircase(depth: int = 8) -> CuttingStackingRecipe:
    """Staircase transformation: cuts(n) = n+1 with j spacers atop subcolumn j.

    The spacer series is irrational, so the realization is normalized at the
    given depth (reserve exhausted exactly at stage ``depth``)."""
    return CuttingStackingRecipe(
        name=f"staircase@{depth}",
        cuts=lambda n: n + 1,
        spacers=lambda n, j: j,
        depth=depth,
        mixing_type=True,
    )


class StagedTransformation:
    """A recipe realized to a finite stage: the exact piecewise translation,
    plus the column view when the transformation is a single stack."""

    def __init__(self, recipe, stage: int, column: Column | None = None, map_=None):
        self.recipe = recipe
        self.stage = stage
        self.column = column
        self._map = map_

    @property
    def map(self) -> PiecewiseTranslation:
        if self._map is None:
            self._map = self.column.to_map()
        return self._map

    @property
    def height(self) -> int:
        return self.column.h if self.column is not None else None

    @property
    def name(self) -> str:
        return f"{self.recipe.name}:{self.stage}"

    def tower(self):
        """Native full-column tower (base = bottom level)."""
        from .towers import extract_tower

        return extract_tower(self, self.column.h, Fraction(0))

    def __repr__(self):
        return f"StagedTransformation({self.name})"


def build_stage(
    recipe: CuttingStackingRecipe,
    stage: int,
    piece_budget: int = DEFAULT_PIECE_BUDGET,
) -> StagedTransformation:
    """Realize the recipe at the given stage as an exact column."""
    if stage < 1:
        raise PreconditionError("stage must be >= 1")
    if recipe.depth is not None and stage > recipe.depth:
        raise StageTooLarge(
            f"stage {stage} exceeds the realization depth {recipe.depth} of {recipe.name}"
        )
    heights = recipe.heights(stage)
    if heights[-1] > piece_budget:
        raise StageTooLarge(
            f"stage {stage} of {recipe.name} needs {heights[-1]} pieces "
            f"(budget {piece_budget})"
        )
    m0 = recipe.base_mass()
    pos = np.zeros(1, dtype=np.int64)
    spacer_next = 1
    denom = 1
    for n in range(1, stage + 1):
        k = recipe.cuts_at(n)
        denom *= k
        spacer_next *= k
        parts = []
        for j in range(k):
            parts.append(pos * k + j)
            nsp = recipe.spacers(n, j)
            if nsp:
                parts.append(np.arange(spacer_next, spacer_next + nsp, dtype=np.int64))
                spacer_next += nsp
        pos = np.concatenate(parts)
    width = m0 / denom
    if recipe.dyadic_only and width.denominator & (width.denominator - 1):
        raise PreconditionError(
            f"recipe {recipe.name} is dyadic-only but stage width is {width}"
        )
    assert len(pos) == spacer_next
    return StagedTransformation(recipe, stage, column=Column(width, pos))


# -- rotations ---------------------------------------------------------------


@dataclass(frozen=True)
class RotationRecipe:
    """Pseudo-recipe for the rotation x -> x + 1/q mod 1 (fully defined map)."""

    q: int
    produces_rigidity: bool = True
    mixing_type: bool = False

    @property
    def name(self) -> str:
        return f"rotation{self.q}"


def rotation(q: int) -> StagedTransformation:
    if q < 2:
        raise PreconditionError("rotation denominator must be >= 2")
    step = Fraction(1, q)
    m = PiecewiseTranslation.from_pairs(
        [(0, 1 - step, step), (1 - step, 1, step - 1)]
    )
    return StagedTransformation(RotationRecipe(q), stage=1, column=None, map_=m)


# -- rigidity ---------------------------------------------------------------


def rigidity_sequence(recipe, count: int) -> list[int]:
    """Rigidity times for a rigidity-producing recipe.

    For odometer-type recipes these are the tower heights h_1..h_count; for
    rotations, the exact return times q, 2q, ...  Staircase-type (mixing)
    recipes have none.
    """
    if count < 0:
        raise PreconditionError("count must be >= 0")
    if isinstance(recipe, RotationRecipe):
        return [recipe.q * (k + 1) for k in range(count)]
    if not getattr(recipe, "produces_rigidity", False):
        raise NotRigid(f"recipe {recipe.name} does not produce a rigidity sequence")
    return recipe.heights(count)[1:]


def rigidity_defect_bound(t: StagedTransformation, k: int) -> Fraction:
    """Upper bound on the relative rigidity defect of T^{h_k} for unions of
    stage-k levels, evaluated at t's build stage (one carry per level)."""
    heights = t.recipe.heights(t.stage)
    if k > t.stage:
        raise PreconditionError("rigidity index beyond the built stage")
    return Fraction(heights[k], heights[t.stage])


# -- recipe files -------------------------------------------------------------
#
# Plain text, "key: value" lines: name, cuts, spacers, optional depth.  The
# expression grammar covers integer constants and the forms "n+c" / "j+c"
# (bare "n" or "j" allowed).  Spacer series are summed in closed form for
# constant recipes; otherwise a depth line is required.


def _parse_expr(text: str, allow_j: bool) -> Callable[..., int]:
    text = text.strip().replace(" ", "")
    var = None
    shift = 0
    if text and (text[0] in "nj"):
        var = text[0]
        rest = text[1:]
        if rest:
            if not rest.startswith("+"):
                raise PreconditionError(f"bad recipe expression {text!r}")
            shift = int(rest[1:])
    else:
        shift = int(text)
    if var == "j" and not allow_j:
        raise PreconditionError("cuts expression may not use j")
    if var is None:
        return lambda n, j=0: shift
    if var == "n":
        return lambda n, j=0: n + shift
    return lambda n, j=0: j + shift


def parse_recipe(text: str, name: str = "recipe") -> CuttingStackingRecipe:
    fields: dict[str, str] = {}
    for ln in text.splitlines():
        ln = ln.strip()
        if not ln or ln.startswith("#"):
            continue
        if ":" not in ln:
            raise PreconditionError(f"bad recipe line {ln!r}")
        key, val = ln.split(":", 1)
        fields[key.strip()] = val.strip()
    if "cuts" not in fields or "spacers" not in fields:
        raise PreconditionError("recipe needs cuts: and spacers: lines")
    name = fields.get("name", name)
    cuts_expr = fields["cuts"].replace(" ", "")
    spacers_expr = fields["spacers"].replace(" ", "")
    cuts_fn = _parse_expr(cuts_expr, allow_j=False)
    spacers_raw = _parse_expr(spacers_expr, allow_j=True)
    depth = int(fields["depth"]) if "depth" in fields else None

    cuts = lambda n: cuts_fn(n)
    spacers = lambda n, j: spacers_raw(n, j)

    series: Optional[Fraction] = None
    if spacers_expr == "0":
        series = Fraction(0)
    elif cuts_expr.isdigit() and spacers_expr.isdigit():
        c = int(cuts_expr)
        x = int(spacers_expr)
        series = Fraction(c * x, c - 1)
    if series is None and depth is None:
        raise PreconditionError(
            "recipe with non-constant spacers needs an explicit depth"
        )
    rigid = spacers_expr == "0"
    mixing = "n" in cuts_expr and spacers_expr in ("j", "j+0")
    return CuttingStackingRecipe(
        name=name,
        cuts=cuts,
        spacers=spacers,
        depth=depth,
        series_sum=series,
        produces_rigidity=rigid,
        mixing_type=mixing,
    )


def recipe_by_name(spec: str, staircase_depth: int = 8):
    """Resolve a builder by name: odometer, chacon, staircase[@depth],
    rotationQ; anything else is read as a recipe file path."""
    if spec == "odometer":
        return odometer()
    if spec == "chacon":
        return chacon()
    if spec == "staircase":
        return staircase(staircase_depth)
    if spec.startswith("staircase@"):
        return staircase(int(spec.split("@", 1)[1]))
    if spec.startswith("rotation"):
        return RotationRecipe(int(spec[len("rotation"):]))
    with open(spec, "r", encoding="utf-8") as fh:
        return parse_recipe(fh.read(), name=spec)


def build(recipe_or_name, stage: int, piece_budget: int = DEFAULT_PIECE_BUDGET):
    """Build a stage from a recipe object or a name as in recipe_by_name."""
    recipe = (
        recipe_by_name(recipe_or_name)
        if isinstance(recipe_or_name, str)
        else recipe_or_name
    )
    if isinstance(recipe, RotationRecipe):
        return rotation(recipe.q)
    return build_stage(recipe, stage, piece_budget)
