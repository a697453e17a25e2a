"""mixlab: exact-rational laboratory for measure-preserving interval maps."""

from .sets import IntervalSet, RationalInterval, set_algebra, set_measure
from .maps import (
    PiecewiseAffineMap,
    PiecewiseTranslation,
    combine,
    compose,
    conjugate,
    disagreement,
    image,
    iterate,
    normalized_transport,
    piecewise_equal,
)

__all__ = [
    "IntervalSet",
    "RationalInterval",
    "set_algebra",
    "set_measure",
    "PiecewiseAffineMap",
    "PiecewiseTranslation",
    "combine",
    "compose",
    "conjugate",
    "disagreement",
    "image",
    "iterate",
    "normalized_transport",
    "piecewise_equal",
]
