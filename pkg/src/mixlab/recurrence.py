"""Exact correlation computation and finite-horizon recurrence verdicts.

The central quantity is the correlation mu(T^n A intersect B), computed
exactly.  Two engines produce it: incremental image sweeps on interval sets
(any transformation), and integer run arithmetic on level sets (column
backed transformations).  Small cases cross-check one against the other.

Every verdict here is a finite-horizon certificate: the checked inequality
held, exactly, for all 0 < |n| <= horizon.  Nothing is claimed beyond the
horizon, and a sweep that reaches the undefined residual of the finite
stage fails loudly instead of guessing.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .builders import StagedTransformation
from .column import LevelSet, cross_measure
from .errors import BoundNotMetWarning, PartiallyUndefined, PreconditionError
from .sets import IntervalSet, _frac


def _sweep_generic(t, A: IntervalSet, B: IntervalSet, ns: Sequence[int]):
    """values[n] = mu(T^n A intersect B) for requested n, walking images
    incrementally; blocked n are reported rather than raised."""
    values: dict[int, Fraction] = {}
    blocked: set[int] = set()
    wanted_pos = sorted(n for n in ns if n > 0)
    wanted_neg = sorted((-n for n in ns if n < 0))
    if 0 in ns:
        values[0] = A.intersect(B).measure()
    m = t.map
    for sign, wanted in ((1, wanted_pos), (-1, wanted_neg)):
        if not wanted:
            continue
        step = m if sign > 0 else m.invert()
        S = A
        k = 0
        dead = False
        for n_abs in range(1, wanted[-1] + 1):
            if not dead:
                try:
                    S = step.image(S)
                except PartiallyUndefined:
                    dead = True
            if k < len(wanted) and wanted[k] == n_abs:
                if dead:
                    blocked.add(sign * n_abs)
                else:
                    values[sign * n_abs] = S.intersect(B).measure()
                k += 1
    return values, blocked


def _sweep_levelset(t, A: LevelSet, B: LevelSet, ns: Sequence[int]):
    values: dict[int, Fraction] = {}
    blocked: set[int] = set()
    back, fwd = A.max_shift()
    for n in ns:
        if n > fwd or -n > back:
            blocked.add(n)
        else:
            values[n] = cross_measure(A, B, n)
    return values, blocked


def _as_pair(t, A, B):
    """Normalize (A, B) onto one engine."""
    a_lvl = isinstance(A, LevelSet)
    b_lvl = isinstance(B, LevelSet)
    if a_lvl and b_lvl:
        return A, B, True
    if a_lvl:
        A = A.to_interval_set()
    if b_lvl:
        B = B.to_interval_set()
    return A, B, False


def sweep(t: StagedTransformation, A, B, ns: Sequence[int]):
    """Exact mu(T^n A intersect B) for every n in ns; returns (values, blocked)."""
    A, B, fast = _as_pair(t, A, B)
    if fast:
        return _sweep_levelset(t, A, B, ns)
    return _sweep_generic(t, A, B, ns)


def correlation(t: StagedTransformation, A, B, n: int) -> Fraction:
    """Exact mu(T^n A intersect B); PartiallyUndefined if the stage cannot
    resolve the query."""
    values, blocked = sweep(t, A, B, [n])
    if n in blocked:
        raise PartiallyUndefined(f"T^{n} of the set is blocked at this stage", n=n)
    return values[n]


def set_measure_of(A) -> Fraction:
    return A.measure()


@dataclass
class CorrelationTable:
    """Correlations of a set pair over n in [-horizon, horizon].

    ``undefined_ns`` lists the n whose sweep hit the stage residual; those
    have no exact value and are omitted from the CSV.
    """

    horizon: int
    mu_a: Fraction
    mu_b: Fraction
    values: dict[int, Fraction]
    undefined_ns: tuple[int, ...]

    @property
    def mu_product(self) -> Fraction:
        return self.mu_a * self.mu_b

    def margin(self, n: int) -> Fraction:
        return self.values[n] - self.mu_product

    def to_csv(self) -> str:
        ref = self.mu_product
        lines = ["n,num,den,muA2_num,muA2_den,margin_num,margin_den"]
        for n in sorted(self.values):
            v = self.values[n]
            m = v - ref
            lines.append(
                f"{n},{v.numerator},{v.denominator},"
                f"{ref.numerator},{ref.denominator},{m.numerator},{m.denominator}"
            )
        return "\n".join(lines) + "\n"


def correlation_table(t: StagedTransformation, A, B, horizon: int) -> CorrelationTable:
    ns = list(range(-horizon, horizon + 1))
    values, blocked = sweep(t, A, B, ns)
    return CorrelationTable(
        horizon=horizon,
        mu_a=A.measure(),
        mu_b=B.measure(),
        values=values,
        undefined_ns=tuple(sorted(blocked)),
    )


@dataclass
class RecurrenceVerdict:
    """Finite-horizon recurrence certificate.

    ``margin`` is the worst slack of the certified inequality over the
    horizon.  For kind "none", ``witness`` records the smallest |n| at which
    the over-recurrence inequality failed (or, if it never failed, the n at
    which strict under-recurrence failed) and ``margin`` is the worst
    over-recurrence slack.
    """

    kind: str
    horizon: int
    margin: Fraction
    eps: Optional[Fraction] = None
    witness: Optional[int] = None


def classify(
    t: StagedTransformation,
    A,
    horizon: int,
    eps=None,
) -> RecurrenceVerdict:
    """Check the recurrence inequalities for all 0 < |n| <= horizon.

    Over-recurrent variants quantify over both signs of n; under-recurrent
    variants over positive n only.  Returns the strongest verdict that
    holds, with its exact worst margin.
    """
    mu = A.measure()
    if not (0 < mu < 1):
        raise PreconditionError("classification needs 0 < mu(A) < 1")
    if horizon < 1:
        raise PreconditionError("horizon must be >= 1")
    eps = None if eps is None else _frac(eps)
    ns = [n for n in range(-horizon, horizon + 1) if n != 0]
    values, blocked = sweep(t, A, A, ns)
    pos_blocked = sorted(n for n in blocked if n > 0)
    if pos_blocked:
        n0 = pos_blocked[0]
        raise PartiallyUndefined(
            f"classification blocked at n = {n0} (stage residual)", n=n0
        )
    mu2 = mu * mu
    pos_vals = [values[n] for n in ns if n > 0]
    max_pos = max(pos_vals)
    min_pos = min(pos_vals)
    both_sides = not blocked
    min_all = min(values.values()) if both_sides else None

    # over-recurrent variants quantify over all n in Z, so they need the
    # negative side of the sweep; under-recurrent variants use n in N only
    if both_sides and min_all > mu2:
        return RecurrenceVerdict("strictlyOverRecurrent", horizon, min_all - mu2)
    if max_pos < mu2:
        return RecurrenceVerdict("strictlyUnderRecurrent", horizon, mu2 - max_pos)
    if both_sides and min_all >= mu2:
        return RecurrenceVerdict("overRecurrent", horizon, min_all - mu2)
    if max_pos <= mu2:
        return RecurrenceVerdict("underRecurrent", horizon, mu2 - max_pos)
    if eps is not None:
        if both_sides and min_all > (1 - eps) * mu2:
            return RecurrenceVerdict(
                "epsOverRecurrent", horizon, min_all - (1 - eps) * mu2, eps=eps
            )
        if max_pos < (1 + eps) * mu2:
            return RecurrenceVerdict(
                "epsUnderRecurrent", horizon, (1 + eps) * mu2 - max_pos, eps=eps
            )
    if not both_sides:
        n0 = min(blocked, key=abs)
        raise PartiallyUndefined(
            f"no positive-side verdict holds and the sweep is blocked at n = {n0}",
            n=n0,
        )
    order = sorted(ns, key=lambda n: (abs(n), n < 0))
    over_fail = [n for n in order if values[n] <= mu2]
    under_fail = [n for n in order if n > 0 and values[n] >= mu2]
    witness = over_fail[0] if over_fail else under_fail[0]
    return RecurrenceVerdict("none", horizon, min_all - mu2, eps=eps, witness=witness)


VERDICT_ORDER = [
    "strictlyOverRecurrent",
    "strictlyUnderRecurrent",
    "overRecurrent",
    "underRecurrent",
    "epsOverRecurrent",
    "epsUnderRecurrent",
    "none",
]


def required_n(alpha, eps) -> int:
    """Smallest N with alpha/N < eps (the pairwise-intersection bound)."""
    alpha = _frac(alpha)
    eps = _frac(eps)
    if not (0 < alpha <= 1) or eps <= 0:
        raise PreconditionError("need 0 < alpha <= 1 and eps > 0")
    n = int(alpha / eps) + 1
    return max(n, 2)


def lemma_pair_search(sets: Sequence[IntervalSet], eps):
    """Find the pair (j < k) maximizing mu(A_j intersect A_k).

    All sets must share one measure alpha.  When the family is long enough
    (alpha/N < eps) the maximizing value is guaranteed to exceed
    alpha^2 - eps; if the family is too short a BoundNotMetWarning is
    issued and the maximizing pair is still returned.
    """
    eps = _frac(eps)
    if len(sets) < 2:
        raise PreconditionError("need at least two sets")
    alpha = sets[0].measure()
    if not (0 < alpha <= 1):
        raise PreconditionError("common measure must be in (0, 1]")
    for s in sets[1:]:
        if s.measure() != alpha:
            raise PreconditionError("sets must share a common measure")
    n = len(sets)
    if not (alpha / n < eps):
        warnings.warn(
            f"family of {n} sets is below the guaranteed size {required_n(alpha, eps)}",
            BoundNotMetWarning,
        )
    best = None
    for j in range(n):
        for k in range(j + 1, n):
            v = sets[j].intersect(sets[k]).measure()
            if best is None or v > best[2]:
                best = (j, k, v)
    return best


def mean_ergodic_average(t: StagedTransformation, A, h: int) -> Fraction:
    """(1/h) * sum_{i=0}^{h-1} mu(T^i A intersect A), exactly."""
    if h < 1:
        raise PreconditionError("averaging length must be >= 1")
    ns = list(range(h))
    values, blocked = sweep(t, A, A, ns)
    if blocked:
        n0 = min(blocked)
        raise PartiallyUndefined(f"average blocked at i = {n0}", n=n0)
    return sum(values.values(), Fraction(0)) / h


def under_recurrence_witness(
    t: StagedTransformation, A, lo: int, hi: int
) -> Optional[int]:
    """Smallest n in [lo, hi] with mu(T^n A intersect A) < mu(A)^2, if any."""
    mu = A.measure()
    if not (0 < mu < 1):
        raise PreconditionError("witness search needs 0 < mu(A) < 1")
    if lo < 1 or hi < lo:
        raise PreconditionError("need 1 <= lo <= hi")
    mu2 = mu * mu
    values, blocked = sweep(t, A, A, list(range(lo, hi + 1)))
    for n in range(lo, hi + 1):
        if n in blocked:
            raise PartiallyUndefined(
                f"witness search blocked at n = {n} before finding a witness", n=n
            )
        if values[n] < mu2:
            return n
    return None
