"""Piecewise affine and piecewise translation maps on [0, 1).

A map is a finite list of pieces (source interval, scale, offset) acting as
x -> scale*x + offset on its source.  Sources are pairwise disjoint, images
are pairwise disjoint and stay inside [0, 1).  A ``PiecewiseTranslation``
has every scale equal to one and is measure preserving; the part of [0, 1)
not covered by its sources is the undefined residual of the finite stage,
and any operation that touches it fails loudly with ``PartiallyUndefined``.

All values are immutable; operations are pure functions.
"""

from __future__ import annotations

from bisect import bisect_right
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import EmptySetError, PartiallyUndefined, PreconditionError
from .sets import ONE, ZERO, IntervalSet, RationalInterval, _frac, _fmt, parse_fraction


class MapPiece:
    """One affine piece: x -> scale*x + offset for x in src."""

    __slots__ = ("src", "scale", "offset")

    def __init__(self, src: RationalInterval, scale: Fraction, offset: Fraction):
        self.src = src
        self.scale = _frac(scale)
        self.offset = _frac(offset)
        if self.scale <= 0:
            raise PreconditionError("map pieces must have positive scale")

    @property
    def image(self) -> RationalInterval:
        return RationalInterval(
            self.scale * self.src.lo + self.offset,
            self.scale * self.src.hi + self.offset,
        )

    def apply(self, x: Fraction) -> Fraction:
        return self.scale * x + self.offset

    def key(self):
        return (self.scale, self.offset)

    def __repr__(self):
        return f"{self.src} -> *{self.scale}+{self.offset}"


def _canonical_pieces(pieces: Iterable[MapPiece]) -> tuple[MapPiece, ...]:
    """Sort by source, merge contiguous pieces with identical affine law."""
    items = sorted(pieces, key=lambda p: p.src.lo)
    out: list[MapPiece] = []
    for p in items:
        if out:
            last = out[-1]
            if p.src.lo < last.src.hi:
                raise PreconditionError("map sources overlap")
            if p.src.lo == last.src.hi and p.key() == last.key():
                out[-1] = MapPiece(
                    RationalInterval(last.src.lo, p.src.hi), p.scale, p.offset
                )
                continue
        out.append(p)
    return tuple(out)


class PiecewiseAffineMap:
    """Finite piecewise affine injection with disjoint image inside [0, 1)."""

    __slots__ = ("pieces", "_src_los")

    def __init__(self, pieces: Iterable[MapPiece], _canonical: bool = False):
        ps = tuple(pieces) if _canonical else _canonical_pieces(pieces)
        img_sorted = sorted(ps, key=lambda p: p.image.lo)
        for a, b in zip(img_sorted, img_sorted[1:]):
            if b.image.lo < a.image.hi:
                raise PreconditionError("map images overlap")
        for p in ps:
            if not (ZERO <= p.image.lo and p.image.hi <= ONE):
                raise PreconditionError(f"piece image {p.image} leaves [0,1)")
        self.pieces: tuple[MapPiece, ...] = ps
        self._src_los = [p.src.lo for p in ps]

    @classmethod
    def from_triples(cls, triples: Iterable[tuple]) -> "PiecewiseAffineMap":
        return cls(
            MapPiece(RationalInterval(_frac(a), _frac(b)), _frac(s), _frac(o))
            for (a, b, s, o) in triples
        )

    # -- basic queries -----------------------------------------------------

    def domain(self) -> IntervalSet:
        return IntervalSet(tuple(p.src for p in self.pieces))

    def range(self) -> IntervalSet:
        return IntervalSet(tuple(p.image for p in self.pieces))

    def is_translation(self) -> bool:
        return all(p.scale == 1 for p in self.pieces)

    def domain_measure(self) -> Fraction:
        return self.domain().measure()

    def piece_for(self, x: Fraction):
        i = bisect_right(self._src_los, x) - 1
        if i >= 0 and self.pieces[i].src.contains(x):
            return self.pieces[i]
        return None

    def apply_point(self, x) -> Fraction:
        x = _frac(x)
        p = self.piece_for(x)
        if p is None:
            raise PartiallyUndefined(f"map undefined at {x}")
        return p.apply(x)

    # -- set images --------------------------------------------------------

    def image(self, s: IntervalSet) -> IntervalSet:
        """Forward image of s.  Requires s inside the domain."""
        out = []
        blocked = ZERO
        los = self._src_los
        for piece_set in s.pieces:
            lo, hi = piece_set.lo, piece_set.hi
            i = max(bisect_right(los, lo) - 1, 0)
            covered = lo
            while i < len(self.pieces) and self.pieces[i].src.lo < hi:
                p = self.pieces[i]
                a = max(lo, p.src.lo)
                b = min(hi, p.src.hi)
                if a < b:
                    if a > covered:
                        blocked += a - covered
                    covered = b
                    out.append(RationalInterval(p.apply(a), p.apply(b)))
                i += 1
            if covered < hi:
                blocked += hi - covered
        if blocked > 0:
            raise PartiallyUndefined(
                f"set meets the undefined residual (measure {blocked})",
                blocking_measure=blocked,
            )
        return IntervalSet(out)

    def preimage(self, s: IntervalSet) -> IntervalSet:
        return self.invert().image(s)

    # -- structural operations ----------------------------------------------

    def invert(self) -> "PiecewiseAffineMap":
        inv = [
            MapPiece(p.image, 1 / p.scale, -p.offset / p.scale) for p in self.pieces
        ]
        return _wrap(_canonical_pieces(inv))

    def compose(self, inner: "PiecewiseAffineMap") -> "PiecewiseAffineMap":
        """self after inner: x -> self(inner(x)), on the exact common domain."""
        out = []
        los = self._src_los
        for q in inner.pieces:
            img = q.image
            i = max(bisect_right(los, img.lo) - 1, 0)
            while i < len(self.pieces) and self.pieces[i].src.lo < img.hi:
                p = self.pieces[i]
                a = max(img.lo, p.src.lo)
                b = min(img.hi, p.src.hi)
                if a < b:
                    src = RationalInterval(
                        (a - q.offset) / q.scale, (b - q.offset) / q.scale
                    )
                    out.append(
                        MapPiece(src, p.scale * q.scale, p.scale * q.offset + p.offset)
                    )
                i += 1
        return _wrap(_canonical_pieces(out))

    def restrict(self, s: IntervalSet) -> "PiecewiseAffineMap":
        out = []
        for p in self.pieces:
            for piece_set in s.intersect(IntervalSet((p.src,), _canonical=True)).pieces:
                out.append(MapPiece(piece_set, p.scale, p.offset))
        return _wrap(_canonical_pieces(out))

    def __eq__(self, other):
        if not isinstance(other, PiecewiseAffineMap):
            return NotImplemented
        return [(p.src, p.scale, p.offset) for p in self.pieces] == [
            (p.src, p.scale, p.offset) for p in other.pieces
        ]

    def __hash__(self):
        return hash(tuple((p.src, p.scale, p.offset) for p in self.pieces))

    def __repr__(self):
        name = type(self).__name__
        return f"{name}({len(self.pieces)} pieces, domain measure {self.domain_measure()})"


class PiecewiseTranslation(PiecewiseAffineMap):
    """Measure-preserving piecewise translation; scale is one on every piece.

    The undefined residual is the complement of the sources in [0, 1); it is
    derived, so the invariant sources + residual = [0, 1) cannot drift.
    """

    __slots__ = ()

    def __init__(self, pieces, _canonical: bool = False):
        super().__init__(pieces, _canonical=_canonical)
        for p in self.pieces:
            if p.scale != 1:
                raise PreconditionError("translation piece with scale != 1")

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple]) -> "PiecewiseTranslation":
        """Build from (lo, hi, offset) triples."""
        return cls(
            MapPiece(RationalInterval(_frac(a), _frac(b)), Fraction(1), _frac(o))
            for (a, b, o) in pairs
        )

    @classmethod
    def identity(cls, domain: IntervalSet | None = None) -> "PiecewiseTranslation":
        dom = IntervalSet.unit() if domain is None else domain
        return cls.from_pairs((p.lo, p.hi, 0) for p in dom.pieces)

    @property
    def undefined_residual(self) -> IntervalSet:
        return self.domain().complement()


def _wrap(pieces: tuple[MapPiece, ...]) -> PiecewiseAffineMap:
    """Return the most specific map type for canonical pieces."""
    if all(p.scale == 1 for p in pieces):
        return PiecewiseTranslation(pieces, _canonical=True)
    return PiecewiseAffineMap(pieces, _canonical=True)


def combine(maps: Sequence[PiecewiseAffineMap]) -> PiecewiseAffineMap:
    """Glue maps with disjoint domains and disjoint images into one map."""
    pieces: list[MapPiece] = []
    for m in maps:
        pieces.extend(m.pieces)
    return _wrap(_canonical_pieces(pieces))


def compose(outer: PiecewiseAffineMap, inner: PiecewiseAffineMap) -> PiecewiseAffineMap:
    return outer.compose(inner)


def conjugate(phi: PiecewiseAffineMap, m: PiecewiseAffineMap) -> PiecewiseAffineMap:
    """phi^-1 after m after phi, the conjugated action on phi's domain."""
    return phi.invert().compose(m).compose(phi)


def iterate(m: PiecewiseAffineMap, n: int) -> PiecewiseAffineMap:
    """Exact n-fold composition; negative n composes the inverse.

    iterate(m, 0) is the identity on the full domain of m.  The undefined
    residual grows monotonically with |n| because each composition keeps
    only points whose whole orbit segment stays defined.
    """
    if n == 0:
        return PiecewiseTranslation.identity(m.domain())
    base = m if n > 0 else m.invert()
    k = abs(n)
    result = None
    power = base
    while k:
        if k & 1:
            result = power if result is None else power.compose(result)
        k >>= 1
        if k:
            power = power.compose(power)
    return result


def image(m: PiecewiseAffineMap, s: IntervalSet) -> IntervalSet:
    return m.image(s)


def normalized_transport(src: IntervalSet, dst: IntervalSet) -> PiecewiseAffineMap:
    """The order-preserving piecewise affine bijection src -> dst.

    Uses the single constant scale measure(dst)/measure(src), so it pushes
    normalized Lebesgue measure on src to normalized Lebesgue measure on dst.
    """
    mu_src = src.measure()
    mu_dst = dst.measure()
    if mu_src == 0 or mu_dst == 0:
        raise EmptySetError("normalized transport requires nonempty sets")
    scale = mu_dst / mu_src
    pieces = []
    dst_iter = iter(dst.pieces)
    d = next(dst_iter)
    d_lo = d.lo
    for spiece in src.pieces:
        s_lo = spiece.lo
        while s_lo < spiece.hi:
            room = (d.hi - d_lo) / scale
            take = min(spiece.hi - s_lo, room)
            pieces.append(
                MapPiece(
                    RationalInterval(s_lo, s_lo + take),
                    scale,
                    d_lo - scale * s_lo,
                )
            )
            s_lo += take
            d_lo += take * scale
            if d_lo == d.hi:
                d = next(dst_iter, None)
                if d is None:
                    if s_lo < spiece.hi or spiece is not src.pieces[-1]:
                        raise PreconditionError("transport ran out of target mass")
                    break
                d_lo = d.lo
    return _wrap(_canonical_pieces(pieces))


def disagreement(a: PiecewiseAffineMap, b: PiecewiseAffineMap) -> IntervalSet:
    """The exact set where a and b differ.

    Points defined under only one map count as disagreement.  Two affine
    pieces with different laws agree on at most one point, so their whole
    overlap is included (single points are null).
    """
    dom_a, dom_b = a.domain(), b.domain()
    out = [dom_a.symmetric_difference(dom_b)]
    common = dom_a.intersect(dom_b)
    for piece_set in common.pieces:
        cuts = {piece_set.lo, piece_set.hi}
        for m in (a, b):
            for p in m.pieces:
                if piece_set.lo < p.src.lo < piece_set.hi:
                    cuts.add(p.src.lo)
                if piece_set.lo < p.src.hi < piece_set.hi:
                    cuts.add(p.src.hi)
        points = sorted(cuts)
        diff_pieces = []
        for lo, hi in zip(points, points[1:]):
            pa = a.piece_for(lo)
            pb = b.piece_for(lo)
            if pa.key() != pb.key():
                diff_pieces.append(RationalInterval(lo, hi))
        out.append(IntervalSet(diff_pieces))
    result = IntervalSet.empty()
    for s in out:
        result = result.union(s)
    return result


def piecewise_equal(a: PiecewiseAffineMap, b: PiecewiseAffineMap) -> bool:
    """Exact equality as partial maps (same domain, same action)."""
    return disagreement(a, b).is_empty()


# -- serialization ---------------------------------------------------------


def dump_translation(m: PiecewiseTranslation) -> str:
    lines = [f"piecewisetranslation {len(m.pieces)}"]
    for p in m.pieces:
        lines.append(f"{_fmt(p.src.lo)} {_fmt(p.src.hi)} {_fmt(p.offset)}")
    return "\n".join(lines) + "\n"


def load_translation(text: str) -> PiecewiseTranslation:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("piecewisetranslation "):
        raise PreconditionError("missing piecewisetranslation header")
    count = int(lines[0].split()[1])
    if len(lines) - 1 != count:
        raise PreconditionError(f"expected {count} pieces, found {len(lines) - 1}")
    triples = []
    for ln in lines[1:]:
        lo, hi, off = ln.split()
        triples.append((parse_fraction(lo), parse_fraction(hi), parse_fraction(off)))
    return PiecewiseTranslation.from_pairs(triples)
