"""Certified complex root enclosures with exact rational interval arithmetic.

Intervals carry exact Fraction endpoints (dyadic after rounding steps), so
interval addition and multiplication are exact; only explicit rounding
fattens endpoints.  A box certifiably contains exactly one root of h when
built through `certified_roots`: the radius n*|h(z)/h'(z)| guarantees a
root nearby, and pairwise disjointness pins each box to a single root.
"""

from __future__ import annotations

from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import mpmath

from .errors import NotWeil, PrecisionExhausted

_ZERO = Fraction(0)


def frac_from_mpf(x) -> Fraction:
    """Exact Fraction value of an mpmath mpf."""
    sign, man, exp, _ = mpmath.mpf(x)._mpf_
    man = int(man)  # may be a gmpy2 mpz depending on the mpmath backend
    exp = int(exp)
    if man == 0:
        return Fraction(0)
    v = Fraction(-man if sign else man)
    if exp >= 0:
        return v * (1 << exp)
    return v / (1 << -exp)


def _dyadic_round(f: Fraction, bits: int, up: bool) -> Fraction:
    """Outward dyadic rounding to the given precision."""
    scaled = f * (1 << bits)
    num = scaled.numerator
    den = scaled.denominator
    q, r = divmod(num, den)
    if r and up:
        q += 1
    return Fraction(q, 1 << bits)


class RealInterval:
    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi=None):
        if hi is None:
            hi = lo
        self.lo = Fraction(lo)
        self.hi = Fraction(hi)
        assert self.lo <= self.hi

    def __add__(self, o):
        o = _as_real(o)
        return RealInterval(self.lo + o.lo, self.hi + o.hi)

    __radd__ = __add__

    def __neg__(self):
        return RealInterval(-self.hi, -self.lo)

    def __sub__(self, o):
        return self + (-_as_real(o))

    def __rsub__(self, o):
        return _as_real(o) + (-self)

    def __mul__(self, o):
        o = _as_real(o)
        cands = (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi)
        return RealInterval(min(cands), max(cands))

    __rmul__ = __mul__

    def inverse(self) -> "RealInterval":
        if self.contains_zero():
            raise ZeroDivisionError("interval contains zero")
        return RealInterval(min(1 / self.lo, 1 / self.hi), max(1 / self.lo, 1 / self.hi))

    def __truediv__(self, o):
        return self * _as_real(o).inverse()

    def contains_zero(self) -> bool:
        return self.lo <= 0 <= self.hi

    def is_positive(self) -> bool:
        return self.lo > 0

    def is_negative(self) -> bool:
        return self.hi < 0

    def width(self) -> Fraction:
        return self.hi - self.lo

    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def round(self, bits: int) -> "RealInterval":
        return RealInterval(_dyadic_round(self.lo, bits, False), _dyadic_round(self.hi, bits, True))

    def intersects(self, o: "RealInterval") -> bool:
        return not (self.hi < o.lo or o.hi < self.lo)

    def __repr__(self):
        return f"[{float(self.lo):.6g}, {float(self.hi):.6g}]"


def _as_real(v) -> RealInterval:
    if isinstance(v, RealInterval):
        return v
    return RealInterval(Fraction(v))


class ComplexInterval:
    __slots__ = ("re", "im")

    def __init__(self, re: RealInterval, im: RealInterval):
        self.re = re
        self.im = im

    def __add__(self, o):
        o = _as_complex(o)
        return ComplexInterval(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return ComplexInterval(-self.re, -self.im)

    def __sub__(self, o):
        return self + (-_as_complex(o))

    def __rsub__(self, o):
        return _as_complex(o) + (-self)

    def __mul__(self, o):
        o = _as_complex(o)
        return ComplexInterval(self.re * o.re - self.im * o.im,
                               self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def conj(self):
        return ComplexInterval(self.re, -self.im)

    def abs2(self) -> RealInterval:
        a = self.re * self.re + self.im * self.im
        return RealInterval(max(_ZERO, a.lo), a.hi)

    def inverse(self) -> "ComplexInterval":
        d = self.abs2()
        if d.contains_zero():
            raise ZeroDivisionError("complex interval contains zero")
        di = d.inverse()
        return ComplexInterval(self.re * di, -(self.im * di))

    def __truediv__(self, o):
        return self * _as_complex(o).inverse()

    def contains_zero(self) -> bool:
        return self.re.contains_zero() and self.im.contains_zero()

    def is_disjoint(self, o: "ComplexInterval") -> bool:
        return not (self.re.intersects(o.re) and self.im.intersects(o.im))

    def width(self) -> Fraction:
        return max(self.re.width(), self.im.width())

    def mid(self) -> Tuple[Fraction, Fraction]:
        return (self.re.mid(), self.im.mid())

    def round(self, bits: int) -> "ComplexInterval":
        return ComplexInterval(self.re.round(bits), self.im.round(bits))

    def __repr__(self):
        return f"({self.re} + {self.im} i)"


def _as_complex(v) -> ComplexInterval:
    if isinstance(v, ComplexInterval):
        return v
    if isinstance(v, RealInterval):
        return ComplexInterval(v, RealInterval(0))
    return ComplexInterval(RealInterval(Fraction(v)), RealInterval(0))


def eval_poly(coeffs: Sequence, z: ComplexInterval) -> ComplexInterval:
    """Evaluate sum coeffs[i] z^i (coeffs low->high, ints/Fractions)."""
    acc = _as_complex(coeffs[-1])
    for c in reversed(coeffs[:-1]):
        acc = acc * z + _as_complex(c)
    return acc


def eval_poly_frac(coeffs: Sequence[Fraction], z: ComplexInterval) -> ComplexInterval:
    return eval_poly(coeffs, z)


class RootEnclosures:
    """Certified, canonically ordered enclosures of the roots of a
    squarefree integer polynomial, with conjugate-pair data for Weil
    polynomials (pair of z is q/z = conj(z))."""

    def __init__(self, coeffs: Sequence[int], q: Optional[int] = None, bits: int = 96):
        self.coeffs = [int(c) for c in coeffs]
        self.q = q
        self.n = len(coeffs) - 1
        self.bits = bits
        self.boxes: List[ComplexInterval] = []
        self.pair: List[int] = []
        self._isolate(bits)

    # -- construction ---------------------------------------------------------
    def _isolate(self, bits: int):
        n = self.n
        dps = max(30, int(bits * 0.302) + 15)
        for attempt in range(6):
            with mpmath.workdps(dps):
                approx = mpmath.polyroots([mpmath.mpf(c) for c in reversed(self.coeffs)],
                                          maxsteps=200, extraprec=dps * 4)
            boxes = []
            dcoeffs = [i * self.coeffs[i] for i in range(1, n + 1)]
            ok = True
            for z in approx:
                z = mpmath.mpc(z)
                zre = frac_from_mpf(z.real)
                zim = frac_from_mpf(z.imag)
                pt = ComplexInterval(RealInterval(zre), RealInterval(zim))
                hv = eval_poly(self.coeffs, pt)
                dv = eval_poly(dcoeffs, pt)
                if dv.contains_zero():
                    ok = False
                    break
                ratio = hv * dv.inverse()
                rad = n * _sqrt_upper(ratio.abs2().hi)
                box = ComplexInterval(
                    RealInterval(zre - rad, zre + rad),
                    RealInterval(zim - rad, zim + rad),
                ).round(4 * bits)
                boxes.append(box)
            if ok and _pairwise_disjoint(boxes):
                self.boxes = boxes
                self._refine_all(bits)
                try:
                    self._order_and_pair()
                    return
                except PrecisionExhausted:
                    pass
            dps *= 2
        raise PrecisionExhausted("could not isolate roots")

    def _refine_box(self, box: ComplexInterval, target: Fraction) -> ComplexInterval:
        dcoeffs = [i * self.coeffs[i] for i in range(1, self.n + 1)]
        bits = self.bits
        while box.width() > target:
            mre, mim = box.mid()
            mid = ComplexInterval(RealInterval(mre), RealInterval(mim))
            try:
                step = eval_poly(self.coeffs, mid) * eval_poly(dcoeffs, box).inverse()
            except ZeroDivisionError:
                raise PrecisionExhausted("derivative interval hit zero during refinement")
            new = (mid - step).round(8 * bits)
            nre = RealInterval(max(new.re.lo, box.re.lo), min(new.re.hi, box.re.hi))
            nim = RealInterval(max(new.im.lo, box.im.lo), min(new.im.hi, box.im.hi))
            if nre.lo > nre.hi or nim.lo > nim.hi:
                raise PrecisionExhausted("interval Newton lost the root")
            shrunk = ComplexInterval(nre, nim)
            if shrunk.width() >= box.width():
                bits *= 2
                if bits > 1 << 16:
                    raise PrecisionExhausted("refinement stalled")
            box = shrunk
        return box

    def _refine_all(self, bits: int):
        target = Fraction(1, 1 << bits)
        self.boxes = [self._refine_box(b, target) for b in self.boxes]

    def _order_and_pair(self):
        idx = sorted(range(self.n), key=lambda i: (self.boxes[i].re.mid(), self.boxes[i].im.mid()))
        self.boxes = [self.boxes[i] for i in idx]
        # conjugate pairing: conj(z) is also a root; for Weil polynomials it
        # equals q/z.  Match each box against the conjugates.
        pair = [-1] * self.n
        for i, b in enumerate(self.boxes):
            cb = b.conj()
            hits = [j for j, b2 in enumerate(self.boxes) if not cb.is_disjoint(b2)]
            if len(hits) != 1:
                raise PrecisionExhausted("conjugate pairing ambiguous; refine more")
            pair[i] = hits[0]
        for i in range(self.n):
            if pair[pair[i]] != i:
                raise PrecisionExhausted("conjugate pairing inconsistent")
            if pair[i] == i and self.q is not None:
                raise NotWeil("real root detected: class is not ordinary/squarefree CM")
        self.pair = pair

    # -- queries ---------------------------------------------------------------
    def refine_to(self, bits: int):
        """Re-isolate at higher precision; cheaper than interval Newton on
        very thin boxes."""
        if bits <= self.bits:
            return
        old_boxes = self.boxes
        self.bits = bits
        self._isolate(bits)
        # sanity: the refined boxes must sit inside the old ones (same order)
        for old, new in zip(old_boxes, self.boxes):
            if new.is_disjoint(old):
                raise PrecisionExhausted("refinement reordered roots")

    def eval_element_box(self, num: Sequence[int], den: int, i: int) -> ComplexInterval:
        """Enclosure of sigma_i(x) for x with power-basis coords num/den."""
        box = eval_poly(list(num), self.boxes[i])
        return box * Fraction(1, den)

    def upper_half_indices(self) -> List[int]:
        out = []
        for i, b in enumerate(self.boxes):
            if b.im.is_positive():
                out.append(i)
            elif not b.im.is_negative():
                raise PrecisionExhausted("imaginary sign undecided")
        return out


def _pairwise_disjoint(boxes: List[ComplexInterval]) -> bool:
    for i in range(len(boxes)):
        for j in range(i + 1, len(boxes)):
            if not boxes[i].is_disjoint(boxes[j]):
                return False
    return True


def _sqrt_upper(f: Fraction) -> Fraction:
    """A dyadic upper bound for sqrt(f), f >= 0."""
    if f == 0:
        return _ZERO
    # sqrt(p/q) = sqrt(p*q)/q <= (isqrt(p*q)+1)/q
    from math import isqrt

    p, q = f.numerator, f.denominator
    return Fraction(isqrt(p * q) + 1, q)


def enclosures_of(alg, bits: int = 96) -> "RootEnclosures":
    """Shared per-algebra enclosure cache."""
    enc = getattr(alg, "_root_enclosures", None)
    if enc is None:
        enc = RootEnclosures(list(alg.poly_coeffs), q=getattr(alg, "q", None), bits=bits)
        alg._root_enclosures = enc
    return enc
