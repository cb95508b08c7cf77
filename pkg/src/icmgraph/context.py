"""The per-isogeny-class computation context.

IsogenyClass bundles the Weil polynomial, the algebra, the Frobenius and
maximal orders, overorders, unit group, class group and the per-overorder
Picard machinery, with lazy caching.  Everything downstream (ICM, graphs,
polarizations) works through this object.
"""

from __future__ import annotations

from typing import Dict, List, Optional, Sequence, Tuple

import sympy

from .algebra import Element, EtaleAlgebra
from .errors import MissingArithmeticData
from .ideals import FractionalIdeal
from .orders import (Order, conductor, frobenius_order, is_bass, is_gorenstein,
                     maximal_ideals_with_index_dividing, maximal_order, overorders,
                     singular_maximal_ideals)
from .picard import ClassGroupOK, PicardGroup
from .units import UnitGroup, compute_unit_group
from .weil import WeilPolynomial, validate_weil, weil_from_label


class IsogenyClass:
    def __init__(self, weil: WeilPolynomial, ingested_units: Optional[List] = None):
        self.weil = weil
        self.K = EtaleAlgebra(weil)
        self.R = frobenius_order(self.K)
        self.OK = maximal_order(self.R)
        self._ingested_units = ingested_units
        self._overorders: Optional[List[Order]] = None
        self._units: Optional[UnitGroup] = None
        self._classgroup: Optional[ClassGroupOK] = None
        self._pics: Dict[Tuple, PicardGroup] = {}
        self._order_index: Optional[Dict[Tuple, int]] = None
        self._conductor: Optional[FractionalIdeal] = None
        self._ext_cache: Dict[Tuple, List[Tuple[int, ...]]] = {}
        self._unit_lattice_cache: Dict[Tuple, List[List[int]]] = {}
        self._conj_order_cache: Dict[Tuple, int] = {}

    @classmethod
    def from_weil(cls, q: int, coeffs: Sequence[int], **kw) -> "IsogenyClass":
        return cls(validate_weil(q, list(coeffs)), **kw)

    @classmethod
    def from_label(cls, label: str, **kw) -> "IsogenyClass":
        return cls(weil_from_label(label), **kw)

    # -- order structure ---------------------------------------------------------
    @property
    def conductor_R(self) -> FractionalIdeal:
        if self._conductor is None:
            self._conductor = conductor(self.R, self.OK)
        return self._conductor

    @property
    def overorders(self) -> List[Order]:
        if self._overorders is None:
            self._overorders = overorders(self.R, self.OK)
            self._order_index = {S.lattice.key: i for i, S in enumerate(self._overorders)}
        return self._overorders

    def order_id(self, lattice: FractionalIdeal) -> int:
        self.overorders
        i = self._order_index.get(lattice.key)
        if i is None:
            raise MissingArithmeticData("lattice is not one of the overorders")
        return i

    def conjugate_order_id(self, i: int) -> int:
        key = (i,)
        if key not in self._conj_order_cache:
            S = self.overorders[i]
            self._conj_order_cache[key] = self.order_id(S.lattice.conjugate())
        return self._conj_order_cache[key]

    @property
    def bad_primes(self) -> List[int]:
        idx = self.R.index_in(self.OK)
        return sorted(int(p) for p in sympy.factorint(idx)) if idx > 1 else []

    def singular_primes_of_R(self):
        return singular_maximal_ideals(self.R, self.OK)

    def maximal_ideals_dividing(self, D: int):
        return maximal_ideals_with_index_dividing(self.R, D)

    def is_bass(self) -> bool:
        return is_bass(self.R, self.overorders)

    # -- arithmetic data -----------------------------------------------------------
    @property
    def units(self) -> UnitGroup:
        if self._units is None:
            self._units = compute_unit_group(self.K, self.OK, ingested=self._ingested_units)
        return self._units

    @property
    def classgroup(self) -> ClassGroupOK:
        if self._classgroup is None:
            self._classgroup = ClassGroupOK(self.OK, self.units, bad_primes=self.bad_primes)
        return self._classgroup

    def pic(self, i: int) -> PicardGroup:
        """Pic of the i-th overorder."""
        key = (i,)
        if key not in self._pics:
            self._pics[key] = PicardGroup(self.overorders[i], self.OK,
                                          self.classgroup, self.units)
        return self._pics[key]

    def pic_R(self) -> PicardGroup:
        return self.pic(self.order_id(self.R.lattice))

    # -- extension maps e_S ------------------------------------------------------------
    def extension_images(self, i: int) -> List[Tuple[int, ...]]:
        """Images in Pic(S_i) of the Pic(R) generators (as coordinate tuples)."""
        key = (i,)
        if key not in self._ext_cache:
            picR = self.pic_R()
            picS = self.pic(i)
            S = self.overorders[i]
            imgs = []
            for gi in range(picR.t):
                G = picR.finite_gen_ideal(gi)
                imgs.append(picS.class_of(G * S.lattice))
            for gj in range(picR.k):
                G = picR.pullback(gj)
                imgs.append(picS.class_of(G * S.lattice))
            self._ext_cache[key] = imgs
        return self._ext_cache[key]

    def e_S(self, i: int, coords_R: Tuple[int, ...]) -> Tuple[int, ...]:
        """The extension map e_{S_i}: Pic(R) -> Pic(S_i) on SNF coordinates."""
        picR = self.pic_R()
        picS = self.pic(i)
        ev = picR.group.expvec_of_coords(list(coords_R))
        imgs = self.extension_images(i)
        out = picS.group.zero()
        for e, img in zip(ev, imgs):
            if e:
                term = tuple((e * c) % d for c, d in zip(img, picS.group.invariants))
                out = picS.group.add(out, term)
        return out

    def kernel_of_e_S(self, i: int) -> List[Tuple[int, ...]]:
        """All Pic(R) coordinates killed by e_{S_i} (Pic(R) is desk scale)."""
        picR = self.pic_R()
        picS = self.pic(i)
        out = []
        for c in picR.group.all_coords():
            if not any(self.e_S(i, c)):
                out.append(tuple(c))
        return out

    # -- unit lattices of orders --------------------------------------------------------
    def unit_lattice(self, i: int) -> List[List[int]]:
        """Exponent-vector basis (over the unit group generators) of S_i^x,
        including the torsion relation rows."""
        key = (i,)
        if key not in self._unit_lattice_cache:
            U = self.units
            S = self.overorders[i]
            k = U.num_gens
            if S.lattice == self.OK.lattice:
                rows = [[1 if t == j else 0 for t in range(k)] for j in range(k)]
            else:
                f = conductor(S, self.OK)
                from .residuering import ResidueRingUnits

                RU = ResidueRingUnits(self.OK, f)
                W = [RU.dlog(g) for g in U.gens()]
                # S^x = preimage of the span of (S/f)^x residues
                span_rows = []
                pic = self.pic(i)
                for svec in pic._s_unit_span():
                    span_rows.append(list(svec))
                for j, d in enumerate(RU.invariants):
                    r = [0] * RU.num_gens
                    r[j] = d
                    span_rows.append(r)
                # kernel lattice {e : e @ W in span}, via HNF of [W | I; span | 0]
                m = RU.num_gens
                rows_big = []
                for j in range(k):
                    rows_big.append(list(W[j]) + [1 if t == j else 0 for t in range(k)])
                for srow in span_rows:
                    rows_big.append(list(srow) + [0] * k)
                from . import intlinalg as la

                H = la.hnf(rows_big)
                rows = []
                for hrow in H:
                    if not any(hrow[:m]):
                        rows.append(hrow[m:])
                rows = la.hnf(rows)
            self._unit_lattice_cache[key] = rows
        return self._unit_lattice_cache[key]

    # -- principality with witness -------------------------------------------------
    def _unit_cover_factor(self, i: int):
        """exp(2 rho) with rho a covering-radius bound of the S_i^x log
        lattice; Fraction upper bound, 1 for rank 0."""
        key = ("ucf", i)
        if key not in self._unit_lattice_cache:
            import mpmath
            from fractions import Fraction

            U = self.units
            if U.rank == 0:
                self._unit_lattice_cache[key] = Fraction(1)
            else:
                rows = self.unit_lattice(i)
                base_logs = [U._log_vector(g, 40) for g in U.gens()]
                rho = mpmath.mpf(0)
                for row in rows:
                    vec = [mpmath.fsum(row[j] * base_logs[j][t] for j in range(len(row)))
                           for t in range(len(base_logs[0]))]
                    nrm = mpmath.sqrt(mpmath.fsum(v * v for v in vec))
                    rho += nrm / 2
                factor = mpmath.exp(2 * rho)
                f = Fraction(int(mpmath.ceil(factor * 16)) + 1, 16)
                self._unit_lattice_cache[key] = max(f, Fraction(1))
        return self._unit_lattice_cache[key]

    def principal_generator(self, i: int, L) -> "Element | None":
        """x with x*S_i = L, or None when the class is nontrivial.

        Uses a reduction walk (enumerate short vectors, divide out, repeat),
        the classical infrastructure-style search that is insensitive to
        unit skew.  Exhausting the node budget raises a hard error rather
        than answering falsely.
        """
        from fractions import Fraction

        from . import shortvec
        from .errors import EnumerationRadiusExceeded
        from .picard import _upper_pow

        pic = self.pic(i)
        if any(pic.class_of(L)):
            return None
        S = self.overorders[i].lattice
        one = self.K.one

        def norm_of(J) -> Fraction:
            return J.index_in(S)

        # state: (J, g, sign) with L = g * J^sign
        seen = set()
        from collections import deque

        queue = deque([(L, one, 1)])
        nodes = 0
        while queue:
            J, g, sign = queue.popleft()
            key = (J.key, sign)
            if key in seen:
                continue
            seen.add(key)
            nodes += 1
            if nodes > 20000:
                break
            if J == S:
                return g if sign == 1 else g.inv()
            nm = norm_of(J)
            base = Fraction(self.K.n) * _upper_pow(
                max(1, nm.numerator), Fraction(2, self.K.n)) / max(
                1, _upper_pow(nm.denominator, Fraction(2, self.K.n)))
            cands = []
            for x, val in shortvec.short_elements(J, base * 8):
                anm = abs(x.norm())
                if anm == 0:
                    continue  # zero divisors cannot generate or reduce
                ratio = anm / nm
                cands.append((ratio, val, x.num, x))
            if not cands:
                continue
            cands.sort(key=lambda t: (t[0], t[1], t[2]))
            for ratio, _val, _k, x in cands[:6]:
                if ratio == 1:
                    gen = g * x if sign == 1 else g * x.inv()
                    if sign == 1:
                        return gen
                    # L = g * J^{-1}, J = xS => L = (g/x) S
                    return gen
                Jp = S.colon(J).scale(x)  # x * J^{-1}, integral of norm ratio
                gp = g * x if sign == 1 else g * x.inv()
                queue.append((Jp, gp, -sign))
        raise EnumerationRadiusExceeded(
            "principal generator walk exhausted its budget")

    def __repr__(self):
        return f"IsogenyClass({self.weil.label()})"
