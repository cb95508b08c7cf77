"""Class group of O_K and Picard groups of arbitrary overorders.

Pic(O_K): generated by the prime ideals below the Minkowski bound, with
relations harvested from smooth short elements ("relation closure": keep
collecting until the group order is stable).  Every relation stores its
witness element, so discrete logs come with exact element certificates.

Pic(S): built from the conductor exact sequence.  Generators are the
finite-part ideals L_u = u*S + f_S for u running over generators of
(O_K/f_S)^x, together with pullbacks P cap S of the good generating primes
(those coprime to every conductor).  A discrete log of an invertible
S-ideal L splits as: extension to O_K, good-prime decomposition with
witness, and the residue class of any element of the normalized ideal that
is a unit modulo the conductor.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd, isqrt
from typing import Dict, List, Optional, Sequence, Tuple

import sympy

from . import intlinalg as la
from . import shortvec
from .abgroup import FiniteAbelianGroup
from .algebra import Element, EtaleAlgebra, NumberAlgebra
from .errors import EnumerationRadiusExceeded, MissingArithmeticData
from .ideals import FractionalIdeal, ideal_from_elements
from .orders import Order, conductor, equation_order, maximal_order
from .residuering import ResidueRingUnits
from .units import UnitGroup

_PI_LOW = Fraction(3141592, 1000000)  # lower bound for pi


def minkowski_bound(K: EtaleAlgebra, OK: Order) -> int:
    """Integer upper bound B: every ideal class of O_K contains an integral
    ideal of norm <= B (maximum of per-component Minkowski bounds)."""
    bound = Fraction(0)
    for fac in K.factor_poly():
        A = NumberAlgebra(list(fac))
        OA = maximal_order(equation_order(A))
        d = abs(OA.discriminant())
        ni = A.n
        gi = ni // 2
        nf = 1
        for t in range(2, ni + 1):
            nf *= t
        b = Fraction(nf, ni ** ni) * (Fraction(4) / _PI_LOW) ** gi * _sqrt_up(d)
        bound = max(bound, b)
    return int(bound) + 1


def _sqrt_up(n: int) -> Fraction:
    r = isqrt(n)
    if r * r < n:
        r += 1
    return Fraction(r)


class ClassGroupOK:
    """Pic(O_K) with witness-carrying discrete logarithms."""

    def __init__(self, OK: Order, units: UnitGroup, bad_primes: Sequence[int] = (),
                 max_rounds: int = 12):
        self.OK = OK
        self.alg: EtaleAlgebra = OK.alg
        self.units = units
        K = self.alg
        # the Minkowski bound guarantees generation; a richer list makes the
        # smoothing step of discrete logs far cheaper
        self.bound = max(minkowski_bound(K, OK), 20)
        primes: List[Tuple[FractionalIdeal, int, int]] = []  # (ideal, p, norm)
        for p in sympy.primerange(2, self.bound + 1):
            for (pp, idx) in OK.maximal_ideals_above(p):
                if idx <= self.bound:
                    primes.append((pp, p, idx))
        primes.sort(key=lambda t: (t[2], t[1], t[0].key))
        self.primes = primes
        self.prime_index = {pp.key: i for i, (pp, _, _) in enumerate(primes)}
        self._power_cache: Dict[Tuple[int, int], FractionalIdeal] = {}
        self.bad_rational_primes = set(int(b) for b in bad_primes)
        self.good = [i for i, (_, p, _) in enumerate(primes) if p not in self.bad_rational_primes]
        self.relations: List[Tuple[List[int], Element]] = []
        self._harvest_relations(max_rounds)
        self.group = FiniteAbelianGroup(len(self.primes), [r for r, _ in self.relations])
        self._bad_elim: Dict[int, Tuple[Element, List[int]]] = {}
        self._eliminate_bad_primes()
        # relations rewritten over good primes, with exact witnesses; keep
        # only a generating subset (downstream consumers pay per relation)
        all_good: List[Tuple[List[int], Element]] = []
        for rvec, relt in self.relations:
            gr, elt = self.good_decomposition(rvec)
            all_good.append((gr, relt * elt.inv()))
        self.good_group = FiniteAbelianGroup(len(self.good), [gr for gr, _ in all_good])
        full_hnf = la.hnf([gr for gr, _ in all_good])
        kept: List[Tuple[List[int], Element]] = []
        span: List[List[int]] = []
        for gr, gamma in all_good:
            if span and la.lattice_contains(la.hnf(span), gr):
                continue
            kept.append((gr, gamma))
            span.append(gr)
            if la.hnf(span) == full_hnf:
                break
        # make sure the kept subset spans everything
        assert la.hnf([g for g, _ in kept]) == full_hnf
        self.good_relations = kept
        self._smooth_primes = list(sympy.primerange(2, self.bound + 1))
        self._dlog_cache: Dict[Tuple, Tuple[List[int], Element]] = {}

    # -- basic ideal helpers ----------------------------------------------------
    def prime_power(self, i: int, k: int) -> FractionalIdeal:
        if k == 0:
            return self.OK.lattice
        key = (i, k)
        if key not in self._power_cache:
            if k == 1:
                self._power_cache[key] = self.primes[i][0]
            else:
                self._power_cache[key] = self.prime_power(i, k - 1) * self.primes[i][0]
        return self._power_cache[key]

    def valuation(self, i: int, J: FractionalIdeal) -> int:
        """v_P(J) for integral J (0 if coprime)."""
        v = 0
        while self.prime_power(i, v + 1).contains_ideal(J):
            v += 1
        return v

    def factor_integral(self, J: FractionalIdeal) -> Optional[List[int]]:
        """Exponent vector of an integral O_K-ideal over the prime list,
        or None if its norm is not supported on primes <= bound."""
        nm = J.index_in(self.OK.lattice)
        assert nm.denominator == 1
        nm = int(nm)
        if nm == 0:
            return None
        vec = [0] * len(self.primes)
        rest = nm
        for p in sorted(set(pl for (_, pl, _) in self.primes)):
            if rest % p:
                continue
            for i, (pp, pl, nrm) in enumerate(self.primes):
                if pl != p:
                    continue
                v = self.valuation(i, J)
                if v:
                    vec[i] = v
                    rest //= nrm ** v
        if rest != 1:
            return None
        return vec

    # -- relation harvesting -----------------------------------------------------
    def _harvest_relations(self, max_rounds: int):
        OKl = self.OK.lattice
        n = self.alg.n
        seen = set()
        stable = 0
        last_order: Optional[int] = None
        radius = Fraction(2 * n)
        budget_per_round = 4000
        for round_ in range(max_rounds):
            processed = 0
            for x, _v in shortvec.short_elements(OKl, radius):
                if x.num in seen:
                    continue
                seen.add(x.num)
                self._try_relation(x)
                processed += 1
                if processed > budget_per_round:
                    break
            # make sure every prime ideal appears in enough relations
            counts = [0] * len(self.primes)
            for rvec, _e in self.relations:
                for i, e in enumerate(rvec):
                    if e:
                        counts[i] += 1
            for i, (pp, p, nrm) in enumerate(self.primes):
                if counts[i] >= 2:
                    continue
                found = 0
                local = 0
                for x, _v in shortvec.short_elements(pp, radius * nrm):
                    if found >= 2 or local > budget_per_round:
                        break
                    if x.num in seen:
                        continue
                    seen.add(x.num)
                    local += 1
                    if self._try_relation(x):
                        found += 1
            rows = [r for r, _ in self.relations]
            order = _group_order_or_none(len(self.primes), rows)
            if order is not None and order == last_order:
                stable += 1
                if stable >= 3:
                    return
            else:
                stable = 0
            last_order = order
            radius *= 2
        if last_order is None:
            raise MissingArithmeticData("class group relations did not close")

    def _try_relation(self, x: Element) -> bool:
        nm = x.norm()
        if nm == 0:
            return False
        J = ideal_from_elements(self.alg, [x * b for b in self.OK.basis_elements()])
        vec = self.factor_integral(J)
        if vec is None:
            return False
        self.relations.append((vec, x))
        return True

    def _eliminate_bad_primes(self):
        """Express each bad prime as element * product of good primes."""
        for i, (pp, p, nrm) in enumerate(self.primes):
            if p not in self.bad_rational_primes:
                continue
            found = False
            radius = Fraction(2 * self.alg.n * nrm)
            for _ in range(10):
                for x, _v in shortvec.short_elements(pp, radius):
                    J = ideal_from_elements(self.alg, [x * b for b in self.OK.basis_elements()])
                    vec = self.factor_integral(J)
                    if vec is None:
                        continue
                    if vec[i] != 1:
                        continue
                    if any(vec[j] and self.primes[j][1] in self.bad_rational_primes and j != i
                           for j in range(len(vec))):
                        continue
                    # x O_K = pp * prod good^rest  =>  pp = x * prod good^-rest
                    rest = list(vec)
                    rest[i] = 0
                    self._bad_elim[i] = (x, rest)
                    found = True
                    break
                if found:
                    break
                radius *= 2
            if not found:
                raise MissingArithmeticData(f"could not eliminate bad prime over {p}")

    def _project_good(self, vec: List[int]) -> List[int]:
        """Rewrite a full exponent vector over good primes only."""
        out = [0] * len(self.good)
        pos = {g: t for t, g in enumerate(self.good)}
        extra: List[Tuple[int, int]] = []
        for j, e in enumerate(vec):
            if not e:
                continue
            if j in pos:
                out[pos[j]] += e
            else:
                x, rest = self._bad_elim[j]
                for j2, e2 in enumerate(rest):
                    if e2:
                        out[pos[j2]] -= e * e2
        return out

    def good_decomposition(self, vec: List[int]) -> Tuple[List[int], Element]:
        """(good exponents, element factor) equal to prod primes^vec."""
        out = [0] * len(self.good)
        pos = {g: t for t, g in enumerate(self.good)}
        elt = self.alg.one
        for j, e in enumerate(vec):
            if not e:
                continue
            if j in pos:
                out[pos[j]] += e
            else:
                x, rest = self._bad_elim[j]
                # pp_j = x * prod good^-rest
                elt = elt * (x ** e if e >= 0 else x.inv() ** (-e))
                for j2, e2 in enumerate(rest):
                    if e2:
                        out[pos[j2]] -= e * e2
        return out, elt

    # -- discrete log with witness --------------------------------------------------
    def dlog_good(self, I: FractionalIdeal, radius_cap: int = 1 << 18
                  ) -> Tuple[List[int], Element]:
        """(good exponent vector e, witness w) with I = w * prod good^e."""
        ck = I.key
        hit = self._dlog_cache.get(ck)
        if hit is not None:
            return list(hit[0]), hit[1]
        # normalize the scale first: smooth cofactors then show up at small
        # norms and the enumeration stays shallow
        I_small, mu = _shorten_tracked(I)
        gvec, w = self._dlog_good_impl(I_small, radius_cap)
        out = (gvec, w * mu)
        self._dlog_cache[ck] = (list(out[0]), out[1])
        return out

    def _dlog_good_impl(self, I: FractionalIdeal, radius_cap: int
                        ) -> Tuple[List[int], Element]:
        d = I.den
        J = FractionalIdeal(self.alg, [list(r) for r in I.rows], 1)  # = den*I
        if not self.OK.lattice.contains_ideal(J):
            # clear denominators relative to O_K exactly
            c = 1
            for r in J.rows:
                v = Element(self.alg, list(r), 1)
                w = self.OK.lattice.coords_of(v)
                if w is None:
                    # coordinate denominator: scale by O_K's den as a bound
                    c = c * self.OK.lattice.den // gcd(c, self.OK.lattice.den)
            J = J.scale(Element(self.alg, [c] + [0] * (self.alg.n - 1)))
            d = d * c
            assert self.OK.lattice.contains_ideal(J), "ideal not fractional over O_K"
        nmJ = J.index_in(self.OK.lattice)
        assert nmJ.denominator == 1
        nmJ = int(nmJ)
        radius = Fraction(2 * self.alg.n) * _upper_pow(nmJ, Fraction(2, self.alg.n))
        seen = set()
        while radius <= radius_cap * (Fraction(2 * self.alg.n) * _upper_pow(nmJ, Fraction(2, self.alg.n)) + 1):
            for x, _v in shortvec.short_elements(J, radius):
                if x.num in seen:
                    continue
                seen.add(x.num)
                nx = abs(x.norm())
                assert nx % nmJ == 0
                c = nx // nmJ
                if not _is_smooth_over(int(c), self._smooth_primes):
                    continue
                # C = x * J^{-1} integral with norm c
                Jinv = self.OK.lattice.colon(J)
                C = Jinv.scale(x)
                vec = self.factor_integral(C)
                if vec is None:
                    continue
                # J = x * C^{-1} = x * prod primes^{-vec}
                gvec, elt = self.good_decomposition([-e for e in vec])
                # I = J/d
                winv = Element(self.alg, [d] + [0] * (self.alg.n - 1))
                witness = x * elt * winv.inv()
                return gvec, witness
            radius *= 2
        raise EnumerationRadiusExceeded("dlog smoothing failed within radius cap")

    def class_coords(self, I: FractionalIdeal) -> Tuple[Tuple[int, ...], List[int], Element]:
        gvec, w = self.dlog_good(I)
        return self.good_group.coords(gvec), gvec, w

    def is_principal(self, I: FractionalIdeal) -> Optional[Element]:
        """A generator of I if principal as an O_K-ideal, else None."""
        gvec, w = self.dlog_good(I)
        rows = [gr for gr, _ in self.good_relations]
        sol = la.solve_left(rows, gvec)
        if sol is None:
            return None
        gen = w
        for c, (_, gamma) in zip(sol, self.good_relations):
            if c:
                gen = gen * (gamma ** c if c > 0 else gamma.inv() ** (-c))
        cand = ideal_from_elements(self.alg, [gen * b for b in self.OK.basis_elements()])
        if cand != I:
            raise MissingArithmeticData("principal witness reconstruction failed")
        return gen


def _group_order_or_none(k: int, rows: List[List[int]]) -> Optional[int]:
    if not rows:
        return None
    H = la.hnf(rows)
    if len(H) < k:
        return None
    order = 1
    for i in range(k):
        order *= H[i][i]
    return abs(order)


def _is_smooth_over(n: int, primes: List[int]) -> bool:
    n = abs(n)
    for p in primes:
        while n % p == 0:
            n //= p
        if n == 1:
            return True
    return n == 1


def _upper_pow(n: int, e: Fraction) -> Fraction:
    """Upper bound for n^e with n positive integer, e rational in (0,2]."""
    if n <= 1:
        return Fraction(1)
    num, den = e.numerator, e.denominator
    v = n ** num
    r = round(v ** (1.0 / den)) if v < (1 << 52) else 1 << ((v.bit_length() + den - 1) // den)
    while r ** den < v:
        r += 1
    return Fraction(r)


class PicardGroup:
    """Pic(S) for an overorder S of R, with discrete logs and witnesses."""

    def __init__(self, S: Order, OK: Order, cls: ClassGroupOK, units: UnitGroup):
        self.S = S
        self.OK = OK
        self.cls = cls
        self.units = units
        self.alg = S.alg
        self.f = conductor(S, OK)
        self.is_maximal = S.lattice == OK.lattice
        self.RU = ResidueRingUnits(OK, self.f) if not self.is_maximal else None
        self.cond_primes: List[FractionalIdeal] = []
        if not self.is_maximal:
            nmf = int(self.f.index_in(OK.lattice))
            for pq in sorted(sympy.factorint(nmf)):
                for (P, _idx) in OK.maximal_ideals_above(pq):
                    if P.contains_ideal(self.f):
                        self.cond_primes.append(P)
        t = self.RU.num_gens if self.RU else 0
        k = len(cls.good)
        self.t = t
        self.k = k
        rows: List[List[int]] = []
        # residue generator orders
        if self.RU:
            for i, d in enumerate(self.RU.invariants):
                r = [0] * (t + k)
                r[i] = d
                rows.append(r)
        # (S/f)^x reduces to the identity in Pic(S)
        if self.RU:
            for svec in self._s_unit_span():
                rows.append(list(svec) + [0] * k)
            # global units of O_K die too
            for u in units.gens():
                rows.append(self.RU.dlog(u) + [0] * k)
        # pulled back class group relations: prod good^gr = (gamma)
        for gr, gamma in cls.good_relations:
            resvec = self._residue_dlog_frac(gamma, gr) if self.RU else []
            rows.append(list(resvec) + list(gr))
        self.group = FiniteAbelianGroup(t + k, rows)
        self.order = self.group.order
        self._rel_hnf = la.hnf(rows)
        self._rep_cache: Dict[Tuple[int, ...], FractionalIdeal] = {}
        self._pullback_cache: Dict[int, FractionalIdeal] = {}

    def _residue_dlog_frac(self, gamma: Element, gvec: Sequence[int]) -> List[int]:
        """Residue dlog of a possibly non-integral gamma whose divisor is
        prod good^gvec (so gamma is a unit at every conductor prime)."""
        if gamma.den == 1 and all(not P.contains(gamma) for P in self.cond_primes):
            return self.RU.dlog(gamma)
        D = self.OK.lattice
        for j, e in enumerate(gvec):
            if e < 0:
                D = D * self.cls.prime_power(self.cls.good[j], -e)
        # a scalar multiple may still be needed when gvec alone does not
        # capture the denominator (it always does for exact relations)
        c = _element_unit_mod_f(D, self.cond_primes, self.OK)
        a = gamma * c
        guard = 0
        while not self.OK.contains(a):
            # widen: scale D by the integer denominator's good part
            guard += 1
            assert guard < 8, "residue dlog denominators did not clear"
            D = D * D
            c = _element_unit_mod_f(D, self.cond_primes, self.OK)
            a = gamma * c
        va = self.RU.dlog(a)
        vc = self.RU.dlog(c)
        return [(x - y) for x, y in zip(va, vc)]

    # -- the subgroup (S/f)^x inside (O_K/f)^x ---------------------------------
    def _s_unit_span(self) -> List[List[int]]:
        """dlog vectors spanning the image of (S/f_S)^x."""
        S, f = self.S, self.f
        out: List[List[int]] = []
        span = None
        # enumerate residues of S mod f, keep units
        from itertools import product as iproduct

        V, Vinv, diag, keep = _chart_of(S.lattice, f)
        total = 1
        for i in keep:
            total *= diag[i]
        if total > 1 << 22:
            raise MissingArithmeticData("S/f too large to enumerate")
        lat_rows = [list(r) for r in S.lattice.rows]
        for combo in iproduct(*[range(diag[i]) for i in keep]):
            w = [0] * self.alg.n
            for pos, i in enumerate(keep):
                w[i] = combo[pos]
            u = la.vec_mat(la.vec_mat(w, Vinv), lat_rows)
            x = Element(self.alg, u, S.lattice.den)
            # unit mod f iff x avoids every conductor prime
            if x.is_zero() or any(P.contains(x) for P in self.cond_primes):
                continue
            vec = self.RU.dlog(x)
            if span is None:
                span = []
            if not _in_span(span, vec, self.RU.invariants):
                span.append(vec)
                out.append(vec)
        return out

    # -- generators -----------------------------------------------------------------
    def finite_gen_ideal(self, i: int) -> FractionalIdeal:
        u = self.RU.gens[i]
        return _L_of(u, self.S, self.f)

    def pullback(self, gi: int) -> FractionalIdeal:
        """(P cap S) for the gi-th good prime."""
        if gi not in self._pullback_cache:
            P = self.cls.primes[self.cls.good[gi]][0]
            self._pullback_cache[gi] = _intersect(P, self.S.lattice)
        return self._pullback_cache[gi]

    def reduce_expvec(self, ev: Sequence[int]) -> List[int]:
        """Reduce an exponent vector modulo the relation lattice (same
        class, small entries)."""
        rem = list(ev)
        m = len(rem)
        for row in self._rel_hnf:
            j = next((c for c in range(m) if row[c]), None)
            if j is None:
                continue
            q = rem[j] // row[j]
            if q:
                for c in range(m):
                    rem[c] -= q * row[c]
        return rem

    def ideal_from_expvec(self, ev: Sequence[int]) -> FractionalIdeal:
        # intermediates are shortened (scaled), harmless up to class
        ev = self.reduce_expvec(ev)
        t = self.t
        out = self.S.lattice
        for i in range(t):
            e = ev[i]
            if e:
                T, _mu = _pow_tracked(self.finite_gen_ideal(i), e, self.S.lattice)
                out, _s = _shorten_tracked(out * T)
        for j in range(self.k):
            e = ev[t + j]
            if e:
                T, _mu = _pow_tracked(self.pullback(j), e, self.S.lattice)
                out, _s = _shorten_tracked(out * T)
        return out

    def representative(self, coords: Tuple[int, ...]) -> FractionalIdeal:
        if coords not in self._rep_cache:
            ev = self.group.expvec_of_coords(list(coords))
            I = self.ideal_from_expvec(ev)
            self._rep_cache[coords] = _shorten(I)
        return self._rep_cache[coords]

    # -- discrete log ------------------------------------------------------------------
    def dlog(self, L: FractionalIdeal) -> Tuple[Tuple[int, ...], List[int], Element]:
        """(coords, expvec, witness): L = witness * prod gens^expvec."""
        J = L * self.OK.lattice
        gvec, w = self.cls.dlog_good(J)
        # L1 = (1/w) * L * prod pullback^{-gvec}: invertible with trivial ext
        L1 = L
        scale = w.inv()
        for j, e in enumerate(gvec):
            if e:
                T, mu = _pow_tracked(self.pullback(j), -e, self.S.lattice)
                L1 = L1 * T
                scale = scale * mu
        L1 = L1.scale(scale)
        assert (L1 * self.OK.lattice) == self.OK.lattice, "extension not trivialized"
        if self.RU is None:
            # maximal order: L1 must be principal (trivial class) with generator 1
            ev = [0] * (self.t + self.k)
            for j, e in enumerate(gvec):
                ev[self.t + j] = e
            return self.group.coords(ev), ev, w
        u = _element_unit_mod_f(L1, self.cond_primes, self.OK)
        resvec = self.RU.dlog(u)
        ev = list(resvec) + list(gvec)
        # witness: L = w * L_u * prod pb^gvec; the witness element for the
        # expvec representation is w (with u absorbed into the L_u generator)
        return self.group.coords(ev), ev, w

    def class_of(self, L: FractionalIdeal) -> Tuple[int, ...]:
        return self.dlog(L)[0]

    def is_principal_with_witness(self, L: FractionalIdeal,
                                  units_for_search: Optional[List[Element]] = None
                                  ) -> Optional[Element]:
        """Generator x with x*S = L, or None.  Search-based, definitive at
        desk scale: enumerates candidates of the right norm and verifies."""
        nm = L.index_in(self.S.lattice)
        try:
            cands = shortvec.elements_of_norm(L, Fraction(abs(nm)), radius_cap_factor=1 << 14)
        except EnumerationRadiusExceeded:
            cands = []
        for x in cands:
            if L.scale(x.inv()) == self.S.lattice:
                return x
        if any(self.class_of(L)):
            return None
        raise EnumerationRadiusExceeded(
            "principality search exhausted but class is trivial")

    def __repr__(self):
        return f"Pic(S): {self.group!r}"


# -- small ideal helpers ---------------------------------------------------------------

def _chart_of(top: FractionalIdeal, bot: FractionalIdeal):
    from .ideals import quotient_chart

    return quotient_chart(top, bot)


def _in_span(span: List[List[int]], vec: List[int], invariants: List[int]) -> bool:
    if not span:
        return not any(v % d for v, d in zip(vec, invariants))
    rows = [list(s) for s in span]
    for i, d in enumerate(invariants):
        r = [0] * len(invariants)
        r[i] = d
        rows.append(r)
    return la.solve_left(rows, list(vec)) is not None


def _L_of(u: Element, S: Order, f: FractionalIdeal) -> FractionalIdeal:
    uS = S.lattice.scale(u)
    return uS + f


def _intersect(A: FractionalIdeal, B: FractionalIdeal) -> FractionalIdeal:
    return (A.dual() + B.dual()).dual()


def _ideal_pow_mul(base: FractionalIdeal, g: FractionalIdeal, e: int,
                   one: FractionalIdeal) -> FractionalIdeal:
    if e > 0:
        cur = g
        out = base
        k = e
        while k:
            if k & 1:
                out = out * cur
            k >>= 1
            if k:
                cur = cur * cur
        return out
    ginv = one.colon(g)
    return _ideal_pow_mul(base, ginv, -e, one)


def _shorten_tracked(I: FractionalIdeal):
    """(T, mu) with I = mu * T and T small."""
    best, _val = shortvec.shortest_nonzero_norm(I)
    return I.scale(best.inv()), best


def _pow_tracked(g: FractionalIdeal, e: int, one: FractionalIdeal):
    """(T, mu) with g^e = mu * T, T kept small throughout."""
    if e == 0:
        return one, one.alg.one
    if e < 0:
        ginv = one.colon(g)
        return _pow_tracked(ginv, -e, one)
    cur, cmu = _shorten_tracked(g)
    out, omu = one, one.alg.one
    k = e
    while k:
        if k & 1:
            out, s1 = _shorten_tracked(out * cur)
            omu = omu * cmu * s1
        k >>= 1
        if k:
            cur, s2 = _shorten_tracked(cur * cur)
            cmu = cmu * cmu * s2
    return out, omu


def _shorten(I: FractionalIdeal) -> FractionalIdeal:
    """Scale I by the inverse of its first short vector: a small canonical
    representative in the same ideal class."""
    best, _val = shortvec.shortest_nonzero_norm(I)
    return I.scale(best.inv())


def _element_unit_mod_f(L1: FractionalIdeal, cond_primes: List[FractionalIdeal],
                        OK: Order) -> Element:
    """An element of L1 avoiding every conductor prime (exists when
    L1 * O_K = O_K)."""
    radius = Fraction(2 * OK.alg.n)
    for _ in range(40):
        for x, _v in shortvec.short_elements(L1, radius):
            if x.is_zero() or x.norm() == 0:
                continue
            if all(not P.contains(x) for P in cond_primes):
                return x
        radius *= 2
    raise MissingArithmeticData("no unit-mod-conductor element found in ideal")
