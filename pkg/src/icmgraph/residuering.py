"""Unit groups of finite quotients O_K/J with discrete logarithms.

The quotient splits CRT-wise over the maximal ideals of O_K containing J.
Each primary piece carries its units as (Teichmueller lift of a residue
field generator) x (1 + N) with N the local radical; the unipotent part is
handled through the truncated p-adic logarithm when p is odd and unramified
enough, and through explicit closure with relation harvesting otherwise
(tiny 2-groups in practice).
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Dict, List, Optional, Sequence, Tuple

import sympy

from . import intlinalg as la
from .abgroup import FiniteAbelianGroup, closure_with_relations
from .algebra import Element
from .errors import MissingArithmeticData
from .ideals import FractionalIdeal, quotient_chart
from .orders import Order

_BFS_CAP = 1 << 17


class _Chart:
    """Reduction of O_K-elements modulo a full sublattice J <= O_K."""

    def __init__(self, OK: Order, J: FractionalIdeal):
        self.OK = OK
        self.J = J
        self.alg = OK.alg
        V, Vinv, diag, keep = quotient_chart(OK.lattice, J)
        self.V, self.Vinv, self.diag, self.keep = V, Vinv, diag, keep

    def key(self, x: Element) -> Tuple[int, ...]:
        v = self.OK.lattice.coords_of(x)
        if v is None:
            raise ValueError("element not in O_K")
        w = la.vec_mat(v, self.V)
        return tuple(w[i] % self.diag[i] for i in self.keep)

    def reduce(self, x: Element) -> Element:
        """Canonical representative of x mod J."""
        v = self.OK.lattice.coords_of(x)
        w = la.vec_mat(v, self.V)
        w2 = [w[i] % self.diag[i] if self.diag[i] != 1 else 0 for i in range(len(w))]
        u = la.vec_mat(w2, self.Vinv)
        num = la.vec_mat(u, [list(r) for r in self.OK.lattice.rows])
        return Element(self.alg, num, self.OK.lattice.den)

    def mulmod(self, x: Element, y: Element) -> Element:
        return self.reduce(x * y)

    def powmod(self, x: Element, e: int) -> Element:
        r = self.reduce(self.alg.one)
        b = self.reduce(x)
        while e:
            if e & 1:
                r = self.mulmod(r, b)
            b = self.mulmod(b, b)
            e >>= 1
        return r


class _LocalPiece:
    """Units of O_K/Q for a p-primary Q with radical prime pp."""

    def __init__(self, OK: Order, Q: FractionalIdeal, pp: FractionalIdeal,
                 p: int, f: int, siblings: Sequence[FractionalIdeal] = ()):
        self.OK = OK
        self.Q = Q
        self.pp = pp
        self.p = p
        self.f = f
        self.siblings = [s2 for s2 in siblings if s2 != pp]
        self._adjuster = None
        self.chart = _Chart(OK, Q)
        alg = OK.alg
        self.alg = alg
        size = Q.index_in(OK.lattice)
        assert size.denominator == 1
        self.size = int(size)

        # residue field part: find a generator of (O_K/pp)^x
        self.res_chart = _Chart(OK, pp)
        self.res_size = p ** f
        gen = self._residue_generator()
        # Teichmueller lift inside O_K/Q: iterate y -> y^(p^f)
        y = self.chart.reduce(gen)
        seen = None
        while True:
            y2 = self.chart.powmod(y, p ** f)
            if (y2.num, y2.den) == (y.num, y.den):
                break
            y = y2
        self.teich = y
        self.teich_order = self.res_size - 1

        # unipotent part 1 + N, N = pp mod Q
        ram = _ramification_bound(OK, pp, p)
        self.unipotent_log = (p > 2 and ram < p - 1)
        if self.unipotent_log:
            self._build_unipotent_log()
        else:
            self._build_unipotent_closure()

        self.gens: List[Element] = []
        self.invariants: List[int] = []
        if self.teich_order > 1:
            self.gens.append(self.teich)
            self.invariants.append(self.teich_order)
        self.gens.extend(self.uni_gens)
        self.invariants.extend(self.uni_invariants)

    # -- residue field ---------------------------------------------------------
    def _residue_generator(self) -> Element:
        p, f = self.p, self.f
        order = p ** f - 1
        if order == 1:
            return self.alg.one
        fac = sympy.factorint(order)
        # deterministic sweep over small residues
        cands = []
        basis = self.OK.basis_elements()
        for b in basis:
            cands.append(b)
        for i in range(len(basis)):
            for j in range(i + 1, len(basis)):
                cands.append(basis[i] + basis[j])
        state = 99991
        for trial in range(10000):
            if trial < len(cands):
                x = cands[trial]
            else:
                state = (state * 1103515245 + 12345) % (1 << 31)
                coeffs = []
                s = state
                for _ in basis:
                    s = (s * 1103515245 + 12345) % (1 << 31)
                    coeffs.append(s % p)
                x = self.alg.zero
                for c, b in zip(coeffs, basis):
                    if c:
                        x = x + c * b
            x = self.res_chart.reduce(x)
            if not any(self.res_chart.key(x)):
                continue
            # unit iff x^order == 1; generator iff no proper divisor power is 1
            if self.res_chart.key(self.res_chart.powmod(x, order)) != self.res_chart.key(self.alg.one):
                continue
            if all(self.res_chart.key(self.res_chart.powmod(x, order // ell)) !=
                   self.res_chart.key(self.alg.one) for ell in fac):
                return x
        raise MissingArithmeticData("no residue field generator found")

    # -- unipotent part ----------------------------------------------------------
    def _nilpotent_lattice(self) -> Tuple[FractionalIdeal, FractionalIdeal]:
        return self.pp, self.Q

    def _build_unipotent_log(self):
        """(1+N)/(1+Q) which is isomorphic to N/Q via truncated log/exp."""
        N, Q = self.pp, self.Q
        V, Vinv, diag, keep = quotient_chart(N, Q)
        self.uni_chartN = (V, Vinv, diag, keep, N)
        self.uni_invariants = [diag[i] for i in keep]
        gens = []
        for pos in keep:
            w = [0] * self.alg.n
            w[pos] = 1
            coords = la.vec_mat(la.vec_mat(w, Vinv), [list(r) for r in N.rows])
            nelt = Element(self.alg, coords, N.den)
            gens.append(self.chart.reduce(self._exp(nelt)))
        self.uni_gens = gens

    def _nil_reduce(self, x: Element) -> Element:
        """Reduce an element of N modulo Q (canonical rep in N)."""
        V, Vinv, diag, keep, N = self.uni_chartN
        v = N.coords_of(x)
        w = la.vec_mat(v, V)
        w2 = [w[i] % diag[i] if diag[i] != 1 else 0 for i in range(len(w))]
        u = la.vec_mat(w2, Vinv)
        num = la.vec_mat(u, [list(r) for r in N.rows])
        return Element(self.alg, num, N.den)

    def _adjust(self, x: Element) -> Element:
        """Multiply by the CRT idempotent-like a with a = 1 mod pp^M and
        a = 0 mod sibling^M, so p-power denominators stay integral away
        from pp.  The result agrees with x modulo Q."""
        if not self.siblings:
            return x
        if self._adjuster is None:
            M = self._term_cap() + self._m0_value() + 2
            X = None
            for s2 in self.siblings:
                Pw = _ideal_power(s2, M)
                X = Pw if X is None else X * Pw
            Y = _ideal_power(self.pp, M)
            a = _crt_one(X, Y, self.alg)  # a in X, a = 1 mod Y
            self._adjuster = a
        return x * self._adjuster

    def _m0_value(self) -> int:
        self._term_cap()
        return self._m0

    def _exp(self, x: Element) -> Element:
        """exp(x) mod Q for x in N (requires v(x) > e/(p-1))."""
        x = self._adjust(x)
        kcap = self._term_cap()
        acc = self.alg.one
        cur = x
        kfact = 1
        for k in range(1, kcap + 1):
            t = self._divide_term(cur, kfact)
            if not self._in_Q(t):
                acc = acc + t
            cur = cur * x
            kfact *= (k + 1)
        return acc

    def _log(self, u: Element) -> Element:
        """log(u) mod Q for u = 1 + x, x in N."""
        x = self._adjust(u - self.alg.one)
        kcap = self._term_cap()
        acc = self.alg.zero
        cur = x
        sign = 1
        for k in range(1, kcap + 1):
            t = self._divide_term(cur, sign * k)
            if not self._in_Q(t):
                acc = acc + t
            cur = cur * x
            sign = -sign
        return acc

    def _divide_term(self, num: Element, k: int) -> Element:
        """num/k modulo Q: rational division by the p-part of k, modular
        inversion of its prime-to-p part."""
        p = self.p
        sign = -1 if k < 0 else 1
        k = abs(k)
        v = 0
        while k % p == 0:
            k //= p
            v += 1
        t = num * Fraction(sign, p ** v)
        if k != 1:
            t = t * self._inv_mod_pN(k)
        return t

    def _inv_mod_pN(self, k: int) -> int:
        if not hasattr(self, "_pN"):
            # smallest power of p with p^N * O_K <= Q, plus slack
            N = 1
            while True:
                c = self.p ** N
                scaled = self.OK.lattice.scale(Element(self.alg, [c] + [0] * (self.alg.n - 1)))
                if self.Q.contains_ideal(scaled):
                    break
                N += 1
                assert N < 64, "p-power clearing failed"
            self._pN = self.p ** (N + self._m0_value() + 2)
        return pow(k, -1, self._pN)

    def _term_cap(self) -> int:
        # nilpotency order of N in O_K/Q, padded for p-adic denominators
        if not hasattr(self, "_m0"):
            m = 1
            cur = self.pp
            while not self.Q.contains_ideal(cur):
                cur = cur * self.pp
                m += 1
                if m > 4 * self.alg.n:
                    break
            self._m0 = m
        p = self.p
        return self._m0 * max(2, (p - 1) // max(1, p - 2)) + p + 4

    def _in_Q(self, t: Element) -> bool:
        return self.Q.contains(t)

    def _build_unipotent_closure(self):
        """Explicit closure of (1+N)/(1+Q) with relation harvesting."""
        N, Q = self.pp, self.Q
        size = Q.index_in(N)
        assert size.denominator == 1
        if int(size) > _BFS_CAP:
            raise MissingArithmeticData(
                f"unipotent closure too large ({size}); log path unavailable (p={self.p})")
        # generators 1 + b over the full lattice basis of N: an SNF basis of
        # N/Q can miss directions of N/N^2, the full basis cannot
        gens = []
        for row in N.rows:
            g = self.chart.reduce(self.alg.one + Element(self.alg, list(row), N.den))
            if self.chart.key(g) != self.chart.key(self.alg.one):
                gens.append(g)
        if not gens:
            self.uni_gens = []
            self.uni_invariants = []
            self._closure_group = None
            self._closure_gens = []
            self._closure_elements = {self.chart.key(self.chart.reduce(self.alg.one)):
                                      (self.chart.reduce(self.alg.one), tuple())}
            return
        elements, rels = closure_with_relations(
            gens, self.chart.mulmod, lambda e: self.chart.key(e), self.chart.reduce(self.alg.one))
        G = FiniteAbelianGroup(len(gens), rels)
        # SNF-adapted generators
        new_gens = []
        for idx_k in range(len(G.keep)):
            ev = G.expvec_of_coords([1 if t == idx_k else 0
                                     for t in range(len(G.keep))])
            g = self.chart.reduce(self.alg.one)
            for e, base in zip(ev, gens):
                em = e % G.order
                if em:
                    g = self.chart.mulmod(g, self.chart.powmod(base, em))
            new_gens.append(g)
        self.uni_gens = new_gens
        self.uni_invariants = list(G.invariants)
        self._closure_group = G
        self._closure_gens = gens
        self._closure_elements = elements

    # -- dlog -------------------------------------------------------------------
    def dlog(self, x: Element) -> List[int]:
        """Exponents of x over self.gens (x a unit of O_K/Q)."""
        x = self.chart.reduce(x)
        out = []
        # residue part
        if self.teich_order > 1:
            r = self._residue_dlog(x)
            out.append(r)
            back = (self.teich_order - r) % self.teich_order
            if back:
                x = self.chart.mulmod(x, self.chart.powmod(self.teich, back))
        # now x is unipotent: x = 1 + n
        if self.unipotent_log:
            lx = self._log(x)
            V, Vinv, diag, keep, N = self.uni_chartN
            v = N.coords_of(lx)
            assert v is not None, "log left the nilpotent lattice"
            w = la.vec_mat(v, V)
            out.extend(w[i] % diag[i] for i in keep)
        else:
            key = self.chart.key(x)
            rec = self._closure_elements.get(key)
            assert rec is not None, "unipotent element outside closure"
            if self._closure_group is not None:
                _, ev = rec
                out.extend(self._closure_group.coords(list(ev)))
        return out

    def _residue_dlog(self, x: Element) -> int:
        tkey = self.res_chart.key(self.res_chart.reduce(self.teich))
        xkey = self.res_chart.key(x)
        cur = self.res_chart.reduce(self.alg.one)
        for k in range(self.teich_order):
            if self.res_chart.key(cur) == xkey:
                return k
            cur = self.res_chart.mulmod(cur, self.teich)
        raise MissingArithmeticData("residue dlog failed (non-unit?)")


def _ramification_bound(OK: Order, pp: FractionalIdeal, p: int) -> int:
    """e(pp/p): the largest e with pp^e containing p*O_K... computed as the
    number of pp-factors of p, via valuation of p in the pp-adic filtration."""
    # v_pp(p O_K): smallest k with p*O_K + pp^{k+1} != p*O_K + pp^k stabilized:
    # just compute the index growth of pp^k + pOK until it stops.
    target = OK.lattice.scale(Element(OK.alg, [p] + [0] * (OK.alg.n - 1)))
    cur = pp
    e = 1
    prev_idx = (target + cur).index_in(OK.lattice)
    while True:
        nxt = cur * pp
        idx = (target + nxt).index_in(OK.lattice)
        if idx == prev_idx:
            return e
        prev_idx = idx
        cur = nxt
        e += 1
        if e > OK.alg.n:
            return e


class ResidueRingUnits:
    """(O_K/J)^x with generators, invariants and dlog, via CRT."""

    def __init__(self, OK: Order, J: FractionalIdeal):
        self.OK = OK
        self.J = J
        self.alg = OK.alg
        self.chart = _Chart(OK, J)
        idx = J.index_in(OK.lattice)
        assert idx.denominator == 1
        self.size = int(idx)
        pieces: List[_LocalPiece] = []
        crt_idems: List[Element] = []
        if self.size > 1:
            primaries = self._primary_split()
            for (Q, pp, p, f) in primaries:
                sibs = [s2 for (s2, _i2) in OK.maximal_ideals_above(p)]
                pieces.append(_LocalPiece(OK, Q, pp, p, f, siblings=sibs))
            crt_idems = self._crt_idempotents([Q for (Q, _, _, _) in primaries])
        self.pieces = pieces
        self.idems = crt_idems
        # assemble generators: lift each local generator via its idempotent
        gens: List[Element] = []
        invariants: List[int] = []
        self._piece_slices = []
        for piece, idem in zip(pieces, crt_idems):
            start = len(gens)
            for g in piece.gens:
                # g at this component, 1 elsewhere: 1 + idem*(g - 1)
                lifted = self.chart.reduce(self.alg.one + idem * (g - self.alg.one))
                gens.append(lifted)
            invariants.extend(piece.invariants)
            self._piece_slices.append((start, len(piece.gens)))
        self.gens = gens
        self.invariants = invariants
        self.num_gens = len(gens)

    def _primary_split(self):
        """(Q, pp, p, f) per maximal ideal pp containing J; Q = J + pp^k."""
        out = []
        for p in sorted(sympy.factorint(self.size)):
            for (pp, idx) in self.OK.maximal_ideals_above(p):
                if not pp.contains_ideal(self.J):
                    continue
                # Q = J + pp^k, k growing until stable
                cur = pp
                Q = self.J + cur
                while True:
                    cur = cur * pp
                    Q2 = self.J + cur
                    if Q2 == Q:
                        break
                    Q = Q2
                if Q == self.OK.lattice:
                    continue
                f = 0
                n = idx
                while n % p == 0:
                    n //= p
                    f += 1
                out.append((Q, pp, p, f))
        return out

    def _crt_idempotents(self, Qs: List[FractionalIdeal]) -> List[Element]:
        out = []
        for i, Q in enumerate(Qs):
            if len(Qs) == 1:
                out.append(self.alg.one)
                continue
            other = None
            for j, Q2 in enumerate(Qs):
                if j == i:
                    continue
                other = Q2 if other is None else other * Q2
            # solve 1 = a + b with a in other, b in Q  => idem_i = a
            rows = []
            L = other.den * Q.den // gcd(other.den, Q.den)
            for r in other.rows:
                rows.append([c * (L // other.den) for c in r])
            for r in Q.rows:
                rows.append([c * (L // Q.den) for c in r])
            target = [L] + [0] * (self.alg.n - 1)
            sol = la.solve_left(rows, target)
            assert sol is not None, "CRT idempotent solve failed"
            a = self.alg.zero
            k = len(other.rows)
            for c, r in zip(sol[:k], other.rows):
                if c:
                    a = a + c * Element(self.alg, list(r), other.den)
            out.append(self.chart.reduce(a))
        return out

    def dlog(self, x: Element) -> List[int]:
        """Exponents over self.gens of x (must be a unit mod J)."""
        out = []
        for piece in self.pieces:
            out.extend(piece.dlog(x))
        return out

    def relation_rows(self) -> List[List[int]]:
        rows = []
        for i, d in enumerate(self.invariants):
            r = [0] * self.num_gens
            r[i] = d
            rows.append(r)
        return rows


def _ideal_power(I: FractionalIdeal, k: int) -> FractionalIdeal:
    out = None
    base = I
    while k:
        if k & 1:
            out = base if out is None else out * base
        k >>= 1
        if k:
            base = base * base
    return out


def _crt_one(X: FractionalIdeal, Y: FractionalIdeal, alg) -> Element:
    """a in X with a = 1 mod Y (X + Y must be everything)."""
    from math import gcd as _g

    L = X.den * Y.den // _g(X.den, Y.den)
    rows = [[c * (L // X.den) for c in r] for r in X.rows]
    rows += [[c * (L // Y.den) for c in r] for r in Y.rows]
    target = [L] + [0] * (alg.n - 1)
    sol = la.solve_left(rows, target)
    assert sol is not None, "CRT failed: ideals not comaximal"
    a = alg.zero
    for c, r in zip(sol[:len(X.rows)], X.rows):
        if c:
            a = a + c * Element(alg, list(r), X.den)
    return a
