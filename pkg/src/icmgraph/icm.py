"""Weak equivalence classes and the ideal class monoid.

Weak classes come from the conductor sandwich: every class has a
representative M with f_R <= M <= O_K, enumerated per-prime through the
finite module O_K/f_R and deduplicated with the exact weak-equivalence
test.  Vertices are pairs (weak class, Pic(S) class); their representative
ideals are W_w * I_a for deterministically chosen invertible preimage
ideals I_a, so that equal vertices always carry equal ideals.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import sympy

from . import intlinalg as la
from .algebra import Element
from .context import IsogenyClass
from .errors import NotInMonoid
from .ideals import (FractionalIdeal, ideal_from_elements, is_weakly_equivalent,
                     maximal_sublattices)
from .orders import Order


@dataclass(frozen=True)
class WeakClass:
    id: int
    ring_id: int
    ideal: FractionalIdeal  # canonical representative W_w


@dataclass(frozen=True)
class Vertex:
    wk: int                      # weak class id
    pic: Tuple[int, ...]         # Pic(S) coordinates
    ring_id: int

    def label(self) -> str:
        return f"w{self.wk}:" + ",".join(str(c) for c in self.pic)


class ICM:
    """The ideal class monoid attached to an isogeny class context."""

    def __init__(self, ctx: IsogenyClass):
        self.ctx = ctx
        self._weak: Optional[List[WeakClass]] = None
        self._vertices: Optional[List[Vertex]] = None
        self._vertex_ideals: Dict[Vertex, FractionalIdeal] = {}
        self._preimage_sets: Dict[int, Dict[Tuple[int, ...], Tuple[int, ...]]] = {}
        self._preimage_ideals: Dict[Tuple[int, ...], FractionalIdeal] = {}
        self._dual_base: Dict[int, Tuple[int, Tuple[int, ...]]] = {}
        self._conj_matrices: Dict[Tuple[int, int], List[Tuple[int, ...]]] = {}

    # -- weak classes ------------------------------------------------------------
    def weak_classes(self) -> List[WeakClass]:
        if self._weak is not None:
            return self._weak
        ctx = self.ctx
        f = ctx.conductor_R
        OK = ctx.OK
        R = ctx.R
        idx = f.index_in(OK.lattice)
        assert idx.denominator == 1
        idx = int(idx)
        if idx == 1:
            # R = O_K: a single weak class
            self._weak = [WeakClass(0, ctx.order_id(OK.lattice), OK.lattice)]
            return self._weak
        primes = sorted(sympy.factorint(idx))
        mi_all = []
        for p in primes:
            mi_all.extend((m, i, p) for (m, i) in R.maximal_ideals_above(p))
        # per-prime sandwich: X_p with X_p/f the p-primary part of O_K/f
        per_prime_choices: List[List[FractionalIdeal]] = []
        for p in primes:
            cop = idx
            while cop % p == 0:
                cop //= p
            Xp = f + OK.lattice.scale(Element(ctx.K, [cop] + [0] * (ctx.K.n - 1)))
            # all R-sublattices between f and X_p
            seen = {Xp.key: Xp}
            frontier = [Xp]
            while frontier:
                cur = frontier.pop()
                for (m, i, pl) in mi_all:
                    if pl != p:
                        continue
                    for M in maximal_sublattices(cur, m, R.lattice, i, pl):
                        if M.key in seen:
                            continue
                        if not M.contains_ideal(f):
                            continue
                        seen[M.key] = M
                        frontier.append(M)
            per_prime_choices.append(list(seen.values()))
        # combine: M = sum over primes of choices (all parts contain f)
        from itertools import product as iproduct

        candidates: List[FractionalIdeal] = []
        for combo in iproduct(*per_prime_choices):
            M = combo[0]
            for other in combo[1:]:
                M = M + other
            candidates.append(M)
        # group by (multiplicator ring, local dimension invariants), then
        # dedup by the exact weak-equivalence test within each bucket
        ring_mi_cache: Dict[Tuple, List[FractionalIdeal]] = {}

        def ring_max_ideals(Slat: FractionalIdeal) -> List[FractionalIdeal]:
            if Slat.key not in ring_mi_cache:
                i = self.ctx.order_id(Slat)
                S = self.ctx.overorders[i]
                mis = []
                for p in primes:
                    mis.extend(m for (m, _i) in S.maximal_ideals_above(p))
                ring_mi_cache[Slat.key] = mis
            return ring_mi_cache[Slat.key]

        groups: Dict[Tuple, List[FractionalIdeal]] = {}
        for M in candidates:
            S = M.multiplicator_ring()
            dims = tuple(int((m * M).index_in(M)) for m in ring_max_ideals(S))
            groups.setdefault((S.key, dims), []).append(M)
        weak: List[WeakClass] = []
        for gkey, mods in sorted(groups.items(), key=lambda kv: kv[0]):
            ring_id = self.ctx.order_id(mods[0].multiplicator_ring())
            reps: List[List[FractionalIdeal]] = []
            for M in mods:
                placed = False
                for cl in reps:
                    if is_weakly_equivalent(M, cl[0]):
                        cl.append(M)
                        placed = True
                        break
                if not placed:
                    reps.append([M])
            for cl in reps:
                best = min(cl, key=lambda I: I.key)
                weak.append(WeakClass(0, ring_id, best))
        # deterministic global order: by ring (R first), then representative
        order_rank = {i: self.ctx.overorders[i].index_in(self.ctx.OK) for i in
                      range(len(self.ctx.overorders))}
        weak.sort(key=lambda w: (-order_rank[w.ring_id], w.ideal.key))
        self._weak = [WeakClass(i, w.ring_id, w.ideal) for i, w in enumerate(weak)]
        return self._weak

    # -- vertices -----------------------------------------------------------------
    def vertices(self) -> List[Vertex]:
        if self._vertices is None:
            out = []
            for w in self.weak_classes():
                pic = self.ctx.pic(w.ring_id)
                for c in pic.group.all_coords():
                    out.append(Vertex(w.id, tuple(c), w.ring_id))
            self._vertices = out
        return self._vertices

    def vertex_count(self) -> int:
        return len(self.vertices())

    # -- preimage sets P_S and vertex representative ideals -------------------------
    def preimages(self, ring_id: int) -> Dict[Tuple[int, ...], Tuple[int, ...]]:
        """P_S: for each Pic(S) class, the lexicographically minimal Pic(R)
        preimage under e_S."""
        if ring_id not in self._preimage_sets:
            ctx = self.ctx
            picR = ctx.pic_R()
            out: Dict[Tuple[int, ...], Tuple[int, ...]] = {}
            for c in sorted(picR.group.all_coords()):
                img = ctx.e_S(ring_id, c)
                if img not in out:
                    out[img] = tuple(c)
            pic = ctx.pic(ring_id)
            assert len(out) == pic.order, "extension map not surjective"
            self._preimage_sets[ring_id] = out
        return self._preimage_sets[ring_id]

    def preimage_ideal(self, coords_R: Tuple[int, ...]) -> FractionalIdeal:
        """Deterministic invertible R-ideal representing a Pic(R) class."""
        if coords_R not in self._preimage_ideals:
            self._preimage_ideals[coords_R] = self.ctx.pic_R().representative(coords_R)
        return self._preimage_ideals[coords_R]

    def vertex_ideal(self, v: Vertex) -> FractionalIdeal:
        if v not in self._vertex_ideals:
            w = self.weak_classes()[v.wk]
            a = self.preimages(v.ring_id)[v.pic]
            I_a = self.preimage_ideal(a)
            self._vertex_ideals[v] = w.ideal * I_a
        return self._vertex_ideals[v]

    def vertex_by_key(self, wk: int, pic: Tuple[int, ...]) -> Vertex:
        return Vertex(wk, tuple(pic), self.weak_classes()[wk].ring_id)

    # -- resolution -----------------------------------------------------------------
    def vertex_of_ideal(self, M: FractionalIdeal) -> Tuple[Vertex, Element]:
        """The vertex representing [M], with witness x: x * V_ideal = M."""
        S = M.multiplicator_ring()
        try:
            ring_id = self.ctx.order_id(S)
        except Exception as e:
            raise NotInMonoid(f"multiplicator ring not an overorder: {e}")
        wk = None
        for w in self.weak_classes():
            if w.ring_id == ring_id and is_weakly_equivalent(M, w.ideal):
                wk = w
                break
        if wk is None:
            raise NotInMonoid("no weakly equivalent class representative found")
        pic = self.ctx.pic(ring_id)
        L = M.colon(wk.ideal)  # invertible S-ideal with L * W = M
        assert L * wk.ideal == M, "colon did not recover the Picard twist"
        coords = pic.class_of(L)
        v = Vertex(wk.id, coords, ring_id)
        V = self.vertex_ideal(v)
        # witness: generator of the principal S-ideal L * (I_a S)^{-1}
        a = self.preimages(ring_id)[coords]
        I_aS = self.preimage_ideal(a) * S
        Q = L * S.colon(I_aS)
        x = self.ctx.principal_generator(ring_id, Q)
        if x is None:
            raise NotInMonoid("vertex resolution lost principality")
        assert V.scale(x) == M, "vertex witness failed"
        return v, x

    # -- duality -----------------------------------------------------------------------
    def conj_map(self, ring_id: int, ring_id_conj: int) -> List[Tuple[int, ...]]:
        """Images in Pic(conj S) of the Pic(S) generators under I -> conj(I)."""
        key = (ring_id, ring_id_conj)
        if key not in self._conj_matrices:
            pic = self.ctx.pic(ring_id)
            picc = self.ctx.pic(ring_id_conj)
            imgs = []
            for gi in range(pic.t):
                G = pic.finite_gen_ideal(gi)
                imgs.append(picc.class_of(G.conjugate()))
            for gj in range(pic.k):
                imgs.append(picc.class_of(pic.pullback(gj).conjugate()))
            self._conj_matrices[key] = imgs
        return self._conj_matrices[key]

    def dual_vertex(self, v: Vertex) -> Tuple[Vertex, Element]:
        """Vertex of conj(dual(V)) with witness, using the twist formula
        dual(conj(I L)) = dual(conj(I)) * conj(L)^{-1} to avoid fresh dlogs."""
        ctx = self.ctx
        if v.wk not in self._dual_base:
            W = self.weak_classes()[v.wk].ideal
            base = W.conjugate().dual()
            bv, _bx = self.vertex_of_ideal(base)
            self._dual_base[v.wk] = (bv.wk, bv.pic, bv.ring_id)
        bwk, bpic, bring = self._dual_base[v.wk]
        picc = ctx.pic(bring)
        # subtract the conjugated class of the Picard part
        ring_conj = ctx.conjugate_order_id(v.ring_id)
        assert ring_conj == bring, "dual weak class ring mismatch"
        imgs = self.conj_map(v.ring_id, bring)
        pic = ctx.pic(v.ring_id)
        ev = pic.group.expvec_of_coords(list(v.pic))
        conj_c = picc.group.zero()
        for e, img in zip(ev, imgs):
            if e:
                conj_c = picc.group.add(conj_c, tuple((e * c) % d for c, d in
                                                      zip(img, picc.group.invariants)))
        coords = picc.group.add(bpic, picc.group.neg(conj_c))
        dv = Vertex(bwk, coords, bring)
        # witness by direct principality
        target = self.vertex_ideal(v).conjugate().dual()
        V = self.vertex_ideal(dv)
        Q = target.colon(V)
        x = self.ctx.principal_generator(bring, Q)
        assert x is not None and V.scale(x) == target, "dual witness failed"
        return dv, x
