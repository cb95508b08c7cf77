"""The D-isogeny graph: minimal edges, equivalence of isogenies,
composition, components, digraph isomorphism, and the connectivity
certificate.  A separate brute-force enumerator (`oracle_graph`) recomputes
the same edge set from raw sublattices and serves as the decisive oracle.

Edges are stored with canonical witnesses against the fixed vertex
representative ideals, so that edges sharing a vertex literally share the
representative lattice.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Dict, List, Optional, Sequence, Set, Tuple

import sympy

from . import intlinalg as la
from . import modp
from .algebra import Element
from .context import IsogenyClass
from .errors import IncomparableEnds, NoCertificate, TooLarge, UnitRankUnsupported
from .icm import ICM, Vertex
from .ideals import (FractionalIdeal, index, maximal_sublattices,
                     module_length, quotient_chart, sublattices_with_index_dividing)
from .residuering import _Chart


@dataclass(frozen=True)
class IsogenyEdge:
    src: Vertex
    tgt: Vertex
    witness: Element  # x with x * I(src) <= I(tgt)
    degree: int

    def key(self):
        return (self.src, self.tgt, self.witness.num, self.witness.den, self.degree)


class GraphBuilder:
    """Shared machinery for building and comparing isogeny graphs."""

    def __init__(self, ctx: IsogenyClass, icm: Optional[ICM] = None):
        self.ctx = ctx
        self.icm = icm if icm is not None else ICM(ctx)
        self._unit_chart_cache: Dict[Tuple, object] = {}
        self._transversal_cache: Dict[Tuple, List[Element]] = {}
        self._unit_sum_cache: Dict[Tuple, List[List[int]]] = {}
        self._y_cache: Dict[Tuple, Element] = {}

    # -- unit action on finite quotients -----------------------------------------
    def _unit_elements_mod(self, ring_id: int, modulus: FractionalIdeal) -> List[Element]:
        """Generators of S_{ring}^x reduced modulo the modulus lattice."""
        key = (ring_id, modulus.key)
        if key not in self._unit_chart_cache:
            ctx = self.ctx
            S = ctx.overorders[ring_id]
            chart = _Chart(S, modulus)
            gens = ctx.units.gens()
            rows = ctx.unit_lattice(ring_id)
            out = []
            for row in rows:
                u = ctx.K.one
                for e, g in zip(row, gens):
                    if e:
                        u = u * (g ** e if e > 0 else g.inv() ** (-e))
                out.append(chart.reduce(u))
            self._unit_chart_cache[key] = out
        return self._unit_chart_cache[key]

    @staticmethod
    def _coerce_mod(chart: _Chart, x: Element) -> Element:
        """Reduce an element of S (possibly with denominators) mod modulus."""
        return chart.reduce(x)

    def unit_orbit_reps(self, ring_id: int, J: FractionalIdeal,
                        subs: List[FractionalIdeal], m: FractionalIdeal,
                        p: int) -> List[FractionalIdeal]:
        """Orbit representatives of the submodules under the action of the
        unit group of the multiplicator ring (acting on J/mJ)."""
        if not subs:
            return []
        ctx = self.ctx
        S = ctx.overorders[ring_id]
        mS = m * S.lattice
        units_mod = self._unit_elements_mod(ring_id, mS)
        V, Vinv, diag, keep = quotient_chart(J, m * J)
        n = ctx.K.n

        def sub_key(M: FractionalIdeal):
            # the subspace of J/mJ spanned by M's image
            vecs = []
            for r in M.rows:
                x = Element(J.alg, list(r), M.den)
                v = J.coords_of(x)
                w = la.vec_mat(v, V)
                vecs.append([w[i] % p for i in keep])
            R, piv = modp.rref(vecs, p)
            return tuple(tuple(r) for r in R)

        def act_matrix(u: Element):
            # matrix of multiplication by u on J/mJ coordinates
            rows = []
            for i in range(n):
                x = Element(J.alg, list(J.rows[i]), J.den) * u
                v = J.coords_of(x)
                assert v is not None, "unit does not stabilize the lattice"
                w = la.vec_mat(v, V)
                rows.append([w[i2] % p for i2 in keep])
            return rows

        mats = [act_matrix(u) for u in units_mod]
        key_to_sub = {sub_key(M): M for M in subs}
        assert len(key_to_sub) == len(subs), "submodule keys collide"
        unseen = dict(key_to_sub)
        reps = []
        while unseen:
            k0 = min(unseen)
            M0 = unseen.pop(k0)
            reps.append(M0)
            frontier = [k0]
            while frontier:
                kcur = frontier.pop()
                base = [list(r) for r in kcur]
                for A in mats:
                    img = modp.mat_mul(base, A, p) if base else []
                    Rr, piv = modp.rref(img, p)
                    k2 = tuple(tuple(r) for r in Rr)
                    if k2 in unseen:
                        unseen.pop(k2)
                        frontier.append(k2)
        return reps

    # -- minimal edges (the per-weak-class loop) ------------------------------------
    def minimal_edges(self, D: int) -> List[IsogenyEdge]:
        ctx = self.ctx
        icm = self.icm
        picR = ctx.pic_R()
        edges: List[IsogenyEdge] = []
        mis = ctx.maximal_ideals_dividing(D)
        for w in icm.weak_classes():
            T_id = w.ring_id
            picT = ctx.pic(T_id)
            W_t = w.ideal
            pre_T = icm.preimages(T_id)
            for (m, idx, p) in mis:
                subs = maximal_sublattices(W_t, m, ctx.R.lattice, idx, p)
                reps = self.unit_orbit_reps(T_id, W_t, subs, m, p)
                for M in reps:
                    v_src, x = icm.vertex_of_ideal(M)
                    S_id = v_src.ring_id
                    picS = ctx.pic(S_id)
                    pre_S = icm.preimages(S_id)
                    a = pre_S[v_src.pic]  # Pic(R) coords of the chosen preimage
                    for b_hat in picT.group.all_coords():
                        b = pre_T[tuple(b_hat)]
                        ab = picR.group.add(a, b)
                        a2_hat = ctx.e_S(S_id, ab)
                        a2 = pre_S[a2_hat]
                        y = self._y_element(S_id, a, b, a2)
                        src = Vertex(v_src.wk, a2_hat, S_id)
                        tgt = Vertex(w.id, tuple(b_hat), T_id)
                        wit = x * y
                        e = IsogenyEdge(src, tgt, wit, idx)
                        edges.append(e)
        return edges

    def _y_element(self, S_id: int, a: Tuple[int, ...], b: Tuple[int, ...],
                   a2: Tuple[int, ...]) -> Element:
        """y with y * I_{a2} * S = I_a * I_b * S."""
        key = (S_id, a, b)
        if key not in self._y_cache:
            ctx = self.ctx
            icm = self.icm
            S = ctx.overorders[S_id].lattice
            I_a = icm.preimage_ideal(a)
            I_b = icm.preimage_ideal(b)
            I_a2 = icm.preimage_ideal(a2)
            lhs = I_a * I_b * S
            rhs = I_a2 * S
            Q = lhs * S.colon(rhs)
            y = ctx.principal_generator(S_id, Q)
            assert y is not None, "preimage classes do not match"
            assert rhs.scale(y) == lhs
            self._y_cache[key] = y
        return self._y_cache[key]

    # -- equivalence of isogenies ------------------------------------------------------
    def unit_product_lattice(self, S_id: int, T_id: int) -> List[List[int]]:
        key = (min(S_id, T_id), max(S_id, T_id))
        if key not in self._unit_sum_cache:
            rows = [list(r) for r in self.ctx.unit_lattice(S_id)]
            rows += [list(r) for r in self.ctx.unit_lattice(T_id)]
            self._unit_sum_cache[key] = la.hnf(rows)
        return self._unit_sum_cache[key]

    def in_unit_product(self, x: Element, S_id: int, T_id: int) -> bool:
        """x in S^x T^x (x must be a unit of O_K for a True answer)."""
        U = self.ctx.units
        if not U.is_unit(x):
            return False
        tor, free = U.dlog(x)
        vec = list(tor) + list(free)
        if U._tor_table is not None:
            pass
        H = self.unit_product_lattice(S_id, T_id)
        return la.lattice_contains(H, vec)

    def are_equivalent(self, e1: IsogenyEdge, e2: IsogenyEdge) -> bool:
        """Equivalence test for edges in vertex-canonical form."""
        if e1.src != e2.src or e1.tgt != e2.tgt or e1.degree != e2.degree:
            return False
        w = e1.witness / e2.witness
        return self.in_unit_product(w, e1.src.ring_id, e1.tgt.ring_id)

    def classify(self, e: IsogenyEdge) -> str:
        ctx = self.ctx
        S = ctx.overorders[e.src.ring_id]
        T = ctx.overorders[e.tgt.ring_id]
        if S == T:
            return "horizontal"
        if T.contains_order(S):
            return "ascending"
        if S.contains_order(T):
            return "descending"
        raise IncomparableEnds("endomorphism rings are incomparable")

    def edge_length(self, e: IsogenyEdge) -> int:
        icm = self.icm
        J = icm.vertex_ideal(self.icm.vertex_by_key(e.tgt.wk, e.tgt.pic))
        I = icm.vertex_ideal(self.icm.vertex_by_key(e.src.wk, e.src.pic)).scale(e.witness)
        mis = self.ctx.maximal_ideals_dividing(int(index(J, I)))
        return module_length(J, I, self.ctx.R.lattice, mis)

    def is_minimal_edge(self, e: IsogenyEdge) -> bool:
        """Minimal iff the quotient is simple: m * tgt <= w*src for the
        maximal ideal m matching the degree."""
        icm = self.icm
        J = icm.vertex_ideal(icm.vertex_by_key(e.tgt.wk, e.tgt.pic))
        I = icm.vertex_ideal(icm.vertex_by_key(e.src.wk, e.src.pic)).scale(e.witness)
        for (m, idx, p) in self.ctx.maximal_ideals_dividing(e.degree):
            if idx == e.degree and I.contains_ideal(m * J):
                return True
        return False

    # -- compositions --------------------------------------------------------------------
    def unit_transversal(self, mid_id: int, left_id: int, right_id: int) -> List[Element]:
        """Coset representatives of O2^x / (O1^x O3^x cap O2^x)."""
        key = (mid_id, left_id, right_id)
        if key not in self._transversal_cache:
            ctx = self.ctx
            L2 = ctx.unit_lattice(mid_id)
            L13 = self.unit_product_lattice(left_id, right_id)
            k = ctx.units.num_gens
            # intersection: {c in L2-span : c in L13-span}
            B2 = [list(r) for r in L2]
            r2 = len(B2)
            stack = [list(B2[i]) + [1 if t == i else 0 for t in range(r2)] for i in range(r2)]
            stack += [list(r) + [0] * r2 for r in L13]
            H = la.hnf(stack)
            inter_coeffs = [row[k:] for row in H if not any(row[:k])]
            # quotient of Z^{r2} by the coefficient lattice
            from .abgroup import FiniteAbelianGroup

            Q = FiniteAbelianGroup(r2, inter_coeffs)
            gens = ctx.units.gens()
            red_hnf = la.hnf(inter_coeffs) if inter_coeffs else []
            out = []
            for c in Q.all_coords():
                ev = Q.expvec_of_coords(list(c))
                # keep exponents small modulo the intersection lattice
                for rrow in red_hnf:
                    j = next((t for t in range(r2) if rrow[t]), None)
                    if j is None:
                        continue
                    q = ev[j] // rrow[j]
                    if q:
                        ev = [ev[t] - q * rrow[t] for t in range(r2)]
                # total exponents over the unit generators
                tot = [0] * k
                for ci, row in zip(ev, B2):
                    if ci:
                        for t in range(k):
                            tot[t] += ci * row[t]
                elt = ctx.K.one
                for e, g in zip(tot, gens):
                    if e:
                        elt = elt * (g ** e if e > 0 else g.inv() ** (-e))
                out.append(elt)
            self._transversal_cache[key] = out
        return self._transversal_cache[key]

    def full_graph(self, D: int, minimal: Optional[List[IsogenyEdge]] = None
                   ) -> Dict[int, List[IsogenyEdge]]:
        """Edges of G^D stratified by exact degree n | D."""
        if minimal is None:
            minimal = self.minimal_edges(D)
        by_deg: Dict[int, List[IsogenyEdge]] = {}
        min_by_deg: Dict[int, List[IsogenyEdge]] = {}
        for e in minimal:
            by_deg.setdefault(e.degree, []).append(e)
            min_by_deg.setdefault(e.degree, []).append(e)
        divisors = [n for n in sorted(sympy.divisors(D)) if n > 1]
        for n in divisors:
            cur = by_deg.setdefault(n, [])
            for d2 in sorted(sympy.divisors(n)):
                if d2 <= 1 or d2 >= n:
                    continue
                d1 = n // d2
                for E2 in min_by_deg.get(d2, []):
                    for E1 in by_deg.get(d1, []):
                        if E1.tgt != E2.src:
                            continue
                        U = self.unit_transversal(E1.tgt.ring_id, E1.src.ring_id,
                                                  E2.tgt.ring_id)
                        for u in U:
                            wit = E1.witness * u * E2.witness
                            cand = IsogenyEdge(E1.src, E2.tgt, wit, n)
                            if not any(self.are_equivalent(cand, e0) for e0 in cur
                                       if e0.src == cand.src and e0.tgt == cand.tgt):
                                cur.append(cand)
        return by_deg

    # -- existence / connectivity ---------------------------------------------------------
    def edge_existence(self, D: int) -> bool:
        return bool(self.ctx.maximal_ideals_dividing(D))

    def connectivity_certificate(self, D: int):
        """(generating set of maximal ideals, N_S, diameter bound), or raise
        NoCertificate.  The Theorem's hypothesis is sufficient, not
        necessary."""
        ctx = self.ctx
        sing = ctx.singular_primes_of_R()
        n_sing = 1
        for (_m, i, _p) in sing:
            n_sing = n_sing * i // gcd(n_sing, i)
        if D % n_sing:
            raise NoCertificate("a singular maximal ideal has index not dividing D")
        picR = ctx.pic_R()
        cand = ctx.maximal_ideals_dividing(D)
        # greedy: add ideal classes until they generate Pic(R)
        chosen: List[Tuple[FractionalIdeal, int]] = []
        spanned: Set[Tuple[int, ...]] = set()

        def span_of(coord_list):
            out = {picR.group.zero()}
            frontier = [picR.group.zero()]
            while frontier:
                c = frontier.pop()
                for g in coord_list:
                    c2 = picR.group.add(c, g)
                    if c2 not in out:
                        out.add(c2)
                        frontier.append(c2)
            return out

        coords_chosen = []
        for (m, i, _p) in cand:
            if len(span_of(coords_chosen)) == picR.order:
                break
            cm = picR.class_of(m)
            if cm in span_of(coords_chosen):
                continue
            coords_chosen.append(cm)
            chosen.append((m, i))
        if len(span_of(coords_chosen)) != picR.order:
            raise NoCertificate("no generating set of Pic(R) with admissible index")
        N_S = n_sing
        for (_m, i) in chosen:
            N_S = N_S * i // gcd(N_S, i)
        if D % N_S:
            raise NoCertificate("N_S does not divide D")
        # diameter bound
        mis_all = []
        for p in sorted(set(pl for (_m, _i, pl) in sing) |
                        set(sympy.factorint(ctx.R.index_in(ctx.OK)))):
            mis_all.extend((m2, i2, p) for (m2, i2) in ctx.R.maximal_ideals_above(p))
        if ctx.is_bass():
            ln = module_length(ctx.OK.lattice, ctx.R.lattice, ctx.R.lattice, mis_all) \
                if ctx.R.lattice != ctx.OK.lattice else 1
            base = 2 * (ln - 1) if ctx.R.lattice != ctx.OK.lattice else 0
        else:
            f = ctx.conductor_R
            ln = module_length(ctx.OK.lattice, f, ctx.R.lattice, mis_all)
            base = 2 * (ln - 1)
        extra = 0
        for cvec in coords_chosen:
            extra += picR.group.element_order(cvec) - 1
        return [m for (m, _i) in chosen], N_S, base + extra

    # -- the brute-force oracle --------------------------------------------------------------
    def oracle_graph(self, D: int) -> Dict[int, List[IsogenyEdge]]:
        """Edge set of G^D computed by raw sublattice enumeration."""
        ctx = self.ctx
        icm = self.icm
        mis = ctx.maximal_ideals_dividing(D)
        out: Dict[int, List[IsogenyEdge]] = {}
        for v in icm.vertices():
            J = icm.vertex_ideal(v)
            subs = sublattices_with_index_dividing(J, D, ctx.R.lattice, mis)
            for M in subs:
                if M == J:
                    continue
                deg = index(J, M)
                assert deg.denominator == 1
                deg = int(deg)
                v_src, x = icm.vertex_of_ideal(M)
                cand = IsogenyEdge(v_src, v, x, deg)
                bucket = out.setdefault(deg, [])
                if not any(self.are_equivalent(cand, e0) for e0 in bucket
                           if e0.src == cand.src and e0.tgt == cand.tgt):
                    bucket.append(cand)
        return out


# -- components and digraph isomorphism ---------------------------------------------------

def components(vertices: Sequence[Vertex], edges: Sequence[IsogenyEdge]
               ) -> List[List[Vertex]]:
    """Weakly connected components."""
    parent = {v: v for v in vertices}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb

    for e in edges:
        union(e.src, e.tgt)
    comps: Dict[Vertex, List[Vertex]] = {}
    for v in vertices:
        comps.setdefault(find(v), []).append(v)
    return sorted(comps.values(), key=lambda c: (-len(c), min((v.wk, v.pic) for v in c)))


def _multi_edge_counts(edges: Sequence[IsogenyEdge], verts: Set[Vertex]):
    cnt: Dict[Tuple[Vertex, Vertex], int] = {}
    for e in edges:
        if e.src in verts and e.tgt in verts:
            cnt[(e.src, e.tgt)] = cnt.get((e.src, e.tgt), 0) + 1
    return cnt


def digraph_isomorphic(c1: Sequence[Vertex], e1: Sequence[IsogenyEdge],
                       c2: Sequence[Vertex], e2: Sequence[IsogenyEdge],
                       color1=None, color2=None, node_cap: int = 400) -> bool:
    """Directed multigraph isomorphism by WL-refinement + backtracking.

    color1/color2: optional dicts Vertex -> hashable (e.g. endomorphism
    ring index) that must be preserved.
    """
    if len(c1) != len(c2):
        return False
    if len(c1) > node_cap:
        raise TooLarge(f"component with {len(c1)} vertices exceeds the matcher cap")
    v1, v2 = list(c1), list(c2)
    s1, s2 = set(v1), set(v2)
    m1 = _multi_edge_counts(e1, s1)
    m2 = _multi_edge_counts(e2, s2)
    if len(m1) != len(m2) or sorted(m1.values()) != sorted(m2.values()):
        return False

    def refine(vs, mm, colors):
        lab = {v: hash((colors.get(v) if colors else None,)) for v in vs}
        prev_count = -1
        for _ in range(len(vs) + 1):
            new = {}
            for v in vs:
                outs = sorted((lab[w], k) for (u, w), k in mm.items() if u == v)
                ins = sorted((lab[u], k) for (u, w), k in mm.items() if w == v)
                new[v] = (lab[v], tuple(outs), tuple(ins))
            codes = {t: i for i, t in enumerate(sorted(set(new.values()), key=repr))}
            lab = {v: codes[new[v]] for v in vs}
            cnt = len(set(lab.values()))
            if cnt == prev_count:
                break
            prev_count = cnt
        return lab

    l1 = refine(v1, m1, color1)
    l2 = refine(v2, m2, color2)
    if sorted(l1.values()) != sorted(l2.values()):
        return False
    # backtracking with label classes
    by_lab2: Dict[int, List[Vertex]] = {}
    for v in v2:
        by_lab2.setdefault(l2[v], []).append(v)
    order = sorted(v1, key=lambda v: (len(by_lab2.get(l1[v], [])), l1[v], (v.wk, v.pic)))
    mapping: Dict[Vertex, Vertex] = {}
    used: Set[Vertex] = set()

    def consistent(v, w):
        # check all edges between already-mapped vertices and v
        for u in mapping:
            if m1.get((u, v), 0) != m2.get((mapping[u], w), 0):
                return False
            if m1.get((v, u), 0) != m2.get((w, mapping[u]), 0):
                return False
        return m1.get((v, v), 0) == m2.get((w, w), 0)

    def bt(i):
        if i == len(order):
            return True
        v = order[i]
        for w in by_lab2.get(l1[v], []):
            if w in used:
                continue
            if not consistent(v, w):
                continue
            mapping[v] = w
            used.add(w)
            if bt(i + 1):
                return True
            del mapping[v]
            used.discard(w)
        return False

    return bt(0)
