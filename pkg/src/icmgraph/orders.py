"""Orders in the etale algebra: the Frobenius order R = Z[pi, q/pi], the
maximal order via p-maximalization (radical idealizer), overorders,
maximal ideals, conductors, and the Gorenstein/Bass tests.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Dict, List, Optional, Sequence, Tuple

import sympy

from . import intlinalg as la
from . import modp
from .algebra import Element, EtaleAlgebra, NumberAlgebra
from .errors import DiscriminantUnfactorable
from .ideals import FractionalIdeal, ideal_from_elements, maximal_sublattices


class Order:
    """An order in a NumberAlgebra, wrapped around its ideal lattice."""

    __slots__ = ("lattice", "_disc", "_max_ideals", "_conductor", "_gorenstein")

    def __init__(self, lattice: FractionalIdeal, check: bool = False):
        if check and not lattice.is_order():
            raise ValueError("lattice is not an order")
        self.lattice = lattice
        self._disc: Optional[int] = None
        self._max_ideals: Dict[int, List[Tuple[FractionalIdeal, int]]] = {}
        self._conductor: Optional[FractionalIdeal] = None
        self._gorenstein: Optional[bool] = None

    @property
    def alg(self) -> NumberAlgebra:
        return self.lattice.alg

    def __eq__(self, other):
        return isinstance(other, Order) and self.lattice == other.lattice

    def __hash__(self):
        return hash(self.lattice)

    def discriminant(self) -> int:
        if self._disc is None:
            B = [list(r) for r in self.lattice.rows]
            T = self.alg.trace_gram
            Gram = la.mat_mul(la.mat_mul(B, T), la.transpose(B))
            d = Fraction(la.det(Gram), self.lattice.den ** (2 * self.alg.n))
            assert d.denominator == 1
            self._disc = int(d)
        return self._disc

    def contains(self, e: Element) -> bool:
        return self.lattice.contains(e)

    def contains_order(self, other: "Order") -> bool:
        return self.lattice.contains_ideal(other.lattice)

    def index_in(self, other: "Order") -> int:
        """[other : self] for self <= other."""
        v = self.lattice.index_in(other.lattice)
        assert v.denominator == 1
        return int(v)

    def basis_elements(self) -> List[Element]:
        return self.lattice.basis_elements()

    # -- maximal ideals -----------------------------------------------------
    def maximal_ideals_above(self, p: int) -> List[Tuple[FractionalIdeal, int]]:
        """Maximal ideals above p as (ideal, index) with index = p^f."""
        if p not in self._max_ideals:
            self._max_ideals[p] = _maximal_ideals_above(self, p)
        return self._max_ideals[p]

    def __repr__(self):
        return f"Order(det={self.lattice.det()}/{self.lattice.den}^n)"


# -- construction --------------------------------------------------------------

def frobenius_order(K: EtaleAlgebra) -> Order:
    """R = Z[pi, q/pi], as a lattice spanned by pi^i pibar^j."""
    gens = []
    pb_pows = [K.one]
    for _ in range(K.n - 1):
        pb_pows.append(pb_pows[-1] * K.pibar)
    pi_pows = [K.one]
    for _ in range(K.n - 1):
        pi_pows.append(pi_pows[-1] * K.pi)
    for a in pi_pows:
        for b in pb_pows:
            gens.append(a * b)
    return Order(ideal_from_elements(K, gens))


def equation_order(A: NumberAlgebra) -> Order:
    """Z[t] inside Q[x]/(f)."""
    return Order(FractionalIdeal(A, la.identity(A.n), 1))


def _frobenius_kernel(order: Order, p: int) -> List[List[int]]:
    """Basis (coords in order basis, mod p) of the radical of order/p."""
    n = order.alg.n
    basis = order.basis_elements()
    # matrix of x -> x^p on order/p (rows: image coordinates of basis elts)
    rows = []
    for b in basis:
        bp = b ** p
        v = order.lattice.coords_of(bp)
        assert v is not None
        rows.append([c % p for c in v])
    # iterate until p^m >= n
    m = 1
    pm = p
    M = rows
    while pm < n:
        M = modp.mat_mul(M, rows, p)
        pm *= p
        m += 1
    return modp.nullspace(la.transpose(M), p, cols=n)


def p_radical(order: Order, p: int) -> FractionalIdeal:
    """The radical of p*order in order."""
    ker = _frobenius_kernel(order, p)
    n = order.alg.n
    L = order.lattice
    rows = [[c * p for c in r] for r in L.rows]
    for v in ker:
        coords = la.vec_mat(v, [list(r) for r in L.rows])
        rows.append(coords)
    return FractionalIdeal(L.alg, rows, L.den)


def maximal_order(start: Order, disc_factors: Optional[Sequence[int]] = None) -> Order:
    """The maximal order containing start, by radical-idealizer iteration.

    disc_factors may list the primes to treat; default: primes p with
    p^2 | disc (found by factoring the discriminant).
    """
    order = start
    if disc_factors is None:
        d = abs(order.discriminant())
        try:
            fac = sympy.factorint(d)
        except Exception as e:  # pragma: no cover
            raise DiscriminantUnfactorable(str(e))
        disc_factors = sorted(int(p) for p, e in fac.items() if e >= 2)
    for p in disc_factors:
        while True:
            rad = p_radical(order, p)
            new_lat = rad.colon(rad)
            if new_lat == order.lattice:
                break
            order = Order(new_lat)
    return order


def conductor(S: Order, OK: Order) -> FractionalIdeal:
    """(S : O_K), the largest O_K-ideal contained in S."""
    if S._conductor is None:
        S._conductor = S.lattice.colon(OK.lattice)
    return S._conductor


def _split_etale_algebra(order: Order, p: int, radical_rows: List[List[int]]):
    """Decompose Abar = (order/p)/rad into its field components.

    Returns a list of (complement_rows, f): complement_rows spans (over F_p,
    in order coordinates) the sum of all OTHER components, f is the residue
    degree of this component.  The maximal ideal above p for a component is
    p*order + rad + complement.
    """
    n = order.alg.n
    R_rref, rpiv = modp.rref(radical_rows, p) if radical_rows else ([], [])
    comp = [j for j in range(n) if j not in rpiv]
    dim = len(comp)

    def reduce_vec(v):
        v = [c % p for c in v]
        for r, c in zip(R_rref, rpiv):
            if v[c]:
                f = v[c]
                v = [(v[t] - f * r[t]) % p for t in range(n)]
        return v

    basis = order.basis_elements()
    # multiplication table on Abar coordinates (indexed by comp positions)
    table = []
    for i in comp:
        rowi = []
        for j in comp:
            w = order.lattice.coords_of(basis[i] * basis[j])
            w = reduce_vec(w)
            rowi.append([w[t] for t in comp])
        table.append(rowi)
    one = reduce_vec(order.lattice.coords_of(order.alg.one))
    one_bar = [one[t] for t in comp]

    def mul_bar(u, v):
        out = [0] * dim
        for i in range(dim):
            if not u[i]:
                continue
            for j in range(dim):
                if v[j]:
                    c = (u[i] * v[j]) % p
                    row = table[i][j]
                    for t in range(dim):
                        out[t] = (out[t] + c * row[t]) % p
        return out

    # recursively split blocks; a block is (basis rows in Abar coords,
    # identity element of the block)
    leaves = []  # (block_basis, other_leaves_accumulator)

    def block_coords(bas):
        Rb, pivb = modp.rref(bas, p)
        def coords(v):
            v = [c % p for c in v]
            out = []
            for r, c in zip(Rb, pivb):
                f = v[c]
                out.append(f)
                if f:
                    v = [(v[t] - f * r[t]) % p for t in range(dim)]
            assert not any(v), "vector not in block"
            return out
        return Rb, coords

    def split_block(bas, ident, complement_rows):
        d = len(bas)
        if d == 1:
            leaves.append((list(complement_rows), 1))
            return
        Rb, coords = block_coords(bas)

        def mult_matrix_block(v):
            return [coords(mul_bar(b, v)) for b in Rb]

        # deterministic sweep for an element whose minimal polynomial
        # (w.r.t. the block identity) factors or certifies a field
        def candidates():
            for b in Rb:
                yield b
            for i in range(d):
                for j in range(i + 1, d):
                    yield [(Rb[i][t] + Rb[j][t]) % p for t in range(dim)]
            state = 12345
            while True:
                v = [0] * dim
                for b in Rb:
                    state = (state * 1103515245 + 12345) % (2 ** 31)
                    c = state % p
                    if c:
                        for t in range(dim):
                            v[t] = (v[t] + c * b[t]) % p
                if any(v):
                    yield v

        for v in candidates():
            M = mult_matrix_block(v)
            mp = _min_poly_modp(M, p)
            fac = sympy.Poly(list(reversed(mp)), sympy.Symbol("T"), modulus=p).factor_list()[1]
            if len(fac) == 1 and fac[0][1] == 1:
                if fac[0][0].degree() == d:
                    leaves.append((list(complement_rows), d))
                    return
                continue  # does not generate; try next candidate
            if len(fac) == 1:
                continue  # power of an irreducible cannot happen (etale); retry
            # split into sub-blocks via kernels of the coprime factors
            subs = []
            for f, _e in fac:
                cf = [int(c) % p for c in reversed(f.all_coeffs())]
                FM = _poly_of_matrix(M, cf, p)
                ker = modp.nullspace(la.transpose(FM), p, cols=d)
                sub_bas = []
                for kv in ker:
                    w = [0] * dim
                    for pos in range(d):
                        if kv[pos]:
                            for t in range(dim):
                                w[t] = (w[t] + kv[pos] * Rb[pos][t]) % p
                    sub_bas.append(w)
                subs.append(sub_bas)
            # identities of the sub-blocks: project the block identity
            for i, sub in enumerate(subs):
                others = [r for j, s2 in enumerate(subs) if j != i for r in s2]
                sub_ident = _project_identity(sub, ident, mul_bar, p, dim)
                split_block(sub, sub_ident, complement_rows + others)
            return

    split_block(la.identity(dim), one_bar, [])

    out = []
    for comp_rows, f in leaves:
        full_rows = []
        for w in comp_rows:
            vfull = [0] * n
            for pos, j in enumerate(comp):
                vfull[j] = w[pos]
            full_rows.append(vfull)
        out.append((full_rows, f))
    return out


def _project_identity(sub_bas, ident, mul_bar, p, dim):
    """Identity of a sub-block: the element e in the block with e*x = x on
    the block; found by solving inside the subspace."""
    # e = sum c_i b_i with (e - 1) * b_j = 0 in the block for all j, i.e.
    # e * b_j = b_j.  Solve the linear system over F_p.
    d = len(sub_bas)
    eqs = []
    rhs = []
    for bj in sub_bas:
        prods = [mul_bar(bi, bj) for bi in sub_bas]
        for t in range(dim):
            eqs.append([prods[i][t] for i in range(d)])
            rhs.append(bj[t])
    sol = modp.solve(eqs, rhs, p)
    assert sol is not None, "block identity not found"
    e = [0] * dim
    for c, b in zip(sol, sub_bas):
        if c:
            for t in range(dim):
                e[t] = (e[t] + c * b[t]) % p
    return e


def _elt_from_coords(order: Order, coords: Sequence[int]) -> Element:
    L = order.lattice
    num = la.vec_mat(list(coords), [list(r) for r in L.rows])
    return Element(L.alg, num, L.den)


def _min_poly_modp(M: List[List[int]], p: int) -> List[int]:
    """Minimal polynomial (low->high, monic) of a matrix over F_p."""
    d = len(M)
    # Krylov on the full matrix: stack powers and find first dependency
    cur = la.identity(d)
    rows = [_flatten(cur)]
    while True:
        cur = modp.mat_mul(cur, M, p)
        rows.append(_flatten(cur))
        dep = _last_dependency(rows, p)
        if dep is not None:
            return dep


def _flatten(M):
    return [c for row in M for c in row]


def _last_dependency(rows: List[List[int]], p: int) -> Optional[List[int]]:
    """If the last row depends on the previous ones, return the monic
    dependency coefficients (low->high)."""
    k = len(rows) - 1
    A = la.transpose(rows[:k])
    sol = modp.solve(A, rows[k], p)
    if sol is None:
        return None
    return [(-c) % p for c in sol] + [1]


def _poly_of_matrix(M, coeffs, p):
    d = len(M)
    out = [[coeffs[0] % p if i == j else 0 for j in range(d)] for i in range(d)]
    cur = la.identity(d)
    for c in coeffs[1:]:
        cur = modp.mat_mul(cur, M, p)
        if c:
            for i in range(d):
                for j in range(d):
                    out[i][j] = (out[i][j] + c * cur[i][j]) % p
    return out


def _maximal_ideals_above(order: Order, p: int) -> List[Tuple[FractionalIdeal, int]]:
    """All maximal ideals of order above p, as (ideal, index p^f)."""
    n = order.alg.n
    L = order.lattice
    ker = _frobenius_kernel(order, p)
    rad_rows = ker
    pieces = _split_etale_algebra(order, p, rad_rows)
    out = []
    for kern_rows, f in pieces:
        # maximal ideal = preimage of the kernel of A ->> A/rad ->> F_i.
        # kern_rows span ker(mult-by-poly) in Abar coords, i.e. the
        # complement-of-block; as a subspace of Abar it is exactly the
        # kernel ideal of the projection to this factor.
        rows = [[c * p for c in r] for r in L.rows]
        for v in rad_rows:
            rows.append(la.vec_mat([c % p for c in v], [list(r) for r in L.rows]))
        for w in kern_rows:
            rows.append(la.vec_mat(w, [list(r) for r in L.rows]))
        m = FractionalIdeal(L.alg, rows, L.den)
        assert m.index_in(L) == p ** f, "maximal ideal index mismatch"
        out.append((m, p ** f))
    return out


def maximal_ideals_with_index_dividing(order: Order, D: int) -> List[Tuple[FractionalIdeal, int, int]]:
    """All maximal ideals with index p^f dividing D, as (ideal, index, p)."""
    out = []
    for p in sorted(sympy.factorint(D)):
        for (m, idx) in order.maximal_ideals_above(p):
            if D % idx == 0:
                out.append((m, idx, p))
    return out


def singular_maximal_ideals(order: Order, OK: Order) -> List[Tuple[FractionalIdeal, int, int]]:
    """Maximal ideals containing the conductor (S : O_K), as (m, index, p)."""
    f = conductor(order, OK)
    idx = f.index_in(order.lattice)
    assert idx.denominator == 1
    out = []
    for p in sorted(sympy.factorint(int(idx))):
        for (m, mi) in order.maximal_ideals_above(p):
            if m.contains_ideal(f):
                out.append((m, mi, p))
    return out


# -- overorders -----------------------------------------------------------------

def overorders(R: Order, OK: Order) -> List[Order]:
    """All orders S with R <= S <= O_K, sorted by index [O_K : S] descending
    (so R first, O_K last)."""
    idx = R.index_in(OK)
    if idx == 1:
        return [OK]
    prim = sorted(sympy.factorint(idx))
    mi_list = []
    for p in prim:
        mi_list.extend((m, i, p) for (m, i) in R.maximal_ideals_above(p))
    # walk the R-submodule lattice of O_K/R downward from O_K, keeping the
    # multiplicatively closed sublattices (they all contain R by construction)
    seen = {}
    frontier = [OK.lattice]
    all_lattices = {OK.lattice.key: OK.lattice}
    while frontier:
        cur = frontier.pop()
        for (m, i, p) in mi_list:
            for M in maximal_sublattices(cur, m, R.lattice, i, p):
                if M.key in all_lattices:
                    continue
                if not M.contains_ideal(R.lattice):
                    continue
                all_lattices[M.key] = M
                frontier.append(M)
    orders = []
    for lat in all_lattices.values():
        if lat.is_order():
            orders.append(Order(lat))
    orders.sort(key=lambda S: (-S.index_in(OK), S.lattice.key))
    return orders


# -- Gorenstein / Bass -----------------------------------------------------------

def is_gorenstein(S: Order) -> bool:
    """S is Gorenstein iff its trace dual is invertible as an S-ideal."""
    if S._gorenstein is None:
        Sd = S.lattice.dual()
        S._gorenstein = (Sd * S.lattice.colon(Sd)) == S.lattice
    return S._gorenstein


def is_bass(R: Order, all_overorders: Sequence[Order]) -> bool:
    return all(is_gorenstein(S) for S in all_overorders)
