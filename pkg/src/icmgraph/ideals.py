"""Fractional ideals as full-rank lattices in K, in canonical HNF form.

An ideal is (den, B) with B a 2g x 2g integer matrix in row-style HNF whose
rows are power-basis coordinates of den * I.  Equality of ideals is equality
of the normalized representation.  Products, colon ideals and trace duals
are all exact; the colon ideal is computed through the trace-dual identity
(I : J) = (J * I^dagger)^dagger.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Iterable, List, Optional, Sequence, Tuple

from . import intlinalg as la
from . import modp
from .algebra import Element, EtaleAlgebra
from .errors import NotContained


class FractionalIdeal:
    __slots__ = ("alg", "den", "rows", "_det", "_mult_ring", "_dual", "_hnf_key")

    def __init__(self, alg: EtaleAlgebra, rows: Sequence[Sequence[int]], den: int = 1,
                 _canonical: bool = False):
        self.alg = alg
        if _canonical:
            self.rows = tuple(tuple(r) for r in rows)
            self.den = den
        else:
            H = la.hnf(rows)
            if len(H) != alg.n:
                raise ValueError("ideal lattice is not full rank")
            if den < 0:
                raise ValueError("denominator must be positive")
            c = den
            for r in H:
                for v in r:
                    if v:
                        c = gcd(c, v)
                if c == 1:
                    break
            if c > 1:
                H = [[v // c for v in r] for r in H]
                den //= c
            self.rows = tuple(tuple(r) for r in H)
            self.den = den
        self._det = None
        self._mult_ring = None
        self._dual = None
        self._hnf_key = None

    # -- canonical data -------------------------------------------------------
    @property
    def key(self) -> Tuple:
        if self._hnf_key is None:
            self._hnf_key = (self.den, self.rows)
        return self._hnf_key

    def __eq__(self, other) -> bool:
        return isinstance(other, FractionalIdeal) and self.den == other.den and self.rows == other.rows

    def __hash__(self):
        return hash((self.den, self.rows))

    def det(self) -> int:
        """det of the integer basis matrix (product of HNF pivots) > 0."""
        if self._det is None:
            d = 1
            for i in range(self.alg.n):
                d *= self.rows[i][i]
            self._det = d
        return self._det

    def covolume(self) -> Fraction:
        return Fraction(self.det(), self.den ** self.alg.n)

    # -- membership -----------------------------------------------------------
    def contains(self, e: Element) -> bool:
        return self.coords_of(e) is not None

    def coords_of(self, e: Element) -> Optional[List[int]]:
        """Integer coordinates of e in the basis rows/den, or None."""
        target = []
        for c in e.num:
            v = c * self.den
            if v % e.den:
                return None
            target.append(v // e.den)
        return la.solve_upper_triangular(self.rows, target)

    def contains_ideal(self, other: "FractionalIdeal") -> bool:
        d = other.den
        for r in other.rows:
            v = [c * self.den for c in r]
            if any(c % d for c in v):
                return False
            if la.solve_upper_triangular(self.rows, [c // d for c in v]) is None:
                return False
        return True

    def basis_elements(self) -> List[Element]:
        return [Element(self.alg, list(r), self.den) for r in self.rows]

    # -- arithmetic -------------------------------------------------------------
    def __mul__(self, other):
        if isinstance(other, FractionalIdeal):
            alg = self.alg
            prod_rows = []
            for r in self.rows:
                for s in other.rows:
                    prod_rows.append(alg._mul_int(r, s))
            return FractionalIdeal(alg, prod_rows, self.den * other.den)
        if isinstance(other, Element):
            return self.scale(other)
        if isinstance(other, int):
            return self.scale(Element(self.alg, [other] + [0] * (self.alg.n - 1)))
        return NotImplemented

    __rmul__ = __mul__

    def __add__(self, other: "FractionalIdeal") -> "FractionalIdeal":
        d1, d2 = self.den, other.den
        l = d1 * d2 // gcd(d1, d2)
        rows = [[c * (l // d1) for c in r] for r in self.rows]
        rows += [[c * (l // d2) for c in r] for r in other.rows]
        return FractionalIdeal(self.alg, rows, l)

    def scale(self, x: Element) -> "FractionalIdeal":
        if x.is_zero():
            raise ZeroDivisionError("scaling ideal by zero")
        rows = [self.alg._mul_int(x.num, r) for r in self.rows]
        return FractionalIdeal(self.alg, rows, self.den * x.den)

    def conjugate(self) -> "FractionalIdeal":
        """Image under the CM involution (basis rows conjugated)."""
        C, cd = self.alg.conj_matrix
        rows = [la.vec_mat(list(r), C) for r in self.rows]
        return FractionalIdeal(self.alg, rows, self.den * cd)

    def dual(self) -> "FractionalIdeal":
        """Trace dual I^dagger = {x : Tr(x I) in Z}."""
        if self._dual is None:
            alg = self.alg
            TBt = la.mat_mul(alg.trace_gram, la.transpose(self.rows))
            N, d = la.invert(TBt)
            rows = [[self.den * N[i][j] for j in range(alg.n)] for i in range(alg.n)]
            self._dual = FractionalIdeal(alg, rows, d)
        return self._dual

    def colon(self, other: "FractionalIdeal") -> "FractionalIdeal":
        """(self : other) = {a in K : a*other  <= self}."""
        return (other * self.dual()).dual()

    def multiplicator_ring(self) -> "FractionalIdeal":
        if self._mult_ring is None:
            self._mult_ring = self.colon(self)
        return self._mult_ring

    def is_order(self) -> bool:
        one = self.alg.one
        if not self.contains(one):
            return False
        elts = self.basis_elements()
        return all(self.contains(a * b) for a in elts for b in elts)

    def index_in(self, other: "FractionalIdeal") -> Fraction:
        """Generalized index [other : self] = covol(self)/covol(other)."""
        return self.covolume() / other.covolume()

    def __repr__(self):
        return f"FractionalIdeal(den={self.den}, det={self.det()})"


def ideal_from_elements(alg: EtaleAlgebra, gens: Iterable[Element],
                        order: Optional[FractionalIdeal] = None) -> FractionalIdeal:
    """The module generated by gens over Z (or over the given order)."""
    rows: List[List[int]] = []
    den = 1
    items: List[Element] = []
    for x in gens:
        if order is None:
            items.append(x)
        else:
            items.extend(x * b for b in order.basis_elements())
    for x in items:
        den = den * x.den // gcd(den, x.den)
    for x in items:
        m = den // x.den
        rows.append([c * m for c in x.num])
    return FractionalIdeal(alg, rows, den)


def index(J: FractionalIdeal, I: FractionalIdeal) -> Fraction:
    """[J : I] as a positive rational; integer when I <= J."""
    return I.index_in(J)


def is_weakly_equivalent(I: FractionalIdeal, J: FractionalIdeal) -> bool:
    """True iff (I:I) = (J:J) and (I:J)(J:I) = (I:I)."""
    S = I.multiplicator_ring()
    if S != J.multiplicator_ring():
        return False
    return I.colon(J) * J.colon(I) == S


# -- finite quotients and maximal sublattices ---------------------------------

def quotient_chart(J: FractionalIdeal, N: FractionalIdeal):
    """Coordinates for the finite module J/N (requires N <= J).

    Returns (V, Vinv, diag, keep): the class of an element with J-basis
    coordinates w is (w @ V) mod diag, restricted to the positions in keep
    (those with elementary divisor > 1).
    """
    n = J.alg.n
    C = []
    for r in N.rows:
        v = [c * J.den for c in r]
        if any(c % N.den for c in v):
            raise NotContained("quotient_chart: N not contained in J")
        sol = la.solve_upper_triangular(J.rows, [c // N.den for c in v])
        if sol is None:
            raise NotContained("quotient_chart: N not contained in J")
        C.append(sol)
    D, U, V = la.snf_with_transform(C)
    diag = [D[i][i] for i in range(n)]
    Vinv, dv = la.invert(V)
    assert dv == 1
    keep = [i for i in range(n) if diag[i] != 1]
    return V, Vinv, diag, keep


def _action_matrix_on_quotient(J: FractionalIdeal, mult_num: Sequence[Sequence[int]],
                               mult_den: int, V, Vinv, diag, keep, p: int):
    """Matrix (over F_p) of multiplication by an element on J/N coordinates.

    mult_num/mult_den: integer matrix of multiplication on power-basis
    coordinates (row convention).  All elementary divisors in keep must be p.
    """
    n = J.alg.n
    # J-basis action: row i of J -> coords in J basis
    A = []
    for i in range(n):
        w = la.vec_mat(list(J.rows[i]), mult_num)  # coords (x denominators)
        sol = la.solve_upper_triangular(J.rows, w)
        if sol is None:
            raise ArithmeticError("lattice not stable under multiplier")
        A.append(sol)
    if mult_den != 1:
        A = [[c // mult_den for c in row] for row in A]  # exact when stable
    # conjugate into quotient coordinates: y = wV, action = Vinv A V
    M = la.mat_mul(la.mat_mul(Vinv, A), V)
    return [[M[i][j] % p for j in keep] for i in keep]


def maximal_sublattices(J: FractionalIdeal, m_ideal: FractionalIdeal,
                        R: FractionalIdeal, m_index: int, p: int) -> List[FractionalIdeal]:
    """All R-submodules M with mJ <= M < J and J/M isomorphic to R/m.

    m_ideal is a maximal R-ideal of index m_index = p^k; the result are the
    kernels of the R-linear surjections J/mJ -> R/m.
    """
    alg = J.alg
    n = alg.n
    mJ = m_ideal * J
    V, Vinv, diag, keep = quotient_chart(J, mJ)
    if not keep:
        return []
    assert all(diag[i] == p for i in keep), "J/mJ must be an F_p vector space"
    Vm, Vminv, diagm, keepm = quotient_chart(R, m_ideal)
    k = len(keepm)
    assert p ** k == m_index
    gens = [alg.pi, alg.pibar]
    acts_Q = []
    acts_T = []
    for gelt in gens:
        mm = alg.mult_matrix_int(gelt)
        acts_Q.append(_action_matrix_on_quotient(J, mm, gelt.den, V, Vinv, diag, keep, p))
        acts_T.append(_action_matrix_on_quotient(R, mm, gelt.den, Vm, Vminv, diagm, keepm, p))
    N = len(keep)
    # unknowns: Phi an N x k matrix over F_p with  M_g Phi = Phi A_g  for both
    # generators; flatten Phi row-major and build the linear system
    eqs = []
    for Mg, Ag in zip(acts_Q, acts_T):
        for i in range(N):
            for j in range(k):
                row = [0] * (N * k)
                for t in range(N):
                    row[t * k + j] = (row[t * k + j] + Mg[i][t]) % p
                for t in range(k):
                    row[i * k + t] = (row[i * k + t] - Ag[t][j]) % p
                eqs.append(row)
    basis = modp.nullspace(eqs, p, cols=N * k)
    if not basis:
        return []
    out = {}
    # enumerate nonzero Phi in the solution space, dedup by kernel
    from itertools import product as iproduct

    for coeffs in iproduct(range(p), repeat=len(basis)):
        if not any(coeffs):
            continue
        phi = [0] * (N * k)
        for c, b in zip(coeffs, basis):
            if c:
                for t in range(N * k):
                    phi[t] = (phi[t] + c * b[t]) % p
        Phi = [[phi[i * k + j] for j in range(k)] for i in range(N)]
        if modp.rank(Phi, p) != k:
            continue  # not surjective onto R/m
        # kernel of y -> y Phi inside (F_p)^N
        ker = modp.nullspace(la.transpose(Phi), p, cols=N)
        kkey = tuple(tuple(r) for r in modp.rref(ker, p)[0])
        if kkey in out:
            continue
        # pull back: lattice spanned by mJ and lifts of kernel vectors,
        # over the common denominator L of J and mJ
        L = J.den * mJ.den // gcd(J.den, mJ.den)
        lift_rows = [[c * (L // mJ.den) for c in r] for r in mJ.rows]
        for v in ker:
            # v is in quotient coordinates: lift w = v_full @ Vinv in J basis
            vf = [0] * n
            for pos, i in enumerate(keep):
                vf[i] = v[pos]
            w = la.vec_mat(vf, Vinv)
            coords = la.vec_mat(w, [list(r) for r in J.rows])
            lift_rows.append([c * (L // J.den) for c in coords])
        M = FractionalIdeal(alg, lift_rows, L)
        out[kkey] = M
    return list(out.values())


def sublattices_with_index_dividing(J: FractionalIdeal, D: int, R: FractionalIdeal,
                                    maximal_ideals) -> List[FractionalIdeal]:
    """All R-submodules M <= J with [J : M] dividing D (including J itself).

    maximal_ideals is a list of (m_ideal, index, p) for the maximal ideals
    of R whose index divides D.
    """
    seen = {J.key: J}
    frontier = [(J, D)]
    while frontier:
        cur, budget = frontier.pop()
        for (m, idx, p) in maximal_ideals:
            if budget % idx:
                continue
            for M in maximal_sublattices(cur, m, R, idx, p):
                if M.key not in seen:
                    seen[M.key] = M
                    nb = budget // idx
                    if nb > 1:
                        frontier.append((M, nb))
    return list(seen.values())


def module_length(J: FractionalIdeal, I: FractionalIdeal, R: FractionalIdeal,
                  maximal_ideals) -> int:
    """Length of J/I as an R-module (I <= J required).

    maximal_ideals must cover every maximal ideal whose index divides [J:I].
    """
    if not J.contains_ideal(I):
        raise NotContained("module_length requires I <= J")
    length = 0
    cur = J
    while cur != I:
        idx = int(index(cur, I))
        step = None
        for (m, mi, p) in maximal_ideals:
            if idx % mi:
                continue
            for M in maximal_sublattices(cur, m, R, mi, p):
                if M.contains_ideal(I):
                    step = M
                    break
            if step is not None:
                break
        if step is None:
            raise ArithmeticError("no composition step found; I not an R-submodule?")
        cur = step
        length += 1
    return length
