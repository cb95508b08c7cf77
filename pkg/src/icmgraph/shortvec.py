"""Short vector machinery: LLL reduction and Fincke-Pohst enumeration on
exact positive definite Gram matrices, plus norm-targeted element searches
in ideal lattices (the principality primitive).

Enumeration bounds are computed with exact rationals; nothing here trusts
floating point.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd, isqrt
from typing import Iterator, List, Optional, Sequence, Tuple

from . import intlinalg as la
from .algebra import Element
from .errors import EnumerationRadiusExceeded

Mat = List[List[int]]


def gram_of_rows(alg, rows: Sequence[Sequence[int]]) -> Mat:
    """Integer Gram matrix of the T2 form on the given coordinate rows."""
    T2 = alg.t2_gram
    n = len(rows)
    BT = [la.vec_mat(r, T2) for r in rows]
    return [[sum(BT[i][t] * rows[j][t] for t in range(alg.n)) for j in range(n)] for i in range(n)]


def lll(basis: Sequence[Sequence[int]], gram: Mat, delta: Fraction = Fraction(3, 4)):
    """LLL-reduce; returns (new_basis_rows, new_gram).

    basis rows are carried through the same unimodular operations as the
    Gram matrix, all arithmetic exact.
    """
    n = len(gram)
    B = [list(r) for r in basis]
    G = [[Fraction(gram[i][j]) for j in range(n)] for i in range(n)]

    mu = [[Fraction(0)] * n for _ in range(n)]
    Bstar = [Fraction(0)] * n  # squared lengths of GS vectors

    def gso():
        for i in range(n):
            Bstar[i] = G[i][i]
            for j in range(i):
                mu[i][j] = G[i][j]
                for k in range(j):
                    mu[i][j] -= mu[j][k] * mu[i][k] * Bstar[k]
                mu[i][j] /= Bstar[j]
                Bstar[i] -= mu[i][j] ** 2 * Bstar[j]

    def swap(k):
        B[k], B[k - 1] = B[k - 1], B[k]
        G[k], G[k - 1] = G[k - 1], G[k]
        for r in G:
            r[k], r[k - 1] = r[k - 1], r[k]

    def size_reduce(k, j):
        if abs(mu[k][j]) > Fraction(1, 2):
            q = int(round(mu[k][j]))
            B[k] = [B[k][t] - q * B[j][t] for t in range(len(B[k]))]
            for t in range(n):
                G[k][t] -= q * G[j][t]
            for t in range(n):
                G[t][k] -= q * G[t][j]
            gso()

    gso()
    k = 1
    guard = 0
    while k < n:
        guard += 1
        if guard > 100000:
            raise RuntimeError("LLL failed to terminate")
        for j in range(k - 1, -1, -1):
            size_reduce(k, j)
        if Bstar[k] >= (delta - mu[k][k - 1] ** 2) * Bstar[k - 1]:
            k += 1
        else:
            swap(k)
            gso()
            k = max(k - 1, 1)
    Gi = [[int(G[i][j]) for j in range(n)] for i in range(n)]
    return B, Gi


def _floor_sqrt(f: Fraction) -> int:
    if f < 0:
        return -1
    return isqrt(f.numerator * f.denominator) // f.denominator


def enumerate_short(gram: Mat, bound) -> Iterator[Tuple[List[int], Fraction]]:
    """All v != 0 (up to sign: first nonzero entry positive) with
    Q(v) <= bound for the positive definite Gram matrix."""
    n = len(gram)
    bound = Fraction(bound)
    # exact Cholesky-style decomposition: Q(x) = sum_i d_i (x_i + sum_{j>i} m_ij x_j)^2
    d = [Fraction(0)] * n
    m = [[Fraction(0)] * n for _ in range(n)]
    A = [[Fraction(gram[i][j]) for j in range(n)] for i in range(n)]
    for i in range(n):
        d[i] = A[i][i]
        assert d[i] > 0, "Gram matrix not positive definite"
        for j in range(i + 1, n):
            m[i][j] = A[i][j] / d[i]
        for j in range(i + 1, n):
            for k in range(j, n):
                A[j][k] -= A[i][j] * A[i][k] / d[i]
                A[k][j] = A[j][k]

    v = [0] * n
    out: List[Tuple[List[int], Fraction]] = []

    def rec(i: int, rem: Fraction):
        if i < 0:
            if any(v):
                val = bound - rem
                yield (list(v), val)
            return
        center = -sum(m[i][j] * v[j] for j in range(i + 1, n))
        # |x_i - center| <= sqrt(rem / d_i)
        rad2 = rem / d[i]
        lo_f = center - (_floor_sqrt(rad2) + 1)
        hi_f = center + (_floor_sqrt(rad2) + 1)
        lo = int(lo_f) - 1
        hi = int(hi_f) + 1
        for x in range(lo, hi + 1):
            diff = Fraction(x) - center
            used = d[i] * diff * diff
            if used > rem:
                continue
            v[i] = x
            yield from rec(i - 1, rem - used)
        v[i] = 0

    for vec, val in rec(n - 1, bound):
        w = list(vec)
        lead = next((c for c in w if c), 0)
        if lead < 0:
            continue  # keep one of each +-v
        yield w, val


def short_elements(ideal, bound, lll_reduce: bool = True) -> Iterator[Tuple[Element, Fraction]]:
    """Elements x of the ideal with 0 < T2(x) <= bound (one per sign pair)."""
    alg = ideal.alg
    rows = [list(r) for r in ideal.rows]
    G = gram_of_rows(alg, rows)
    if lll_reduce:
        rows, G = lll(rows, G)
    den2 = Fraction(1, ideal.den ** 2)
    for v, val in enumerate_short(G, Fraction(bound) * ideal.den ** 2):
        coords = la.vec_mat(v, rows)
        yield Element(alg, coords, ideal.den), val * den2


def elements_of_norm(ideal, nm_target: Fraction, order_units: Optional[Sequence[Element]] = None,
                     radius_cap_factor: int = 1 << 12) -> List[Element]:
    """Elements x in the ideal with |Nm(x)| = nm_target, up to sign.

    Searches T2 <= radius with doubling, starting from the AM-GM lower
    bound n * nm^{2/n}.  Raises EnumerationRadiusExceeded at the hard cap,
    which callers must treat as inconclusive, never as nonexistence.
    """
    alg = ideal.alg
    n = alg.n
    nm_target = Fraction(nm_target)
    assert nm_target > 0
    # AM-GM: T2(x) >= n * |Nm(x)|^{2/n}
    base = n * _upper_root(nm_target ** 2, n)
    radius = base + 1
    found: List[Element] = []
    seen = set()
    while True:
        for x, _val in short_elements(ideal, radius):
            if x.num in seen:
                continue
            seen.add(x.num)
            if abs(x.norm()) == nm_target:
                found.append(x)
        if found:
            return found
        radius *= 2
        if radius > base * radius_cap_factor + radius_cap_factor:
            raise EnumerationRadiusExceeded(
                f"no element of norm {nm_target} within T2 <= {float(radius)}")


def _upper_root(f: Fraction, n: int) -> Fraction:
    """An upper bound for f^{1/n} (f >= 0), exact rational."""
    if f == 0:
        return Fraction(0)
    p, q = f.numerator, f.denominator
    # integer n-th root upper bounds
    def iroot_up(m):
        if m == 0:
            return 0
        r = round(m ** (1.0 / n)) if m < 1 << 52 else None
        if r is None:
            r = 1 << ((m.bit_length() + n - 1) // n)
        while r ** n < m:
            r += 1
        while r > 1 and (r - 1) ** n >= m:
            r -= 1
        return r

    def iroot_down(m):
        r = iroot_up(m)
        while r ** n > m:
            r -= 1
        return r

    return Fraction(iroot_up(p), max(1, iroot_down(q)))


def shortest_nonzero_norm(ideal) -> Tuple[Element, Fraction]:
    """A deterministic short element with nonzero norm: LLL gives the
    starting radius, so the first enumeration is never empty."""
    alg = ideal.alg
    rows = [list(r) for r in ideal.rows]
    G = gram_of_rows(alg, rows)
    rows, G = lll(rows, G)
    radius = Fraction(min(G[i][i] for i in range(len(G))), 1)
    den2 = Fraction(1, ideal.den ** 2)
    while True:
        best = None
        for v, val in enumerate_short(G, radius):
            coords = la.vec_mat(v, rows)
            x = Element(alg, coords, ideal.den)
            if x.norm() == 0:
                continue
            key = (val, x.num)
            if best is None or key < best[0]:
                best = (key, x)
        if best is not None:
            return best[1], best[0][0] * den2
        radius *= 2
