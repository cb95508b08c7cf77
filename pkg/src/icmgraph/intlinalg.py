"""Exact integer linear algebra: HNF, SNF, kernels, determinants, solving.

Conventions used throughout the package:

* matrices are lists of rows, each row a list of Python ints;
* lattices are stored via their basis ROWS, so the canonical form of a
  lattice is the row-style Hermite normal form with positive pivots and
  entries above each pivot reduced into [0, pivot);
* for a full-rank square HNF basis the matrix is upper triangular.

Everything here is exact; there are no floats.
"""

from __future__ import annotations

from math import gcd
from typing import List, Optional, Sequence, Tuple

Matrix = List[List[int]]


def identity(n: int) -> Matrix:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def mat_copy(A: Sequence[Sequence[int]]) -> Matrix:
    return [list(row) for row in A]


def mat_mul(A: Sequence[Sequence[int]], B: Sequence[Sequence[int]]) -> Matrix:
    n, m = len(A), len(B[0])
    k = len(B)
    Bc = [[B[t][j] for t in range(k)] for j in range(m)]  # columns of B
    out = []
    for row in A:
        out.append([sum(row[t] * col[t] for t in range(k)) for col in Bc])
    return out


def mat_vec(A: Sequence[Sequence[int]], v: Sequence[int]) -> List[int]:
    return [sum(row[j] * v[j] for j in range(len(v))) for row in A]


def vec_mat(v: Sequence[int], A: Sequence[Sequence[int]]) -> List[int]:
    m = len(A[0])
    return [sum(v[i] * A[i][j] for i in range(len(v))) for j in range(m)]


def transpose(A: Sequence[Sequence[int]]) -> Matrix:
    return [list(col) for col in zip(*A)]


def _xgcd(a: int, b: int) -> Tuple[int, int, int]:
    """Return (g, u, v) with u*a + v*b = g = gcd(a, b), g >= 0."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def hnf(rows: Sequence[Sequence[int]]) -> Matrix:
    """Row-style Hermite normal form; zero rows are dropped.

    Pivots are positive, entries above each pivot lie in [0, pivot).
    The result is the unique canonical basis of the row lattice.
    """
    if not rows:
        return []
    A = [list(r) for r in rows if any(r)]
    if not A:
        return []
    m = len(A[0])
    done: List[List[int]] = []
    for j in range(m):
        live = [v for v in A if v[j]]
        rest = [v for v in A if not v[j]]
        if not live:
            A = rest
            continue
        # combine rows until a single one carries the gcd in column j
        while len(live) > 1:
            live.sort(key=lambda v: abs(v[j]))
            b = live[0]
            a = b[j]
            new_live = [b]
            for v in live[1:]:
                c = v[j]
                q = c // a
                w = [v[t] - q * b[t] for t in range(m)]
                if w[j]:
                    new_live.append(w)
                elif any(w):
                    rest.append(w)
            live = new_live
        piv = live[0]
        if piv[j] < 0:
            piv = [-t for t in piv]
        done.append(piv)
        A = rest
    # reduce entries above pivots; ascending pivot order so that a later
    # step never dirties an already-reduced column
    for bi in range(len(done)):
        j = next(t for t in range(m) if done[bi][t])
        p = done[bi][j]
        for k in range(bi):
            q = done[k][j] // p
            if q:
                done[k] = [done[k][t] - q * done[bi][t] for t in range(m)]
    return done


def hnf_with_transform(rows: Sequence[Sequence[int]]) -> Tuple[Matrix, Matrix]:
    """HNF together with U such that U @ rows == H (rows of H, zero rows kept).

    U is unimodular of size len(rows); H includes trailing zero rows so the
    shapes match.
    """
    A = [list(r) for r in rows]
    n = len(A)
    m = len(A[0]) if n else 0
    aug = [A[i] + [1 if t == i else 0 for t in range(n)] for i in range(n)]
    H_aug = _hnf_raw(aug, m)
    H = [row[:m] for row in H_aug]
    U = [row[m:] for row in H_aug]
    return H, U


def _hnf_raw(aug: List[List[int]], m: int) -> List[List[int]]:
    """HNF computed on the first m columns, carrying the rest along.

    Rows that are zero in the first m columns sink to the bottom.
    """
    A = [list(v) for v in aug]
    width = len(A[0]) if A else 0
    done: List[List[int]] = []
    for j in range(m):
        live = [v for v in A if v[j]]
        rest = [v for v in A if not v[j]]
        if not live:
            A = rest
            continue
        while len(live) > 1:
            live.sort(key=lambda v: abs(v[j]))
            b = live[0]
            a = b[j]
            new_live = [b]
            for v in live[1:]:
                c = v[j]
                q = c // a
                w = [v[t] - q * b[t] for t in range(width)]
                if w[j]:
                    new_live.append(w)
                else:
                    rest.append(w)
            live = new_live
        piv = live[0]
        if piv[j] < 0:
            piv = [-t for t in piv]
        done.append(piv)
        A = rest
    tail = A
    for bi in range(len(done)):
        j = next(t for t in range(m) if done[bi][t])
        p = done[bi][j]
        for k in range(bi):
            q = done[k][j] // p
            if q:
                done[k] = [done[k][t] - q * done[bi][t] for t in range(width)]
    return done + tail


def det(A: Sequence[Sequence[int]]) -> int:
    """Determinant by fraction-free Bareiss elimination."""
    n = len(A)
    if n == 0:
        return 1
    M = mat_copy(A)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if M[k][k] == 0:
            piv = next((i for i in range(k + 1, n) if M[i][k]), None)
            if piv is None:
                return 0
            M[k], M[piv] = M[piv], M[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
            M[i][k] = 0
        prev = M[k][k]
    return sign * M[-1][-1]


def solve_upper_triangular(H: Sequence[Sequence[int]], x: Sequence[int]) -> Optional[List[int]]:
    """Solve v @ H == x over the integers for full-rank square HNF H.

    Returns None when x is not in the row lattice of H.
    """
    n = len(H)
    v = [0] * n
    rem = list(x)
    for j in range(n):
        q, r = divmod(rem[j], H[j][j])
        if r:
            return None
        v[j] = q
        if q:
            row = H[j]
            for t in range(j, n):
                rem[t] -= q * row[t]
    if any(rem):
        return None
    return v


def invert(A: Sequence[Sequence[int]]) -> Tuple[Matrix, int]:
    """Exact inverse of a nonsingular integer matrix as (N, d): A @ N == d*I.

    d is det(A) up to sign (positive), N integral.
    """
    n = len(A)
    d = det(A)
    if d == 0:
        raise ZeroDivisionError("singular matrix")
    # adjugate via solving A^T y = d e_i with Bareiss-style elimination on
    # the augmented matrix, columnwise
    aug = [list(A[i]) + [d if t == i else 0 for t in range(n)] for i in range(n)]
    # Gaussian elimination over Q implemented with exact rationals via
    # fraction-free steps: easier to use HNF transform on A^T? Use fractions.
    from fractions import Fraction

    M = [[Fraction(c) for c in row] for row in aug]
    for k in range(n):
        piv = next(i for i in range(k, n) if M[i][k])
        M[k], M[piv] = M[piv], M[k]
        pv = M[k][k]
        M[k] = [c / pv for c in M[k]]
        for i in range(n):
            if i != k and M[i][k]:
                f = M[i][k]
                M[i] = [M[i][t] - f * M[k][t] for t in range(2 * n)]
    N = [[M[i][n + j] for j in range(n)] for i in range(n)]
    # entries of d * A^{-1} are integers (adjugate scaled by d/det sign)
    out = [[int(c) for c in row] for row in N]
    if d < 0:
        d = -d
        out = [[-c for c in row] for row in out]
    return out, d


def snf_with_transform(A: Sequence[Sequence[int]]) -> Tuple[Matrix, Matrix, Matrix]:
    """Smith normal form: returns (D, U, V) with U @ A @ V == D.

    D is diagonal with d_i | d_{i+1}, U and V unimodular.
    """
    M = mat_copy(A)
    n = len(M)
    m = len(M[0]) if n else 0
    U = identity(n)
    V = identity(m)

    def swap_rows(i, j):
        M[i], M[j] = M[j], M[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for r in M:
            r[i], r[j] = r[j], r[i]
        for r in V:
            r[i], r[j] = r[j], r[i]

    def addmul_row(dst, src, c):
        M[dst] = [M[dst][t] + c * M[src][t] for t in range(m)]
        U[dst] = [U[dst][t] + c * U[src][t] for t in range(n)]

    def addmul_col(dst, src, c):
        for r in M:
            r[dst] += c * r[src]
        for r in V:
            r[dst] += c * r[src]

    def combine_rows(i, j, a_, b_, c_, d_):
        # rows (i, j) <- (a_*i + b_*j, c_*i + d_*j)
        Mi = [a_ * M[i][t] + b_ * M[j][t] for t in range(m)]
        Mj = [c_ * M[i][t] + d_ * M[j][t] for t in range(m)]
        M[i], M[j] = Mi, Mj
        Ui = [a_ * U[i][t] + b_ * U[j][t] for t in range(n)]
        Uj = [c_ * U[i][t] + d_ * U[j][t] for t in range(n)]
        U[i], U[j] = Ui, Uj

    def combine_cols(i, j, a_, b_, c_, d_):
        for r in (M, V):
            for row in r:
                x, y = row[i], row[j]
                row[i] = a_ * x + b_ * y
                row[j] = c_ * x + d_ * y

    k = 0
    while k < min(n, m):
        # find a nonzero pivot
        piv = None
        for i in range(k, n):
            for j in range(k, m):
                if M[i][j]:
                    piv = (i, j)
                    break
            if piv:
                break
        if piv is None:
            break
        swap_rows(k, piv[0])
        swap_cols(k, piv[1])
        while True:
            # clear column k
            for i in range(k + 1, n):
                if M[i][k]:
                    a, c = M[k][k], M[i][k]
                    if c % a == 0:
                        addmul_row(i, k, -(c // a))
                    else:
                        g, x, y = _xgcd(a, c)
                        combine_rows(k, i, x, y, -(c // g), a // g)
            # clear row k
            for j in range(k + 1, m):
                if M[k][j]:
                    a, c = M[k][k], M[k][j]
                    if c % a == 0:
                        addmul_col(j, k, -(c // a))
                    else:
                        g, x, y = _xgcd(a, c)
                        combine_cols(k, j, x, y, -(c // g), a // g)
            if all(M[i][k] == 0 for i in range(k + 1, n)) and all(
                M[k][j] == 0 for j in range(k + 1, m)
            ):
                break
        # divisibility: fold in any entry not divisible by M[k][k]
        bad = None
        for i in range(k + 1, n):
            for j in range(k + 1, m):
                if M[i][j] % M[k][k]:
                    bad = i
                    break
            if bad is not None:
                break
        if bad is not None:
            addmul_row(k, bad, 1)
            continue
        if M[k][k] < 0:
            addmul_row(k, k, -2)  # negate row: r <- r + (-2)r = -r
        k += 1
    D = M
    return D, U, V


def solve_left(M: Sequence[Sequence[int]], t: Sequence[int]) -> Optional[List[int]]:
    """One integer solution x of x @ M == t, or None (M arbitrary shape)."""
    if not M:
        return None if any(t) else []
    H, U = hnf_with_transform(M)
    m = len(M[0])
    rem = list(t)
    y = [0] * len(H)
    for i, row in enumerate(H):
        j = next((c for c in range(m) if row[c]), None)
        if j is None:
            break
        q, r = divmod(rem[j], row[j])
        if r:
            return None
        y[i] = q
        if q:
            for c in range(m):
                rem[c] -= q * row[c]
    if any(rem):
        return None
    return vec_mat(y, U)


def lattice_contains(H: Sequence[Sequence[int]], v: Sequence[int]) -> bool:
    """Membership of v in the row lattice with HNF basis H (any rank)."""
    m = len(v)
    rem = list(v)
    for row in H:
        j = next((c for c in range(m) if row[c]), None)
        if j is None:
            continue
        if rem[j] == 0:
            continue
        q, r = divmod(rem[j], row[j])
        if r:
            return False
        for c in range(m):
            rem[c] -= q * row[c]
    return not any(rem)


def left_kernel(A: Sequence[Sequence[int]]) -> Matrix:
    """Basis of the integer left kernel {v : v @ A == 0}."""
    n = len(A)
    if n == 0:
        return []
    H, U = hnf_with_transform(A)
    ker = [U[i] for i in range(n) if not any(H[i])]
    return hnf(ker) if ker else []
