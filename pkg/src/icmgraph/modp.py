"""Dense linear algebra over prime fields F_p (small matrices)."""

from __future__ import annotations

from typing import List, Optional, Sequence

Mat = List[List[int]]


def rref(A: Sequence[Sequence[int]], p: int) -> tuple[Mat, List[int]]:
    """Reduced row echelon form mod p; returns (R, pivot_columns)."""
    M = [[c % p for c in row] for row in A]
    if not M:
        return [], []
    rows, cols = len(M), len(M[0])
    pivots: List[int] = []
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if M[i][c]), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        inv = pow(M[r][c], p - 2, p)
        M[r] = [(v * inv) % p for v in M[r]]
        for i in range(rows):
            if i != r and M[i][c]:
                f = M[i][c]
                M[i] = [(M[i][j] - f * M[r][j]) % p for j in range(cols)]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return M[:r], pivots


def nullspace(A: Sequence[Sequence[int]], p: int, cols: Optional[int] = None) -> Mat:
    """Basis of {v : A @ v == 0 mod p} (v are column vectors, returned as rows)."""
    if not A:
        return [[1 if i == j else 0 for j in range(cols)] for i in range(cols)] if cols else []
    n = len(A[0])
    R, piv = rref(A, p)
    free = [j for j in range(n) if j not in piv]
    basis = []
    for f in free:
        v = [0] * n
        v[f] = 1
        for r, c in enumerate(piv):
            v[c] = (-R[r][f]) % p
        basis.append(v)
    return basis


def solve(A: Sequence[Sequence[int]], b: Sequence[int], p: int) -> Optional[List[int]]:
    """One solution of A @ v == b mod p, or None."""
    if not A:
        return None
    n = len(A[0])
    aug = [list(A[i]) + [b[i]] for i in range(len(A))]
    R, piv = rref(aug, p)
    for row in R:
        if not any(row[:n]) and row[n]:
            return None
    v = [0] * n
    for r, c in enumerate(piv):
        if c < n:
            v[c] = R[r][n]
    return v


def mat_mul(A: Sequence[Sequence[int]], B: Sequence[Sequence[int]], p: int) -> Mat:
    n, k, m = len(A), len(B), len(B[0])
    out = []
    for i in range(n):
        row = A[i]
        out.append([sum(row[t] * B[t][j] for t in range(k)) % p for j in range(m)])
    return out


def rank(A: Sequence[Sequence[int]], p: int) -> int:
    return len(rref(A, p)[0])
