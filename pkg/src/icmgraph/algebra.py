"""Exact arithmetic in Q[x]/(f) for squarefree monic f, and in the CM etale
algebra K = Q[x]/(h) of a Weil polynomial.

Elements are stored as (num, den): an integer coordinate vector in the
power basis 1, t, ..., t^{n-1} together with a positive denominator,
normalized so gcd(content(num), den) = 1.  All arithmetic is exact.

EtaleAlgebra adds the Weil structure: pi, pibar = q/pi, the CM involution,
and the T2 Gram matrix sum_sigma sigma(x) conj(sigma(y)) used for short
vector searches.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import List, Optional, Sequence, Tuple

import sympy
from sympy.abc import x as _x

from . import intlinalg as la
from .errors import DivisionByZero, ZeroDivisor
from .weil import WeilPolynomial


def _normalize(num: Sequence[int], den: int) -> Tuple[Tuple[int, ...], int]:
    if den == 0:
        raise ZeroDivisionError("zero denominator")
    if den < 0:
        num = [-c for c in num]
        den = -den
    g = den
    for c in num:
        if c:
            g = gcd(g, c)
            if g == 1:
                break
    if g > 1:
        num = [c // g for c in num]
        den //= g
    return tuple(num), den


class Element:
    """An element of a NumberAlgebra, in power-basis coordinates."""

    __slots__ = ("alg", "num", "den")

    def __init__(self, alg: "NumberAlgebra", num: Sequence[int], den: int = 1, _norm: bool = True):
        self.alg = alg
        if _norm:
            self.num, self.den = _normalize(list(num), den)
        else:
            self.num, self.den = tuple(num), den

    @staticmethod
    def from_fractions(alg: "NumberAlgebra", fracs: Sequence[Fraction]) -> "Element":
        den = 1
        for f in fracs:
            den = den * f.denominator // gcd(den, f.denominator)
        num = [int(f * den) for f in fracs]
        return Element(alg, num, den)

    def fractions(self) -> List[Fraction]:
        return [Fraction(c, self.den) for c in self.num]

    def is_zero(self) -> bool:
        return not any(self.num)

    def is_one(self) -> bool:
        return self.den == 1 and self.num[0] == 1 and not any(self.num[1:])

    def is_rational(self) -> bool:
        return not any(self.num[1:])

    def is_integral_vector(self) -> bool:
        return self.den == 1

    def __bool__(self) -> bool:
        return not self.is_zero()

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            return self.den == 1 and self.num[0] == other and not any(self.num[1:])
        return (
            isinstance(other, Element)
            and self.alg is other.alg
            and self.den == other.den
            and self.num == other.num
        )

    def __hash__(self):
        return hash((self.num, self.den))

    def __add__(self, other: "Element") -> "Element":
        b = _coerce(self.alg, other)
        num = [self.num[i] * b.den + b.num[i] * self.den for i in range(self.alg.n)]
        return Element(self.alg, num, self.den * b.den)

    __radd__ = __add__

    def __neg__(self) -> "Element":
        return Element(self.alg, [-c for c in self.num], self.den, _norm=False)

    def __sub__(self, other) -> "Element":
        return self + (-_coerce(self.alg, other))

    def __rsub__(self, other) -> "Element":
        return _coerce(self.alg, other) + (-self)

    def __mul__(self, other) -> "Element":
        b = _coerce(self.alg, other)
        num = self.alg._mul_int(self.num, b.num)
        return Element(self.alg, num, self.den * b.den)

    __rmul__ = __mul__

    def __pow__(self, e: int) -> "Element":
        if e < 0:
            return self.inv() ** (-e)
        r = self.alg.one
        b = self
        while e:
            if e & 1:
                r = r * b
            b = b * b
            e >>= 1
        return r

    def __truediv__(self, other) -> "Element":
        return self * _coerce(self.alg, other).inv()

    def __rtruediv__(self, other) -> "Element":
        return _coerce(self.alg, other) * self.inv()

    def inv(self) -> "Element":
        """Exact inverse; DivisionByZero on 0, ZeroDivisor on non-units."""
        if self.is_zero():
            raise DivisionByZero("inverse of zero")
        n = self.alg.n
        M = self.alg.mult_matrix_int(self)
        try:
            N, d = la.invert(M)
        except ZeroDivisionError:
            poly = sympy.Poly(list(reversed(self.num)), _x)
            fac = sympy.gcd(poly, sympy.Poly(list(reversed(self.alg.poly_coeffs)), _x))
            raise ZeroDivisor(tuple(int(c) for c in reversed(fac.all_coeffs())))
        row = [N[0][j] * self.den for j in range(n)]
        return Element(self.alg, row, d)

    def conjugate(self) -> "Element":
        C, cd = self.alg.conj_matrix
        num = la.vec_mat(self.num, C)
        return Element(self.alg, num, self.den * cd)

    def trace(self) -> Fraction:
        t = sum(self.num[i] * self.alg.power_sums[i] for i in range(self.alg.n))
        return Fraction(t, self.den)

    def norm(self) -> Fraction:
        M = self.alg.mult_matrix_int(self)
        return Fraction(la.det(M), self.den ** self.alg.n)

    def t2_value(self) -> Fraction:
        """sum over embeddings of |sigma(x)|^2; exact rational."""
        G = self.alg.t2_gram
        n = self.alg.n
        v = self.num
        s = sum(v[i] * G[i][j] * v[j] for i in range(n) for j in range(n))
        return Fraction(s, self.den ** 2)

    def __repr__(self) -> str:
        gen = self.alg.gen_name
        terms = []
        for i, c in enumerate(self.num):
            if not c:
                continue
            if i == 0:
                terms.append(f"{c}")
            elif i == 1:
                terms.append(f"{c}*{gen}")
            else:
                terms.append(f"{c}*{gen}^{i}")
        s = " + ".join(terms) if terms else "0"
        return f"({s})/{self.den}" if self.den != 1 else f"({s})"


def _coerce(alg: "NumberAlgebra", v) -> Element:
    if isinstance(v, Element):
        if v.alg is not alg:
            raise TypeError("elements of different algebras")
        return v
    if isinstance(v, int):
        return Element(alg, [v] + [0] * (alg.n - 1), 1, _norm=False)
    if isinstance(v, Fraction):
        return Element(alg, [v.numerator] + [0] * (alg.n - 1), v.denominator)
    raise TypeError(f"cannot coerce {v!r} into the algebra")


class NumberAlgebra:
    """Q[x]/(f) for monic squarefree integer f; power-basis arithmetic."""

    gen_name = "t"

    def __init__(self, coeffs: Sequence[int]):
        coeffs = [int(c) for c in coeffs]
        assert coeffs[-1] == 1, "polynomial must be monic"
        self.poly_coeffs = tuple(coeffs)
        n = len(coeffs) - 1
        self.n = n

        pows: List[List[int]] = [[1 if i == 0 else 0 for i in range(n)]]
        for k in range(1, 2 * n - 1):
            prev = pows[-1]
            cur = [0] * n
            for i in range(n - 1):
                cur[i + 1] += prev[i]
            c = prev[n - 1]
            if c:
                for i in range(n):
                    cur[i] -= c * coeffs[i]
            pows.append(cur)
        self.power_table = pows

        ps = [n]
        for k in range(1, 2 * n - 1):
            if k <= n:
                s = -k * coeffs[n - k]
                for i in range(1, k):
                    s -= coeffs[n - i] * ps[k - i]
            else:
                s = 0
                for i in range(1, n + 1):
                    s -= coeffs[n - i] * ps[k - i]
            ps.append(s)
        self.power_sums = ps
        self.trace_gram = [[ps[i + j] for j in range(n)] for i in range(n)]
        # for a totally real algebra the T2 form equals the trace form
        self.t2_gram = self.trace_gram
        self._trace_gram_inv: Optional[Tuple[la.Matrix, int]] = None

        self.zero = Element(self, [0] * n, 1, _norm=False)
        self.one = Element(self, [1] + [0] * (n - 1), 1, _norm=False)
        if n > 1:
            self.gen = Element(self, pows[1], 1, _norm=False)
        else:
            self.gen = Element(self, [-coeffs[0]], 1)  # root of the linear poly
        self.conj_matrix = (la.identity(n), 1)  # identity; overridden for CM

    def _mul_int(self, u: Sequence[int], v: Sequence[int]) -> List[int]:
        n = self.n
        full = [0] * (2 * n - 1)
        for i, ui in enumerate(u):
            if not ui:
                continue
            base = i
            for j, vj in enumerate(v):
                if vj:
                    full[base + j] += ui * vj
        out = list(full[:n])
        pt = self.power_table
        for k in range(n, 2 * n - 1):
            c = full[k]
            if c:
                row = pt[k]
                for t in range(n):
                    out[t] += c * row[t]
        return out

    def mult_matrix_int(self, e: Element) -> la.Matrix:
        """Integer matrix with row i = coordinates of (den*e) * t^i."""
        return [self._mul_int(e.num, self.power_table[i]) for i in range(self.n)]

    def element(self, coords, den: int = 1) -> Element:
        if all(isinstance(c, int) for c in coords):
            return Element(self, list(coords), den)
        fracs = [Fraction(c) for c in coords]
        e = Element.from_fractions(self, fracs)
        if den != 1:
            e = e * Fraction(1, den)
        return e

    def rational(self, c) -> Element:
        return _coerce(self, c if isinstance(c, (int, Fraction)) else Fraction(c))

    def trace_gram_inverse(self) -> Tuple[la.Matrix, int]:
        if self._trace_gram_inv is None:
            self._trace_gram_inv = la.invert(self.trace_gram)
        return self._trace_gram_inv

    def factor_poly(self):
        """Irreducible factors of the defining polynomial, as coeff tuples."""
        h = sympy.Poly(list(reversed(self.poly_coeffs)), _x)
        out = []
        for fac, mult in h.factor_list()[1]:
            assert mult == 1
            out.append(tuple(int(c) for c in reversed(fac.all_coeffs())))
        return out

    def __repr__(self):
        return f"NumberAlgebra(deg {self.n})"


class EtaleAlgebra(NumberAlgebra):
    """K = Q[x]/(h) for a validated Weil polynomial h, with CM structure."""

    gen_name = "pi"

    def __init__(self, weil: WeilPolynomial):
        super().__init__(weil.coeffs)
        self.weil = weil
        self.q = weil.q
        self.g = weil.g
        n, q = self.n, self.q

        self.t2_gram = [
            [q ** min(i, j) * self.power_sums[abs(i - j)] for j in range(n)]
            for i in range(n)
        ]

        self.pi = self.gen
        a = weil.coeffs
        inv_num = [0] * n
        for i in range(1, n + 1):
            c = a[i] if i < n else 1
            if c:
                row = self.power_table[i - 1]
                for t in range(n):
                    inv_num[t] -= c * row[t]
        self.pibar = Element(self, inv_num, q ** (weil.g - 1))

        # conjugation matrix: row i = coordinates of pibar^i
        pb_elts = []
        cur = self.one
        for _ in range(n):
            pb_elts.append(cur)
            cur = cur * self.pibar
        den = 1
        for e in pb_elts:
            den = den * e.den // gcd(den, e.den)
        C = [[c * (den // e.den) for c in e.num] for e in pb_elts]
        self.conj_matrix = (C, den)

        self._real_sub: Optional["RealSubalgebra"] = None

    def is_totally_real(self, e: Element) -> bool:
        return e.conjugate() == e

    def is_totally_imaginary(self, e: Element) -> bool:
        return e.conjugate() == -e

    def real_subalgebra(self) -> "RealSubalgebra":
        if self._real_sub is None:
            self._real_sub = RealSubalgebra(self)
        return self._real_sub

    def __repr__(self):
        return f"EtaleAlgebra({self.weil.label()})"


class RealSubalgebra(NumberAlgebra):
    """The totally real subalgebra F = Q[t]/(G), t -> pi + q/pi."""

    def __init__(self, K: EtaleAlgebra):
        G = K.weil.real_subpolynomial()
        super().__init__(G)
        self.parent = K
        # embedding matrix: row i = K-coordinates of (pi + pibar)^i
        s = K.pi + K.pibar
        rows = []
        cur = K.one
        for _ in range(self.n):
            rows.append(cur)
            cur = cur * s
        den = 1
        for e in rows:
            den = den * e.den // gcd(den, e.den)
        self.embed_num = [[c * (den // e.den) for c in e.num] for e in rows]
        self.embed_den = den

    def embed(self, e: Element) -> Element:
        """Map an element of F into K."""
        num = la.vec_mat(e.num, self.embed_num)
        return Element(self.parent, num, e.den * self.embed_den)

    def project(self, e: Element) -> Optional[Element]:
        """Preimage in F of a totally real element of K, or None."""
        # solve v @ embed_num = num * embed_den/den appropriately
        K = self.parent
        m = self.n
        # x = v . embed / embed_den with v rational of length m
        # solve the overdetermined system exactly over Q
        A = [[Fraction(self.embed_num[i][j]) for j in range(K.n)] for i in range(m)]
        target = [Fraction(c * self.embed_den, e.den) for c in e.num]
        sol = _solve_rational(A, target)
        if sol is None:
            return None
        return Element.from_fractions(self, sol)

    def __repr__(self):
        return f"RealSubalgebra(deg {self.n})"


def _solve_rational(A_rows: List[List[Fraction]], target: List[Fraction]) -> Optional[List[Fraction]]:
    """Solve v @ A = target exactly (A given by rows); None if inconsistent."""
    m = len(A_rows)
    ncols = len(target)
    # gaussian-eliminate the system A^T v^T = target^T
    At = [[A_rows[i][j] for i in range(m)] for j in range(ncols)]
    aug = [At[j] + [target[j]] for j in range(ncols)]
    r = 0
    piv_cols = []
    for c in range(m):
        piv = next((i for i in range(r, ncols) if aug[i][c]), None)
        if piv is None:
            continue
        aug[r], aug[piv] = aug[piv], aug[r]
        pv = aug[r][c]
        aug[r] = [v / pv for v in aug[r]]
        for i in range(ncols):
            if i != r and aug[i][c]:
                f = aug[i][c]
                aug[i] = [aug[i][t] - f * aug[r][t] for t in range(m + 1)]
        piv_cols.append(c)
        r += 1
    for i in range(r, ncols):
        if aug[i][m]:
            return None
    v = [Fraction(0)] * m
    for i, c in enumerate(piv_cols):
        v[c] = aug[i][m]
    return v
