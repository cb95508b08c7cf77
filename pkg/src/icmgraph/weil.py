"""q-Weil polynomial validation, base change, and LMFDB-style labels.

A q-Weil polynomial here is a monic h in Z[x] of degree 2g whose complex
roots all lie on |z| = sqrt(q).  We keep only the ordinary squarefree ones:
gcd(h, h') = 1 and the middle coefficient coprime to p.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd, isqrt
from typing import Sequence, Tuple

import sympy
from sympy.abc import x as _x

from .errors import (
    NonSquarefreeBaseChange,
    NotOrdinary,
    NotPrimePower,
    NotSquarefree,
    NotWeil,
)


def prime_power(q: int):
    """Return (p, a) with q = p^a, or raise NotPrimePower.

    Trial factorization; q is tiny at the scales we work at.
    """
    if q < 2:
        raise NotPrimePower(f"q = {q} is not a prime power")
    n, p = q, None
    for d in range(2, isqrt(q) + 1):
        if n % d == 0:
            p = d
            break
    if p is None:
        return q, 1
    a = 0
    while n % p == 0:
        n //= p
        a += 1
    if n != 1:
        raise NotPrimePower(f"q = {q} is not a prime power")
    return p, a


@dataclass(frozen=True)
class WeilPolynomial:
    """Validated ordinary squarefree q-Weil polynomial.

    coeffs are stored low to high: h(x) = sum coeffs[i] * x^i, monic of
    degree 2g.
    """

    q: int
    p: int
    a: int
    g: int
    coeffs: Tuple[int, ...]

    @property
    def degree(self) -> int:
        return 2 * self.g

    def poly(self):
        return sympy.Poly(list(reversed(self.coeffs)), _x)

    def real_subpolynomial(self) -> Tuple[int, ...]:
        """Coefficients (low to high) of the degree-g minimal polynomial
        of pi + q/pi, i.e. G with h(x) = x^g * G(x + q/x)."""
        return _real_half(self.q, self.g, self.coeffs)

    def label(self) -> str:
        mid = "_".join(encode_signed_base26(c) for c in
                       [self.coeffs[2 * self.g - 1 - i] for i in range(self.g)])
        return f"{self.g}.{self.q}.{mid}"

    def __str__(self) -> str:
        return f"WeilPolynomial({self.label()})"


def _real_half(q: int, g: int, coeffs: Sequence[int]) -> Tuple[int, ...]:
    # Solve h(x) = x^g * G(x + q/x) for G, top coefficient down.  The
    # recursion uses x^g * (x + q/x)^k = x^{g-k} * (x^2 + q)^k.
    rem = sympy.Poly(list(reversed(coeffs)), _x)
    b = [0] * (g + 1)
    for k in range(g, -1, -1):
        c = rem.nth(g + k)
        b[k] = int(c)
        rem -= sympy.Poly([int(c)], _x) * sympy.Poly([1, 0, q], _x) ** k * sympy.Poly([1] + [0] * (g - k), _x)
    if not rem.is_zero:
        raise NotWeil("functional equation x^{2g} h(q/x) = q^g h(x) fails")
    return tuple(b)


def validate_weil(q: int, coeffs: Sequence[int]) -> WeilPolynomial:
    """Validate (q, h) and return the WeilPolynomial, or raise a structured
    rejection: NotPrimePower, NotWeil, NotSquarefree, NotOrdinary."""
    p, a = prime_power(q)
    coeffs = [int(c) for c in coeffs]
    n = len(coeffs) - 1
    if n < 2 or n % 2 or coeffs[-1] != 1:
        raise NotWeil("h must be monic of even degree >= 2")
    g = n // 2
    # functional equation: a_i = q^{g-i} a_{2g-i} for 0 <= i < g
    for i in range(g):
        if coeffs[i] != q ** (g - i) * coeffs[2 * g - i]:
            raise NotWeil("functional equation x^{2g} h(q/x) = q^g h(x) fails")
    G = _real_half(q, g, coeffs)
    Gp = sympy.Poly(list(reversed(G)), _x)
    # all roots of G must be real and inside [-2 sqrt(q), 2 sqrt(q)];
    # work with squarefree parts since count_roots counts distinct roots
    Gsf = sympy.Poly(sympy.exquo(Gp, sympy.gcd(Gp, Gp.diff(_x))), _x)
    if sympy.count_roots(Gsf) != Gsf.degree():
        raise NotWeil("not all roots lie on |z| = sqrt(q)")
    u = sympy.Symbol("u")
    G2 = sympy.Poly(sympy.resultant(Gsf.as_expr(), u - _x ** 2, _x), u)
    G2sf = sympy.Poly(sympy.exquo(G2, sympy.gcd(G2, G2.diff(u))), u)
    if sympy.count_roots(G2sf, 0, 4 * q) != G2sf.degree():
        raise NotWeil("not all roots lie on |z| = sqrt(q)")
    h = sympy.Poly(list(reversed(coeffs)), _x)
    if sympy.gcd(h, h.diff(_x)).degree() > 0:
        raise NotSquarefree("h has repeated complex roots")
    if coeffs[g] % p == 0:
        raise NotOrdinary(f"middle coefficient {coeffs[g]} divisible by p = {p}")
    return WeilPolynomial(q=q, p=p, a=a, g=g, coeffs=tuple(coeffs))


def base_change_poly(w: WeilPolynomial, i: int) -> WeilPolynomial:
    """Weil polynomial of the same class over F_{q^i}: roots are i-th powers.

    Computed as res_y(h(y), x - y^i), which is monic with constant q^{ig}.
    Raises NonSquarefreeBaseChange when the result has repeated roots.
    """
    if i < 1:
        raise ValueError("i must be >= 1")
    if i == 1:
        return w
    y = sympy.Symbol("y")
    h_y = sympy.Poly(list(reversed(w.coeffs)), y)
    r = sympy.Poly(sympy.resultant(h_y.as_expr(), _x - y ** i, y), _x)
    coeffs = [int(c) for c in reversed(r.all_coeffs())]
    if coeffs[-1] == -1:
        coeffs = [-c for c in coeffs]
    try:
        return validate_weil(w.q ** i, coeffs)
    except NotSquarefree as e:
        raise NonSquarefreeBaseChange(str(e)) from e


# LMFDB-style labels: "g.q.c1_c2_..._cg" where c_k is the coefficient of
# x^{2g-k} in h, written in base 26 with digits a..z and a leading "a" as a
# minus sign.

_ALPHABET = "abcdefghijklmnopqrstuvwxyz"


def encode_signed_base26(n: int) -> str:
    if n == 0:
        return "a"
    if n < 0:
        return "a" + encode_signed_base26(-n)
    digits = ""
    while n:
        n, r = divmod(n, 26)
        digits = _ALPHABET[r] + digits
    return digits


def decode_signed_base26(s: str) -> int:
    if s == "a":
        return 0
    neg = False
    if s.startswith("a"):
        neg = True
        s = s[1:]
    n = 0
    for ch in s:
        n = 26 * n + _ALPHABET.index(ch)
    return -n if neg else n


def parse_label(label: str) -> Tuple[int, int, Tuple[int, ...]]:
    """Parse "g.q.c1_..._cg" into (q, full coefficient tuple low->high)."""
    parts = label.split(".")
    if len(parts) != 3:
        raise ValueError(f"malformed label {label!r}")
    g, q = int(parts[0]), int(parts[1])
    firsts = [decode_signed_base26(t) for t in parts[2].split("_")]
    if len(firsts) != g:
        raise ValueError(f"label {label!r} carries {len(firsts)} coefficients, expected g = {g}")
    # h = x^{2g} + c1 x^{2g-1} + ... + cg x^g + q*c_{g-1} x^{g-1} + ...
    coeffs = [0] * (2 * g + 1)
    coeffs[2 * g] = 1
    for k, c in enumerate(firsts, start=1):
        coeffs[2 * g - k] = c
    for i in range(g):
        coeffs[i] = q ** (g - i) * coeffs[2 * g - i]
    return q, tuple(coeffs)


def weil_from_label(label: str) -> WeilPolynomial:
    q, coeffs = parse_label(label)
    return validate_weil(q, coeffs)
