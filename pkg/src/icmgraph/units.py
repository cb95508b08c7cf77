"""Unit groups: torsion units, fundamental units of the totally real
subalgebra, saturation into the CM algebra, and unit lattices of orders.

The search strategy follows the usual desk recipe: enumerate short vectors
of the maximal real order, harvest units directly and as quotients of
elements generating the same ideal, and grow the search radius until the
log-lattice index is stable for three consecutive rounds.  Exponent
identities are always verified exactly in the algebra; floating point only
guides the guesses.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Dict, List, Optional, Sequence, Tuple

import mpmath

from . import intlinalg as la
from . import shortvec
from .abgroup import FiniteAbelianGroup
from .algebra import Element, EtaleAlgebra, NumberAlgebra
from .enclosures import RootEnclosures
from .errors import MissingArithmeticData, PrecisionExhausted
from .ideals import FractionalIdeal
from .orders import Order, equation_order, maximal_order


def torsion_units(OK: Order) -> List[Element]:
    """All torsion units of the order: integral with T2 = n (Kronecker)."""
    alg = OK.alg
    n = alg.n
    out = []
    for x, val in shortvec.short_elements(OK.lattice, n):
        if val == n and abs(x.norm()) == 1:
            out.append(x)
            out.append(-x)
    return out


class UnitGroup:
    """O_K^x for the maximal order of a CM etale algebra.

    Stored as torsion element table plus a list of fundamental units.
    provenance records whether the free part rests on the documented
    stabilization heuristic or on ingested (re-verified) data.
    """

    def __init__(self, K: EtaleAlgebra, OK: Order, torsion: List[Element],
                 fundamental: List[Element], provenance: str):
        self.alg = K
        self.OK = OK
        self.fundamental = fundamental
        self.rank = len(fundamental)
        self.provenance = provenance
        # torsion subgroup structure from the explicit element set
        tor_sorted = sorted(set(torsion), key=lambda e: (e.num, e.den))
        self.torsion_elements = tor_sorted
        self.torsion_order = len(tor_sorted)
        gen, order = _cyclic_generator(tor_sorted)
        self.zeta = gen
        self.zeta_order = order
        self._tor_table: Dict[Tuple, int] = {}
        cur = K.one
        for k in range(order):
            self._tor_table[(cur.num, cur.den)] = k
            cur = cur * gen
        if len(self._tor_table) != self.torsion_order:
            # torsion not cyclic (product algebra): keep full table via
            # multi-generator decomposition
            self._tor_table = None
        self._enclosures: Optional[RootEnclosures] = None
        self._log_prec = 60

    # -- generators ----------------------------------------------------------
    @property
    def num_gens(self) -> int:
        if self._tor_table is not None:
            return 1 + self.rank
        self._ensure_multi_torsion()
        return len(self._tor_gens) + self.rank

    def gens(self) -> List[Element]:
        if self._tor_table is not None:
            return [self.zeta] + self.fundamental
        self._ensure_multi_torsion()
        return self._tor_gens + self.fundamental

    def torsion_relation_rows(self, total: int) -> List[List[int]]:
        """Relation rows (in gen coordinates) killing the torsion part."""
        rows = []
        if self._tor_table is not None:
            r = [0] * total
            r[0] = self.zeta_order
            rows.append(r)
        else:
            for i, o in enumerate(self._tor_orders):
                r = [0] * total
                r[i] = o
                rows.append(r)
        return rows

    # -- torsion fallback for non-cyclic case --------------------------------
    def _ensure_multi_torsion(self):
        if self._tor_table is not None:
            return
        if hasattr(self, "_tor_gens"):
            return
        gens, orders, table = _decompose_torsion(self.torsion_elements, self.alg)
        self._tor_gens = gens
        self._tor_orders = orders
        self._multi_table = table

    def torsion_dlog(self, x: Element) -> Optional[List[int]]:
        """Exponents of x over the torsion generators, or None."""
        if self._tor_table is not None:
            k = self._tor_table.get((x.num, x.den))
            return None if k is None else [k]
        self._ensure_multi_torsion()
        return self._multi_table.get((x.num, x.den))

    def is_torsion(self, x: Element) -> bool:
        return self.torsion_dlog(x) is not None

    # -- logs ------------------------------------------------------------------
    def _embeddings(self) -> RootEnclosures:
        if self._enclosures is None:
            from .enclosures import enclosures_of

            self._enclosures = enclosures_of(self.alg)
        return self._enclosures

    def _log_vector(self, x: Element, prec: int) -> List[mpmath.mpf]:
        """log |sigma_i(x)| at one embedding per conjugate pair."""
        E = self._embeddings()
        E.refine_to(max(96, int(prec * 3.4)))
        reps = [i for i in range(self.alg.n) if i < E.pair[i]]
        with mpmath.workdps(prec):
            vals = []
            for i in reps:
                box = E.eval_element_box(x.num, x.den, i)
                a2 = box.abs2()
                mid = (a2.lo + a2.hi) / 2
                vals.append(mpmath.log(mpmath.mpf(mid.numerator) / mid.denominator) / 2)
            return vals

    # -- dlog --------------------------------------------------------------------
    def is_unit(self, x: Element) -> bool:
        return self.OK.contains(x) and abs(x.norm()) == 1

    def dlog(self, x: Element) -> Optional[Tuple[List[int], List[int]]]:
        """(torsion exponents, fundamental exponents) with
        x = prod tor^a * prod eps^v, or None if x is not a unit of O_K.

        Raises MissingArithmeticData if x is a unit that cannot be
        expressed (a breach of the computed-group completeness).
        """
        if not self.is_unit(x):
            return None
        if self.rank == 0:
            t = self.torsion_dlog(x)
            if t is None:
                raise MissingArithmeticData("torsion unit outside computed group")
            return t, []
        prec = self._log_prec
        for _ in range(6):
            lx = self._log_vector(x, prec)
            L = [self._log_vector(e, prec) for e in self.fundamental]
            v = _solve_int_least_squares(L, lx)
            if v is not None:
                cand = x
                for e, vi in zip(self.fundamental, v):
                    if vi:
                        cand = cand * (e.inv() ** vi if vi > 0 else e ** (-vi))
                t = self.torsion_dlog(cand)
                if t is not None:
                    return t, v
            prec *= 2
        raise MissingArithmeticData(
            "unit outside computed group (or precision exhausted): " + repr(x))

    def exponents_to_element(self, tor: Sequence[int], free: Sequence[int]) -> Element:
        out = self.alg.one
        if self._tor_table is not None:
            out = out * (self.zeta ** (tor[0] % self.zeta_order))
        else:
            self._ensure_multi_torsion()
            for g, a, o in zip(self._tor_gens, tor, self._tor_orders):
                out = out * (g ** (a % o))
        for e, v in zip(self.fundamental, free):
            out = out * (e ** v)
        return out


def _cyclic_generator(torsion: List[Element]) -> Tuple[Element, int]:
    """A generator of the torsion group if cyclic; else an element of
    maximal order (the caller detects non-cyclicity)."""
    best, best_ord = None, 0
    for t in torsion:
        o = _mult_order(t, len(torsion))
        if o > best_ord:
            best, best_ord = t, o
    return best, best_ord


def _mult_order(x: Element, cap: int) -> int:
    cur = x
    for k in range(1, cap + 1):
        if cur.is_one():
            return k
        cur = cur * x
    return 0


def _decompose_torsion(torsion: List[Element], alg) -> Tuple[List[Element], List[int], Dict]:
    """Generators/orders/dlog-table for a (possibly non-cyclic) finite
    abelian group given as an explicit element set."""
    gens: List[Element] = []
    orders: List[int] = []
    table: Dict[Tuple, List[int]] = {(alg.one.num, alg.one.den): []}
    remaining = [t for t in torsion]
    for t in sorted(remaining, key=lambda e: -_mult_order(e, len(torsion))):
        key = (t.num, t.den)
        if key in table:
            continue
        gens.append(t)
        o = _mult_order(t, len(torsion))
        orders.append(o)
        new_table: Dict[Tuple, List[int]] = {}
        for k2, v2 in table.items():
            cur = Element(alg, list(k2[0]), k2[1])
            for e in range(o):
                kk = (cur.num, cur.den)
                if kk not in table and kk not in new_table:
                    new_table[kk] = v2 + [e]
                cur = cur * t
        for k2 in table:
            table[k2] = table[k2] + [0]
        table.update(new_table)
        if len(table) == len(torsion):
            break
    # normalize vector lengths
    L = len(gens)
    for k2 in table:
        table[k2] = (table[k2] + [0] * L)[:L]
    return gens, orders, table


def _solve_int_least_squares(L: List[List[mpmath.mpf]], target: List[mpmath.mpf]) -> Optional[List[int]]:
    """Solve target ~= sum v_i L_i with v integer, via float least squares
    and rounding; verification happens at the caller."""
    r = len(L)
    if r == 0:
        return []
    m = len(target)
    # normal equations with mpmath
    A = mpmath.matrix(r, r)
    b = mpmath.matrix(r, 1)
    for i in range(r):
        for j in range(r):
            A[i, j] = mpmath.fsum(L[i][t] * L[j][t] for t in range(m))
        b[i] = mpmath.fsum(L[i][t] * target[t] for t in range(m))
    try:
        sol = mpmath.lu_solve(A, b)
    except Exception:
        return None
    out = []
    for i in range(r):
        v = sol[i]
        rv = int(mpmath.nint(v))
        if abs(v - rv) > 0.25:
            return None
        out.append(rv)
    return out


# -- fundamental unit search ------------------------------------------------------

def find_fundamental_units(F: NumberAlgebra, OF: Order, rank: int,
                           norm_cap: int = 120, rounds_stable: int = 3,
                           radius_cap: int = 1 << 24) -> List[Element]:
    """Fundamental units of OF (totally real side), by short-vector and
    same-ideal-quotient harvesting with index stabilization."""
    if rank == 0:
        return []
    alg = F
    from .enclosures import enclosures_of
    enc = enclosures_of(F)
    reps = list(range(F.n))  # totally real: all embeddings, one per root

    def logs(x: Element, prec: int) -> List[mpmath.mpf]:
        enc.refine_to(max(96, int(prec * 3.4)))
        with mpmath.workdps(prec):
            out = []
            for i in reps:
                box = enc.eval_element_box(x.num, x.den, i)
                a2 = box.abs2()
                mid = (a2.lo + a2.hi) / 2
                if mid <= 0:
                    raise PrecisionExhausted("log of vanishing embedding")
                out.append(mpmath.log(mpmath.mpf(mid.numerator) / mid.denominator) / 2)
            return out

    def is_torsion(x: Element) -> bool:
        return abs(x.norm()) == 1 and x.t2_value() == F.n

    basis: List[Element] = []

    def try_insert(u: Element) -> bool:
        """Insert the unit u into the subgroup basis; True if it changed."""
        nonlocal basis
        if is_torsion(u):
            return False
        prec = 80
        for _ in range(7):
            try:
                lu = logs(u, prec)
                Lb = [logs(b, prec) for b in basis]
            except PrecisionExhausted:
                prec *= 2
                continue
            if not basis:
                basis = [u]
                return True
            sol, resid = _solve_rat_least_squares(Lb, lu, max_den=64)
            scale = max(abs(t) for t in lu) + 1
            if resid > scale * mpmath.mpf(2) ** (-30):
                # numerically independent direction
                if len(basis) < rank:
                    basis = basis + [u]
                    return True
                prec *= 2
                continue
            if sol is None:
                prec *= 2
                continue
            den = 1
            for c in sol:
                den = den * c.denominator // gcd(den, c.denominator)
            cand = u ** den
            for b, c in zip(basis, sol):
                ci = int(c * den)
                if ci:
                    cand = cand * (b.inv() ** ci if ci > 0 else b ** (-ci))
            if not is_torsion(cand):
                prec *= 2
                continue
            if den == 1:
                return False
            # enlarge: new lattice = Z^k + Z*(sol) in basis coordinates
            k = len(basis)
            M = [[den if i == j else 0 for j in range(k)] for i in range(k)]
            M.append([int(c * den) for c in sol])
            H, U = la.hnf_with_transform(M)
            new_basis = []
            for i in range(len(H)):
                if not any(H[i]):
                    continue
                elt = alg.one
                for j in range(k):
                    e = U[i][j]
                    if e:
                        elt = elt * (basis[j] ** e)
                e = U[i][k]
                if e:
                    elt = elt * (u ** e)
                new_basis.append(elt)
            assert len(new_basis) == k
            basis = new_basis
            return True
        raise PrecisionExhausted("unit insertion failed to stabilize")

    radius = Fraction(F.n + 1)
    stable = 0
    by_ideal: Dict[Tuple, Element] = {}
    processed = set()
    while stable < rounds_stable or len(basis) < rank:
        changed = False
        for x, _v in shortvec.short_elements(OF.lattice, radius):
            if x.num in processed:
                continue
            processed.add(x.num)
            nm = x.norm()
            if nm == 0:
                continue
            anm = abs(nm)
            if anm == 1:
                if try_insert(x):
                    changed = True
                continue
            if anm <= norm_cap:
                key = (anm, FractionalIdeal(alg, [alg._mul_int(x.num, r) for r in OF.lattice.rows],
                                            OF.lattice.den * x.den).key)
                prev = by_ideal.get(key)
                if prev is None:
                    by_ideal[key] = x
                elif prev.num != x.num or prev.den != x.den:
                    q = x * prev.inv()
                    if abs(q.norm()) == 1 and OF.contains(q) and OF.contains(q.inv()):
                        if try_insert(q):
                            changed = True
        if len(basis) == rank and not changed:
            stable += 1
        else:
            stable = 0
        radius *= 2
        if radius > radius_cap:
            raise PrecisionExhausted(
                f"unit search radius cap hit with rank {len(basis)}/{rank}")
    return basis


def _solve_rat_least_squares(L, target, max_den: int):
    """Rational fit target ~= sum c_i L_i; returns (coeffs|None, residual)."""
    r = len(L)
    m = len(target)
    if r == 0:
        resid = mpmath.sqrt(mpmath.fsum(t * t for t in target))
        return [], resid
    A = mpmath.matrix(r, r)
    b = mpmath.matrix(r, 1)
    for i in range(r):
        for j in range(r):
            A[i, j] = mpmath.fsum(L[i][t] * L[j][t] for t in range(m))
        b[i] = mpmath.fsum(L[i][t] * target[t] for t in range(m))
    try:
        sol = mpmath.lu_solve(A, b)
    except Exception:
        return None, mpmath.mpf(0)
    resid2 = mpmath.fsum(
        (target[t] - mpmath.fsum(sol[i] * L[i][t] for i in range(r))) ** 2
        for t in range(m))
    resid = mpmath.sqrt(abs(resid2))
    out = []
    for i in range(r):
        f = _best_rational(sol[i], max_den)
        if f is None:
            return None, resid
        out.append(f)
    return out, resid


def _best_rational(x, max_den: int) -> Optional[Fraction]:
    from .enclosures import frac_from_mpf

    exact = frac_from_mpf(mpmath.mpf(x))
    best = exact.limit_denominator(max_den)
    if abs(best - exact) < Fraction(1, 10 ** 6):
        return best
    return None


# -- assembling O_K^x ---------------------------------------------------------------

def compute_unit_group(K: EtaleAlgebra, OK: Order,
                       ingested: Optional[List[Element]] = None) -> UnitGroup:
    """Unit group of O_K.  Fundamental units come from the totally real
    subalgebra, then one 2-saturation pass absorbs the CM unit index."""
    torsion = torsion_units(OK)
    F = K.real_subalgebra()
    OF = maximal_order(equation_order(F))
    import sympy
    from sympy.abc import x as _x

    n_comps = len(sympy.Poly(list(reversed(F.poly_coeffs)), _x).factor_list()[1])
    rank = F.n - n_comps
    provenance = "computed"
    if ingested is not None:
        fund = []
        for u in ingested:
            if not (OK.contains(u) and abs(u.norm()) == 1):
                raise MissingArithmeticData("ingested unit fails verification")
            fund.append(u)
        provenance = "ingested"
        U = UnitGroup(K, OK, torsion, fund, provenance)
        return _saturate2(U)
    if rank == 0:
        return UnitGroup(K, OK, torsion, [], provenance)
    fund_F = find_fundamental_units(F, OF, rank)
    fund = [F.embed(u) for u in fund_F]
    # F-units are units of O_F; their embeddings are units of O_K
    for u in fund:
        assert OK.contains(u) and abs(u.norm()) == 1
    U = UnitGroup(K, OK, torsion, fund, "computed-heuristic-index")
    return _saturate2(U)


def _saturate2(U: UnitGroup) -> UnitGroup:
    """Index-2 saturation: look for w in O_K^x with w^2 = t * prod eps^e,
    e in {0,1}^r, t torsion; repeat until closed."""
    K, OK = U.alg, U.OK
    from itertools import product as iproduct

    changed = True
    while changed:
        changed = False
        r = U.rank
        for evec in iproduct(range(2), repeat=r):
            if not any(evec):
                continue  # sqrt of torsion is torsion: already complete
            base = K.one
            for e, eps in zip(evec, U.fundamental):
                if e:
                    base = base * eps
            for t in U.torsion_elements:
                v = base * t
                if v.is_one():
                    continue
                w = _sqrt_in_order(v, OK)
                if w is None:
                    continue
                tor = U.torsion_dlog(w)
                if tor is not None:
                    continue  # w already known torsion
                try:
                    U.dlog(w)
                    continue  # already in the group
                except MissingArithmeticData:
                    pass
                # enlarge: replace a fundamental unit involved in evec by w
                pos = next(i for i, e in enumerate(evec) if e)
                fund = list(U.fundamental)
                fund[pos] = w
                U = UnitGroup(K, OK, torsion_units(OK), fund, U.provenance)
                changed = True
                break
            if changed:
                break
    return U


def _sqrt_in_order(v: Element, OK: Order) -> Optional[Element]:
    """A square root of v in OK, or None; numeric sqrt at each embedding
    with exact verification."""
    K = v.alg
    n = K.n
    from .enclosures import enclosures_of
    enc = enclosures_of(K)
    from itertools import product as iproduct

    reps = [i for i in range(n) if i <= enc.pair[i]]
    with mpmath.workdps(60):
        vals = []
        for i in range(n):
            box = enc.eval_element_box(v.num, v.den, i)
            mre, mim = box.mid()
            vals.append(mpmath.mpc(mpmath.mpf(mre.numerator) / mre.denominator,
                                   mpmath.mpf(mim.numerator) / mim.denominator))
        roots = []
        for i in range(n):
            box = enc.boxes[i]
            mre, mim = box.mid()
            roots.append(mpmath.mpc(mpmath.mpf(mre.numerator) / mre.denominator,
                                    mpmath.mpf(mim.numerator) / mim.denominator))
        V = mpmath.matrix([[roots[i] ** j for j in range(n)] for i in range(n)])
        base_sqrt = [mpmath.sqrt(vals[i]) for i in range(n)]
        for signs in iproduct((1, -1), repeat=len(reps)):
            s = [None] * n
            for k, i in enumerate(reps):
                s[i] = base_sqrt[i] * signs[k]
            for i in range(n):
                if s[i] is None:
                    s[i] = mpmath.conj(s[enc.pair[i]])
            try:
                coeffs = mpmath.lu_solve(V, mpmath.matrix(s))
            except Exception:
                continue
            # rational reconstruction with moderate denominators
            cand_fracs = []
            okf = True
            for i in range(n):
                c = coeffs[i]
                if abs(mpmath.im(c)) > 1e-12:
                    okf = False
                    break
                f = _best_rational(mpmath.re(c), 4 * OK.lattice.den ** 2)
                if f is None:
                    okf = False
                    break
                cand_fracs.append(f)
            if not okf:
                continue
            w = Element.from_fractions(K, cand_fracs)
            if w * w == v and OK.contains(w):
                return w
    return None
