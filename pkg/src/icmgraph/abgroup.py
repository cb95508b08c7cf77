"""Finite(ly presented) abelian group utilities.

Groups appear here as Z^k modulo a relation lattice.  The closure helper
walks a Cayley graph with exponent bookkeeping; the non-tree edges generate
the full relation lattice.
"""

from __future__ import annotations

from typing import Callable, Dict, Hashable, List, Optional, Sequence, Tuple

from . import intlinalg as la


def closure_with_relations(gens: Sequence, mul: Callable, key: Callable,
                           identity) -> Tuple[Dict[Hashable, Tuple], List[List[int]]]:
    """BFS closure of <gens> in a finite monoid-with-inverses setting.

    Returns (elements, relations): elements maps key(x) -> (x, exponent
    vector over gens); relations generate {e : prod gens^e = 1}.
    """
    k = len(gens)
    elements: Dict[Hashable, Tuple] = {key(identity): (identity, tuple([0] * k))}
    queue = [(identity, tuple([0] * k))]
    relations: List[List[int]] = []
    while queue:
        x, vx = queue.pop()
        for i, g in enumerate(gens):
            y = mul(x, g)
            vy = list(vx)
            vy[i] += 1
            ky = key(y)
            if ky in elements:
                _, old = elements[ky]
                rel = [vy[t] - old[t] for t in range(k)]
                if any(rel):
                    relations.append(rel)
            else:
                elements[ky] = (y, tuple(vy))
                queue.append((y, tuple(vy)))
    return elements, la.hnf(relations) if relations else []


class FiniteAbelianGroup:
    """Z^k modulo a relation lattice, with SNF coordinates.

    invariants: the nontrivial elementary divisors d_1 | d_2 | ...
    coords(expvec): coordinates in prod Z/d_j of an exponent vector.
    """

    def __init__(self, num_gens: int, relation_rows: Sequence[Sequence[int]]):
        self.k = num_gens
        if num_gens == 0:
            self.V = []
            self.Vinv = []
            self.diag = []
            self.keep = []
            self.invariants = []
            self.order = 1
            return
        # compress the relation lattice first; SNF with transforms on the
        # raw row list would drag a huge row-transform matrix along
        rel = la.hnf([list(r) for r in relation_rows])
        # a finite group needs a full-rank relation lattice
        D, U, V = la.snf_with_transform(rel if rel else [[0] * num_gens])
        diag = [D[i][i] if i < len(D) and i < len(D[0]) else 0 for i in range(num_gens)]
        self.V = V
        self.Vinv, dv = la.invert(V)
        assert dv == 1
        self.diag = diag
        self.keep = [i for i in range(num_gens) if diag[i] != 1]
        self.invariants = [diag[i] for i in self.keep]
        assert all(d != 0 for d in self.invariants), "group is infinite"
        order = 1
        for d in self.invariants:
            order *= d
        self.order = order

    def coords(self, expvec: Sequence[int]) -> Tuple[int, ...]:
        if self.k == 0:
            return ()
        w = la.vec_mat(list(expvec), self.V)
        return tuple(w[i] % self.diag[i] for i in self.keep)

    def expvec_of_coords(self, coords: Sequence[int]) -> List[int]:
        """One exponent vector mapping to the given SNF coordinates."""
        if self.k == 0:
            return []
        w = [0] * self.k
        for pos, i in enumerate(self.keep):
            w[i] = coords[pos]
        return la.vec_mat(w, self.Vinv)

    def is_trivial(self, expvec: Sequence[int]) -> bool:
        return all(c == 0 for c in self.coords(expvec))

    def all_coords(self):
        from itertools import product

        return product(*[range(d) for d in self.invariants])

    def add(self, c1, c2) -> Tuple[int, ...]:
        return tuple((a + b) % d for a, b, d in zip(c1, c2, self.invariants))

    def neg(self, c) -> Tuple[int, ...]:
        return tuple((-a) % d for a, d in zip(c, self.invariants))

    def zero(self) -> Tuple[int, ...]:
        return tuple(0 for _ in self.invariants)

    def element_order(self, c) -> int:
        from math import gcd

        o = 1
        for a, d in zip(c, self.invariants):
            if a:
                o_i = d // gcd(a, d)
                o = o * o_i // gcd(o, o_i)
        return o

    def __repr__(self):
        return "Z/" + " x Z/".join(str(d) for d in self.invariants) if self.invariants else "(trivial)"
