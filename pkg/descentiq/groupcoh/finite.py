"""Finite groups given by multiplication tables.

Elements are the indices ``0..order-1`` with 0 the identity; ``names`` only
matter for model files and reports.
"""

from __future__ import annotations

import itertools
from typing import Optional, Sequence

from descentiq.errors import ModelError, NotNormal


class FiniteGroup:
    def __init__(self, names: Sequence[str], table: Sequence[Sequence[int]]):
        self.names = [str(n) for n in names]
        self.order = len(self.names)
        self.table = [list(row) for row in table]
        if self.order == 0:
            raise ModelError("A group needs at least the identity element")
        if len(self.table) != self.order or any(len(r) != self.order for r in self.table):
            raise ModelError(f"Multiplication table must be {self.order}x{self.order}")
        self._index = {n: i for i, n in enumerate(self.names)}
        self._check()
        self.inverses = [next(h for h in range(self.order) if self.table[g][h] == 0)
                         for g in range(self.order)]

    def _check(self) -> None:
        n = self.order
        for g in range(n):
            if self.table[0][g] != g or self.table[g][0] != g:
                raise ModelError(f"First element is not an identity for {self.names[g]}")
            if sorted(self.table[g]) != list(range(n)):
                raise ModelError(f"Row of {self.names[g]} is not a permutation")
            if not any(self.table[g][h] == 0 for h in range(n)):
                raise ModelError(f"{self.names[g]} has no inverse")
        for a, b, c in itertools.product(range(n), repeat=3):
            if self.table[self.table[a][b]][c] != self.table[a][self.table[b][c]]:
                raise ModelError(
                    f"Associativity fails on ({self.names[a]}, {self.names[b]}, {self.names[c]})"
                )

    # -- constructors ------------------------------------------------------

    @classmethod
    def trivial(cls) -> FiniteGroup:
        return cls(["e"], [[0]])

    @classmethod
    def cyclic(cls, n: int) -> FiniteGroup:
        names = ["e"] + [f"g{k}" if n > 2 else "s" for k in range(1, n)]
        return cls(names, [[(a + b) % n for b in range(n)] for a in range(n)])

    @classmethod
    def product(cls, G: FiniteGroup, H: FiniteGroup) -> FiniteGroup:
        pairs = [(g, h) for g in range(G.order) for h in range(H.order)]
        index = {p: i for i, p in enumerate(pairs)}
        names = [f"({G.names[g]},{H.names[h]})" for g, h in pairs]
        names[0] = "e"
        table = [[index[(G.mul(a[0], b[0]), H.mul(a[1], b[1]))] for b in pairs] for a in pairs]
        return cls(names, table)

    @classmethod
    def dihedral(cls, n: int) -> FiniteGroup:
        """Symmetries of the n-gon; r^k s^f stored as index k + n*f."""
        def mul(x: tuple[int, int], y: tuple[int, int]) -> tuple[int, int]:
            k1, f1 = x
            k2, f2 = y
            return ((k1 + (-k2 if f1 else k2)) % n, f1 ^ f2)

        elems = [(k, f) for f in (0, 1) for k in range(n)]
        index = {e: i for i, e in enumerate(elems)}
        names = ["e"] + [f"r{k}" for k in range(1, n)] + [f"r{k}s" for k in range(n)]
        return cls(names, [[index[mul(a, b)] for b in elems] for a in elems])

    @classmethod
    def symmetric3(cls) -> FiniteGroup:
        return cls.dihedral(3)

    # -- arithmetic --------------------------------------------------------

    def mul(self, g: int, h: int) -> int:
        return self.table[g][h]

    def inv(self, g: int) -> int:
        return self.inverses[g]

    def conj(self, g: int, n: int) -> int:
        return self.mul(self.mul(g, n), self.inv(g))

    @property
    def identity(self) -> int:
        return 0

    def elements(self) -> range:
        return range(self.order)

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise ModelError(f"Unknown group element: {name}. Available: {self.names}") from None

    def is_abelian(self) -> bool:
        return all(self.mul(a, b) == self.mul(b, a)
                   for a in self.elements() for b in self.elements())

    def generating_set(self) -> list[int]:
        """Greedy generating set (smallest indices first)."""
        gens: list[int] = []
        span = {0}
        for g in self.elements():
            if g not in span:
                gens.append(g)
                span = self.closure(gens)
        return gens

    def closure(self, gens: Sequence[int]) -> set[int]:
        span = {0}
        frontier = [0]
        while frontier:
            x = frontier.pop()
            for g in gens:
                y = self.mul(x, g)
                if y not in span:
                    span.add(y)
                    frontier.append(y)
        return span

    def is_subgroup(self, elems: Sequence[int]) -> bool:
        s = set(elems)
        return 0 in s and all(self.mul(a, self.inv(b)) in s for a in s for b in s)

    def normality_witness(self, elems: Sequence[int]) -> Optional[tuple[int, int, int]]:
        s = set(elems)
        for g in self.elements():
            for n in sorted(s):
                c = self.conj(g, n)
                if c not in s:
                    return g, n, c
        return None

    def is_normal(self, elems: Sequence[int]) -> bool:
        return self.normality_witness(elems) is None

    def quotient(self, normal: Sequence[int]) -> tuple[FiniteGroup, list[int]]:
        """G/N with the projection as a list ``proj[g]`` of quotient indices."""
        if not self.is_subgroup(normal):
            raise ModelError(f"{sorted(normal)} is not a subgroup")
        witness = self.normality_witness(normal)
        if witness is not None:
            raise NotNormal(*witness)
        N = sorted(set(normal))
        cosets: list[frozenset[int]] = []
        proj = [0] * self.order
        for g in self.elements():
            coset = frozenset(self.mul(g, n) for n in N)
            if coset not in cosets:
                cosets.append(coset)
            proj[g] = cosets.index(coset)
        reps = [min(c) for c in cosets]
        names = [self.names[r] + ("N" if len(N) > 1 else "") for r in reps]
        names[0] = "e"
        table = [[proj[self.mul(a, b)] for b in reps] for a in reps]
        return FiniteGroup(names, table), proj

    def __repr__(self) -> str:
        return f"FiniteGroup(order={self.order})"


def enumerate_homomorphisms(G: FiniteGroup, images_of: Sequence, add,
                            zero) -> list[dict[int, object]]:
    """All homomorphisms from G into an abelian group, as element -> image maps.

    ``images_of`` lists candidate images; ``add`` and ``zero`` give the target
    group law. Images are chosen on a generating set and propagated, keeping
    only assignments that are consistent.
    """
    gens = G.generating_set()
    out: list[dict[int, object]] = []
    for choice in itertools.product(images_of, repeat=len(gens)):
        phi: dict[int, object] = {0: zero}
        frontier = [0]
        ok = True
        while frontier and ok:
            x = frontier.pop()
            for g, img in zip(gens, choice):
                y = G.mul(x, g)
                val = add(phi[x], img)
                if y in phi:
                    if phi[y] != val:
                        ok = False
                        break
                else:
                    phi[y] = val
                    frontier.append(y)
        if ok and all(phi[G.mul(a, b)] == add(phi[a], phi[b])
                      for a in G.elements() for b in G.elements()):
            out.append(phi)
    return out
