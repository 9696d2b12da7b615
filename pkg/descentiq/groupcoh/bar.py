"""Group cohomology through the unnormalized bar complex.

C^n(G, M) is the direct sum of |G|^n copies of M, one block per n-tuple of
group elements in ``itertools.product`` order. The differential is

    (dc)(g1,...,g_{n+1}) = g1.c(g2,...,g_{n+1})
                           + sum_{i=1..n} (-1)^i c(g1,...,g_i g_{i+1},...,g_{n+1})
                           + (-1)^{n+1} c(g1,...,g_n)

which at n = 1 reads (g.a_h) - a_{gh} + a_g and at n = 2 is the four-term
expression c(g1, g2 g3) + g1.c(g2, g3) - c(g1, g2) - c(g1 g2, g3) reordered.
"""

from __future__ import annotations

import itertools
import logging
from typing import Callable, Mapping, Sequence

import numpy as np

from descentiq.algebra.abelian import FgAbelianGroup, GroupElement, GroupHom
from descentiq.algebra.complexes import CochainComplex, CohomologyGroup, is_coboundary
from descentiq.algebra.matrices import zero_vector, zeros
from descentiq.errors import ModelError
from descentiq.groupcoh.finite import FiniteGroup
from descentiq.groupcoh.modules import GroupModule

logger = logging.getLogger(__name__)

Tuple = tuple[int, ...]


def group_tuples(G: FiniteGroup, n: int) -> list[Tuple]:
    return list(itertools.product(range(G.order), repeat=n))


def tuple_index(G: FiniteGroup, t: Sequence[int]) -> int:
    idx = 0
    for g in t:
        idx = idx * G.order + g
    return idx


def cochain_group(module: GroupModule, n: int) -> FgAbelianGroup:
    return FgAbelianGroup.direct_sum([module.module] * module.group.order ** n)


class GroupCochain:
    """A total function G^n -> M stored as one flat coordinate vector."""

    def __init__(self, module: GroupModule, degree: int, vector: GroupElement):
        self.module = module
        self.degree = degree
        self.vector = vector

    @classmethod
    def zero(cls, module: GroupModule, degree: int) -> GroupCochain:
        return cls(module, degree, cochain_group(module, degree).zero())

    @classmethod
    def from_function(cls, module: GroupModule, degree: int,
                      fn: Callable[[Tuple], GroupElement]) -> GroupCochain:
        m = module.module.ngens
        tuples = group_tuples(module.group, degree)
        out = zero_vector(m * len(tuples))
        for k, t in enumerate(tuples):
            val = fn(t)
            out[k * m:(k + 1) * m] = val.coords
        return cls(module, degree, cochain_group(module, degree).element(out))

    @classmethod
    def from_values(cls, module: GroupModule, degree: int,
                    values: Mapping[Tuple, GroupElement]) -> GroupCochain:
        zero = module.module.zero()
        return cls.from_function(module, degree, lambda t: values.get(t, zero))

    def __getitem__(self, t: Sequence[int]) -> GroupElement:
        if len(t) != self.degree:
            raise ValueError(f"Expected a {self.degree}-tuple, got {tuple(t)}")
        m = self.module.module.ngens
        k = tuple_index(self.module.group, t)
        return self.module.module.element(self.vector.coords[k * m:(k + 1) * m])

    def items(self):
        for t in group_tuples(self.module.group, self.degree):
            yield t, self[t]

    def __add__(self, other: GroupCochain) -> GroupCochain:
        return GroupCochain(self.module, self.degree, self.vector + other.vector)

    def __sub__(self, other: GroupCochain) -> GroupCochain:
        return GroupCochain(self.module, self.degree, self.vector - other.vector)

    def __neg__(self) -> GroupCochain:
        return GroupCochain(self.module, self.degree, -self.vector)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GroupCochain):
            return NotImplemented
        return self.degree == other.degree and self.vector == other.vector

    def is_zero(self) -> bool:
        return self.vector.is_zero()

    def map_values(self, target: GroupModule, f: GroupHom) -> GroupCochain:
        """Apply a homomorphism M -> M' valuewise."""
        return GroupCochain.from_function(target, self.degree, lambda t: f(self[t]))

    def __repr__(self) -> str:
        values = {t: v.as_list() for t, v in self.items()}
        return f"GroupCochain(degree={self.degree}, {values})"


def bar_differential(c: GroupCochain) -> GroupCochain:
    """Coboundary of a cochain, evaluated straight from the defining formula."""
    M = c.module
    G = M.group
    n = c.degree

    def value(t: Tuple) -> GroupElement:
        total = M.act(t[0], c[t[1:]])
        for i in range(1, n + 1):
            merged = t[:i - 1] + (G.mul(t[i - 1], t[i]),) + t[i + 1:]
            total = total + c[merged] * (-1) ** i
        return total + c[t[:n]] * (-1) ** (n + 1)

    return GroupCochain.from_function(M, n + 1, value)


def bar_differential_matrix(module: GroupModule, n: int) -> GroupHom:
    """d^n : C^n(G, M) -> C^{n+1}(G, M) as a block matrix."""
    G = module.group
    m = module.module.ngens
    source = cochain_group(module, n)
    target = cochain_group(module, n + 1)
    mat = zeros(target.ngens, source.ngens)

    def add(row_block: int, col_block: int, block: np.ndarray) -> None:
        mat[row_block * m:(row_block + 1) * m, col_block * m:(col_block + 1) * m] += block

    eye = GroupHom.identity(module.module).matrix
    for r, t in enumerate(group_tuples(G, n + 1)):
        add(r, tuple_index(G, t[1:]), module.action[t[0]].matrix)
        for i in range(1, n + 1):
            merged = t[:i - 1] + (G.mul(t[i - 1], t[i]),) + t[i + 1:]
            add(r, tuple_index(G, merged), eye * (-1) ** i)
        add(r, tuple_index(G, t[:n]), eye * (-1) ** (n + 1))
    return GroupHom.block(source, target, mat)


def bar_complex(module: GroupModule, top: int) -> CochainComplex:
    """C^0 -> ... -> C^top, cached on the module."""
    cache: dict[int, CochainComplex] = module.__dict__.setdefault("_bar_complexes", {})
    for t, cx in cache.items():
        if t >= top:
            return cx
    groups = [cochain_group(module, n) for n in range(top + 1)]
    diffs = [bar_differential_matrix(module, n) for n in range(top)]
    cx = CochainComplex(groups, diffs)
    cache[top] = cx
    logger.debug("bar complex up to degree %d over order %d", top, module.group.order)
    return cx


def group_cohomology(G: FiniteGroup, M: GroupModule, n: int) -> CohomologyGroup:
    if M.group is not G:
        raise ModelError("Module is over a different group")
    if n < 0:
        raise ValueError("Degree must be non-negative")
    return bar_complex(M, n + 1).cohomology(n)


def cochain_class(c: GroupCochain) -> GroupElement:
    """Class of a bar cocycle in H^n(G, M)."""
    return group_cohomology(c.module.group, c.module, c.degree).class_of(c.vector)


def class_rep(module: GroupModule, degree: int, cls: GroupElement | Sequence[int]) -> GroupCochain:
    H = group_cohomology(module.group, module, degree)
    return GroupCochain(module, degree, H.rep_of(cls))


def bar_coboundary_witness(c: GroupCochain) -> GroupCochain | None:
    """(n-1)-cochain w with dw = c, or None when c is a nonzero class."""
    cx = bar_complex(c.module, c.degree + 1)
    w = is_coboundary(cx, c.vector, c.degree)
    if w is None:
        return None
    return GroupCochain(c.module, c.degree - 1, w)


class Inflation:
    """Inflation H^n(G/N, M^N) -> H^n(G, M) and its cochain-level pullback."""

    def __init__(self, module: GroupModule, normal: Sequence[int], degree: int):
        self.module = module
        self.degree = degree
        self.quotient_module, self.incl, self.proj = module.fixed_submodule(normal)
        Q = self.quotient_module.group
        self.source = group_cohomology(Q, self.quotient_module, degree)
        self.target = group_cohomology(module.group, module, degree)
        images = []
        for gen in self.source.group.generators():
            pulled = self.pullback(GroupCochain(self.quotient_module, degree,
                                                self.source.rep_of(gen)))
            images.append(self.target.class_of(pulled.vector))
        self.hom = GroupHom.from_images(self.source.group, self.target.group, images)

    def pullback(self, c: GroupCochain) -> GroupCochain:
        return GroupCochain.from_function(
            self.module, c.degree,
            lambda t: self.incl(c[tuple(self.proj[g] for g in t)]),
        )

    def __call__(self, cls: GroupElement) -> GroupElement:
        return self.hom(cls)


def inflation(module: GroupModule, normal: Sequence[int], degree: int,
              cls: GroupElement) -> GroupElement:
    return Inflation(module, normal, degree)(cls)


# ---------------------------------------------------------------------------
# Cyclic groups: periodic resolution
# ---------------------------------------------------------------------------


def _element_order(G: FiniteGroup, g: int) -> int:
    k, x = 1, g
    while x != 0:
        x = G.mul(x, g)
        k += 1
    return k


def periodic_cohomology(module: GroupModule, generator: int, j: int) -> FgAbelianGroup:
    """H^j of a cyclic group from the 2-periodic resolution (any action)."""
    G = module.group
    if _element_order(G, generator) != G.order:
        raise ModelError(f"{G.names[generator]} does not generate the group")
    M = module.module
    one = GroupHom.identity(M)
    T = module.action[generator]
    norm = GroupHom.zero(M, M)
    power = one
    for _ in range(G.order):
        norm = norm + power
        power = T @ power
    if j == 0:
        return CochainComplex([M, M], [T - one]).cohomology(0).group
    if j % 2:
        return CochainComplex([M, M, M], [T - one, norm]).cohomology(1).group
    return CochainComplex([M, M, M], [norm, T - one]).cohomology(1).group


def cyclic_cohomology_oracle(n_order: int, M: GroupModule, j: int) -> FgAbelianGroup:
    """M for j = 0, M[n] for odd j, M/nM for even j > 0; trivial action only."""
    M.require_trivial_action()
    if M.group.order != n_order:
        raise ModelError(f"Module is over a group of order {M.group.order}, not {n_order}")
    times_n = GroupHom.scalar(M.module, n_order)
    if j == 0:
        return M.module
    if j % 2:
        return times_n.kernel[0]
    return times_n.cokernel[0]
