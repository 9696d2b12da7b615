"""Bounded cochain complexes, their cohomology, and double complexes."""

from __future__ import annotations

import logging
from typing import Optional, Sequence

import numpy as np

from descentiq.algebra.abelian import FgAbelianGroup, GroupElement, GroupHom
from descentiq.algebra.matrices import matmul, zero_vector, zeros
from descentiq.errors import ComplexError, NotACocycle

logger = logging.getLogger(__name__)


class CochainComplex:
    """C^0 -> C^1 -> ... -> C^N with ``differentials[n] : C^n -> C^{n+1}``."""

    def __init__(self, groups: Sequence[FgAbelianGroup], differentials: Sequence[GroupHom],
                 check: bool = True):
        if len(differentials) != max(len(groups) - 1, 0):
            raise ValueError(
                f"{len(groups)} groups need {len(groups) - 1} differentials, "
                f"got {len(differentials)}"
            )
        self.groups = list(groups)
        self.differentials = list(differentials)
        self._cohomology: dict[int, CohomologyGroup] = {}
        if check:
            self._check()

    @property
    def top(self) -> int:
        return len(self.groups) - 1

    def _check(self) -> None:
        for n in range(len(self.differentials) - 1):
            if not (self.differentials[n + 1] @ self.differentials[n]).is_zero():
                raise ComplexError(n)

    def group(self, n: int) -> FgAbelianGroup:
        if 0 <= n <= self.top:
            return self.groups[n]
        return FgAbelianGroup.trivial()

    def d(self, n: int) -> GroupHom:
        if 0 <= n < self.top:
            return self.differentials[n]
        return GroupHom.zero(self.group(n), self.group(n + 1))

    def cohomology(self, n: int) -> CohomologyGroup:
        if n not in self._cohomology:
            self._cohomology[n] = CohomologyGroup(self, n)
        return self._cohomology[n]


class CohomologyGroup:
    """H^n = ker d^n / im d^{n-1} with class and representative maps.

    ``group`` is presented on invariant generators, so class coordinates are
    invariant-factor coordinates.
    """

    def __init__(self, cx: CochainComplex, degree: int):
        self.complex = cx
        self.degree = degree
        self.cochains = cx.group(degree)
        self._d_out = cx.d(degree)
        self._d_in = cx.d(degree - 1)
        Z, incl = self._d_out.kernel
        lifts = []
        for gen in self._d_in.source.generators():
            z = incl.solve(self._d_in(gen))
            if z is None:  # pragma: no cover - excluded by the complex check
                raise ComplexError(degree - 1)
            lifts.append(z)
        boundary = GroupHom.from_images(self._d_in.source, Z, lifts)
        H, proj = boundary.cokernel
        self.cocycles = Z
        self.group = H
        self._incl = incl
        self._proj = proj
        sections = [proj.solve(h) for h in H.generators()]
        self._section = zeros(Z.ngens, H.ngens)
        for i, s in enumerate(sections):
            self._section[:, i] = s.coords
        logger.debug("H^%d computed: %s", degree, H)

    def check_cocycle(self, z: GroupElement) -> None:
        dz = self._d_out(z)
        if not dz.is_zero():
            raise NotACocycle(dz.as_list())

    def class_of(self, z: GroupElement | np.ndarray) -> GroupElement:
        z = z if isinstance(z, GroupElement) else self.cochains.element(z)
        self.check_cocycle(z)
        w = self._incl.solve(z)
        assert w is not None
        return self._proj(w)

    def rep_of(self, v: GroupElement | Sequence[int]) -> GroupElement:
        coords = v.coords if isinstance(v, GroupElement) else np.asarray(
            [int(c) for c in v], dtype=object)
        if len(coords) != self.group.ngens:
            raise ValueError(f"Expected {self.group.ngens} class coordinates, got {len(coords)}")
        return self._incl(matmul(self._section, coords) if len(coords)
                          else zero_vector(self.cocycles.ngens))

    def is_zero_class(self, z: GroupElement) -> bool:
        return self.class_of(z).is_zero()

    def element(self, coords: Sequence[int]) -> GroupElement:
        return self.group.element(coords)

    def __str__(self) -> str:
        return str(self.group)


def cohomology(cx: CochainComplex, n: int) -> CohomologyGroup:
    return cx.cohomology(n)


def is_coboundary(cx: CochainComplex, z: GroupElement, n: int) -> Optional[GroupElement]:
    """Witness w with d^{n-1} w == z, or None when z is a nonzero class."""
    dz = cx.d(n)(z)
    if not dz.is_zero():
        raise NotACocycle(dz.as_list())
    return cx.d(n - 1).solve(z)


class DoubleComplex:
    """Commuting first-quadrant double complex K^{p,q}, 0 <= p <= P, 0 <= q <= Q.

    ``dh[p][q] : K^{p,q} -> K^{p+1,q}`` and ``dv[p][q] : K^{p,q} -> K^{p,q+1}``.
    The sign is introduced only by ``total_complex``.
    """

    def __init__(self, groups: Sequence[Sequence[FgAbelianGroup]],
                 dh: Sequence[Sequence[GroupHom]], dv: Sequence[Sequence[GroupHom]],
                 check: bool = True):
        self.groups = [list(col) for col in groups]
        self.P = len(self.groups) - 1
        self.Q = len(self.groups[0]) - 1 if self.groups else -1
        self.dh = [list(col) for col in dh]
        self.dv = [list(col) for col in dv]
        if check:
            self._check()

    def K(self, p: int, q: int) -> FgAbelianGroup:
        if 0 <= p <= self.P and 0 <= q <= self.Q:
            return self.groups[p][q]
        return FgAbelianGroup.trivial()

    def horizontal(self, p: int, q: int) -> GroupHom:
        if 0 <= p < self.P and 0 <= q <= self.Q:
            return self.dh[p][q]
        return GroupHom.zero(self.K(p, q), self.K(p + 1, q))

    def vertical(self, p: int, q: int) -> GroupHom:
        if 0 <= p <= self.P and 0 <= q < self.Q:
            return self.dv[p][q]
        return GroupHom.zero(self.K(p, q), self.K(p, q + 1))

    def _check(self) -> None:
        for p in range(self.P + 1):
            for q in range(self.Q + 1):
                if not (self.horizontal(p + 1, q) @ self.horizontal(p, q)).is_zero():
                    raise ComplexError(p)
                if not (self.vertical(p, q + 1) @ self.vertical(p, q)).is_zero():
                    raise ComplexError(q)
                hv = self.horizontal(p, q + 1) @ self.vertical(p, q)
                vh = self.vertical(p + 1, q) @ self.horizontal(p, q)
                if not hv.equals(vh):
                    raise ComplexError(p + q)


class TotalComplex(CochainComplex):
    """Totalization keeping track of where each (p, q) block sits."""

    def __init__(self, K: DoubleComplex):
        self.double = K
        self.blocks: list[list[tuple[int, int]]] = []
        self.offsets: list[dict[tuple[int, int], int]] = []
        groups: list[FgAbelianGroup] = []
        for n in range(K.P + K.Q + 1):
            pairs = [(p, n - p) for p in range(K.P + 1) if 0 <= n - p <= K.Q]
            offs: dict[tuple[int, int], int] = {}
            at = 0
            for pq in pairs:
                offs[pq] = at
                at += K.K(*pq).ngens
            self.blocks.append(pairs)
            self.offsets.append(offs)
            groups.append(FgAbelianGroup.direct_sum([K.K(*pq) for pq in pairs]))
        diffs = []
        for n in range(len(groups) - 1):
            m = zeros(groups[n + 1].ngens, groups[n].ngens)
            for (p, q) in self.blocks[n]:
                col = self.offsets[n][(p, q)]
                width = K.K(p, q).ngens
                if (p + 1, q) in self.offsets[n + 1]:
                    row = self.offsets[n + 1][(p + 1, q)]
                    h = K.horizontal(p, q).matrix
                    m[row:row + h.shape[0], col:col + width] += h
                if (p, q + 1) in self.offsets[n + 1]:
                    row = self.offsets[n + 1][(p, q + 1)]
                    v = K.vertical(p, q).matrix
                    sign = -1 if p % 2 else 1
                    m[row:row + v.shape[0], col:col + width] += sign * v
            diffs.append(GroupHom.block(groups[n], groups[n + 1], m))
        super().__init__(groups, diffs)

    def component(self, x: GroupElement, p: int, q: int) -> GroupElement:
        n = p + q
        start = self.offsets[n][(p, q)]
        G = self.double.K(p, q)
        return G.element(x.coords[start:start + G.ngens])

    def embed(self, p: int, q: int, x: GroupElement) -> GroupElement:
        n = p + q
        out = zero_vector(self.group(n).ngens)
        start = self.offsets[n][(p, q)]
        out[start:start + x.group.ngens] = x.coords
        return self.group(n).element(out)


def total_complex(K: DoubleComplex) -> TotalComplex:
    return TotalComplex(K)
