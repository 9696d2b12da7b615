"""Shared pieces of the descent computations: obstruction classes, the
induced-from-invariants decision and per-point group-cohomology solves."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Optional

from descentiq.algebra.abelian import FgAbelianGroup, GroupElement
from descentiq.errors import ModelError, NotACocycle
from descentiq.groupcoh.bar import (
    GroupCochain,
    bar_coboundary_witness,
    bar_differential,
    cochain_class,
    group_cohomology,
)
from descentiq.groupcoh.modules import GroupModule
from descentiq.sites.constructions import invariants_sheaf
from descentiq.sites.sheaves import EquivariantSheaf, SheafMorphism, SiteCochain, chain_key

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ObstructionClass:
    """A bar cocycle valued in A(X) together with its class in H^n(G, A(X))."""

    degree: int
    cochain: GroupCochain
    cls: GroupElement

    @property
    def group(self) -> FgAbelianGroup:
        return self.cls.group

    def is_zero(self) -> bool:
        return self.cls.is_zero()

    @property
    def coordinates(self) -> list[int]:
        return self.cls.invariant_coordinates()

    def table(self, names: list[str], nonzero_only: bool = True) -> dict[str, list[int]]:
        """Cocycle values keyed by comma-joined element names."""
        return {",".join(names[g] for g in t): v.as_list() for t, v in self.cochain.items()
                if not (nonzero_only and v.is_zero())}


def obstruction_class(c: GroupCochain) -> ObstructionClass:
    return ObstructionClass(c.degree, c, cochain_class(c))


@dataclass(frozen=True)
class InducedCheck:
    """Whether a class lies in the image of H^n(X, A^G) -> H^n(X, A)."""

    degree: int
    induced: bool
    witness: Optional[SiteCochain]
    cokernel_coords: list[int]


def is_induced(z: SiteCochain, degree: int) -> InducedCheck:
    A = z.sheaf
    z.require_cocycle()
    AG, incl = invariants_sheaf(A)
    induced_map = incl.induced_map(degree)
    cls = z.cohomology_class()
    pre = induced_map.solve(cls)
    if pre is None:
        _, proj = induced_map.cokernel
        coords = proj(cls).invariant_coordinates()
        logger.info("degree-%d class %s is not induced from the invariants",
                    degree, cls.invariant_coordinates())
        return InducedCheck(degree, False, None, coords)
    witness = SiteCochain(AG, degree, AG.cohomology(degree).rep_of(pre))
    return InducedCheck(degree, True, witness, [])


def descend_cochain(z: SiteCochain, incl: SheafMorphism) -> SiteCochain:
    """Rewrite a cochain with G-fixed values as a cochain of A^G."""
    values = {}
    for chain, v in z.items():
        pre = incl.maps[chain[-1]].solve(v)
        if pre is None:
            raise ModelError(f"Value at {chain_key(chain)} is not G-invariant")
        values[chain] = pre
    return SiteCochain.from_values(incl.source, z.degree, values)


def require_bar_cocycle(c: GroupCochain, what: str) -> None:
    dc = bar_differential(c)
    if not dc.is_zero():
        raise NotACocycle(dc.vector.as_list(), where=what)


def solve_locally(module: GroupModule, degree: int,
                  values: Callable[[tuple[int, ...]], GroupElement]
                  ) -> tuple[Optional[GroupCochain], GroupCochain]:
    """Solve delta w = c for the bar cocycle c given by ``values``.

    Returns (w or None, c).
    """
    c = GroupCochain.from_function(module, degree, values)
    return bar_coboundary_witness(c), c


def local_class(c: GroupCochain) -> list[int]:
    H = group_cohomology(c.module.group, c.module, c.degree)
    return H.class_of(c.vector).invariant_coordinates()

