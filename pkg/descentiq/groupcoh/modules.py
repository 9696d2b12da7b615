"""Finitely generated abelian groups with a left action of a finite group."""

from __future__ import annotations

import logging
from functools import cached_property
from typing import Sequence

from descentiq.algebra.abelian import FgAbelianGroup, GroupElement, GroupHom
from descentiq.algebra.matrices import block_diag, vstack, zeros
from descentiq.errors import ModelError, NontrivialAction
from descentiq.groupcoh.finite import FiniteGroup

logger = logging.getLogger(__name__)


class GroupModule:
    """``action[g]`` is the automorphism rho_g; rho_g rho_h = rho_{gh}."""

    def __init__(self, group: FiniteGroup, module: FgAbelianGroup,
                 action: Sequence[GroupHom] | None = None, check: bool = True):
        self.group = group
        self.module = module
        if action is None:
            action = [GroupHom.identity(module) for _ in group.elements()]
        if len(action) != group.order:
            raise ModelError(f"Need {group.order} action maps, got {len(action)}")
        self.action = list(action)
        if check:
            self._check()

    def _check(self) -> None:
        if not self.action[0].equals(GroupHom.identity(self.module)):
            raise ModelError("Identity element must act as the identity")
        G = self.group
        for g in G.elements():
            for h in G.elements():
                if not (self.action[g] @ self.action[h]).equals(self.action[G.mul(g, h)]):
                    raise ModelError(
                        f"Action law fails: rho_{G.names[g]} rho_{G.names[h]} "
                        f"!= rho_{G.names[G.mul(g, h)]}"
                    )

    # -- constructors ------------------------------------------------------

    @classmethod
    def trivial(cls, group: FiniteGroup, module: FgAbelianGroup) -> GroupModule:
        return cls(group, module, check=False)

    @classmethod
    def permutation(cls, group: FiniteGroup, base: FgAbelianGroup) -> GroupModule:
        """prod_{g in G} base with (h.s)_g = s_{h^{-1} g}."""
        n = group.order
        m = base.ngens
        module = FgAbelianGroup.direct_sum([base] * n)
        action = []
        for h in group.elements():
            mat = zeros(n * m, n * m)
            for g in group.elements():
                src = group.mul(group.inv(h), g)
                for k in range(m):
                    mat[g * m + k, src * m + k] = 1
            action.append(GroupHom.block(module, module, mat))
        return cls(group, module, action, check=False)

    # -- queries -----------------------------------------------------------

    def act(self, g: int, x: GroupElement) -> GroupElement:
        return self.action[g](x)

    def is_trivial_action(self) -> bool:
        return all(self.action[g].equals(GroupHom.identity(self.module))
                   for g in self.group.elements())

    def require_trivial_action(self) -> None:
        for g in self.group.elements():
            if not self.action[g].equals(GroupHom.identity(self.module)):
                raise NontrivialAction(g)

    def fixed_points(self,
                     elements: Sequence[int] | None = None) -> tuple[FgAbelianGroup, GroupHom]:
        """M^H for the listed elements (default: all of G), with its inclusion."""
        elems = list(self.group.elements()) if elements is None else list(elements)
        M = self.module
        if not elems:
            return M, GroupHom.identity(M)
        stacked = vstack([(self.action[g] - GroupHom.identity(M)).matrix for g in elems],
                         M.ngens)
        target = FgAbelianGroup.direct_sum([M] * len(elems))
        return GroupHom.block(M, target, stacked).kernel

    @cached_property
    def invariants(self) -> tuple[FgAbelianGroup, GroupHom]:
        return self.fixed_points()

    def fixed_submodule(self, normal: Sequence[int]) -> tuple[GroupModule, GroupHom, list[int]]:
        """M^N as a module over G/N, its inclusion into M, and the projection G -> G/N."""
        Q, proj = self.group.quotient(normal)
        sub, incl = self.fixed_points(normal)
        reps = [proj.index(q) for q in range(Q.order)]
        action = []
        for g in reps:
            images = []
            for gen in sub.generators():
                moved = self.act(g, incl(gen))
                pre = incl.solve(moved)
                if pre is None:  # pragma: no cover - N normal keeps M^N stable
                    raise ModelError("Fixed submodule is not stable under G")
                images.append(pre)
            action.append(GroupHom.from_images(sub, sub, images))
        return GroupModule(Q, sub, action), incl, proj

    def direct_sum(self, other: GroupModule) -> GroupModule:
        M = FgAbelianGroup.direct_sum([self.module, other.module])
        action = [GroupHom.block(M, M, block_diag([a.matrix, b.matrix]))
                  for a, b in zip(self.action, other.action)]
        return GroupModule(self.group, M, action, check=False)

    def __repr__(self) -> str:
        return f"GroupModule({self.module} over order {self.group.order})"
