"""The double complex K^{p,q} = C^p(G, C^q(X, A)).

Columns are bar cochains of G valued in the site cochain module C^q(X, A).
The horizontal map is the bar differential of that module, the vertical map is
the site differential applied to every group tuple. The two commute because
the twists commute with d.
"""

from __future__ import annotations

import logging
from functools import cached_property

from descentiq.algebra.abelian import FgAbelianGroup, GroupElement, GroupHom
from descentiq.algebra.complexes import DoubleComplex, TotalComplex
from descentiq.algebra.matrices import block_diag, zeros
from descentiq.groupcoh.bar import (
    GroupCochain,
    bar_differential_matrix,
    cochain_group,
    group_cohomology,
)
from descentiq.sites.sheaves import EquivariantSheaf, SiteCochain

logger = logging.getLogger(__name__)


class LowDegreeComplex:
    """K^{p,q} for 0 <= p <= P and 0 <= q <= Q."""

    def __init__(self, sheaf: EquivariantSheaf, max_total_degree: int = 3,
                 group_degree_margin: int = 1, check: bool = False):
        self.sheaf = sheaf
        self.max_total_degree = max_total_degree
        site_top = sheaf.site.height
        if sheaf.site.chain_cap:
            site_top = min(site_top, sheaf.site.chain_cap)
        self.P = max_total_degree + group_degree_margin
        self.Q = min(max_total_degree + 1, site_top)
        G = sheaf.group
        groups, dh, dv = [], [], []
        for p in range(self.P + 1):
            groups.append([cochain_group(sheaf.cochain_module(q), p) for q in range(self.Q + 1)])
        for p in range(self.P):
            dh.append([bar_differential_matrix(sheaf.cochain_module(q), p)
                       for q in range(self.Q + 1)])
        for p in range(self.P + 1):
            column = []
            for q in range(self.Q):
                blocks = [sheaf.d(q).matrix] * G.order ** p
                mat = block_diag(blocks) if blocks else zeros(0, 0)
                column.append(GroupHom.block(groups[p][q], groups[p][q + 1], mat))
            dv.append(column)
        self.double = DoubleComplex(groups, dh, dv, check=check)
        logger.debug("low-degree double complex %dx%d over order %d", self.P, self.Q, G.order)

    @cached_property
    def total(self) -> TotalComplex:
        return TotalComplex(self.double)

    def total_cohomology(self, n: int) -> FgAbelianGroup:
        if n > self.max_total_degree:
            raise ValueError(f"Total degree {n} is above the configured maximum "
                             f"{self.max_total_degree}")
        return self.total.cohomology(n).group

    def e1_term(self, p: int, q: int) -> FgAbelianGroup:
        """H^p(G, C^q(X, A))."""
        return group_cohomology(self.sheaf.group, self.sheaf.cochain_module(q), p).group

    def e2_term(self, p: int, q: int) -> FgAbelianGroup:
        """H^p(G, H^q(X, A))."""
        return group_cohomology(self.sheaf.group, self.sheaf.cohomology_module(q), p).group

    # -- moving between the double complex and cochains -----------------------

    def element(self, p: int, q: int, c: GroupCochain) -> GroupElement:
        return self.double.K(p, q).element(c.vector.coords)

    def cochain(self, p: int, q: int, x: GroupElement) -> GroupCochain:
        module = self.sheaf.cochain_module(q)
        return GroupCochain(module, p, cochain_group(module, p).element(x.coords))

    def column_zero(self, z: SiteCochain) -> GroupElement:
        """A site q-cochain as an element of K^{0,q}."""
        return self.double.K(0, z.degree).element(z.vector.coords)
