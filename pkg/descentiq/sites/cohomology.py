"""Sheaf cohomology on poset sites and the oracles used to check it.

``site_complex`` is the normalized strict-chain complex held by the sheaf.
Two independent constructions back it up: the unnormalized complex over weak
chains x_0 <= ... <= x_q, and plain simplicial cohomology of the order complex
(cliques of the comparability graph) for constant coefficients.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable

import networkx as nx

from descentiq.algebra.abelian import FgAbelianGroup, GroupHom
from descentiq.algebra.complexes import CochainComplex
from descentiq.algebra.matrices import zero_vector, zeros
from descentiq.errors import ModelError
from descentiq.groupcoh.modules import GroupModule
from descentiq.sites.poset import Chain, PosetSite
from descentiq.sites.sheaves import EquivariantSheaf

logger = logging.getLogger(__name__)


def site_complex(F: EquivariantSheaf, top: int | None = None) -> CochainComplex:
    return F.site_complex(top)


def sheaf_cohomology(F: EquivariantSheaf, q: int) -> FgAbelianGroup:
    return F.cohomology(q).group


# ---------------------------------------------------------------------------
# Unnormalized complex
# ---------------------------------------------------------------------------


def weak_chain_complex(F: EquivariantSheaf, top: int) -> CochainComplex:
    """Same differential over all weak chains; degenerate chains included."""
    site = F.site
    layouts = []
    for q in range(top + 2):
        chains = site.weak_chains(q)
        offsets: dict[Chain, int] = {}
        at = 0
        for c in chains:
            offsets[c] = at
            at += F.stalks[c[-1]].ngens
        layouts.append((chains, offsets,
                        FgAbelianGroup.direct_sum([F.stalks[c[-1]] for c in chains])))
    diffs = []
    for q in range(top + 1):
        src_chains, src_off, src = layouts[q]
        tgt_chains, tgt_off, tgt = layouts[q + 1]
        mat = zeros(tgt.ngens, src.ngens)
        for c in tgt_chains:
            w = F.stalks[c[-1]].ngens
            r0 = tgt_off[c]
            for i in range(q + 1):
                c0 = src_off[c[:i] + c[i + 1:]]
                for k in range(w):
                    mat[r0 + k, c0 + k] += (-1) ** i
            last = F.restriction(c[-2], c[-1]).matrix
            c0 = src_off[c[:-1]]
            mat[r0:r0 + w, c0:c0 + last.shape[1]] += last * (-1) ** (q + 1)
        diffs.append(GroupHom.block(src, tgt, mat))
    logger.debug("weak chain complex up to degree %d: %s", top + 1,
                 [lay[2].ngens for lay in layouts])
    return CochainComplex([lay[2] for lay in layouts], diffs)


def weak_chain_cohomology(F: EquivariantSheaf, q: int) -> FgAbelianGroup:
    return weak_chain_complex(F, q).cohomology(q).group


# ---------------------------------------------------------------------------
# Order complex
# ---------------------------------------------------------------------------


def order_complex_simplices(site: PosetSite) -> dict[int, list[tuple[str, ...]]]:
    """Simplices of the order complex, each listed in a fixed linear extension."""
    rank = {p: i for i, p in enumerate(nx.topological_sort(site.closure))}
    comparability = site.closure.to_undirected()
    comparability.add_nodes_from(site.points)
    out: dict[int, list[tuple[str, ...]]] = {}
    for clique in nx.enumerate_all_cliques(comparability):
        simplex = tuple(sorted(clique, key=rank.__getitem__))
        out.setdefault(len(simplex) - 1, []).append(simplex)
    for dim in out:
        out[dim].sort()
    return out


def order_complex_cohomology(site: PosetSite, coefficients: FgAbelianGroup,
                             q: int) -> FgAbelianGroup:
    """Simplicial H^q of the order complex with constant coefficients."""
    simplices = order_complex_simplices(site)
    m = coefficients.ngens
    groups = []
    index: list[dict[tuple[str, ...], int]] = []
    for dim in range(q + 2):
        cells = simplices.get(dim, [])
        index.append({s: i for i, s in enumerate(cells)})
        groups.append(FgAbelianGroup.direct_sum([coefficients] * len(cells)))
    diffs = []
    for dim in range(q + 1):
        mat = zeros(groups[dim + 1].ngens, groups[dim].ngens)
        for s, row in index[dim + 1].items():
            for i in range(len(s)):
                col = index[dim][s[:i] + s[i + 1:]]
                for k in range(m):
                    mat[row * m + k, col * m + k] += (-1) ** i
        diffs.append(GroupHom.block(groups[dim], groups[dim + 1], mat))
    return CochainComplex(groups, diffs).cohomology(q).group


# ---------------------------------------------------------------------------
# Sections over opens
# ---------------------------------------------------------------------------


@dataclass
class Sections:
    """F(U) as the limit over U, with projections to every F(x), x in U."""

    points: list[str]
    group: FgAbelianGroup
    inclusion: GroupHom
    offsets: dict[str, int]
    projections: dict[str, GroupHom]
    module: GroupModule


def sections(F: EquivariantSheaf, U: Iterable[str]) -> Sections:
    site = F.site
    subset = set(U)
    unknown = sorted(subset - set(site.points))
    if unknown:
        raise ModelError(f"Unknown points {unknown}")
    bad = site.open_violation(subset)
    if bad is not None:
        raise ModelError(f"{sorted(subset)} is not open: {bad[0]} is in it but {bad[1]} is not")
    points = [p for p in site.points if p in subset]
    offsets: dict[str, int] = {}
    at = 0
    for p in points:
        offsets[p] = at
        at += F.stalks[p].ngens
    product = FgAbelianGroup.direct_sum([F.stalks[p] for p in points])
    pairs = [(x, y) for (x, y) in site.covering_pairs() if x in subset and y in subset]
    target = FgAbelianGroup.direct_sum([F.stalks[y] for _, y in pairs])
    mat = zeros(target.ngens, product.ngens)
    row = 0
    for x, y in pairs:
        r = F.restriction(x, y).matrix
        w = F.stalks[y].ngens
        mat[row:row + w, offsets[y]:offsets[y] + w] += GroupHom.identity(F.stalks[y]).matrix
        mat[row:row + w, offsets[x]:offsets[x] + r.shape[1]] -= r
        row += w
    group, incl = GroupHom.block(product, target, mat).kernel
    projections = {
        p: GroupHom.block(group, F.stalks[p],
                          incl.matrix[offsets[p]:offsets[p] + F.stalks[p].ngens, :])
        for p in points
    }
    action = []
    for g in F.group.elements():
        images = []
        for gen in group.generators():
            moved = zero_vector(product.ngens)
            for p in points:
                block = slice(offsets[p], offsets[p] + F.stalks[p].ngens)
                moved[block] = F.action[p][g](projections[p](gen)).coords
            pre = incl.solve(moved)
            if pre is None:  # pragma: no cover - actions commute with restriction
                raise ModelError("Group action does not preserve sections")
            images.append(pre)
        action.append(GroupHom.from_images(group, group, images))
    module = GroupModule(F.group, group, action, check=False)
    return Sections(points, group, incl, offsets, projections, module)
