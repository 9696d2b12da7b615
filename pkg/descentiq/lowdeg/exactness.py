"""Exactness of the low-degree sequence, node by node.

At each node the image of the incoming theta map is compared with the kernel
of the outgoing one by membership tests on generators. A failure carries a
certificate: an image element that the next map does not kill, or a kernel
element that is not hit. A map that could not be evaluated because local
vanishing fails makes both adjacent nodes inexact.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

from descentiq.algebra.abelian import FgAbelianGroup, GroupElement, GroupHom
from descentiq.descent.gerbes import (
    connecting_class,
    connecting_obstruction_map,
    find_gerbe_lift,
    gerbe_obstruction,
)
from descentiq.groupcoh.bar import (
    GroupCochain,
    bar_coboundary_witness,
    cochain_class,
    group_cohomology,
)
from descentiq.groupcoh.finite import enumerate_homomorphisms
from descentiq.lowdeg.theta import ThetaMap, ThetaMaps, theta6
from descentiq.models import (
    ExactnessReport,
    LocalVanishingReport,
    NodeVerdict,
    PropertyCheckReport,
    ThetaSummary,
)
from descentiq.sites.constructions import invariants_sheaf, stalkwise_local_vanishing
from descentiq.sites.sheaves import EquivariantSheaf, SiteCochain

logger = logging.getLogger(__name__)


def _coords(x: GroupElement) -> list[int]:
    return x.invariant_coordinates()


def _undefined(theta: ThetaMap) -> str:
    return f"{theta.name} undefined: {theta.failure}"


def subgroup_verdict(name: str, incoming: GroupHom, outgoing: GroupHom) -> NodeVerdict:
    """Compare im(incoming) with ker(outgoing) inside their common group."""
    K, kincl = outgoing.kernel
    image = incoming.image_group()
    composite = outgoing @ incoming
    certificate = ""
    exact = True
    if not composite.is_zero():
        exact = False
        for gen in incoming.source.generators():
            if not composite(gen).is_zero():
                x = incoming(gen)
                certificate = (f"image element {_coords(x)} maps to "
                               f"{_coords(outgoing(x))}, not 0")
                break
    else:
        for gen in K.generators():
            x = kincl(gen)
            if incoming.solve(x) is None:
                exact = False
                certificate = f"kernel element {_coords(x)} is not in the image"
                break
    return NodeVerdict(name=name, image=str(image), kernel=str(K), exact=exact,
                       certificate=certificate)


def node_verdict(name: str, group: FgAbelianGroup, incoming: Optional[ThetaMap],
                 outgoing: ThetaMap) -> NodeVerdict:
    if incoming is not None and not incoming.defined:
        kernel = str(outgoing.hom.kernel[0]) if outgoing.defined else "undefined"
        return NodeVerdict(name=name, image="undefined", kernel=kernel, exact=False,
                           certificate=_undefined(incoming))
    inc = incoming.hom if incoming is not None else GroupHom.zero(FgAbelianGroup.trivial(), group)
    if not outgoing.defined:
        return NodeVerdict(name=name, image=str(inc.image_group()), kernel="undefined",
                           exact=False, certificate=_undefined(outgoing))
    return subgroup_verdict(name, inc, outgoing.hom)


# ---------------------------------------------------------------------------
# The gerbe node
# ---------------------------------------------------------------------------


@dataclass
class GerbeNode:
    """Stable degree-2 classes whose lifts have connecting data and vanishing kappa."""

    good: FgAbelianGroup
    good_inclusion: GroupHom
    induced: GroupHom


def gerbe_node(A: EquivariantSheaf) -> GerbeNode:
    G = A.group
    _, incl = invariants_sheaf(A)
    H2 = A.cohomology(2)
    stable, stable_incl = A.cohomology_module(2).invariants

    def cocycle(cls: GroupElement) -> SiteCochain:
        return SiteCochain(A, 2, H2.rep_of(stable_incl(cls)))

    d2_target = group_cohomology(G, A.cohomology_module(1), 2).group
    if d2_target.is_trivial():
        d2 = GroupHom.zero(stable, d2_target)
    else:
        images = [connecting_class(cocycle(gen), A) for gen in stable.generators()]
        d2 = GroupHom.from_images(stable, d2_target, images)
    K1, k1_incl = d2.kernel

    theta6_map = connecting_obstruction_map(A)
    coker, proj = theta6_map.cokernel
    if coker.is_trivial():
        d3 = GroupHom.zero(K1, coker)
    else:
        images = []
        for gen in K1.generators():
            lift = find_gerbe_lift(cocycle(k1_incl(gen)), A)
            images.append(proj(gerbe_obstruction(lift).cls))
        d3 = GroupHom.from_images(K1, coker, images)
    good, good_incl = d3.kernel
    return GerbeNode(good, stable_incl @ k1_incl @ good_incl, incl.induced_map(2))


def gerbe_verdict(A: EquivariantSheaf) -> NodeVerdict:
    node = gerbe_node(A)
    exact = True
    certificate = ""
    for gen in node.induced.source.generators():
        x = node.induced(gen)
        if node.good_inclusion.solve(x) is None:
            exact = False
            certificate = f"induced class {_coords(x)} has no obstruction-free lift"
            break
    if exact:
        for gen in node.good.generators():
            x = node.good_inclusion(gen)
            if node.induced.solve(x) is None:
                exact = False
                certificate = (f"class {_coords(x)} lifts with vanishing obstruction "
                               f"but is not induced from the invariants")
                break
    return NodeVerdict(name="H^2(X, A) gerbes", image=str(node.induced.image_group()),
                       kernel=str(node.good), exact=exact, certificate=certificate)


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


def local_vanishing_report(A: EquivariantSheaf, j: int) -> LocalVanishingReport:
    lv = stalkwise_local_vanishing(A, j)
    return LocalVanishingReport(degree=j, holds=lv.holds,
                                groups={x: str(g) for x, g in lv.groups.items()},
                                failing=lv.failing)


def _summary(theta: ThetaMap) -> ThetaSummary:
    matrix = [[int(v) for v in row] for row in theta.hom.matrix] if theta.defined else []
    return ThetaSummary(name=theta.name, source=str(theta.source.group),
                        target=str(theta.target.group), defined=theta.defined,
                        matrix=matrix, failure=str(theta.failure or ""))


def exactness_report(A: EquivariantSheaf, name: str = "",
                     include_gerbe: bool = True) -> ExactnessReport:
    maps = ThetaMaps(A)
    thetas = maps.all()
    nodes = []
    for i, node in enumerate(maps.nodes[:6]):
        incoming = thetas[i - 1] if i > 0 else None
        verdict = node_verdict(node.name, node.group, incoming, thetas[i])
        logger.info("node %s exact=%s", node.name, verdict.exact)
        nodes.append(verdict)
    report = ExactnessReport(
        model=name,
        nodes=nodes,
        maps=[_summary(t) for t in thetas],
        local_vanishing=[local_vanishing_report(A, j) for j in (1, 2, 3)],
    )
    if include_gerbe:
        report.gerbe_node = gerbe_verdict(A)
        logger.info("gerbe node exact=%s", report.gerbe_node.exact)
    return report


# ---------------------------------------------------------------------------
# Homomorphisms G -> H^1(X, A^G)
# ---------------------------------------------------------------------------


def homomorphisms_to_invariant_classes(A: EquivariantSheaf) -> list[dict[int, GroupElement]]:
    """All homomorphisms G -> H^1(X, A^G); they land in the torsion part."""
    AG, _ = invariants_sheaf(A)
    T = AG.cohomology(1).group
    candidates = list(T.torsion_elements())
    return enumerate_homomorphisms(A.group, candidates, lambda a, b: a + b, T.zero())


def induced_cocycle(A: EquivariantSheaf, phi: dict[int, GroupElement]) -> GroupCochain:
    """g -> i_* phi(g) as a 1-cocycle of G valued in H^1(X, A)."""
    _, incl = invariants_sheaf(A)
    induced = incl.induced_map(1)
    return GroupCochain.from_function(A.cohomology_module(1), 1,
                                      lambda t: induced(phi[t[0]]))


def composite_vanishing_check(A: EquivariantSheaf) -> PropertyCheckReport:
    """theta6 kills every cocycle induced from a homomorphism G -> H^1(X, A^G)."""
    G = A.group
    homs = homomorphisms_to_invariant_classes(A)
    failures = []
    for phi in homs:
        kappa = theta6(induced_cocycle(A, phi), A)
        if not kappa.is_zero():
            table = {G.names[g]: _coords(v) for g, v in phi.items()}
            failures.append(f"phi={table} gives theta6 class {kappa.coordinates}")
    return PropertyCheckReport(name="theta6 on homomorphisms G -> H^1(X, A^G)",
                               trials=len(homs), passed=not failures, failures=failures)


@dataclass(frozen=True)
class LineClass:
    """L with i_* phi(g) = rho_g L - L, or the class blocking it."""

    line: Optional[GroupElement]
    obstruction: GroupElement


def line_class_for_homomorphism(A: EquivariantSheaf, phi: dict[int, GroupElement]) -> LineClass:
    y = induced_cocycle(A, phi)
    cls = cochain_class(y)
    w = bar_coboundary_witness(y)
    if w is None:
        return LineClass(None, cls)
    return LineClass(w[()], cls)
