"""The six maps of the low-degree exact sequence as explicit cochain chases.

    0 -> H^1(G, A(X)) -> H^1(X, A^G) -> H^1(X, A)^G -> H^2(G, A(X))
      -> ker(H^2(X, A^G) -> H^2(X, A)) -> H^1(G, H^1(X, A)) -> H^3(G, A(X))

Every chase records its witnesses so the output can be re-verified. The maps
that solve group cohomology pointwise (theta1, theta4) fail with
LocalVanishingFailure where the stalk cohomology gets in the way.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Optional

from descentiq.algebra.abelian import FgAbelianGroup, GroupElement, GroupHom
from descentiq.descent.classes import (
    ObstructionClass,
    descend_cochain,
    local_class,
    obstruction_class,
    require_bar_cocycle,
    solve_locally,
)
from descentiq.descent.gerbes import (
    GerbeLift,
    connecting_data,
    connecting_obstruction_map,
    gerbe_obstruction,
)
from descentiq.descent.torsors import find_torsor_lift, torsor_obstruction
from descentiq.errors import LocalVanishingFailure, ModelError, NotInKernel, NotStable
from descentiq.groupcoh.bar import (
    GroupCochain,
    bar_differential,
    cochain_class,
    group_cohomology,
)
from descentiq.lowdeg.double import LowDegreeComplex
from descentiq.sites.constructions import invariants_sheaf
from descentiq.sites.sheaves import EquivariantSheaf, SiteCochain, chain_key, twist

logger = logging.getLogger(__name__)


def _global_cocycle(A: EquivariantSheaf, a: GroupCochain, degree: int) -> None:
    if a.module is not A.global_sections_module or a.degree != degree:
        raise ModelError(f"Expected a {degree}-cochain of G valued in A(X)")
    require_bar_cocycle(a, f"H^{degree}(G, A(X))")


def theta1(a: GroupCochain, A: EquivariantSheaf) -> SiteCochain:
    """H^1(G, A(X)) -> H^1(X, A^G): solve rho_g(s_x) - s_x = -a_g at every x, return d s."""
    _global_cocycle(A, a, 1)
    sections = [A.section_cochain(a[(g,)]) for g in A.group.elements()]
    values = {}
    failures: dict[str, list[int]] = {}
    for x in A.site.points:
        w, c = solve_locally(A.stalk_module(x), 1, lambda t, x=x: -sections[t[0]][(x,)])
        if w is None:
            failures[x] = local_class(c)
        else:
            values[(x,)] = w[()]
    if failures:
        raise LocalVanishingFailure(1, failures)
    s = SiteCochain.from_values(A, 0, values)
    _, incl = invariants_sheaf(A)
    return descend_cochain(s.coboundary(), incl)


def theta2(tbar: SiteCochain, A: EquivariantSheaf) -> SiteCochain:
    """H^1(X, A^G) -> H^1(X, A)^G, the map induced by the inclusion."""
    AG, incl = invariants_sheaf(A)
    if tbar.sheaf is not AG:
        raise ModelError("Expected a cocycle over the invariants sheaf")
    return incl.apply_cochain(tbar)


def theta3(t: SiteCochain) -> ObstructionClass:
    """H^1(X, A)^G -> H^2(G, A(X)) through a torsor lift."""
    return torsor_obstruction(find_torsor_lift(t))


def theta3_double(t: SiteCochain, K: LowDegreeComplex) -> ObstructionClass:
    """The same map as a transgression in the double complex.

    t sits in K^{0,1}; solve dv b = dh t in K^{1,0}; dh b lies in the
    vertically closed part of K^{2,0}, i.e. in C^2(G, A(X)).
    """
    A = K.sheaf
    if t.sheaf is not A:
        raise ModelError("Cocycle lives over a different sheaf")
    t.require_cocycle()
    D = K.double
    moved = D.horizontal(0, 1)(K.column_zero(t))
    b = D.vertical(1, 0).solve(moved)
    if b is None:
        H1 = A.cohomology(1)
        for g in A.group.elements():
            diff = (twist(g, t) - t).vector
            if not H1.is_zero_class(diff):
                raise NotStable(g, H1.class_of(diff).invariant_coordinates())
        raise ModelError("Vertical solve failed on a stable class")  # pragma: no cover
    chi = K.cochain(2, 0, D.horizontal(1, 0)(b))
    values = GroupCochain.from_function(
        A.global_sections_module, 2,
        lambda gh: A.global_section(SiteCochain(A, 0, chi[gh])),
    )
    return obstruction_class(values)


def theta4(alpha: GroupCochain, A: EquivariantSheaf) -> SiteCochain:
    """H^2(G, A(X)) -> ker(H^2(X, A^G) -> H^2(X, A)) by the zig-zag.

    beta_x solves delta beta_x = alpha at x; gamma_{x<y} solves
    delta gamma = beta_y - r(beta_x); the output is d gamma.
    """
    _global_cocycle(A, alpha, 2)
    G = A.group
    order = G.order
    sections = [A.section_cochain(alpha[(g, h)]) for g in G.elements() for h in G.elements()]
    beta: dict[str, GroupCochain] = {}
    failures: dict[str, list[int]] = {}
    for x in A.site.points:
        w, c = solve_locally(A.stalk_module(x), 2,
                             lambda t, x=x: sections[t[0] * order + t[1]][(x,)])
        if w is None:
            failures[x] = local_class(c)
        else:
            beta[x] = w
    if failures:
        raise LocalVanishingFailure(2, failures)
    gamma = {}
    for chain in A.layout(1).chains:
        x, y = chain
        r = A.restriction(x, y)
        w, c = solve_locally(A.stalk_module(y), 1,
                             lambda t, x=x, y=y, r=r: beta[y][t] - r(beta[x][t]))
        if w is None:
            failures[chain_key(chain)] = local_class(c)
        else:
            gamma[chain] = w[()]
    if failures:
        raise LocalVanishingFailure(1, failures)
    g1 = SiteCochain.from_values(A, 1, gamma)
    _, incl = invariants_sheaf(A)
    return descend_cochain(g1.coboundary(), incl)


def theta5(mbar: SiteCochain, A: EquivariantSheaf) -> GroupCochain:
    """K2 -> H^1(G, H^1(X, A)): y_g = [rho_g(n) - n] where d n = i(m_bar)."""
    AG, incl = invariants_sheaf(A)
    if mbar.sheaf is not AG:
        raise ModelError("Expected a cocycle over the invariants sheaf")
    mbar.require_cocycle()
    m = incl.apply_cochain(mbar)
    n = A.d(1).solve(m.vector)
    if n is None:
        raise NotInKernel(m.cohomology_class().invariant_coordinates())
    n = SiteCochain(A, 1, n)
    H1 = A.cohomology(1)
    return GroupCochain.from_function(
        A.cohomology_module(1), 1, lambda t: H1.class_of((twist(t[0], n) - n).vector)
    )


def theta6(y: GroupCochain, A: EquivariantSheaf) -> ObstructionClass:
    """H^1(G, H^1(X, A)) -> H^3(G, A(X)) by the explicit formula on u."""
    _, u = connecting_data(A, y)
    n = A.group.order
    u_cochain = GroupCochain.from_function(A.cochain_module(0), 2,
                                           lambda t: u[t[0] * n + t[1]].vector)
    kappa = bar_differential(u_cochain)
    values = GroupCochain.from_function(
        A.global_sections_module, 3,
        lambda t: A.global_section(SiteCochain(A, 0, kappa[t])),
    )
    return obstruction_class(values)


def theta6_gerbe(y: GroupCochain, A: EquivariantSheaf) -> ObstructionClass:
    """theta6 as the obstruction of the trivial gerbe with e_g = n_g, f = u."""
    n, u = connecting_data(A, y)
    return gerbe_obstruction(GerbeLift(SiteCochain.zero(A, 2), n, u))


# ---------------------------------------------------------------------------
# The maps as homomorphisms between the node groups
# ---------------------------------------------------------------------------


@dataclass
class Node:
    """A node group, with an inclusion into an ambient group when it is a subgroup."""

    name: str
    group: FgAbelianGroup
    inclusion: Optional[GroupHom] = None

    def ambient(self, x: GroupElement) -> GroupElement:
        return self.inclusion(x) if self.inclusion is not None else x

    def restrict(self, x: GroupElement) -> Optional[GroupElement]:
        return self.inclusion.solve(x) if self.inclusion is not None else x


@dataclass
class ThetaMap:
    name: str
    source: Node
    target: Node
    hom: Optional[GroupHom]
    failure: Optional[LocalVanishingFailure] = None

    @property
    def defined(self) -> bool:
        return self.hom is not None


class ThetaMaps:
    """Nodes and maps of the sequence for one sheaf; maps are built lazily."""

    def __init__(self, sheaf: EquivariantSheaf):
        self.sheaf = sheaf
        self._maps: dict[int, ThetaMap] = {}

    @cached_property
    def nodes(self) -> list[Node]:
        A = self.sheaf
        G = A.group
        AG, incl = invariants_sheaf(A)
        stable, stable_incl = A.cohomology_module(1).invariants
        K2, K2_incl = incl.induced_map(2).kernel
        return [
            Node("H^1(G, A(X))", group_cohomology(G, A.global_sections_module, 1).group),
            Node("H^1(X, A^G)", AG.cohomology(1).group),
            Node("H^1(X, A)^G", stable, stable_incl),
            Node("H^2(G, A(X))", group_cohomology(G, A.global_sections_module, 2).group),
            Node("ker(H^2(X, A^G) -> H^2(X, A))", K2, K2_incl),
            Node("H^1(G, H^1(X, A))", group_cohomology(G, A.cohomology_module(1), 1).group),
            Node("H^3(G, A(X))", group_cohomology(G, A.global_sections_module, 3).group),
        ]

    def _build(self, k: int, evaluate: Callable[[GroupElement], GroupElement]) -> ThetaMap:
        source, target = self.nodes[k - 1], self.nodes[k]
        name = f"theta{k}"
        if target.group.is_trivial():
            return ThetaMap(name, source, target, GroupHom.zero(source.group, target.group))
        images = []
        try:
            for gen in source.group.generators():
                image = target.restrict(evaluate(source.ambient(gen)))
                if image is None:  # pragma: no cover - each chase lands in its node
                    raise ModelError(f"{name} left its target group")
                images.append(image)
        except LocalVanishingFailure as exc:
            logger.info("%s undefined: %s", name, exc)
            return ThetaMap(name, source, target, None, exc)
        return ThetaMap(name, source, target,
                        GroupHom.from_images(source.group, target.group, images))

    def theta(self, k: int) -> ThetaMap:
        if k not in self._maps:
            self._maps[k] = self._build(k, self._evaluator(k))
        return self._maps[k]

    def all(self) -> list[ThetaMap]:
        return [self.theta(k) for k in range(1, 7)]

    def _evaluator(self, k: int) -> Callable[[GroupElement], GroupElement]:
        A = self.sheaf
        G = A.group
        AG, _ = invariants_sheaf(A)
        M = A.global_sections_module

        def ev1(cls: GroupElement) -> GroupElement:
            a = GroupCochain(M, 1, group_cohomology(G, M, 1).rep_of(cls))
            return theta1(a, A).cohomology_class()

        def ev2(cls: GroupElement) -> GroupElement:
            tbar = SiteCochain(AG, 1, AG.cohomology(1).rep_of(cls))
            return theta2(tbar, A).cohomology_class()

        def ev3(cls: GroupElement) -> GroupElement:
            t = SiteCochain(A, 1, A.cohomology(1).rep_of(cls))
            return theta3(t).cls

        def ev4(cls: GroupElement) -> GroupElement:
            alpha = GroupCochain(M, 2, group_cohomology(G, M, 2).rep_of(cls))
            return theta4(alpha, A).cohomology_class()

        def ev5(cls: GroupElement) -> GroupElement:
            mbar = SiteCochain(AG, 2, AG.cohomology(2).rep_of(cls))
            return cochain_class(theta5(mbar, A))

        def ev6(cls: GroupElement) -> GroupElement:
            Y = A.cohomology_module(1)
            y = GroupCochain(Y, 1, group_cohomology(G, Y, 1).rep_of(cls))
            return theta6(y, A).cls

        return {1: ev1, 2: ev2, 3: ev3, 4: ev4, 5: ev5, 6: ev6}[k]


def theta6_hom(A: EquivariantSheaf) -> GroupHom:
    """theta6 on generators through the gerbe route."""
    return connecting_obstruction_map(A)
