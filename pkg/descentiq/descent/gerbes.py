"""G-lifts of gerbes and the obstruction kappa in H^3(G, A(X)).

A gerbe is a site 2-cocycle m. A lift consists of 1-cochains e_g with
d e_g = rho_g(m) - m and connecting 0-cochains f_{g,h} with

    d f_{g,h} = rho_g(e_h) - e_{gh} + e_g.

The obstruction is

    kappa(g1, g2, g3) = f_{g1, g2 g3} + rho_{g1}(f_{g2, g3}) - f_{g1 g2, g3} - f_{g1, g2}

whose values are global sections. Changing the e_g by 1-cocycles y_g changes
kappa by the connecting class of y, so only kappa modulo those classes is an
invariant of the gerbe.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

from descentiq.algebra.abelian import GroupElement, GroupHom
from descentiq.descent.classes import (
    InducedCheck,
    ObstructionClass,
    descend_cochain,
    is_induced,
    local_class,
    obstruction_class,
    require_bar_cocycle,
    solve_locally,
)
from descentiq.errors import (
    CorruptedLift,
    LocalVanishingFailure,
    ModelError,
    NoConnecting,
    NotStable,
    ObstructionNonzero,
)
from descentiq.groupcoh.bar import (
    GroupCochain,
    bar_coboundary_witness,
    cochain_class,
    group_cohomology,
)
from descentiq.sites.constructions import invariants_sheaf
from descentiq.sites.sheaves import (
    EquivariantSheaf,
    SheafMorphism,
    SiteCochain,
    chain_key,
    twist,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GerbeLift:
    """``f`` is indexed by g * |G| + h."""

    gerbe: SiteCochain
    e: tuple[SiteCochain, ...]
    f: tuple[SiteCochain, ...]

    @property
    def sheaf(self) -> EquivariantSheaf:
        return self.gerbe.sheaf

    def connecting(self, g: int, h: int) -> SiteCochain:
        return self.f[g * self.sheaf.group.order + h]

    def defect(self, g: int, h: int) -> SiteCochain:
        """rho_g(e_h) - e_{gh} + e_g, the 1-cocycle that f_{g,h} must bound."""
        G = self.sheaf.group
        return twist(g, self.e[h]) - self.e[G.mul(g, h)] + self.e[g]

    def check(self) -> None:
        G = self.sheaf.group
        m = self.gerbe
        if len(self.e) != G.order or len(self.f) != G.order ** 2:
            raise CorruptedLift("Lift data does not match the group order")
        for g in G.elements():
            if self.e[g].degree != 1 or self.e[g].coboundary() != twist(g, m) - m:
                raise CorruptedLift(f"d e_{G.names[g]} != rho_{G.names[g]}(m) - m")
        for g in G.elements():
            for h in G.elements():
                if self.connecting(g, h).coboundary() != self.defect(g, h):
                    raise CorruptedLift(
                        f"d f_({G.names[g]},{G.names[h]}) does not bound the defect of e"
                    )

    def perturb(self, sections: Sequence[SiteCochain]) -> GerbeLift:
        """f_{g,h} + z_{g,h} for global sections z; kappa moves by a bar coboundary."""
        for z in sections:
            if not z.is_cocycle():
                raise ModelError("Perturbation must be by global sections")
        return GerbeLift(self.gerbe, self.e, tuple(f + z for f, z in zip(self.f, sections)))

    def regauge(self, v: Sequence[SiteCochain]) -> GerbeLift:
        """e_g + d v_g, with f_{g,h} + rho_g(v_h) - v_{gh} + v_g; kappa is unchanged."""
        G = self.sheaf.group
        if len(v) != G.order or any(vg.degree != 0 for vg in v):
            raise ModelError("Regauging needs one 0-cochain per group element")
        e = tuple(eg + vg.coboundary() for eg, vg in zip(self.e, v))
        f = tuple(self.connecting(g, h) + twist(g, v[h]) - v[G.mul(g, h)] + v[g]
                  for g in G.elements() for h in G.elements())
        return GerbeLift(self.gerbe, e, f)

    def as_table(self) -> dict[str, dict]:
        names = self.sheaf.group.names
        n = self.sheaf.group.order
        return {
            "e": {names[g]: eg.as_table() for g, eg in enumerate(self.e)},
            "f": {f"{names[k // n]},{names[k % n]}": fk.as_table()
                  for k, fk in enumerate(self.f)},
        }


def _pair_classes(A: EquivariantSheaf, defects: Sequence[SiteCochain]) -> GroupCochain:
    """The defects as a bar 2-cochain valued in H^1(X, A)."""
    H1 = A.cohomology(1)
    n = A.group.order
    return GroupCochain.from_function(
        A.cohomology_module(1), 2, lambda t: H1.class_of(defects[t[0] * n + t[1]].vector)
    )


def _first_lift(m: SiteCochain, A: Optional[EquivariantSheaf]) -> GerbeLift:
    """Solve d e_g = rho_g(m) - m; f is left empty."""
    A = A or m.sheaf
    if m.sheaf is not A:
        raise ModelError("Gerbe cocycle lives over a different sheaf")
    if m.degree != 2:
        raise ModelError(f"A gerbe is a 2-cocycle, got degree {m.degree}")
    m.require_cocycle()
    e = []
    for g in A.group.elements():
        moved = twist(g, m) - m
        w = A.d(1).solve(moved.vector)
        if w is None:
            raise NotStable(g, A.cohomology(2).class_of(moved.vector).invariant_coordinates())
        e.append(SiteCochain(A, 1, w))
    return GerbeLift(m, tuple(e), ())


def connecting_class(m: SiteCochain, A: Optional[EquivariantSheaf] = None) -> GroupElement:
    """Class in H^2(G, H^1(X, A)) whose vanishing allows connecting data."""
    lift = _first_lift(m, A)
    G = lift.sheaf.group
    defects = [lift.defect(g, h) for g in G.elements() for h in G.elements()]
    return cochain_class(_pair_classes(lift.sheaf, defects))


def find_gerbe_lift(m: SiteCochain, A: Optional[EquivariantSheaf] = None) -> GerbeLift:
    """Choose e_g and f_{g,h}; the e_g are corrected by 1-cocycles when needed."""
    A = A or m.sheaf
    G = A.group
    if G.order == 1:
        _first_lift(m, A)
        return GerbeLift(m, (SiteCochain.zero(A, 1),), (SiteCochain.zero(A, 0),))
    lift = _first_lift(m, A)
    e = list(lift.e)
    pairs = [(g, h) for g in G.elements() for h in G.elements()]
    defects = [lift.defect(g, h) for g, h in pairs]
    if any(A.d(0).solve(phi.vector) is None for phi in defects):
        classes = _pair_classes(A, defects)
        y = bar_coboundary_witness(classes)
        if y is None:
            raise NoConnecting(
                cochain_class(classes).invariant_coordinates(),
                {t: v.invariant_coordinates() for t, v in classes.items() if not v.is_zero()},
            )
        H1 = A.cohomology(1)
        e = [eg - SiteCochain(A, 1, H1.rep_of(y[(g,)])) for g, eg in enumerate(e)]
        lift = GerbeLift(m, tuple(e), ())
        defects = [lift.defect(g, h) for g, h in pairs]
        logger.debug("gerbe lift: e_g corrected by H^1 classes %s",
                     [y[(g,)].invariant_coordinates() for g in G.elements()])
    f = []
    for phi in defects:
        w = A.d(0).solve(phi.vector)
        if w is None:  # pragma: no cover - the correction kills every defect class
            raise CorruptedLift("Corrected defect is still not a coboundary")
        f.append(SiteCochain(A, 0, w))
    return GerbeLift(m, tuple(e), tuple(f))


def kappa_cochain(A: EquivariantSheaf, f: Sequence[SiteCochain]) -> GroupCochain:
    """The bar coboundary of (g, h) -> f_{g,h} as a 3-cochain valued in A(X)."""
    G = A.group
    n = G.order

    def value(t: tuple[int, ...]) -> GroupElement:
        g1, g2, g3 = t
        z = (f[g1 * n + G.mul(g2, g3)] + twist(g1, f[g2 * n + g3])
             - f[G.mul(g1, g2) * n + g3] - f[g1 * n + g2])
        if not z.is_cocycle():
            raise CorruptedLift(
                f"kappa({G.names[g1]}, {G.names[g2]}, {G.names[g3]}) is not a global section"
            )
        return A.global_section(z)

    return GroupCochain.from_function(A.global_sections_module, 3, value)


def gerbe_obstruction(L: GerbeLift) -> ObstructionClass:
    """The class of kappa in H^3(G, A(X))."""
    obs = obstruction_class(kappa_cochain(L.sheaf, L.f))
    logger.debug("gerbe obstruction class %s in %s", obs.coordinates, obs.group)
    return obs


# ---------------------------------------------------------------------------
# Changing e_g by 1-cocycles
# ---------------------------------------------------------------------------


def connecting_data(A: EquivariantSheaf, y: GroupCochain
                    ) -> tuple[tuple[SiteCochain, ...], tuple[SiteCochain, ...]]:
    """Representatives n_g of y_g and u_{g,h} with d u = rho_g(n_h) - n_{gh} + n_g."""
    if y.module is not A.cohomology_module(1) or y.degree != 1:
        raise ModelError("Expected a 1-cochain of G valued in H^1(X, A)")
    require_bar_cocycle(y, "H^1(G, H^1(X, A))")
    G = A.group
    H1 = A.cohomology(1)
    n = tuple(SiteCochain(A, 1, H1.rep_of(y[(g,)])) for g in G.elements())
    u = []
    for g in G.elements():
        for h in G.elements():
            phi = twist(g, n[h]) - n[G.mul(g, h)] + n[g]
            w = A.d(0).solve(phi.vector)
            if w is None:  # pragma: no cover - y is a cocycle
                raise ModelError(f"Cocycle condition fails at ({G.names[g]}, {G.names[h]})")
            u.append(SiteCochain(A, 0, w))
    return n, tuple(u)


def adjust_gerbe_lift(L: GerbeLift, y: GroupCochain) -> GerbeLift:
    """e_g + n_g and f_{g,h} + u_{g,h} for a 1-cocycle y valued in H^1(X, A)."""
    n, u = connecting_data(L.sheaf, y)
    e = tuple(eg + ng for eg, ng in zip(L.e, n))
    f = tuple(fk + uk for fk, uk in zip(L.f, u))
    return GerbeLift(L.gerbe, e, f)


def connecting_obstruction_map(A: EquivariantSheaf) -> GroupHom:
    """H^1(G, H^1(X, A)) -> H^3(G, A(X)), y -> class of kappa(connecting_data(y))."""
    cached = A.__dict__.get("_connecting_obstruction_map")
    if cached is not None:
        return cached
    module = A.cohomology_module(1)
    source = group_cohomology(A.group, module, 1)
    target = group_cohomology(A.group, A.global_sections_module, 3)
    images = []
    for gen in source.group.generators():
        y = GroupCochain(module, 1, source.rep_of(gen))
        _, u = connecting_data(A, y)
        images.append(target.class_of(kappa_cochain(A, u).vector))
    hom = GroupHom.from_images(source.group, target.group, images)
    A.__dict__["_connecting_obstruction_map"] = hom
    return hom


def kill_gerbe_obstruction(L: GerbeLift) -> GerbeLift:
    """A lift of the same gerbe whose kappa class is 0, or ObstructionNonzero."""
    obs = gerbe_obstruction(L)
    if obs.is_zero():
        return L
    A = L.sheaf
    hom = connecting_obstruction_map(A)
    pre = hom.solve(obs.cls)
    if pre is None:
        _, proj = hom.cokernel
        raise ObstructionNonzero(3, proj(obs.cls).invariant_coordinates())
    module = A.cohomology_module(1)
    source = group_cohomology(A.group, module, 1)
    y = GroupCochain(module, 1, source.rep_of(pre))
    return adjust_gerbe_lift(L, -y)


def gerbe_obstruction_vanishes(L: GerbeLift) -> bool:
    """Whether some lift of the same gerbe has kappa class 0."""
    try:
        kill_gerbe_obstruction(L)
    except ObstructionNonzero:
        return False
    return True


# ---------------------------------------------------------------------------
# Descent to the invariants
# ---------------------------------------------------------------------------


def fixed_point_gerbe(L: GerbeLift) -> SiteCochain:
    """An A^G-valued 2-cocycle m_bar with i(m_bar) cohomologous to m.

    kappa is first made zero on the nose. The connecting data is then a bar
    2-cocycle at every point, solved as f = delta k; the corrected e_g form a
    bar 1-cocycle on every 1-chain, solved as e = delta n, and m - d n is
    G-fixed valuewise.
    """
    A = L.sheaf
    G = A.group
    order = G.order
    L = kill_gerbe_obstruction(L)
    obs = gerbe_obstruction(L)
    w = bar_coboundary_witness(obs.cochain)
    f = [L.f[g * order + h] - A.section_cochain(w[(g, h)])
         for g in G.elements() for h in G.elements()]

    k: dict[str, GroupCochain] = {}
    failures: dict[str, list[int]] = {}
    for x in A.site.points:
        sol, c = solve_locally(A.stalk_module(x), 2,
                               lambda t, x=x: f[t[0] * order + t[1]][(x,)])
        if sol is None:
            failures[x] = local_class(c)
        else:
            k[x] = sol
    if failures:
        logger.info("connecting data of the gerbe lift blocked at %s", sorted(failures))
        raise LocalVanishingFailure(2, failures)
    e = [L.e[g] - SiteCochain.from_values(A, 0, {(x,): k[x][(g,)] for x in k}).coboundary()
         for g in G.elements()]

    gauge = {}
    for chain in A.layout(1).chains:
        sol, c = solve_locally(A.stalk_module(chain[-1]), 1, lambda t, c=chain: e[t[0]][c])
        if sol is None:
            failures[chain_key(chain)] = local_class(c)
        else:
            gauge[chain] = sol[()]
    if failures:
        logger.info("corrected gerbe lift blocked on chains %s", sorted(failures))
        raise LocalVanishingFailure(1, failures)
    n = SiteCochain.from_values(A, 1, gauge)
    _, incl = invariants_sheaf(A)
    return descend_cochain(L.gerbe - n.coboundary(), incl)


def is_induced_gerbe(m: SiteCochain, A: Optional[EquivariantSheaf] = None) -> InducedCheck:
    if A is not None and m.sheaf is not A:
        raise ModelError("Gerbe cocycle lives over a different sheaf")
    return is_induced(m, 2)


def canonical_gerbe_lift(mbar: SiteCochain, A: EquivariantSheaf) -> GerbeLift:
    """For m = i(m_bar): e_g = 0 and f_{g,h} = 0, so kappa vanishes identically."""
    AG, incl = invariants_sheaf(A)
    if mbar.sheaf is not AG:
        raise ModelError("Expected a cocycle over the invariants sheaf of A")
    n = A.group.order
    return GerbeLift(incl.apply_cochain(mbar),
                     tuple(SiteCochain.zero(A, 1) for _ in range(n)),
                     tuple(SiteCochain.zero(A, 0) for _ in range(n * n)))


def transport_gerbe_lift(L: GerbeLift, f: SheafMorphism) -> GerbeLift:
    if f.source is not L.sheaf:
        raise ModelError("Morphism does not start at the lift's sheaf")
    return GerbeLift(f.apply_cochain(L.gerbe),
                     tuple(f.apply_cochain(eg) for eg in L.e),
                     tuple(f.apply_cochain(fk) for fk in L.f))
