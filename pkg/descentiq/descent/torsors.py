"""G-lifts of torsors and the obstruction chi in H^2(G, A(X)).

A torsor is a site 1-cocycle t. A lift of the G-action is a family of
0-cochains b_g with d b_g = rho_g(t) - t. The obstruction

    chi(g, h) = b_g + rho_g(b_h) - b_{gh}

is the bar coboundary of g -> b_g. Each value is d-closed, hence a global
section of A, and chi is a 2-cocycle of G valued in A(X). Changing the b_g by
global sections changes chi by a bar coboundary.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

from descentiq.descent.classes import (
    InducedCheck,
    ObstructionClass,
    descend_cochain,
    is_induced,
    local_class,
    obstruction_class,
    solve_locally,
)
from descentiq.errors import (
    CorruptedLift,
    LocalVanishingFailure,
    ModelError,
    NotStable,
    ObstructionNonzero,
)
from descentiq.groupcoh.bar import GroupCochain, bar_coboundary_witness
from descentiq.sites.constructions import invariants_sheaf
from descentiq.sites.sheaves import EquivariantSheaf, SheafMorphism, SiteCochain, twist

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TorsorLift:
    torsor: SiteCochain
    b: tuple[SiteCochain, ...]

    @property
    def sheaf(self) -> EquivariantSheaf:
        return self.torsor.sheaf

    def check(self) -> None:
        """Raise CorruptedLift unless d b_g = rho_g(t) - t for every g."""
        G = self.sheaf.group
        if len(self.b) != G.order:
            raise CorruptedLift(f"Lift has {len(self.b)} entries for a group of order {G.order}")
        for g, bg in enumerate(self.b):
            if bg.degree != 0 or bg.coboundary() != twist(g, self.torsor) - self.torsor:
                raise CorruptedLift(f"d b_{G.names[g]} != rho_{G.names[g]}(t) - t")

    def perturb(self, sections: Sequence[SiteCochain]) -> TorsorLift:
        """b_g + z_g for d-closed 0-cochains z_g; the obstruction class is unchanged."""
        for z in sections:
            if not z.is_cocycle():
                raise ModelError("Perturbation must be by global sections")
        return TorsorLift(self.torsor, tuple(b + z for b, z in zip(self.b, sections)))

    def as_table(self) -> dict[str, dict[str, list[int]]]:
        names = self.sheaf.group.names
        return {names[g]: bg.as_table() for g, bg in enumerate(self.b)}


def find_torsor_lift(t: SiteCochain, A: Optional[EquivariantSheaf] = None) -> TorsorLift:
    """Solve d b_g = rho_g(t) - t for every g, or raise NotStable."""
    A = A or t.sheaf
    if t.sheaf is not A:
        raise ModelError("Torsor cocycle lives over a different sheaf")
    if t.degree != 1:
        raise ModelError(f"A torsor is a 1-cocycle, got degree {t.degree}")
    t.require_cocycle()
    G = A.group
    if G.order == 1:
        return TorsorLift(t, (SiteCochain.zero(A, 0),))
    b = []
    for g in G.elements():
        moved = twist(g, t) - t
        w = A.d(0).solve(moved.vector)
        if w is None:
            raise NotStable(g, A.cohomology(1).class_of(moved.vector).invariant_coordinates())
        b.append(SiteCochain(A, 0, w))
    logger.debug("torsor lift found over group of order %d", G.order)
    return TorsorLift(t, tuple(b))


def chi_cochain(L: TorsorLift) -> GroupCochain:
    """chi as a bar 2-cochain valued in A(X)."""
    A = L.sheaf
    G = A.group

    def value(gh: tuple[int, ...]) -> object:
        g, h = gh
        z = L.b[g] + twist(g, L.b[h]) - L.b[G.mul(g, h)]
        if not z.is_cocycle():
            raise CorruptedLift(f"chi({G.names[g]}, {G.names[h]}) is not a global section")
        return A.global_section(z)

    return GroupCochain.from_function(A.global_sections_module, 2, value)


def torsor_obstruction(L: TorsorLift) -> ObstructionClass:
    """The class of chi in H^2(G, A(X))."""
    chi = chi_cochain(L)
    obs = obstruction_class(chi)
    logger.debug("torsor obstruction class %s in %s", obs.coordinates, obs.group)
    return obs


def fixed_point_torsor(L: TorsorLift) -> SiteCochain:
    """An A^G-valued 1-cocycle t_bar with i(t_bar) cohomologous to t.

    The b_g are first adjusted by global sections so that chi vanishes on the
    nose; then at each point x a solution of rho_g(a_x) - a_x = -b_g(x) is
    chosen and t + d a is G-fixed valuewise. Points where H^1(G, F(x)) blocks
    the solve are reported together.
    """
    A = L.sheaf
    obs = torsor_obstruction(L)
    if not obs.is_zero():
        raise ObstructionNonzero(2, obs.coordinates)
    z = bar_coboundary_witness(obs.cochain)
    b = [bg - A.section_cochain(z[(g,)]) for g, bg in enumerate(L.b)]
    gauge: dict[tuple[str, ...], object] = {}
    failures: dict[str, list[int]] = {}
    for x in A.site.points:
        module = A.stalk_module(x)
        w, c = solve_locally(module, 1, lambda t, x=x: -b[t[0]][(x,)])
        if w is None:
            failures[x] = local_class(c)
        else:
            gauge[(x,)] = w[()]
    if failures:
        logger.info("fixed points of the torsor lift fail at %s", sorted(failures))
        raise LocalVanishingFailure(1, failures)
    a = SiteCochain.from_values(A, 0, gauge)
    _, incl = invariants_sheaf(A)
    return descend_cochain(L.torsor + a.coboundary(), incl)


def is_induced_torsor(t: SiteCochain, A: Optional[EquivariantSheaf] = None) -> InducedCheck:
    if A is not None and t.sheaf is not A:
        raise ModelError("Torsor cocycle lives over a different sheaf")
    return is_induced(t, 1)


def canonical_lift(tbar: SiteCochain, A: EquivariantSheaf) -> TorsorLift:
    """For t = i(t_bar) the zero lift works and chi vanishes identically."""
    AG, incl = invariants_sheaf(A)
    if tbar.sheaf is not AG:
        raise ModelError("Expected a cocycle over the invariants sheaf of A")
    t = incl.apply_cochain(tbar)
    return TorsorLift(t, tuple(SiteCochain.zero(A, 0) for _ in A.group.elements()))


def transport_torsor_lift(L: TorsorLift, f: SheafMorphism) -> TorsorLift:
    """Push t and every b_g along an equivariant sheaf morphism."""
    if f.source is not L.sheaf:
        raise ModelError("Morphism does not start at the lift's sheaf")
    return TorsorLift(f.apply_cochain(L.torsor), tuple(f.apply_cochain(bg) for bg in L.b))
