"""Sheaves built from other sheaves: pushforward, invariants, E[M], B x_G M.

Also the stalkwise local-vanishing test and the finite hom-set enumeration
used to check the adjunction between B -> B x_G M and E -> E[M].
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterator, Optional

from descentiq.algebra.abelian import FgAbelianGroup, GroupHom, enumerate_homs
from descentiq.algebra.matrices import block_diag, vstack, zero_vector, zeros
from descentiq.errors import ModelError
from descentiq.groupcoh.bar import group_cohomology
from descentiq.groupcoh.finite import FiniteGroup
from descentiq.groupcoh.modules import GroupModule
from descentiq.sites.cohomology import sections
from descentiq.sites.poset import PosetAction, PosetMap
from descentiq.sites.sheaves import EquivariantSheaf, GTorsorCocycle, SheafMorphism

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Pushforward
# ---------------------------------------------------------------------------


def _check_deck_compatible(F: EquivariantSheaf, deck: PosetAction) -> None:
    if F.group.order != 1:
        raise ModelError("Pushforward with a deck action needs a sheaf without its own action")
    for g in deck.group.elements():
        for p in F.site.points:
            if not F.stalks[deck(g, p)].same_presentation(F.stalks[p]):
                raise ModelError(f"Stalks at {p} and {deck(g, p)} differ")
        for x, y in F.site.covering_pairs():
            if not F.restriction(deck(g, x), deck(g, y)).equals(F.restriction(x, y)):
                raise ModelError(f"Deck transformation {deck.group.names[g]} moves "
                                 f"restriction {x}<={y}")


def pushforward(pi: PosetMap, F: EquivariantSheaf,
                deck: Optional[PosetAction] = None) -> EquivariantSheaf:
    """pi_*F with (pi_*F)(x) = F(pi^{-1}(U_x)).

    Without ``deck`` the action of F's own group is pushed forward; with it,
    (g.s)(p) = s(tau_g^{-1} p) on a sheaf without an action of its own.
    """
    if F.site is not pi.source:
        raise ModelError("Sheaf does not live on the source of the map")
    base = pi.target
    if deck is not None:
        if deck.site is not pi.source:
            raise ModelError("Deck action is on a different poset")
        for g in deck.group.elements():
            for p in pi.source.points:
                if pi(deck(g, p)) != pi(p):
                    raise ModelError(
                        f"Deck transformation {deck.group.names[g]} moves {p} off its fiber"
                    )
        _check_deck_compatible(F, deck)
        group = deck.group
    else:
        group = F.group

    local = {x: sections(F, pi.preimage(base.up_set(x))) for x in base.points}
    stalks = {x: s.group for x, s in local.items()}

    restrictions = {}
    for x, y in base.covering_pairs():
        sx, sy = local[x], local[y]
        images = []
        for gen in sx.group.generators():
            vec = zero_vector(sy.inclusion.target.ngens)
            for p in sy.points:
                vec[sy.offsets[p]:sy.offsets[p] + F.stalks[p].ngens] = \
                    sx.projections[p](gen).coords
            pre = sy.inclusion.solve(vec)
            if pre is None:  # pragma: no cover - restriction of a section is a section
                raise ModelError(f"Restriction {x}<={y} leaves the sections")
            images.append(pre)
        restrictions[(x, y)] = GroupHom.from_images(sx.group, sy.group, images)

    action = {}
    for x in base.points:
        sx = local[x]
        if deck is None:
            action[x] = sx.module.action
            continue
        maps = []
        for g in group.elements():
            images = []
            for gen in sx.group.generators():
                vec = zero_vector(sx.inclusion.target.ngens)
                for p in sx.points:
                    src = deck.inverse(g, p)
                    vec[sx.offsets[p]:sx.offsets[p] + F.stalks[p].ngens] = \
                        sx.projections[src](gen).coords
                pre = sx.inclusion.solve(vec)
                if pre is None:  # pragma: no cover - preimages of opens are deck stable
                    raise ModelError(f"Deck action does not preserve sections over {x}")
                images.append(pre)
            maps.append(GroupHom.from_images(sx.group, sx.group, images))
        action[x] = maps
    name = f"pi_*({F.name})" if F.name else "pushforward"
    logger.debug("pushforward stalks: %s", {x: str(g) for x, g in stalks.items()})
    return EquivariantSheaf(base, group, stalks, restrictions, action, name=name)


# ---------------------------------------------------------------------------
# Invariants, internal hom, contracted product
# ---------------------------------------------------------------------------


def invariants_sheaf(A: EquivariantSheaf) -> tuple[EquivariantSheaf, SheafMorphism]:
    """A^G with trivial action and the inclusion i : A^G -> A (cached on A)."""
    cached = A.__dict__.get("_invariants")
    if cached is not None:
        return cached
    fixed = {x: A.stalk_module(x).invariants for x in A.site.points}
    stalks = {x: fx[0] for x, fx in fixed.items()}
    restrictions = {}
    for x, y in A.site.covering_pairs():
        r = A.restriction(x, y)
        incl_x, incl_y = fixed[x][1], fixed[y][1]
        images = []
        for gen in stalks[x].generators():
            pre = incl_y.solve(r(incl_x(gen)))
            if pre is None:  # pragma: no cover - restriction is equivariant
                raise ModelError(f"Restriction {x}<={y} does not preserve invariants")
            images.append(pre)
        restrictions[(x, y)] = GroupHom.from_images(stalks[x], stalks[y], images)
    name = f"({A.name})^G" if A.name else "invariants"
    AG = EquivariantSheaf(A.site, A.group, stalks, restrictions, name=name)
    incl = SheafMorphism(AG, A, {x: fixed[x][1] for x in A.site.points})
    A.__dict__["_invariants"] = (AG, incl)
    return AG, incl


def internal_hom_torsor(E: EquivariantSheaf, M: GTorsorCocycle) -> EquivariantSheaf:
    """E[M]: stalks prod_{g in G} E(x), (r s)_g = r_E(s_{g c}) for c = c_{x<=y},
    and (h.s)_g = s_{h^{-1} g}."""
    if E.site is not M.site:
        raise ModelError("Sheaf and torsor live on different sites")
    if not E.is_trivial_action():
        raise ModelError("E[M] needs a sheaf with trivial action")
    G = M.group
    n = G.order
    stalks = {}
    action = {}
    for x in E.site.points:
        perm = GroupModule.permutation(G, E.stalks[x])
        stalks[x] = perm.module
        action[x] = perm.action
    restrictions = {}
    for x, y in E.site.covering_pairs():
        c = M.transition(x, y)
        r = E.restriction(x, y).matrix
        mx, my = E.stalks[x].ngens, E.stalks[y].ngens
        mat = zeros(n * my, n * mx)
        for g in G.elements():
            src = G.mul(g, c)
            mat[g * my:(g + 1) * my, src * mx:(src + 1) * mx] = r
        restrictions[(x, y)] = GroupHom.block(stalks[x], stalks[y], mat)
    name = f"({E.name})[M]" if E.name else "E[M]"
    return EquivariantSheaf(E.site, G, stalks, restrictions, action, name=name)


def internal_hom_morphism(f: SheafMorphism, M: GTorsorCocycle) -> SheafMorphism:
    """f[M] : E1[M] -> E2[M], applying f in every coordinate."""
    source = internal_hom_torsor(f.source, M)
    target = internal_hom_torsor(f.target, M)
    maps = {x: GroupHom.block(source.stalks[x], target.stalks[x],
                              block_diag([f.maps[x].matrix] * M.group.order))
            for x in f.source.site.points}
    return SheafMorphism(source, target, maps)


def contracted_product(B: EquivariantSheaf, M: GTorsorCocycle) -> EquivariantSheaf:
    """B x_G M: stalks B(x), restriction r_B o rho_c for c = c_{x<=y}; no residual action."""
    if B.site is not M.site:
        raise ModelError("Sheaf and torsor live on different sites")
    if B.group.order != M.group.order:
        raise ModelError("Sheaf and torsor are over different groups")
    restrictions = {}
    for x, y in B.site.covering_pairs():
        c = M.transition(x, y)
        restrictions[(x, y)] = B.restriction(x, y) @ B.action[x][c]
    name = f"{B.name} x_G M" if B.name else "B x_G M"
    return EquivariantSheaf(B.site, FiniteGroup.trivial(), B.stalks, restrictions, name=name)


# ---------------------------------------------------------------------------
# Covers
# ---------------------------------------------------------------------------


@dataclass
class CoverTorsor:
    """Transition cocycle of an unbranched G-cover with the chosen base points."""

    pi: PosetMap
    deck: PosetAction
    base_points: dict[str, str]
    torsor: GTorsorCocycle

    def comparison(self, F: EquivariantSheaf, E: EquivariantSheaf) -> SheafMorphism:
        """pi_*F -> E[M], s |-> (s(tau_g base(x)))_g.

        F is the pullback of the plain sheaf E: F(p) = E(pi(p)) with the same
        restrictions.
        """
        pushed = pushforward(self.pi, F, self.deck)
        EM = internal_hom_torsor(E, self.torsor)
        maps = {}
        for x in self.pi.target.points:
            S = sections(F, self.pi.preimage(self.pi.target.up_set(x)))
            rows = [S.projections[self.deck(g, self.base_points[x])].matrix
                    for g in self.deck.group.elements()]
            maps[x] = GroupHom.block(pushed.stalks[x], EM.stalks[x],
                                     vstack(rows, pushed.stalks[x].ngens))
        return SheafMorphism(pushed, EM, maps)


def cover_torsor(pi: PosetMap, deck: PosetAction) -> CoverTorsor:
    """c_{x<=y} is the unique c with tau_c(base(x)) <= base(y)."""
    G = deck.group
    base_points = {}
    for x in pi.target.points:
        fiber = pi.fiber(x)
        if not fiber:
            raise ModelError(f"Empty fiber over {x}")
        orbit = deck.orbit(fiber[0])
        if sorted(orbit) != sorted(fiber) or len(fiber) != G.order:
            raise ModelError(f"Cover is branched over {x}: fiber {fiber}")
        base_points[x] = fiber[0]
    transitions = {}
    for x, y in pi.target.covering_pairs():
        found = [c for c in G.elements()
                 if pi.source.leq(deck(c, base_points[x]), base_points[y])]
        if len(found) != 1:
            raise ModelError(f"No unique lift of {x}<={y} through the cover (found {found})")
        transitions[(x, y)] = found[0]
    torsor = GTorsorCocycle(pi.target, G, transitions)
    return CoverTorsor(pi, deck, base_points, torsor)


# ---------------------------------------------------------------------------
# Local vanishing
# ---------------------------------------------------------------------------


@dataclass
class LocalVanishing:
    degree: int
    groups: dict[str, FgAbelianGroup] = field(default_factory=dict)

    @property
    def vanishing(self) -> dict[str, bool]:
        return {x: g.is_trivial() for x, g in self.groups.items()}

    @property
    def holds(self) -> bool:
        return all(self.vanishing.values())

    @property
    def failing(self) -> list[str]:
        return [x for x, ok in self.vanishing.items() if not ok]


def stalkwise_local_vanishing(A: EquivariantSheaf, j: int) -> LocalVanishing:
    """H^j(G, F(x)) at every point; on Alexandrov sites this is local vanishing."""
    if j < 1:
        raise ValueError("Local vanishing is about degrees j >= 1")
    report = LocalVanishing(j)
    for x in A.site.points:
        report.groups[x] = group_cohomology(A.group, A.stalk_module(x), j).group
    if report.failing:
        logger.info("H^%d(G, F(x)) nonzero at %s", j, report.failing)
    return report


# ---------------------------------------------------------------------------
# Hom-sets and the adjunction
# ---------------------------------------------------------------------------


def enumerate_sheaf_homs(B: EquivariantSheaf, E: EquivariantSheaf,
                         equivariant: bool = True) -> Iterator[SheafMorphism]:
    """All natural (and, if asked, equivariant) morphisms B -> E; E's stalks finite."""
    if B.site is not E.site:
        raise ModelError("Sheaves live on different sites")
    site = B.site
    candidates: dict[str, list[GroupHom]] = {}
    for x in site.points:
        homs = list(enumerate_homs(B.stalks[x], E.stalks[x]))
        if equivariant:
            homs = [h for h in homs
                    if all((E.action[x][g] @ h).equals(h @ B.action[x][g])
                           for g in B.group.elements())]
        candidates[x] = homs
    order = list(site.points)
    pairs = site.covering_pairs()

    def extend(i: int, chosen: dict[str, GroupHom]) -> Iterator[dict[str, GroupHom]]:
        if i == len(order):
            yield dict(chosen)
            return
        x = order[i]
        for h in candidates[x]:
            chosen[x] = h
            ok = True
            for a, b in pairs:
                if x in (a, b) and a in chosen and b in chosen:
                    lhs = E.restriction(a, b) @ chosen[a]
                    if not lhs.equals(chosen[b] @ B.restriction(a, b)):
                        ok = False
                        break
            if ok:
                yield from extend(i + 1, chosen)
            del chosen[x]

    for maps in extend(0, {}):
        yield SheafMorphism(B, E, maps, check=False)


def adjoint_to_internal_hom(phi: SheafMorphism, B: EquivariantSheaf,
                            EM: EquivariantSheaf) -> SheafMorphism:
    """phi : B x_G M -> E  |->  psi : B -> E[M], psi(b)_g = phi(rho_{g^{-1}} b)."""
    G = B.group
    maps = {}
    for x in B.site.points:
        rows = [(phi.maps[x] @ B.action[x][G.inv(g)]).matrix for g in G.elements()]
        maps[x] = GroupHom.block(B.stalks[x], EM.stalks[x], vstack(rows, B.stalks[x].ngens))
    return SheafMorphism(B, EM, maps, check=False)


def evaluate_at_identity(psi: SheafMorphism, BM: EquivariantSheaf,
                         E: EquivariantSheaf) -> SheafMorphism:
    """psi : B -> E[M]  |->  ev_e o psi : B x_G M -> E."""
    maps = {}
    for x in BM.site.points:
        m = E.stalks[x].ngens
        maps[x] = GroupHom.block(BM.stalks[x], E.stalks[x], psi.maps[x].matrix[:m, :])
    return SheafMorphism(BM, E, maps, check=False)


@dataclass
class AdjunctionCheck:
    equivariant_count: int
    plain_count: int
    round_trips: bool

    @property
    def bijective(self) -> bool:
        return self.equivariant_count == self.plain_count and self.round_trips


def adjunction_bijection(B: EquivariantSheaf, E: EquivariantSheaf,
                         M: GTorsorCocycle) -> AdjunctionCheck:
    """Compare Hom_G(B, E[M]) with Hom(B x_G M, E) through the explicit bijection."""
    EM = internal_hom_torsor(E, M)
    BM = contracted_product(B, M)
    left = list(enumerate_sheaf_homs(B, EM, equivariant=True))
    right = list(enumerate_sheaf_homs(BM, E, equivariant=False))
    round_trips = True
    for phi in right:
        psi = adjoint_to_internal_hom(phi, B, EM)
        psi._check()
        back = evaluate_at_identity(psi, BM, E)
        if not all(back.maps[x].equals(phi.maps[x]) for x in B.site.points):
            round_trips = False
            break
    if round_trips:
        for psi in left:
            phi = evaluate_at_identity(psi, BM, E)
            phi._check()
            again = adjoint_to_internal_hom(phi, B, EM)
            if not all(again.maps[x].equals(psi.maps[x]) for x in B.site.points):
                round_trips = False
                break
    logger.debug("adjunction: %d equivariant vs %d plain homs", len(left), len(right))
    return AdjunctionCheck(len(left), len(right), round_trips)

