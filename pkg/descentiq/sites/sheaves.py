"""Equivariant abelian sheaves on finite posets, their cochains, and G-torsors.

A sheaf is stored as a functor on the poset: F(x) = F(U_x), with restrictions
r_{x<=y} : F(x) -> F(y). Only covering pairs need to be given; the rest are
composed along the Hasse diagram and checked for path independence.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Mapping, Optional, Sequence

import numpy as np

from descentiq.algebra.abelian import FgAbelianGroup, GroupElement, GroupHom
from descentiq.algebra.complexes import CochainComplex, CohomologyGroup
from descentiq.algebra.matrices import block_diag, zero_vector, zeros
from descentiq.errors import DegreeAboveChainCap, ModelError, NotACocycle
from descentiq.groupcoh.finite import FiniteGroup
from descentiq.groupcoh.modules import GroupModule
from descentiq.sites.poset import Chain, PosetSite

logger = logging.getLogger(__name__)

Pair = tuple[str, str]


def chain_key(chain: Sequence[str]) -> str:
    return "<".join(chain)


def parse_chain_key(key: str) -> Chain:
    return tuple(p.strip() for p in key.split("<"))


@dataclass(frozen=True)
class CochainLayout:
    """Where each chain's value sits inside the flat cochain vector."""

    degree: int
    chains: list[Chain]
    offsets: dict[Chain, int]
    widths: dict[Chain, int]
    group: FgAbelianGroup

    def block(self, chain: Chain) -> slice:
        start = self.offsets[chain]
        return slice(start, start + self.widths[chain])


class EquivariantSheaf:
    def __init__(self, site: PosetSite, group: FiniteGroup,
                 stalks: Mapping[str, FgAbelianGroup],
                 restrictions: Mapping[Pair, GroupHom],
                 action: Optional[Mapping[str, Sequence[GroupHom]]] = None,
                 check: bool = True, name: str = ""):
        self.site = site
        self.group = group
        self.name = name
        missing = [p for p in site.points if p not in stalks]
        if missing:
            raise ModelError(f"No stalk given at {missing}")
        self.stalks = {p: stalks[p] for p in site.points}
        self._given = dict(restrictions)
        for (x, y) in self._given:
            if not site.less(x, y):
                raise ModelError(f"Restriction given for non-comparable pair {x}<={y}")
        for (x, y) in site.covering_pairs():
            if (x, y) not in self._given:
                raise ModelError(f"No restriction given for covering pair {x}<={y}")
        self._restrictions: dict[Pair, GroupHom] = {}
        if action is None:
            self.action = {p: [GroupHom.identity(self.stalks[p]) for _ in group.elements()]
                           for p in site.points}
        else:
            self.action = {}
            for p in site.points:
                maps = list(action.get(p, []))
                if not maps:
                    maps = [GroupHom.identity(self.stalks[p]) for _ in group.elements()]
                if len(maps) != group.order:
                    raise ModelError(f"Need {group.order} action maps at {p}, got {len(maps)}")
                self.action[p] = maps
        self._layouts: dict[int, CochainLayout] = {}
        self._differentials: dict[int, GroupHom] = {}
        self._cochain_actions: dict[tuple[int, int], GroupHom] = {}
        self._complex: Optional[CochainComplex] = None
        if check:
            self._check()

    # -- constructors ------------------------------------------------------

    @classmethod
    def constant(cls, site: PosetSite, stalk: FgAbelianGroup,
                 group: FiniteGroup | None = None, name: str = "") -> EquivariantSheaf:
        group = group or FiniteGroup.trivial()
        restrictions = {pair: GroupHom.identity(stalk) for pair in site.covering_pairs()}
        return cls(site, group, {p: stalk for p in site.points}, restrictions,
                   check=False, name=name or f"const {stalk}")

    def with_group(self, group: FiniteGroup) -> EquivariantSheaf:
        """Same underlying sheaf with ``group`` acting trivially."""
        return EquivariantSheaf(self.site, group, self.stalks, self.restriction_table(),
                                check=False, name=self.name)

    def underlying(self) -> EquivariantSheaf:
        """Forget the action."""
        return self.with_group(FiniteGroup.trivial())

    # -- validation --------------------------------------------------------

    def _check(self) -> None:
        for (x, y), r in self._given.items():
            if not (r.source.same_presentation(self.stalks[x])
                    and r.target.same_presentation(self.stalks[y])):
                raise ModelError(f"Restriction {x}<={y} has the wrong source or target")
            try:
                GroupHom(r.source, r.target, r.matrix)
            except ModelError as exc:
                raise ModelError(f"Restriction {x}<={y}: {exc}") from None
        for (x, y) in self.site.covering_pairs():
            for z in self.site.above(y):
                via = self.restriction(y, z) @ self.restriction(x, y)
                if not via.equals(self.restriction(x, z)):
                    raise ModelError(f"Functoriality fails on {x}<={y}<={z}")
        for (x, z), given in self._given.items():
            if not given.equals(self.restriction(x, z)):
                raise ModelError(f"Given restriction {x}<={z} disagrees with the composite")
        for p in self.site.points:
            try:
                GroupModule(self.group, self.stalks[p], self.action[p])
            except ModelError as exc:
                raise ModelError(f"At {p}: {exc}") from None
        for (x, y) in self.site.covering_pairs():
            r = self.restriction(x, y)
            for g in self.group.elements():
                if not (self.action[y][g] @ r).equals(r @ self.action[x][g]):
                    raise ModelError(
                        f"Action of {self.group.names[g]} does not commute with "
                        f"restriction {x}<={y}"
                    )

    # -- structure ---------------------------------------------------------

    def restriction(self, x: str, y: str) -> GroupHom:
        if x == y:
            return GroupHom.identity(self.stalks[x])
        key = (x, y)
        if key in self._restrictions:
            return self._restrictions[key]
        if key in self._given and self.site.hasse.has_edge(x, y):
            r = self._given[key]
        elif not self.site.less(x, y):
            raise ModelError(f"{x} is not below {y}")
        else:
            w = next(w for w in self.site.hasse.successors(x) if self.site.leq(w, y))
            r = self.restriction(w, y) @ self.restriction(x, w)
        self._restrictions[key] = r
        return r

    def restriction_table(self) -> dict[Pair, GroupHom]:
        return {pair: self.restriction(*pair) for pair in self.site.covering_pairs()}

    def stalk(self, x: str) -> FgAbelianGroup:
        return self.stalks[x]

    def stalk_module(self, x: str) -> GroupModule:
        cached = self.__dict__.setdefault("_stalk_modules", {})
        if x not in cached:
            cached[x] = GroupModule(self.group, self.stalks[x], self.action[x], check=False)
        return cached[x]

    def is_trivial_action(self) -> bool:
        return all(self.stalk_module(p).is_trivial_action() for p in self.site.points)

    # -- cochains ----------------------------------------------------------

    def layout(self, q: int) -> CochainLayout:
        if q not in self._layouts:
            chains = self.site.chains(q)
            offsets: dict[Chain, int] = {}
            widths: dict[Chain, int] = {}
            at = 0
            for c in chains:
                offsets[c] = at
                widths[c] = self.stalks[c[-1]].ngens
                at += widths[c]
            group = FgAbelianGroup.direct_sum([self.stalks[c[-1]] for c in chains])
            self._layouts[q] = CochainLayout(q, chains, offsets, widths, group)
        return self._layouts[q]

    def cochain_group(self, q: int) -> FgAbelianGroup:
        return self.layout(q).group

    def d(self, q: int) -> GroupHom:
        """Site differential C^q -> C^{q+1}."""
        if q < 0:
            return GroupHom.zero(FgAbelianGroup.trivial(), self.cochain_group(0))
        if q not in self._differentials:
            src, tgt = self.layout(q), self.layout(q + 1)
            self._differentials[q] = GroupHom.block(src.group, tgt.group,
                                                    self._differential_matrix(q))
        return self._differentials[q]

    def _differential_matrix(self, q: int) -> np.ndarray:
        """(df)(x_0..x_{q+1}) = sum_{i<=q} (-1)^i f(omit x_i) + (-1)^{q+1} r f(x_0..x_q)."""
        src, tgt = self.layout(q), self.layout(q + 1)
        mat = zeros(tgt.group.ngens, src.group.ngens)
        for c in tgt.chains:
            rows = tgt.block(c)
            eye = GroupHom.identity(self.stalks[c[-1]]).matrix
            for i in range(q + 1):
                face = c[:i] + c[i + 1:]
                mat[rows, src.block(face)] += eye * (-1) ** i
            last = self.restriction(c[-2], c[-1]).matrix
            mat[rows, src.block(c[:-1])] += last * (-1) ** (q + 1)
        return mat

    def cochain_action(self, q: int, g: int) -> GroupHom:
        """rho_g applied to every value of a q-cochain."""
        key = (q, g)
        if key not in self._cochain_actions:
            lay = self.layout(q)
            blocks = [self.action[c[-1]][g].matrix for c in lay.chains]
            mat = block_diag(blocks) if blocks else zeros(0, 0)
            self._cochain_actions[key] = GroupHom.block(lay.group, lay.group, mat)
        return self._cochain_actions[key]

    def cochain_module(self, q: int) -> GroupModule:
        cached = self.__dict__.setdefault("_cochain_modules", {})
        if q not in cached:
            cached[q] = GroupModule(self.group, self.cochain_group(q),
                                    [self.cochain_action(q, g) for g in self.group.elements()],
                                    check=False)
        return cached[q]

    def site_complex(self, top: int | None = None) -> CochainComplex:
        """Normalized complex C^0 -> ... -> C^top (default: up to the poset height)."""
        if top is None:
            top = min(self.site.height, self.site.chain_cap or self.site.height)
        if self._complex is None or self._complex.top < top:
            groups = [self.cochain_group(q) for q in range(top + 1)]
            diffs = [self.d(q) for q in range(top)]
            self._complex = CochainComplex(groups, diffs)
            logger.debug("site complex of %s up to degree %d: %s", self.name or "sheaf", top,
                         [g.ngens for g in groups])
        return self._complex

    def cohomology(self, q: int) -> CohomologyGroup:
        cap = self.site.chain_cap
        if cap and cap < q + 1 <= self.site.height:
            raise DegreeAboveChainCap(q, cap)
        top = q + 1 if self.site.chain_cap else max(q + 1, self.site.height)
        return self.site_complex(top).cohomology(q)

    def cohomology_module(self, q: int) -> GroupModule:
        """H^q(X, A) with the action induced by the twists."""
        cached = self.__dict__.setdefault("_cohomology_modules", {})
        if q not in cached:
            H = self.cohomology(q)
            action = []
            for g in self.group.elements():
                rho = self.cochain_action(q, g)
                images = [H.class_of(rho(H.rep_of(gen))) for gen in H.group.generators()]
                action.append(GroupHom.from_images(H.group, H.group, images))
            cached[q] = GroupModule(self.group, H.group, action, check=False)
        return cached[q]

    @cached_property
    def global_sections_module(self) -> GroupModule:
        """A(X) with its G-action, on invariant generators."""
        return self.cohomology_module(0)

    def global_section(self, z: SiteCochain) -> GroupElement:
        """A d-closed 0-cochain as an element of A(X)."""
        return self.cohomology(0).class_of(z.vector)

    def section_cochain(self, s: GroupElement) -> SiteCochain:
        return SiteCochain(self, 0, self.cohomology(0).rep_of(s))

    def __repr__(self) -> str:
        label = self.name or "EquivariantSheaf"
        return f"{label} on {self.site!r} with group of order {self.group.order}"


class SiteCochain:
    """A q-cochain: one value in F(x_q) for every strict chain x_0 < ... < x_q."""

    def __init__(self, sheaf: EquivariantSheaf, degree: int, vector: GroupElement):
        self.sheaf = sheaf
        self.degree = degree
        self.vector = vector

    @classmethod
    def zero(cls, sheaf: EquivariantSheaf, degree: int) -> SiteCochain:
        return cls(sheaf, degree, sheaf.cochain_group(degree).zero())

    @classmethod
    def from_values(cls, sheaf: EquivariantSheaf, degree: int,
                    values: Mapping[Chain, GroupElement | Sequence[int]]) -> SiteCochain:
        lay = sheaf.layout(degree)
        out = zero_vector(lay.group.ngens)
        for chain, val in values.items():
            chain = tuple(chain)
            if chain not in lay.offsets:
                raise ModelError(f"{chain_key(chain)} is not a strict chain of length {degree}")
            stalk = sheaf.stalks[chain[-1]]
            coords = val.coords if isinstance(val, GroupElement) else np.asarray(
                [int(v) for v in val], dtype=object)
            if len(coords) != stalk.ngens:
                raise ModelError(
                    f"Value at {chain_key(chain)} has {len(coords)} coordinates, "
                    f"expected {stalk.ngens}"
                )
            out[lay.block(chain)] = coords
        return cls(sheaf, degree, lay.group.element(out))

    def __getitem__(self, chain: Sequence[str]) -> GroupElement:
        chain = tuple(chain)
        lay = self.sheaf.layout(self.degree)
        return self.sheaf.stalks[chain[-1]].element(self.vector.coords[lay.block(chain)])

    def items(self) -> Iterator[tuple[Chain, GroupElement]]:
        for c in self.sheaf.layout(self.degree).chains:
            yield c, self[c]

    def as_table(self, nonzero_only: bool = True) -> dict[str, list[int]]:
        return {chain_key(c): v.as_list() for c, v in self.items()
                if not (nonzero_only and v.is_zero())}

    def __add__(self, other: SiteCochain) -> SiteCochain:
        return SiteCochain(self.sheaf, self.degree, self.vector + other.vector)

    def __sub__(self, other: SiteCochain) -> SiteCochain:
        return SiteCochain(self.sheaf, self.degree, self.vector - other.vector)

    def __neg__(self) -> SiteCochain:
        return SiteCochain(self.sheaf, self.degree, -self.vector)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SiteCochain):
            return NotImplemented
        return self.degree == other.degree and self.vector == other.vector

    def is_zero(self) -> bool:
        return self.vector.is_zero()

    def coboundary(self) -> SiteCochain:
        return SiteCochain(self.sheaf, self.degree + 1, self.sheaf.d(self.degree)(self.vector))

    def is_cocycle(self) -> bool:
        return self.coboundary().is_zero()

    def require_cocycle(self) -> None:
        dz = self.coboundary()
        if not dz.is_zero():
            raise NotACocycle(dz.as_table(), where=f"site degree {self.degree}")

    def twist(self, g: int) -> SiteCochain:
        return SiteCochain(self.sheaf, self.degree,
                           self.sheaf.cochain_action(self.degree, g)(self.vector))

    def cohomology_class(self) -> GroupElement:
        return self.sheaf.cohomology(self.degree).class_of(self.vector)

    def __repr__(self) -> str:
        return f"SiteCochain(degree={self.degree}, {self.as_table()})"


def twist(g: int, z: SiteCochain) -> SiteCochain:
    """T_g on cochain representatives: rho_g applied to every value."""
    return z.twist(g)


class SheafMorphism:
    """Pointwise homomorphisms F(x) -> F'(x), natural and G-equivariant."""

    def __init__(self, source: EquivariantSheaf, target: EquivariantSheaf,
                 maps: Mapping[str, GroupHom], check: bool = True):
        if source.site is not target.site:
            raise ModelError("Sheaf morphism between sheaves on different sites")
        if source.group.order != target.group.order:
            raise ModelError("Sheaf morphism between sheaves over different groups")
        self.source = source
        self.target = target
        self.maps = {p: maps[p] for p in source.site.points}
        if check:
            self._check()

    def _check(self) -> None:
        for (x, y) in self.source.site.covering_pairs():
            lhs = self.target.restriction(x, y) @ self.maps[x]
            rhs = self.maps[y] @ self.source.restriction(x, y)
            if not lhs.equals(rhs):
                raise ModelError(f"Morphism is not natural on {x}<={y}")
        for p in self.source.site.points:
            for g in self.source.group.elements():
                lhs = self.target.action[p][g] @ self.maps[p]
                rhs = self.maps[p] @ self.source.action[p][g]
                if not lhs.equals(rhs):
                    raise ModelError(
                        f"Morphism is not equivariant at {p} for {self.source.group.names[g]}"
                    )

    @classmethod
    def identity(cls, sheaf: EquivariantSheaf) -> SheafMorphism:
        return cls(sheaf, sheaf, {p: GroupHom.identity(sheaf.stalks[p])
                                  for p in sheaf.site.points}, check=False)

    @classmethod
    def scalar(cls, sheaf: EquivariantSheaf, k: int) -> SheafMorphism:
        return cls(sheaf, sheaf, {p: GroupHom.scalar(sheaf.stalks[p], k)
                                  for p in sheaf.site.points}, check=False)

    def cochain_map(self, q: int) -> GroupHom:
        cached = self.__dict__.setdefault("_cochain_maps", {})
        if q not in cached:
            src = self.source.layout(q)
            tgt = self.target.layout(q)
            blocks = [self.maps[c[-1]].matrix for c in src.chains]
            mat = block_diag(blocks) if blocks else zeros(tgt.group.ngens, 0)
            cached[q] = GroupHom.block(src.group, tgt.group, mat)
        return cached[q]

    def apply_cochain(self, z: SiteCochain) -> SiteCochain:
        return SiteCochain(self.target, z.degree, self.cochain_map(z.degree)(z.vector))

    def induced_map(self, q: int) -> GroupHom:
        """H^q(X, F) -> H^q(X, F')."""
        Hs = self.source.cohomology(q)
        Ht = self.target.cohomology(q)
        f = self.cochain_map(q)
        images = [Ht.class_of(f(Hs.rep_of(gen))) for gen in Hs.group.generators()]
        return GroupHom.from_images(Hs.group, Ht.group, images)

    def compose(self, inner: SheafMorphism) -> SheafMorphism:
        """``self o inner``."""
        return SheafMorphism(inner.source, self.target,
                             {p: self.maps[p] @ inner.maps[p] for p in self.source.site.points},
                             check=False)

    def is_isomorphism(self) -> bool:
        return all(m.is_injective() and m.is_surjective() for m in self.maps.values())

    def __repr__(self) -> str:
        return f"SheafMorphism({self.source.name or 'F'} -> {self.target.name or 'F'})"


class GTorsorCocycle:
    """A G-torsor given by transitions c_{x<=y} with c_{x<=z} = c_{y<=z} c_{x<=y}."""

    def __init__(self, site: PosetSite, group: FiniteGroup, transitions: Mapping[Pair, int],
                 check: bool = True):
        self.site = site
        self.group = group
        self._given = dict(transitions)
        for (x, y) in site.covering_pairs():
            if (x, y) not in self._given:
                raise ModelError(f"No transition given for covering pair {x}<={y}")
        self._cache: dict[Pair, int] = {}
        if check:
            self._check()

    def _check(self) -> None:
        G = self.group
        for (x, y) in self.site.covering_pairs():
            for z in self.site.above(y):
                via = G.mul(self.transition(y, z), self.transition(x, y))
                if via != self.transition(x, z):
                    raise ModelError(f"Torsor cocycle law fails on {x}<={y}<={z}")
        for (x, z), c in self._given.items():
            if c != self.transition(x, z):
                raise ModelError(f"Given transition {x}<={z} disagrees with the composite")

    @classmethod
    def trivial(cls, site: PosetSite, group: FiniteGroup) -> GTorsorCocycle:
        return cls(site, group, {pair: 0 for pair in site.covering_pairs()}, check=False)

    @classmethod
    def from_gauge(cls, site: PosetSite, group: FiniteGroup,
                   gauge: Mapping[str, int]) -> GTorsorCocycle:
        """Transitions gauge(y) gauge(x)^{-1} of a torsor trivialized by ``gauge``."""
        G = group
        transitions = {(x, y): G.mul(gauge[y], G.inv(gauge[x]))
                       for (x, y) in site.covering_pairs()}
        return cls(site, group, transitions, check=False)

    def transition(self, x: str, y: str) -> int:
        if x == y:
            return 0
        key = (x, y)
        if key not in self._cache:
            if self.site.hasse.has_edge(x, y):
                self._cache[key] = self._given[key]
            else:
                w = next(w for w in self.site.hasse.successors(x) if self.site.leq(w, y))
                self._cache[key] = self.group.mul(self.transition(w, y), self.transition(x, w))
        return self._cache[key]

    def transition_table(self) -> dict[Pair, int]:
        return {pair: self.transition(*pair) for pair in self.site.covering_pairs()}

    def is_trivial(self) -> bool:
        return all(c == 0 for c in self.transition_table().values())

    def is_trivializable(self) -> Optional[dict[str, int]]:
        """A gauge with c_{x<=y} = gauge(y) gauge(x)^{-1}, or None."""
        G = self.group
        gauge: dict[str, int] = {}
        for root in self.site.points:
            if root in gauge:
                continue
            gauge[root] = 0
            queue = deque([root])
            while queue:
                x = queue.popleft()
                for y in self.site.hasse.successors(x):
                    want = G.mul(self.transition(x, y), gauge[x])
                    if y not in gauge:
                        gauge[y] = want
                        queue.append(y)
                    elif gauge[y] != want:
                        return None
                for w in self.site.hasse.predecessors(x):
                    want = G.mul(G.inv(self.transition(w, x)), gauge[x])
                    if w not in gauge:
                        gauge[w] = want
                        queue.append(w)
                    elif gauge[w] != want:
                        return None
        return gauge

    def __repr__(self) -> str:
        nontrivial = {f"{x}<={y}": self.group.names[c]
                      for (x, y), c in self.transition_table().items() if c}
        return f"GTorsorCocycle({nontrivial})"
