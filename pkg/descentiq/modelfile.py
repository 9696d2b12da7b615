"""Model bundle files: pydantic schemas, loading into runtime objects, and export.

A bundle is one JSON document with keys ``group``, ``poset``, ``sheaf`` and the
optional ``gtorsor``, ``cover`` and ``parameters``. Group presentations are
``{"rank": r, "torsion": [d1, ...]}`` with the torsion coordinates first.
Matrices are row-major and act on column vectors (target x source).
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Any, Literal, Optional

from pydantic import BaseModel, Field, model_validator

from descentiq.algebra.abelian import FgAbelianGroup, GroupHom
from descentiq.algebra.matrices import int_matrix
from descentiq.errors import ModelError
from descentiq.groupcoh.finite import FiniteGroup
from descentiq.sites.constructions import (
    CoverTorsor,
    cover_torsor,
    internal_hom_torsor,
    invariants_sheaf,
    pushforward,
)
from descentiq.sites.poset import PosetAction, PosetMap, PosetSite
from descentiq.sites.sheaves import (
    EquivariantSheaf,
    GTorsorCocycle,
    SheafMorphism,
    SiteCochain,
    parse_chain_key,
)

logger = logging.getLogger(__name__)

Matrix = list[list[int]]


# ---------------------------------------------------------------------------
# Schemas
# ---------------------------------------------------------------------------


class GroupPresentation(BaseModel):
    rank: int = Field(0, ge=0)
    torsion: list[int] = Field(default_factory=list)

    @model_validator(mode="after")
    def _positive_torsion(self) -> GroupPresentation:
        bad = [d for d in self.torsion if d < 1]
        if bad:
            raise ValueError(f"torsion coefficients must be positive, got {bad}")
        return self

    def build(self) -> FgAbelianGroup:
        return FgAbelianGroup.from_invariants(self.rank, self.torsion)

    @classmethod
    def parse(cls, text: str) -> GroupPresentation:
        """``"Z"``, ``"Z/2"``, ``"Z^2 + Z/3"`` and so on."""
        rank = 0
        torsion: list[int] = []
        for part in text.replace(" ", "").split("+"):
            if part in ("", "0"):
                continue
            if part == "Z":
                rank += 1
            elif part.startswith("Z^"):
                rank += int(part[2:])
            elif part.startswith("Z/"):
                torsion.append(int(part[2:]))
            else:
                raise ValueError(f"Cannot parse group {text!r}")
        return cls(rank=rank, torsion=torsion)


class GroupSpec(BaseModel):
    elements: list[str]
    table: list[list[str]]

    def build(self) -> FiniteGroup:
        index = {name: i for i, name in enumerate(self.elements)}
        try:
            table = [[index[name] for name in row] for row in self.table]
        except KeyError as exc:
            raise ModelError(f"group.table names unknown element {exc.args[0]}") from None
        return FiniteGroup(self.elements, table)

    @classmethod
    def cyclic(cls, n: int) -> GroupSpec:
        G = FiniteGroup.cyclic(n)
        return cls.from_group(G)

    @classmethod
    def from_group(cls, G: FiniteGroup) -> GroupSpec:
        return cls(elements=list(G.names),
                   table=[[G.names[G.mul(a, b)] for b in G.elements()] for a in G.elements()])


class PosetSpec(BaseModel):
    points: list[str]
    leq: list[tuple[str, str]] = Field(default_factory=list)

    def build(self, chain_cap: int = 0) -> PosetSite:
        return PosetSite(self.points, self.leq, chain_cap=chain_cap)

    @classmethod
    def from_site(cls, site: PosetSite) -> PosetSpec:
        return cls(points=list(site.points), leq=site.covering_pairs())


class SheafSpec(BaseModel):
    kind: Literal["explicit", "constant", "pushforward", "internal_hom"] = "explicit"
    stalk: Optional[GroupPresentation] = None
    stalks: dict[str, GroupPresentation] = Field(default_factory=dict)
    restrictions: dict[str, Matrix] = Field(default_factory=dict)
    action: dict[str, dict[str, Matrix]] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _kind_fields(self) -> SheafSpec:
        if self.kind == "explicit":
            if not self.stalks:
                raise ValueError("an explicit sheaf needs 'stalks'")
        elif self.stalk is None:
            raise ValueError(f"a {self.kind} sheaf needs 'stalk'")
        return self


class TorsorSpec(BaseModel):
    transitions: dict[str, str]


class CoverSpec(BaseModel):
    poset: PosetSpec
    map: dict[str, str]
    deck: dict[str, dict[str, str]] = Field(default_factory=dict)


class ModelBundle(BaseModel):
    name: str = ""
    description: str = ""
    group: GroupSpec
    poset: PosetSpec
    sheaf: SheafSpec
    gtorsor: Optional[TorsorSpec] = None
    cover: Optional[CoverSpec] = None
    parameters: dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _cross_references(self) -> ModelBundle:
        if self.sheaf.kind == "pushforward" and self.cover is None:
            raise ValueError("a pushforward sheaf needs 'cover'")
        if self.sheaf.kind == "internal_hom" and self.gtorsor is None and self.cover is None:
            raise ValueError("an internal_hom sheaf needs 'gtorsor' or 'cover'")
        return self


class CocycleFile(BaseModel):
    degree: int = Field(ge=0)
    sheaf: Literal["A", "invariants"] = "A"
    values: dict[str, list[int]] = Field(default_factory=dict)


# ---------------------------------------------------------------------------
# Runtime model
# ---------------------------------------------------------------------------


def _pair_key(key: str) -> tuple[str, str]:
    parts = [p.strip() for p in key.replace("<=", "<").split("<")]
    if len(parts) != 2:
        raise ModelError(f"Cannot read pair {key!r}; expected 'a<=b'")
    return parts[0], parts[1]


@dataclass
class CoverData:
    site: PosetSite
    map: PosetMap
    deck: PosetAction

    @cached_property
    def torsor(self) -> CoverTorsor:
        return cover_torsor(self.map, self.deck)


@dataclass
class Model:
    """A loaded bundle: the sheaf A with its group and everything it came from."""

    bundle: ModelBundle
    group: FiniteGroup
    site: PosetSite
    sheaf: EquivariantSheaf
    plain: Optional[EquivariantSheaf] = None
    torsor: Optional[GTorsorCocycle] = None
    cover: Optional[CoverData] = None

    @property
    def name(self) -> str:
        return self.bundle.name

    @cached_property
    def invariants(self) -> tuple[EquivariantSheaf, SheafMorphism]:
        return invariants_sheaf(self.sheaf)


def _build_cover(spec: CoverSpec, base: PosetSite, G: FiniteGroup,
                 chain_cap: int) -> CoverData:
    site = spec.poset.build(chain_cap)
    pi = PosetMap(site, base, spec.map)
    maps = []
    for g in G.elements():
        name = G.names[g]
        if g == 0:
            maps.append({p: p for p in site.points})
        elif name not in spec.deck:
            raise ModelError(f"cover.deck has no entry for group element {name}")
        else:
            maps.append(spec.deck[name])
    unknown = sorted(set(spec.deck) - set(G.names))
    if unknown:
        raise ModelError(f"cover.deck names unknown group elements {unknown}")
    return CoverData(site, pi, PosetAction(site, G, maps))


def _build_explicit(spec: SheafSpec, site: PosetSite, G: FiniteGroup) -> EquivariantSheaf:
    unknown = sorted(set(spec.stalks) - set(site.points))
    if unknown:
        raise ModelError(f"sheaf.stalks names unknown points {unknown}")
    stalks = {p: pres.build() for p, pres in spec.stalks.items()}
    restrictions = {}
    for key, mat in spec.restrictions.items():
        x, y = _pair_key(key)
        if x not in stalks or y not in stalks:
            raise ModelError(f"sheaf.restrictions[{key!r}] names an unknown point")
        restrictions[(x, y)] = GroupHom(
            stalks[x], stalks[y], int_matrix(mat, rows=stalks[y].ngens, cols=stalks[x].ngens),
            check=False)
    action: dict[str, list[GroupHom]] = {}
    for elem, per_point in spec.action.items():
        g = G.index(elem)
        for p, mat in per_point.items():
            if p not in stalks:
                raise ModelError(f"sheaf.action[{elem!r}] names unknown point {p}")
            maps = action.setdefault(p, [GroupHom.identity(stalks[p]) for _ in G.elements()])
            n = stalks[p].ngens
            try:
                maps[g] = GroupHom(stalks[p], stalks[p], int_matrix(mat, rows=n, cols=n))
            except (ModelError, ValueError) as exc:
                raise ModelError(f"sheaf.action[{elem!r}][{p!r}]: {exc}") from None
    return EquivariantSheaf(site, G, stalks, restrictions, action, name="A")


def load_model(bundle: ModelBundle, chain_cap: int = 0, max_order: int = 0) -> Model:
    G = bundle.group.build()
    if max_order and G.order > max_order:
        raise ModelError(f"Group of order {G.order} exceeds groups.max_order={max_order}")
    site = bundle.poset.build(chain_cap)
    cover = _build_cover(bundle.cover, site, G, chain_cap) if bundle.cover else None
    torsor = None
    if bundle.gtorsor is not None:
        transitions = {}
        for key, elem in bundle.gtorsor.transitions.items():
            transitions[_pair_key(key)] = G.index(elem)
        for x, y in site.covering_pairs():
            transitions.setdefault((x, y), 0)
        torsor = GTorsorCocycle(site, G, transitions)
    spec = bundle.sheaf
    plain = None
    if spec.kind == "explicit":
        sheaf = _build_explicit(spec, site, G)
    elif spec.kind == "constant":
        sheaf = EquivariantSheaf.constant(site, spec.stalk.build(), G, name="A")
    elif spec.kind == "pushforward":
        upstairs = EquivariantSheaf.constant(cover.site, spec.stalk.build(), name="const")
        sheaf = pushforward(cover.map, upstairs, cover.deck)
    else:
        if torsor is None:
            torsor = cover.torsor.torsor
        plain = EquivariantSheaf.constant(site, spec.stalk.build(), name="E")
        sheaf = internal_hom_torsor(plain, torsor)
    logger.debug("loaded model %s: %s", bundle.name or "<unnamed>", sheaf)
    return Model(bundle, G, site, sheaf, plain, torsor, cover)


def read_bundle(path: str | Path) -> ModelBundle:
    return ModelBundle.model_validate_json(Path(path).read_text())


def load_model_file(path: str | Path, chain_cap: int = 0, max_order: int = 0) -> Model:
    return load_model(read_bundle(path), chain_cap=chain_cap, max_order=max_order)


def write_bundle(bundle: ModelBundle, path: str | Path) -> Path:
    out = Path(path)
    out.write_text(bundle.model_dump_json(indent=2, exclude_none=True) + "\n")
    return out


# ---------------------------------------------------------------------------
# Explicit export
# ---------------------------------------------------------------------------


def _matrix(h: GroupHom) -> Matrix:
    return [[int(v) for v in row] for row in h.matrix.tolist()]


def explicit_bundle(model: Model) -> ModelBundle:
    """The same model with every stalk, restriction and action written out."""
    A = model.sheaf
    G = model.group
    smith = {p: A.stalks[p].smith_presentation() for p in A.site.points}
    stalks = {p: GroupPresentation(rank=N.free_rank, torsion=N.torsion)
              for p, (N, _, _) in smith.items()}
    restrictions = {}
    for x, y in A.site.covering_pairs():
        to_y = smith[y][1]
        from_x = smith[x][2]
        restrictions[f"{x}<={y}"] = _matrix(to_y @ A.restriction(x, y) @ from_x)
    action: dict[str, dict[str, Matrix]] = {}
    for g in G.elements():
        if g == 0:
            continue
        per_point = {}
        for p in A.site.points:
            N, to_p, from_p = smith[p]
            if N.ngens:
                per_point[p] = _matrix(to_p @ A.action[p][g] @ from_p)
        if per_point:
            action[G.names[g]] = per_point
    parameters = dict(model.bundle.parameters)
    parameters["derived_from"] = model.bundle.sheaf.kind
    return model.bundle.model_copy(update={
        "sheaf": SheafSpec(kind="explicit", stalks=stalks, restrictions=restrictions,
                           action=action),
        "parameters": parameters,
    })


# ---------------------------------------------------------------------------
# Cocycle files
# ---------------------------------------------------------------------------


def read_cocycle(path: str | Path) -> CocycleFile:
    return CocycleFile.model_validate_json(Path(path).read_text())


def cocycle_from_file(model: Model, data: CocycleFile) -> SiteCochain:
    sheaf = model.invariants[0] if data.sheaf == "invariants" else model.sheaf
    values = {}
    for key, coords in data.values.items():
        chain = parse_chain_key(key)
        values[chain] = coords
    return SiteCochain.from_values(sheaf, data.degree, values)


def cocycle_to_file(z: SiteCochain, sheaf: Literal["A", "invariants"] = "A") -> CocycleFile:
    return CocycleFile(degree=z.degree, sheaf=sheaf, values=z.as_table())


def write_cocycle(z: SiteCochain, path: str | Path,
                  sheaf: Literal["A", "invariants"] = "A") -> Path:
    out = Path(path)
    out.write_text(json.dumps(cocycle_to_file(z, sheaf).model_dump(), indent=2) + "\n")
    return out

