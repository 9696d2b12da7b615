"""Built-in models: branched covers of the interval and the sphere, and
unbranched circle and sphere covers with A = E[M].

Every fixture is a ``ModelBundle`` so it can be written out with ``example``
or ``emit-model`` and read back by every other command.
"""

from __future__ import annotations

from typing import Callable, Optional

from descentiq.modelfile import (
    CoverSpec,
    GroupPresentation,
    GroupSpec,
    Model,
    ModelBundle,
    PosetSpec,
    SheafSpec,
    TorsorSpec,
    load_model,
)
from descentiq.sites.sheaves import SiteCochain


def interval_poset() -> PosetSpec:
    """Two closed endpoints below one open cell."""
    return PosetSpec(points=["P", "Q", "I"], leq=[("P", "I"), ("Q", "I")])


def circle4_poset() -> PosetSpec:
    """Two vertices, two arcs; each arc lies above both vertices."""
    return PosetSpec(points=["v0", "v1", "e0", "e1"],
                     leq=[(f"v{i}", f"e{j}") for i in range(2) for j in range(2)])


def circle8_poset() -> PosetSpec:
    """Four vertices and four arcs with v_i < e_i and v_i < e_{i-1}."""
    leq = []
    for i in range(4):
        leq.append((f"v{i}", f"e{i}"))
        leq.append((f"v{i}", f"e{(i - 1) % 4}"))
    return PosetSpec(points=[f"v{i}" for i in range(4)] + [f"e{i}" for i in range(4)], leq=leq)


def suspend(spec: PosetSpec, poles: tuple[str, str] = ("N", "S")) -> PosetSpec:
    """Add two minimal poles below every point."""
    leq = list(spec.leq) + [(n, p) for n in poles for p in spec.points]
    return PosetSpec(points=list(poles) + list(spec.points), leq=leq)


def _double_cover_map(poles: bool = False) -> dict[str, str]:
    mapping = {f"v{i}": f"v{i % 2}" for i in range(4)}
    mapping.update({f"e{i}": f"e{i % 2}" for i in range(4)})
    if poles:
        mapping.update({"N": "N", "S": "S"})
    return mapping


def _rotation(poles: bool = False) -> dict[str, str]:
    shift = {f"v{i}": f"v{(i + 2) % 4}" for i in range(4)}
    shift.update({f"e{i}": f"e{(i + 2) % 4}" for i in range(4)})
    if poles:
        shift.update({"N": "N", "S": "S"})
    return shift


def interval_branched() -> ModelBundle:
    """Vertical projection of a circle onto an interval, Z/2 swapping the arcs."""
    cover = PosetSpec(points=["p", "q", "u", "l"],
                      leq=[("p", "u"), ("p", "l"), ("q", "u"), ("q", "l")])
    return ModelBundle(
        name="interval-branched",
        description="pi_*(Z/2) along the 4-point circle folded onto the 3-point interval",
        group=GroupSpec.cyclic(2),
        poset=interval_poset(),
        sheaf=SheafSpec(kind="pushforward", stalk=GroupPresentation(torsion=[2])),
        cover=CoverSpec(
            poset=cover,
            map={"p": "P", "q": "Q", "u": "I", "l": "I"},
            deck={"s": {"p": "p", "q": "q", "u": "l", "l": "u"}},
        ),
        parameters={"coefficients": "Z/2"},
    )


def sphere_branched() -> ModelBundle:
    """Suspension of the squaring map on the equator; the poles are branch points."""
    return ModelBundle(
        name="sphere-branched",
        description="pi_*(Z) along the suspended double cover of the circle",
        group=GroupSpec.cyclic(2),
        poset=suspend(circle4_poset()),
        sheaf=SheafSpec(kind="pushforward", stalk=GroupPresentation(rank=1)),
        cover=CoverSpec(
            poset=suspend(circle8_poset()),
            map=_double_cover_map(poles=True),
            deck={"s": _rotation(poles=True)},
        ),
        parameters={"coefficients": "Z"},
    )


def circle_cover(coefficients: str = "Z/2") -> ModelBundle:
    """A = E[M] for the connected double cover of the 4-point circle."""
    return ModelBundle(
        name="circle-cover",
        description=f"E[M] with E = const {coefficients}, M the 8-to-4 circle double cover",
        group=GroupSpec.cyclic(2),
        poset=circle4_poset(),
        sheaf=SheafSpec(kind="internal_hom", stalk=GroupPresentation.parse(coefficients)),
        cover=CoverSpec(
            poset=circle8_poset(),
            map=_double_cover_map(),
            deck={"s": _rotation()},
        ),
        parameters={"coefficients": coefficients},
    )


def sphere_cover(coefficients: str = "Z") -> ModelBundle:
    """A = E[M] on the 10-point sphere; M is trivializable but not constant."""
    poset = suspend(circle8_poset())
    gauge = {p: ("s" if p in ("e0", "e1", "N") else "e") for p in poset.points}
    transitions = {}
    site = poset.build()
    for x, y in site.covering_pairs():
        transitions[f"{x}<={y}"] = "s" if gauge[x] != gauge[y] else "e"
    return ModelBundle(
        name="sphere-cover",
        description=f"E[M] with E = const {coefficients} on the suspended 8-point circle",
        group=GroupSpec.cyclic(2),
        poset=poset,
        sheaf=SheafSpec(kind="internal_hom", stalk=GroupPresentation.parse(coefficients)),
        gtorsor=TorsorSpec(transitions=transitions),
        parameters={"coefficients": coefficients, "gauge": gauge},
    )


FIXTURES: dict[str, Callable[..., ModelBundle]] = {
    "interval-branched": interval_branched,
    "sphere-branched": sphere_branched,
    "circle-cover": circle_cover,
    "sphere-cover": sphere_cover,
}

_WITH_COEFFICIENTS = {"circle-cover", "sphere-cover"}


def get_fixture(name: str, coefficients: Optional[str] = None) -> ModelBundle:
    """Get a fixture bundle by name."""
    if name not in FIXTURES:
        raise ValueError(f"Unknown fixture: {name}. Available: {list(FIXTURES.keys())}")
    if coefficients is not None and name in _WITH_COEFFICIENTS:
        return FIXTURES[name](coefficients)
    return FIXTURES[name]()


def load_fixture(name: str, coefficients: Optional[str] = None, chain_cap: int = 0) -> Model:
    return load_model(get_fixture(name, coefficients), chain_cap=chain_cap)


def generator_cocycle(model: Model, degree: int, index: int = 0,
                      invariants: bool = False) -> SiteCochain:
    """Representative of the index-th invariant generator of H^degree."""
    sheaf = model.invariants[0] if invariants else model.sheaf
    H = sheaf.cohomology(degree)
    gens = H.group.invariant_generators()
    if index >= len(gens):
        raise ValueError(f"H^{degree} = {H.group} has only {len(gens)} generators")
    return SiteCochain(sheaf, degree, H.rep_of(gens[index]))
