"""Seeded randomized property checks.

Each check draws random cocycles and lift data from ``numpy.random.default_rng``
and returns a ``PropertyCheckReport``. The ``verify`` command and the test
suite run the same functions, so a failure seen in one is reproducible in the
other from the seed alone.
"""

from __future__ import annotations

import logging
from typing import Callable, Iterable, Optional

import numpy as np

from descentiq.algebra.abelian import FgAbelianGroup, GroupElement, GroupHom
from descentiq.descent.classes import obstruction_class
from descentiq.descent.gerbes import (
    find_gerbe_lift,
    gerbe_obstruction,
    kappa_cochain,
    transport_gerbe_lift,
)
from descentiq.descent.torsors import (
    chi_cochain,
    find_torsor_lift,
    torsor_obstruction,
    transport_torsor_lift,
)
from descentiq.errors import CorruptedLift, NoConnecting, PreconditionError
from descentiq.groupcoh.bar import (
    GroupCochain,
    bar_differential,
    cyclic_cohomology_oracle,
    group_cohomology,
    periodic_cohomology,
)
from descentiq.groupcoh.finite import FiniteGroup
from descentiq.groupcoh.modules import GroupModule
from descentiq.lowdeg.double import LowDegreeComplex
from descentiq.lowdeg.exactness import composite_vanishing_check
from descentiq.lowdeg.theta import ThetaMaps, theta3, theta3_double, theta6, theta6_gerbe
from descentiq.models import PropertyCheckReport
from descentiq.sites.cohomology import order_complex_cohomology, weak_chain_cohomology
from descentiq.sites.constructions import internal_hom_morphism, invariants_sheaf
from descentiq.sites.sheaves import EquivariantSheaf, GTorsorCocycle, SheafMorphism, SiteCochain

logger = logging.getLogger(__name__)

COEFFICIENT_RANGE = 3


# ---------------------------------------------------------------------------
# Random data
# ---------------------------------------------------------------------------


def random_element(rng: np.random.Generator, group: FgAbelianGroup) -> GroupElement:
    coords = rng.integers(-COEFFICIENT_RANGE, COEFFICIENT_RANGE + 1, size=group.ngens)
    return group.element([int(c) for c in coords])


def random_combination(rng: np.random.Generator, group: FgAbelianGroup) -> GroupElement:
    x = group.zero()
    for gen in group.generators():
        x = x + gen * int(rng.integers(-COEFFICIENT_RANGE, COEFFICIENT_RANGE + 1))
    return x


def random_cochain(rng: np.random.Generator, A: EquivariantSheaf, degree: int) -> SiteCochain:
    return SiteCochain(A, degree, random_element(rng, A.cochain_group(degree)))


def random_coboundary(rng: np.random.Generator, A: EquivariantSheaf, degree: int) -> SiteCochain:
    """d of a random (degree - 1)-cochain."""
    return random_cochain(rng, A, degree - 1).coboundary()


def random_stable_cocycle(rng: np.random.Generator, A: EquivariantSheaf,
                          degree: int) -> SiteCochain:
    """A representative of a random G-stable class, moved by a random coboundary."""
    stable, incl = A.cohomology_module(degree).invariants
    cls = incl(random_combination(rng, stable))
    rep = SiteCochain(A, degree, A.cohomology(degree).rep_of(cls))
    return rep + random_coboundary(rng, A, degree)


def random_global_sections(rng: np.random.Generator, A: EquivariantSheaf,
                           count: int) -> list[SiteCochain]:
    M = A.global_sections_module.module
    return [A.section_cochain(random_element(rng, M)) for _ in range(count)]


def random_group_cocycle(rng: np.random.Generator, module: GroupModule,
                         degree: int) -> GroupCochain:
    """A representative of a random class plus a random bar coboundary."""
    H = group_cohomology(module.group, module, degree)
    cocycle = GroupCochain(module, degree, H.rep_of(random_combination(rng, H.group)))
    if degree == 0:
        return cocycle
    from_below = GroupCochain(module, degree - 1,
                              random_element(rng, H.complex.group(degree - 1)))
    return cocycle + bar_differential(from_below)


# ---------------------------------------------------------------------------
# Obstruction properties
# ---------------------------------------------------------------------------


def _run(name: str, trials: int, trial: Callable[[int], Optional[str]]) -> PropertyCheckReport:
    failures = []
    for k in range(trials):
        message = trial(k)
        if message:
            failures.append(f"trial {k}: {message}")
    report = PropertyCheckReport(name=name, trials=trials, passed=not failures,
                                 failures=failures)
    logger.info("%s: %d trials, %d failures", name, trials, len(failures))
    return report


def check_torsor_obstruction(A: EquivariantSheaf, rng: np.random.Generator,
                             trials: int) -> PropertyCheckReport:
    """chi is a bar cocycle and its class ignores perturbations of the lift."""
    order = A.group.order

    def trial(_: int) -> Optional[str]:
        L = find_torsor_lift(random_stable_cocycle(rng, A, 1))
        chi = chi_cochain(L)
        if not bar_differential(chi).is_zero():
            return "chi is not a bar cocycle"
        perturbed = L.perturb(random_global_sections(rng, A, order))
        if torsor_obstruction(perturbed).cls != obstruction_class(chi).cls:
            return "chi class moved under perturbation"
        return None

    return _run(f"torsor obstruction on {A.name}", trials, trial)


def check_gerbe_obstruction(A: EquivariantSheaf, rng: np.random.Generator,
                            trials: int) -> PropertyCheckReport:
    """kappa is a bar cocycle; its class ignores changes of f by sections and of e by d v."""
    order = A.group.order

    def trial(_: int) -> Optional[str]:
        try:
            L = find_gerbe_lift(random_stable_cocycle(rng, A, 2))
        except NoConnecting:
            return None
        kappa = kappa_cochain(A, L.f)
        if not bar_differential(kappa).is_zero():
            return "kappa is not a bar cocycle"
        perturbed = L.perturb(random_global_sections(rng, A, order * order))
        if gerbe_obstruction(perturbed).cls != obstruction_class(kappa).cls:
            return "kappa class moved under perturbation"
        regauged = L.regauge([random_cochain(rng, A, 0) for _ in range(order)])
        try:
            regauged.check()
        except CorruptedLift as exc:
            return f"regauged lift is broken: {exc}"
        if gerbe_obstruction(regauged).cls != obstruction_class(kappa).cls:
            return "kappa class moved when e changed by coboundaries"
        return None

    return _run(f"gerbe obstruction on {A.name}", trials, trial)


def coefficient_reduction(M: GTorsorCocycle, modulus: int = 2) -> SheafMorphism:
    """Z[M] -> (Z/modulus)[M], reduction of the coefficients in every coordinate."""
    Z = FgAbelianGroup.free(1)
    Zn = FgAbelianGroup.cyclic(modulus)
    reduce = GroupHom.from_images(Z, Zn, [Zn.generators()[0]])
    E = EquivariantSheaf.constant(M.site, Z, M.group, name="Z")
    En = EquivariantSheaf.constant(M.site, Zn, M.group, name=f"Z/{modulus}")
    f = SheafMorphism(E, En, {p: reduce for p in M.site.points})
    return internal_hom_morphism(f, M)


def _naturality_failure(f: SheafMorphism, rng: np.random.Generator) -> Optional[str]:
    """chi and kappa of a lift pushed along f against f applied to their values."""
    A, B = f.source, f.target
    on_sections = f.induced_map(0)
    target = B.global_sections_module
    L = find_torsor_lift(random_stable_cocycle(rng, A, 1))
    if chi_cochain(transport_torsor_lift(L, f)) != chi_cochain(L).map_values(target, on_sections):
        return f"chi not natural for {f}"
    try:
        Lg = find_gerbe_lift(random_stable_cocycle(rng, A, 2))
    except NoConnecting:
        return None
    moved = transport_gerbe_lift(Lg, f)
    if kappa_cochain(B, moved.f) != kappa_cochain(A, Lg.f).map_values(target, on_sections):
        return f"kappa not natural for {f}"
    return None


def check_functoriality(A: EquivariantSheaf, rng: np.random.Generator,
                        trials: int) -> PropertyCheckReport:
    """Lifts pushed along multiplication by k and along A^G -> A."""
    _, incl = invariants_sheaf(A)

    def trial(_: int) -> Optional[str]:
        k = int(rng.integers(2, 6))
        return (_naturality_failure(SheafMorphism.scalar(A, k), rng)
                or _naturality_failure(incl, rng))

    return _run(f"functoriality on {A.name}", trials, trial)


def check_naturality(f: SheafMorphism, rng: np.random.Generator,
                     trials: int) -> PropertyCheckReport:
    return _run(f"naturality of {f.source.name} -> {f.target.name}", trials,
                lambda _: _naturality_failure(f, rng))


# ---------------------------------------------------------------------------
# Cross-checks of the theta maps
# ---------------------------------------------------------------------------


def check_theta3_routes(A: EquivariantSheaf, rng: np.random.Generator,
                        trials: int) -> PropertyCheckReport:
    K = LowDegreeComplex(A, max_total_degree=2)

    def trial(_: int) -> Optional[str]:
        t = random_stable_cocycle(rng, A, 1)
        lifted, chased = theta3(t).cls, theta3_double(t, K).cls
        if lifted != chased:
            return f"lift route {lifted.invariant_coordinates()} != " \
                   f"double complex {chased.invariant_coordinates()}"
        return None

    return _run(f"theta3 routes on {A.name}", trials, trial)


def check_theta6_routes(A: EquivariantSheaf, rng: np.random.Generator,
                        trials: int) -> PropertyCheckReport:
    Y = A.cohomology_module(1)

    def trial(_: int) -> Optional[str]:
        y = random_group_cocycle(rng, Y, 1)
        formula, gerbe = theta6(y, A).cls, theta6_gerbe(y, A).cls
        if formula != gerbe:
            return f"formula {formula.invariant_coordinates()} != " \
                   f"gerbe {gerbe.invariant_coordinates()}"
        return None

    return _run(f"theta6 routes on {A.name}", trials, trial)


def check_composites(A: EquivariantSheaf) -> PropertyCheckReport:
    """theta_{k+1} o theta_k = 0 wherever both maps are defined."""
    thetas = ThetaMaps(A).all()
    failures = []
    for inner, outer in zip(thetas, thetas[1:]):
        if inner.defined and outer.defined and not (outer.hom @ inner.hom).is_zero():
            failures.append(f"{outer.name} o {inner.name} != 0")
    return PropertyCheckReport(name=f"composites on {A.name}", trials=len(thetas) - 1,
                               passed=not failures, failures=failures)


# ---------------------------------------------------------------------------
# Oracles
# ---------------------------------------------------------------------------


ORACLE_COEFFICIENTS = {
    "Z": FgAbelianGroup.free(1),
    "Z/2": FgAbelianGroup.cyclic(2),
    "Z/4": FgAbelianGroup.cyclic(4),
    "Z/6": FgAbelianGroup.cyclic(6),
    "Z^2": FgAbelianGroup.free(2),
}


def check_cyclic_oracle(max_order: int = 6, max_degree: int = 3) -> PropertyCheckReport:
    """Bar cohomology against the periodic resolution, trivial action."""
    failures = []
    trials = 0
    for n in range(1, max_order + 1):
        G = FiniteGroup.cyclic(n)
        generator = 1 if n > 1 else 0
        for label, coefficients in ORACLE_COEFFICIENTS.items():
            M = GroupModule.trivial(G, coefficients)
            for j in range(max_degree + 1):
                trials += 1
                bar = group_cohomology(G, M, j).group
                expected = cyclic_cohomology_oracle(n, M, j)
                periodic = periodic_cohomology(M, generator, j)
                if not (bar.is_isomorphic(expected) and bar.is_isomorphic(periodic)):
                    failures.append(f"H^{j}(Z/{n}, {label}): bar {bar}, oracle {expected}, "
                                    f"periodic {periodic}")
    return PropertyCheckReport(name="bar complex against cyclic oracle", trials=trials,
                               passed=not failures, failures=failures)


def check_site_oracles(sheaves: Iterable[EquivariantSheaf], max_degree: int = 2,
                       weak_chain_max_points: int = 8) -> PropertyCheckReport:
    """Strict chains against weak chains, and constant sheaves against the order complex."""
    failures = []
    trials = 0
    for F in sheaves:
        top = min(max_degree, F.site.height)
        constant = EquivariantSheaf.constant(F.site, FgAbelianGroup.free(1))
        for q in range(top + 1):
            trials += 1
            strict = constant.cohomology(q).group
            simplicial = order_complex_cohomology(F.site, FgAbelianGroup.free(1), q)
            if not strict.is_isomorphic(simplicial):
                failures.append(f"{F.name} H^{q}(Z): chains {strict}, order complex {simplicial}")
            if len(F.site.points) <= weak_chain_max_points:
                weak = weak_chain_cohomology(F, q)
                if not F.cohomology(q).group.is_isomorphic(weak):
                    failures.append(f"{F.name} H^{q}: strict {F.cohomology(q).group}, weak {weak}")
    return PropertyCheckReport(name="site complex oracles", trials=trials,
                               passed=not failures, failures=failures)


# ---------------------------------------------------------------------------
# Suite
# ---------------------------------------------------------------------------


def run_property_suite(sheaves: Iterable[EquivariantSheaf], seed: int, trials: int,
                       theta_trials: int = 50, oracle_max_order: int = 6,
                       oracle_max_degree: int = 3,
                       weak_chain_max_points: int = 8,
                       morphisms: Iterable[SheafMorphism] = ()) -> list[PropertyCheckReport]:
    """Every check on every sheaf and morphism, drawing from one generator seeded once."""
    rng = np.random.default_rng(seed)
    sheaves = list(sheaves)
    reports = [
        check_cyclic_oracle(oracle_max_order, oracle_max_degree),
        check_site_oracles(sheaves, weak_chain_max_points=weak_chain_max_points),
    ]
    for A in sheaves:
        reports.append(check_torsor_obstruction(A, rng, trials))
        reports.append(check_gerbe_obstruction(A, rng, trials))
        reports.append(check_functoriality(A, rng, trials))
        reports.append(check_theta3_routes(A, rng, theta_trials))
        reports.append(check_theta6_routes(A, rng, theta_trials))
        reports.append(check_composites(A))
        try:
            reports.append(composite_vanishing_check(A))
        except PreconditionError as exc:
            reports.append(PropertyCheckReport(name=f"theta6 on homomorphisms ({A.name})",
                                               passed=False, failures=[str(exc)]))
    for f in morphisms:
        reports.append(check_naturality(f, rng, trials))
    return reports
