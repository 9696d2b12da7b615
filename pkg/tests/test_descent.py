"""Tests for lifting actions to torsors and gerbes and the obstruction classes."""

import numpy as np
import pytest

from descentiq.algebra.abelian import FgAbelianGroup, GroupHom
from descentiq.checks import (
    check_functoriality,
    check_gerbe_obstruction,
    check_naturality,
    coefficient_reduction,
)
from descentiq.descent.gerbes import (
    GerbeLift,
    adjust_gerbe_lift,
    canonical_gerbe_lift,
    connecting_class,
    connecting_obstruction_map,
    find_gerbe_lift,
    fixed_point_gerbe,
    gerbe_obstruction,
    gerbe_obstruction_vanishes,
    is_induced_gerbe,
    kappa_cochain,
    kill_gerbe_obstruction,
)
from descentiq.descent.torsors import (
    TorsorLift,
    canonical_lift,
    chi_cochain,
    find_torsor_lift,
    fixed_point_torsor,
    is_induced_torsor,
    torsor_obstruction,
    transport_torsor_lift,
)
from descentiq.errors import (
    CorruptedLift,
    LocalVanishingFailure,
    ModelError,
    NotACocycle,
    NotStable,
    ObstructionNonzero,
)
from descentiq.fixtures import circle4_poset, generator_cocycle, load_fixture
from descentiq.groupcoh.bar import GroupCochain, bar_differential, group_cohomology
from descentiq.groupcoh.finite import FiniteGroup
from descentiq.sites.constructions import invariants_sheaf
from descentiq.sites.poset import PosetSite
from descentiq.sites.sheaves import EquivariantSheaf, SheafMorphism, SiteCochain, twist

Z = FgAbelianGroup.free(1)


def _make_sign_sheaf(site: PosetSite) -> EquivariantSheaf:
    """Constant Z with the nonidentity element of Z/2 acting by -1."""
    G = FiniteGroup.cyclic(2)
    restrictions = {pair: GroupHom.identity(Z) for pair in site.covering_pairs()}
    action = {p: [GroupHom.identity(Z), GroupHom.scalar(Z, -1)] for p in site.points}
    return EquivariantSheaf(site, G, {p: Z for p in site.points}, restrictions, action)


def _generator(F: EquivariantSheaf, degree: int) -> SiteCochain:
    H = F.cohomology(degree)
    return SiteCochain(F, degree, H.rep_of(H.group.invariant_generators()[0]))


def _global_sections(A: EquivariantSheaf, count: int) -> list[SiteCochain]:
    gens = A.cohomology(0).group.invariant_generators()
    return [A.section_cochain(gens[i % len(gens)] * (i + 1)) for i in range(count)]


@pytest.fixture(scope="module")
def circle_cover():
    return load_fixture("circle-cover")


@pytest.fixture(scope="module")
def interval_branched():
    return load_fixture("interval-branched")


@pytest.fixture(scope="module")
def sphere_branched():
    return load_fixture("sphere-branched")


@pytest.fixture(scope="module")
def sphere_cover():
    return load_fixture("sphere-cover")


class TestTorsorLift:
    def test_lift_satisfies_equations(self, circle_cover):
        t = generator_cocycle(circle_cover, 1)
        L = find_torsor_lift(t)
        L.check()
        for g, bg in enumerate(L.b):
            assert bg.coboundary() == twist(g, t) - t

    def test_chi_is_a_bar_cocycle(self, circle_cover):
        L = find_torsor_lift(generator_cocycle(circle_cover, 1))
        assert bar_differential(chi_cochain(L)).is_zero()

    def test_non_induced_class_has_nonzero_obstruction(self, circle_cover):
        t = generator_cocycle(circle_cover, 1)
        assert not is_induced_torsor(t).induced
        obs = torsor_obstruction(find_torsor_lift(t))
        assert str(obs.group) == "Z/2"
        assert not obs.is_zero()
        with pytest.raises(ObstructionNonzero) as exc:
            fixed_point_torsor(find_torsor_lift(t))
        assert exc.value.degree == 2

    def test_obstruction_ignores_perturbation(self, circle_cover):
        A = circle_cover.sheaf
        L = find_torsor_lift(generator_cocycle(circle_cover, 1))
        moved = L.perturb(_global_sections(A, A.group.order))
        moved.check()
        assert torsor_obstruction(moved).cls == torsor_obstruction(L).cls

    def test_perturbation_must_be_closed(self, circle_cover):
        A = circle_cover.sheaf
        L = find_torsor_lift(generator_cocycle(circle_cover, 1))
        bump = SiteCochain.from_values(A, 0, {("v0",): [1, 0]})
        with pytest.raises(ModelError):
            L.perturb([bump, bump])

    def test_corrupted_lift_detected(self, circle_cover):
        A = circle_cover.sheaf
        L = find_torsor_lift(generator_cocycle(circle_cover, 1))
        bump = SiteCochain.from_values(A, 0, {("v0",): [1, 0]})
        with pytest.raises(CorruptedLift):
            TorsorLift(L.torsor, (L.b[0], L.b[1] + bump)).check()

    def test_unstable_class(self):
        A = _make_sign_sheaf(circle4_poset().build())
        t = _generator(A, 1)
        with pytest.raises(NotStable) as exc:
            find_torsor_lift(t)
        assert exc.value.element == 1
        assert exc.value.moved_class != [0]

    def test_wrong_degree(self, circle_cover):
        with pytest.raises(ModelError, match="1-cocycle"):
            find_torsor_lift(SiteCochain.zero(circle_cover.sheaf, 0))

    def test_non_cocycle(self, sphere_cover):
        z = SiteCochain.from_values(sphere_cover.sheaf, 1, {("N", "v0"): [1, 0]})
        with pytest.raises(NotACocycle):
            find_torsor_lift(z)

    def test_trivial_group(self):
        F = EquivariantSheaf.constant(circle4_poset().build(), Z)
        t = _generator(F, 1)
        L = find_torsor_lift(t)
        assert torsor_obstruction(L).is_zero()
        assert is_induced_torsor(t).induced


class TestTorsorDescent:
    def test_local_vanishing_failure_at_branch_points(self, interval_branched):
        t = generator_cocycle(interval_branched, 1)
        assert not is_induced_torsor(t).induced
        L = find_torsor_lift(t)
        with pytest.raises(LocalVanishingFailure) as exc:
            fixed_point_torsor(L)
        assert exc.value.degree == 1
        assert set(exc.value.failures) <= {"P", "Q"}

    def test_canonical_lift_descends(self, circle_cover):
        A = circle_cover.sheaf
        AG, incl = invariants_sheaf(A)
        tbar = generator_cocycle(circle_cover, 1, invariants=True)
        L = canonical_lift(tbar, A)
        L.check()
        assert chi_cochain(L).is_zero()
        descended = fixed_point_torsor(L)
        assert descended.sheaf is AG
        assert descended.is_cocycle()
        assert (incl.apply_cochain(descended).cohomology_class()
                == L.torsor.cohomology_class())

    def test_canonical_lift_needs_invariants(self, circle_cover):
        with pytest.raises(ModelError):
            canonical_lift(generator_cocycle(circle_cover, 1), circle_cover.sheaf)

    def test_transport_along_scalar(self, circle_cover):
        A = circle_cover.sheaf
        L = find_torsor_lift(generator_cocycle(circle_cover, 1))
        moved = transport_torsor_lift(L, SheafMorphism.scalar(A, 3))
        moved.check()
        assert torsor_obstruction(moved).cls == torsor_obstruction(L).cls * 3


class TestGerbeLift:
    def test_branched_sphere_generator(self, sphere_branched):
        m = generator_cocycle(sphere_branched, 2)
        assert connecting_class(m).is_zero()
        L = find_gerbe_lift(m)
        L.check()
        assert gerbe_obstruction(L).is_zero()
        assert gerbe_obstruction_vanishes(L)

    def test_good_class_that_does_not_descend(self, sphere_branched):
        m = generator_cocycle(sphere_branched, 2)
        check = is_induced_gerbe(m)
        assert not check.induced
        assert check.cokernel_coords
        with pytest.raises(LocalVanishingFailure):
            fixed_point_gerbe(find_gerbe_lift(m))

    def test_twice_the_generator_is_induced(self, sphere_branched):
        m = generator_cocycle(sphere_branched, 2)
        check = is_induced_gerbe(m + m)
        assert check.induced
        assert check.witness.is_cocycle()

    def test_stable_class_descends(self, sphere_cover):
        A = sphere_cover.sheaf
        t = generator_cocycle(sphere_cover, 2)
        m = t + twist(1, t)
        L = find_gerbe_lift(m)
        L.check()
        _, incl = invariants_sheaf(A)
        mbar = fixed_point_gerbe(L)
        assert incl.apply_cochain(mbar).cohomology_class() == m.cohomology_class()

    def test_obstruction_ignores_perturbation(self, sphere_cover):
        A = sphere_cover.sheaf
        t = generator_cocycle(sphere_cover, 2)
        L = find_gerbe_lift(t + twist(1, t))
        moved = L.perturb(_global_sections(A, A.group.order ** 2))
        moved.check()
        assert gerbe_obstruction(moved).cls == gerbe_obstruction(L).cls

    def test_unstable_gerbe(self):
        A = _make_sign_sheaf(circle4_poset().build().suspension())
        m = _generator(A, 2)
        with pytest.raises(NotStable):
            find_gerbe_lift(m)

    def test_wrong_degree(self, sphere_branched):
        with pytest.raises(ModelError, match="2-cocycle"):
            find_gerbe_lift(SiteCochain.zero(sphere_branched.sheaf, 1))

    def test_canonical_gerbe_lift(self, sphere_branched):
        A = sphere_branched.sheaf
        mbar = generator_cocycle(sphere_branched, 2, invariants=True)
        L = canonical_gerbe_lift(mbar, A)
        L.check()
        assert gerbe_obstruction(L).is_zero()
        assert isinstance(L, GerbeLift)
        assert len(L.f) == A.group.order ** 2


class TestGerbeLiftChanges:
    def test_regauge_keeps_kappa(self, sphere_cover):
        A = sphere_cover.sheaf
        t = generator_cocycle(sphere_cover, 2)
        L = find_gerbe_lift(t + twist(1, t))
        gens = A.cochain_group(0).generators()
        v = [SiteCochain(A, 0, gens[g % len(gens)] * (g + 2)) for g in A.group.elements()]
        moved = L.regauge(v)
        moved.check()
        assert moved.e != L.e
        assert kappa_cochain(A, moved.f) == kappa_cochain(A, L.f)

    def test_regauge_needs_one_cochain_per_element(self, sphere_cover):
        A = sphere_cover.sheaf
        L = find_gerbe_lift(SiteCochain.zero(A, 2))
        with pytest.raises(ModelError):
            L.regauge([SiteCochain.zero(A, 0)])

    def test_adjusting_e_moves_kappa_and_can_be_undone(self, circle_cover):
        A = circle_cover.sheaf
        L = find_gerbe_lift(SiteCochain.zero(A, 2))
        L.check()
        assert gerbe_obstruction(L).is_zero()
        module = A.cohomology_module(1)
        H = group_cohomology(A.group, module, 1)
        assert str(H.group) == "Z/2"
        gen = H.group.invariant_generators()[0]
        adjusted = adjust_gerbe_lift(L, GroupCochain(module, 1, H.rep_of(gen)))
        adjusted.check()
        obs = gerbe_obstruction(adjusted)
        assert not obs.is_zero()
        assert obs.cls == connecting_obstruction_map(A)(gen)
        assert gerbe_obstruction_vanishes(adjusted)
        killed = kill_gerbe_obstruction(adjusted)
        killed.check()
        assert killed.gerbe == adjusted.gerbe
        assert gerbe_obstruction(killed).is_zero()

    def test_gerbe_checks_pass(self, sphere_cover):
        rng = np.random.default_rng(3)
        assert check_gerbe_obstruction(sphere_cover.sheaf, rng, 3).passed


class TestNaturality:
    def test_reduction_of_coefficients(self):
        model = load_fixture("circle-cover", "Z")
        f = coefficient_reduction(model.torsor)
        assert str(f.source.cohomology(1).group) == "Z"
        assert str(f.target.cohomology(1).group) == "Z/2"
        L = find_torsor_lift(_generator(f.source, 1))
        moved = transport_torsor_lift(L, f)
        moved.check()
        B = f.target
        expected = chi_cochain(L).map_values(B.global_sections_module, f.induced_map(0))
        assert chi_cochain(moved) == expected
        assert not f.induced_map(1).is_zero()

    def test_inclusion_of_invariants(self, circle_cover):
        A = circle_cover.sheaf
        AG, incl = circle_cover.invariants
        L = find_torsor_lift(generator_cocycle(circle_cover, 1, invariants=True))
        moved = transport_torsor_lift(L, incl)
        moved.check()
        assert moved.sheaf is A
        expected = chi_cochain(L).map_values(A.global_sections_module, incl.induced_map(0))
        assert chi_cochain(moved) == expected

    def test_transport_from_another_sheaf_rejected(self, circle_cover):
        L = find_torsor_lift(generator_cocycle(circle_cover, 1))
        with pytest.raises(ModelError):
            transport_torsor_lift(L, circle_cover.invariants[1])

    def test_property_checks(self, circle_cover):
        rng = np.random.default_rng(11)
        assert check_functoriality(circle_cover.sheaf, rng, 3).passed
        assert check_naturality(coefficient_reduction(circle_cover.torsor), rng, 3).passed
