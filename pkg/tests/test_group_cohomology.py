"""Tests for finite groups, modules and bar cohomology."""

import numpy as np
import pytest

from descentiq.algebra.abelian import FgAbelianGroup, GroupHom
from descentiq.checks import check_cyclic_oracle
from descentiq.errors import ModelError, NontrivialAction, NotNormal
from descentiq.groupcoh.bar import (
    GroupCochain,
    Inflation,
    bar_coboundary_witness,
    bar_differential,
    cochain_class,
    cochain_group,
    cyclic_cohomology_oracle,
    group_cohomology,
    periodic_cohomology,
)
from descentiq.groupcoh.finite import FiniteGroup, enumerate_homomorphisms
from descentiq.groupcoh.modules import GroupModule

Z = FgAbelianGroup.free(1)


def _make_sign_module(G: FiniteGroup) -> GroupModule:
    """Z on which the nonidentity element of Z/2 acts by -1."""
    return GroupModule(G, Z, [GroupHom.identity(Z), GroupHom.scalar(Z, -1)])


def _h(G, M, n) -> str:
    return str(group_cohomology(G, M, n).group)


class TestFiniteGroup:
    def test_cyclic_table(self):
        G = FiniteGroup.cyclic(4)
        assert G.mul(3, 2) == 1
        assert G.inv(1) == 3
        assert G.generating_set() == [1]

    def test_bad_table_rejected(self):
        with pytest.raises(ModelError):
            FiniteGroup(["e", "a"], [[0, 1], [1, 1]])

    def test_dihedral_is_nonabelian(self):
        S3 = FiniteGroup.symmetric3()
        assert S3.order == 6
        assert not S3.is_abelian()

    def test_quotient(self):
        G = FiniteGroup.cyclic(4)
        Q, proj = G.quotient([0, 2])
        assert Q.order == 2
        assert proj == [0, 1, 0, 1]

    def test_non_normal_subgroup(self):
        S3 = FiniteGroup.symmetric3()
        with pytest.raises(NotNormal):
            S3.quotient([0, 3])

    def test_enumerate_homomorphisms(self):
        G = FiniteGroup.cyclic(4)
        Z2 = FgAbelianGroup.cyclic(2)
        homs = enumerate_homomorphisms(G, list(Z2.elements()), lambda a, b: a + b, Z2.zero())
        assert len(homs) == 2
        assert all(len(phi) == 4 for phi in homs)


class TestModules:
    def test_action_law_checked(self):
        G = FiniteGroup.cyclic(3)
        with pytest.raises(ModelError):
            GroupModule(G, Z, [GroupHom.identity(Z), GroupHom.scalar(Z, -1),
                                GroupHom.scalar(Z, -1)])

    def test_permutation_invariants(self):
        M = GroupModule.permutation(FiniteGroup.cyclic(3), Z)
        assert str(M.invariants[0]) == "Z"

    def test_fixed_submodule(self):
        G = FiniteGroup.cyclic(2)
        M = _make_sign_module(G)
        sub, _, _ = M.fixed_submodule([0, 1])
        assert sub.module.is_trivial()


class TestBarCohomology:
    def setup_method(self):
        self.G = FiniteGroup.cyclic(2)
        self.trivial_z = GroupModule.trivial(self.G, Z)

    def test_trivial_coefficients(self):
        assert _h(self.G, self.trivial_z, 0) == "Z"
        assert _h(self.G, self.trivial_z, 1) == "0"
        assert _h(self.G, self.trivial_z, 2) == "Z/2"
        assert _h(self.G, self.trivial_z, 3) == "0"

    def test_sign_action(self):
        M = _make_sign_module(self.G)
        assert _h(self.G, M, 0) == "0"
        assert _h(self.G, M, 1) == "Z/2"
        assert _h(self.G, M, 2) == "0"

    def test_permutation_module_is_acyclic(self):
        M = GroupModule.permutation(self.G, Z)
        assert _h(self.G, M, 1) == "0"
        assert _h(self.G, M, 2) == "0"

    def test_klein_four(self):
        V = FiniteGroup.product(FiniteGroup.cyclic(2), FiniteGroup.cyclic(2))
        M = GroupModule.trivial(V, FgAbelianGroup.cyclic(2))
        assert _h(V, M, 1) == "Z/2 + Z/2"

    def test_s3(self):
        S3 = FiniteGroup.symmetric3()
        assert _h(S3, GroupModule.trivial(S3, FgAbelianGroup.cyclic(2)), 1) == "Z/2"
        assert _h(S3, GroupModule.trivial(S3, Z), 2) == "Z/2"

    def test_differential_squares_to_zero(self):
        rng = np.random.default_rng(0)
        M = _make_sign_module(self.G)
        for n in range(3):
            coords = [int(v) for v in rng.integers(-5, 6, size=2 ** n)]
            c = GroupCochain(M, n, cochain_group(M, n).element(coords))
            assert bar_differential(bar_differential(c)).is_zero()

    def test_coboundary_witness(self):
        c = GroupCochain.from_function(self.trivial_z, 0, lambda t: Z.element([3]))
        dc = bar_differential(c)
        assert dc.is_zero()
        w = bar_coboundary_witness(bar_differential(
            GroupCochain.from_function(self.trivial_z, 1, lambda t: Z.element([t[0]]))))
        assert w is not None

    def test_nonzero_class_has_no_witness(self):
        H = group_cohomology(self.G, self.trivial_z, 2)
        c = GroupCochain(self.trivial_z, 2, H.rep_of(H.group.invariant_generators()[0]))
        assert bar_coboundary_witness(c) is None
        assert not cochain_class(c).is_zero()


class TestOracles:
    def test_periodic_matches_bar_for_sign_action(self):
        G = FiniteGroup.cyclic(2)
        M = _make_sign_module(G)
        for j in range(4):
            assert periodic_cohomology(M, 1, j).is_isomorphic(group_cohomology(G, M, j).group)

    def test_trivial_oracle_rejects_actions(self):
        G = FiniteGroup.cyclic(2)
        with pytest.raises(NontrivialAction):
            cyclic_cohomology_oracle(2, _make_sign_module(G), 1)

    def test_oracle_grid_low_degrees(self):
        report = check_cyclic_oracle(max_order=6, max_degree=2)
        assert report.passed, report.failures
        assert report.trials == 6 * 5 * 3

    def test_oracle_grid_degree_three(self):
        report = check_cyclic_oracle(max_order=4, max_degree=3)
        assert report.passed, report.failures
        assert report.trials == 4 * 5 * 4


class TestInflation:
    def test_degree_two_inflation_injective(self):
        G = FiniteGroup.cyclic(4)
        infl = Inflation(GroupModule.trivial(G, Z), [0, 2], 2)
        assert str(infl.source.group) == "Z/2"
        assert str(infl.target.group) == "Z/4"
        assert infl.hom.is_injective()

    def test_degree_one_inflation_iso(self):
        G = FiniteGroup.cyclic(4)
        infl = Inflation(GroupModule.trivial(G, FgAbelianGroup.cyclic(2)), [0, 2], 1)
        assert infl.hom.is_injective()
        assert infl.hom.is_surjective()
