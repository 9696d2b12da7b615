"""Tests for equivariant sheaves, site cochains, morphisms and G-torsors."""

import pytest

from descentiq.algebra.abelian import FgAbelianGroup, GroupHom
from descentiq.errors import DegreeAboveChainCap, ModelError, NotACocycle, PreconditionError
from descentiq.fixtures import interval_poset, load_fixture
from descentiq.groupcoh.finite import FiniteGroup
from descentiq.sites.poset import PosetSite
from descentiq.sites.sheaves import (
    EquivariantSheaf,
    GTorsorCocycle,
    SheafMorphism,
    SiteCochain,
    parse_chain_key,
    twist,
)

Z = FgAbelianGroup.free(1)


def _make_chain() -> PosetSite:
    return PosetSite(["a", "b", "c"], [("a", "b"), ("b", "c")])


def _make_sign_sheaf(site: PosetSite, points=None) -> EquivariantSheaf:
    """Z everywhere, identity restrictions, Z/2 acting by -1 on ``points``."""
    G = FiniteGroup.cyclic(2)
    points = site.points if points is None else points
    restrictions = {pair: GroupHom.identity(Z) for pair in site.covering_pairs()}
    action = {p: [GroupHom.identity(Z), GroupHom.scalar(Z, -1)] for p in points}
    return EquivariantSheaf(site, G, {p: Z for p in site.points}, restrictions, action)


class TestEquivariantSheaf:
    def setup_method(self):
        self.site = interval_poset().build()
        self.F = EquivariantSheaf.constant(self.site, Z)

    def test_cochain_groups(self):
        assert str(self.F.cochain_group(0)) == "Z^3"
        assert str(self.F.cochain_group(1)) == "Z^2"
        assert self.F.cochain_group(2).is_trivial()

    def test_missing_stalk(self):
        with pytest.raises(ModelError, match="No stalk"):
            EquivariantSheaf(self.site, FiniteGroup.trivial(), {"P": Z}, {})

    def test_missing_restriction(self):
        stalks = {p: Z for p in self.site.points}
        with pytest.raises(ModelError, match="covering pair"):
            EquivariantSheaf(self.site, FiniteGroup.trivial(), stalks,
                             {("P", "I"): GroupHom.identity(Z)})

    def test_restriction_on_incomparable_pair(self):
        stalks = {p: Z for p in self.site.points}
        restrictions = {pair: GroupHom.identity(Z) for pair in self.site.covering_pairs()}
        restrictions[("P", "Q")] = GroupHom.identity(Z)
        with pytest.raises(ModelError, match="non-comparable"):
            EquivariantSheaf(self.site, FiniteGroup.trivial(), stalks, restrictions)

    def test_inconsistent_composite(self):
        site = _make_chain()
        restrictions = {("a", "b"): GroupHom.identity(Z), ("b", "c"): GroupHom.identity(Z),
                        ("a", "c"): GroupHom.scalar(Z, 2)}
        with pytest.raises(ModelError, match="disagrees"):
            EquivariantSheaf(site, FiniteGroup.trivial(), {p: Z for p in site.points},
                             restrictions)

    def test_composed_restriction(self):
        site = _make_chain()
        restrictions = {("a", "b"): GroupHom.scalar(Z, 2), ("b", "c"): GroupHom.scalar(Z, 3)}
        F = EquivariantSheaf(site, FiniteGroup.trivial(), {p: Z for p in site.points},
                             restrictions)
        assert F.restriction("a", "c").equals(GroupHom.scalar(Z, 6))

    def test_action_must_commute_with_restriction(self):
        with pytest.raises(ModelError, match="does not commute"):
            _make_sign_sheaf(self.site, points=["P"])

    def test_sign_sheaf_sections(self):
        A = _make_sign_sheaf(self.site)
        assert not A.is_trivial_action()
        assert A.global_sections_module.module.free_rank == 1
        assert str(A.underlying().cohomology(0).group) == "Z"

    def test_global_sections_roundtrip(self):
        s = self.F.cohomology(0).group.invariant_generators()[0]
        z = self.F.section_cochain(s)
        assert z.is_cocycle()
        assert self.F.global_section(z) == s

    def test_degree_above_chain_cap(self):
        site = PosetSite(["a", "b", "c"], [("a", "b"), ("b", "c")], chain_cap=1)
        F = EquivariantSheaf.constant(site, Z)
        assert str(F.cohomology(0).group) == "Z"
        with pytest.raises(DegreeAboveChainCap, match=r"H\^1 needs chains of length 2"):
            F.cohomology(1)

    def test_chain_cap_above_height_is_harmless(self):
        site = PosetSite(["a", "b"], [("a", "b")], chain_cap=1)
        F = EquivariantSheaf.constant(site, Z)
        assert str(F.cohomology(1).group) == "0"
        assert issubclass(DegreeAboveChainCap, PreconditionError)


class TestSiteCochain:
    def setup_method(self):
        self.F = EquivariantSheaf.constant(_make_chain(), Z)

    def test_from_values_and_lookup(self):
        z = SiteCochain.from_values(self.F, 1, {("a", "b"): [4]})
        assert z[("a", "b")] == Z.element([4])
        assert z[("b", "c")].is_zero()
        assert z.as_table() == {"a<b": [4]}

    def test_unknown_chain(self):
        with pytest.raises(ModelError, match="not a strict chain"):
            SiteCochain.from_values(self.F, 1, {("c", "a"): [1]})

    def test_wrong_width(self):
        with pytest.raises(ModelError, match="coordinates"):
            SiteCochain.from_values(self.F, 1, {("a", "b"): [1, 2]})

    def test_coboundaries_are_cocycles(self):
        f = SiteCochain.from_values(self.F, 0, {("a",): [1], ("c",): [5]})
        assert f.coboundary().is_cocycle()

    def test_require_cocycle(self):
        z = SiteCochain.from_values(self.F, 1, {("a", "b"): [1]})
        assert not z.is_cocycle()
        with pytest.raises(NotACocycle):
            z.require_cocycle()

    def test_arithmetic(self):
        x = SiteCochain.from_values(self.F, 1, {("a", "b"): [1]})
        y = SiteCochain.from_values(self.F, 1, {("b", "c"): [2]})
        assert (x + y - y) == x
        assert (-x + x).is_zero()

    def test_chain_keys(self):
        assert parse_chain_key("a < b<c") == ("a", "b", "c")


class TestTwist:
    @pytest.fixture(autouse=True)
    def _model(self):
        self.model = load_fixture("circle-cover")
        self.A = self.model.sheaf

    def test_twist_is_an_action(self):
        H = self.A.cohomology(1)
        z = SiteCochain(self.A, 1, H.rep_of(H.group.invariant_generators()[0]))
        assert twist(1, twist(1, z)) == z
        assert twist(0, z) == z
        assert twist(1, z).is_cocycle()

    def test_cohomology_module(self):
        module = self.A.cohomology_module(1)
        assert str(module.module) == "Z/2"
        assert module.is_trivial_action()


class TestSheafMorphism:
    def setup_method(self):
        self.site = interval_poset().build()
        self.F = EquivariantSheaf.constant(self.site, Z)

    def test_scalar_induced_map(self):
        h = SheafMorphism.scalar(self.F, 2).induced_map(0)
        assert str(h.cokernel[0]) == "Z/2"
        assert SheafMorphism.identity(self.F).induced_map(0).is_surjective()

    def test_apply_and_compose(self):
        z = SiteCochain.from_values(self.F, 1, {("P", "I"): [3]})
        two = SheafMorphism.scalar(self.F, 2)
        assert two.apply_cochain(z) == z + z
        six = SheafMorphism.scalar(self.F, 3).compose(two)
        assert all(six.maps[p].equals(GroupHom.scalar(Z, 6)) for p in self.site.points)
        assert not six.is_isomorphism()

    def test_non_natural_rejected(self):
        maps = {"P": GroupHom.scalar(Z, 2), "Q": GroupHom.identity(Z), "I": GroupHom.identity(Z)}
        with pytest.raises(ModelError, match="not natural"):
            SheafMorphism(self.F, self.F, maps)

    def test_non_equivariant_rejected(self):
        G = FiniteGroup.cyclic(2)
        trivial = self.F.with_group(G)
        sign = _make_sign_sheaf(self.site)
        maps = {p: GroupHom.identity(Z) for p in self.site.points}
        with pytest.raises(ModelError, match="not equivariant"):
            SheafMorphism(trivial, sign, maps)


class TestGTorsorCocycle:
    def setup_method(self):
        self.G = FiniteGroup.cyclic(2)

    def test_trivial(self):
        M = GTorsorCocycle.trivial(_make_chain(), self.G)
        assert M.is_trivial()
        assert M.transition("a", "c") == 0

    def test_composite_transition(self):
        M = GTorsorCocycle(_make_chain(), self.G, {("a", "b"): 1, ("b", "c"): 1})
        assert M.transition("a", "c") == 0

    def test_cocycle_law_checked(self):
        with pytest.raises(ModelError, match="disagrees"):
            GTorsorCocycle(_make_chain(), self.G, {("a", "b"): 1, ("b", "c"): 0, ("a", "c"): 0})

    def test_missing_transition(self):
        with pytest.raises(ModelError):
            GTorsorCocycle(_make_chain(), self.G, {("a", "b"): 1})

    def test_gauge_roundtrip(self):
        site = interval_poset().build()
        M = GTorsorCocycle.from_gauge(site, self.G, {"P": 1, "Q": 0, "I": 0})
        assert not M.is_trivial()
        gauge = M.is_trivializable()
        assert gauge is not None
        for x, y in site.covering_pairs():
            assert M.transition(x, y) == self.G.mul(gauge[y], self.G.inv(gauge[x]))

    def test_cover_torsor_has_no_gauge(self):
        M = load_fixture("circle-cover").torsor
        assert M.is_trivializable() is None
