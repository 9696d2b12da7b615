"""Tests for poset sites, site constructions and the cohomology oracles."""

import pytest

from descentiq.algebra.abelian import FgAbelianGroup
from descentiq.errors import ModelError
from descentiq.fixtures import circle4_poset, interval_poset, load_fixture
from descentiq.groupcoh.finite import FiniteGroup
from descentiq.sites.cohomology import (
    order_complex_cohomology,
    sections,
    sheaf_cohomology,
    weak_chain_cohomology,
)
from descentiq.sites.constructions import (
    adjunction_bijection,
    contracted_product,
    internal_hom_torsor,
    invariants_sheaf,
    pushforward,
    stalkwise_local_vanishing,
)
from descentiq.sites.poset import PosetAction, PosetMap, PosetSite
from descentiq.sites.sheaves import EquivariantSheaf

Z = FgAbelianGroup.free(1)
Z2 = FgAbelianGroup.cyclic(2)


def _make_chain(chain_cap: int = 0) -> PosetSite:
    return PosetSite(["a", "b", "c"], [("a", "b"), ("b", "c")], chain_cap=chain_cap)


@pytest.fixture(scope="module")
def circle_cover():
    return load_fixture("circle-cover")


@pytest.fixture(scope="module")
def interval_branched():
    return load_fixture("interval-branched")


class TestPosetSite:
    def setup_method(self):
        self.site = interval_poset().build()

    def test_order(self):
        assert self.site.leq("P", "I")
        assert not self.site.leq("I", "P")
        assert self.site.up_set("P") == ["P", "I"]
        assert self.site.minimal_points() == ["P", "Q"]
        assert self.site.maximal_points() == ["I"]

    def test_opens_are_up_sets(self):
        assert self.site.is_open(["I"])
        assert self.site.open_violation(["P"]) == ("P", "I")

    def test_chains(self):
        assert self.site.height == 1
        assert self.site.chains(1) == [("P", "I"), ("Q", "I")]
        assert self.site.chains(2) == []
        assert len(self.site.weak_chains(1)) == 5

    def test_transitive_pairs_are_not_covering(self):
        site = _make_chain()
        assert site.covering_pairs() == [("a", "b"), ("b", "c")]
        assert ("a", "c") in site.comparable_pairs()

    def test_cycle_rejected(self):
        with pytest.raises(ModelError, match="Antisymmetry"):
            PosetSite(["a", "b"], [("a", "b"), ("b", "a")])

    def test_unknown_point_rejected(self):
        with pytest.raises(ModelError):
            PosetSite(["a"], [("a", "z")])

    def test_chain_cap(self):
        site = _make_chain(chain_cap=1)
        assert len(site.chains(1)) == 3
        with pytest.raises(ValueError):
            site.chains(2)

    def test_suspension(self):
        sphere = circle4_poset().build().suspension()
        assert sphere.height == 2
        assert sphere.minimal_points() == ["N", "S"]

    def test_restrict(self):
        sub = _make_chain().restrict(["a", "c"])
        assert sub.leq("a", "c")
        assert sub.covering_pairs() == [("a", "c")]


class TestPosetMaps:
    def setup_method(self):
        self.base = interval_poset().build()
        self.top = PosetSite(["p", "q", "u", "l"],
                             [("p", "u"), ("p", "l"), ("q", "u"), ("q", "l")])

    def test_fiber(self):
        pi = PosetMap(self.top, self.base, {"p": "P", "q": "Q", "u": "I", "l": "I"})
        assert pi.fiber("I") == ["u", "l"]
        assert pi.preimage(["P", "I"]) == ["p", "u", "l"]

    def test_non_monotone_map_rejected(self):
        with pytest.raises(ModelError, match="monotone"):
            PosetMap(self.top, self.base, {"p": "I", "q": "Q", "u": "P", "l": "I"})

    def test_undefined_map_rejected(self):
        with pytest.raises(ModelError):
            PosetMap(self.top, self.base, {"p": "P"})

    def test_deck_action(self):
        G = FiniteGroup.cyclic(2)
        identity = {p: p for p in self.top.points}
        swap = {"p": "p", "q": "q", "u": "l", "l": "u"}
        deck = PosetAction(self.top, G, [identity, swap])
        assert deck.orbit("u") == ["u", "l"]
        assert deck.stabilizer("p") == [0, 1]
        assert deck.inverse(1, "u") == "l"

    def test_identity_must_fix_points(self):
        G = FiniteGroup.cyclic(2)
        swap = {"p": "p", "q": "q", "u": "l", "l": "u"}
        with pytest.raises(ModelError):
            PosetAction(self.top, G, [swap, swap])

    def test_wrong_number_of_maps(self):
        with pytest.raises(ModelError):
            PosetAction(self.top, FiniteGroup.cyclic(2), [{p: p for p in self.top.points}])


class TestSiteCohomology:
    def test_constant_interval(self):
        F = EquivariantSheaf.constant(interval_poset().build(), Z)
        assert str(sheaf_cohomology(F, 0)) == "Z"
        assert str(sheaf_cohomology(F, 1)) == "0"

    def test_constant_circle(self):
        F = EquivariantSheaf.constant(circle4_poset().build(), Z)
        assert str(sheaf_cohomology(F, 1)) == "Z"
        assert str(weak_chain_cohomology(F, 1)) == "Z"

    def test_sphere_against_order_complex(self):
        site = circle4_poset().build().suspension()
        F = EquivariantSheaf.constant(site, Z)
        for q in range(3):
            assert sheaf_cohomology(F, q).is_isomorphic(order_complex_cohomology(site, Z, q))
        assert str(sheaf_cohomology(F, 2)) == "Z"

    def test_torsion_coefficients(self):
        site = circle4_poset().build()
        assert str(order_complex_cohomology(site, Z2, 1)) == "Z/2"

    def test_sections_over_non_open(self):
        F = EquivariantSheaf.constant(interval_poset().build(), Z)
        with pytest.raises(ModelError, match="not open"):
            sections(F, ["P"])

    def test_sections_over_disconnected_open(self):
        top = PosetSite(["p", "q", "u", "l"], [("p", "u"), ("p", "l"), ("q", "u"), ("q", "l")])
        F = EquivariantSheaf.constant(top, Z2)
        assert str(sections(F, ["u", "l"]).group) == "Z/2 + Z/2"
        assert str(sections(F, top.points).group) == "Z/2"


class TestPushforward:
    def test_branched_stalks(self, interval_branched):
        A = interval_branched.sheaf
        assert str(A.stalks["P"]) == "Z/2"
        assert str(A.stalks["I"]) == "Z/2 + Z/2"
        assert not A.is_trivial_action()

    def test_cohomology_matches_cover(self, interval_branched):
        A = interval_branched.sheaf
        upstairs = EquivariantSheaf.constant(interval_branched.cover.site, Z2)
        for q in range(2):
            assert A.cohomology(q).group.is_isomorphic(upstairs.cohomology(q).group)
        assert str(A.cohomology(1).group) == "Z/2"

    def test_plain_pushforward_of_constant(self):
        base = interval_poset().build()
        F = EquivariantSheaf.constant(base, Z)
        ident = PosetMap(base, base, {p: p for p in base.points})
        pushed = pushforward(ident, F)
        assert all(str(pushed.stalks[p]) == "Z" for p in base.points)

    def test_sheaf_must_live_upstairs(self, interval_branched):
        F = EquivariantSheaf.constant(interval_branched.site, Z2)
        with pytest.raises(ModelError):
            pushforward(interval_branched.cover.map, F)


class TestTorsorConstructions:
    def test_cover_torsor_is_not_trivializable(self, circle_cover):
        torsor = circle_cover.cover.torsor.torsor
        assert not torsor.is_trivial()
        assert torsor.is_trivializable() is None

    def test_internal_hom_stalks(self, circle_cover):
        A = circle_cover.sheaf
        assert str(A.stalks["v0"]) == "Z/2 + Z/2"
        assert str(A.cohomology(1).group) == "Z/2"

    def test_comparison_with_pushforward(self, circle_cover):
        cover = circle_cover.cover
        upstairs = EquivariantSheaf.constant(cover.site, Z2)
        comparison = cover.torsor.comparison(upstairs, circle_cover.plain)
        assert comparison.is_isomorphism()

    def test_internal_hom_needs_trivial_action(self, circle_cover):
        with pytest.raises(ModelError):
            internal_hom_torsor(circle_cover.sheaf, circle_cover.torsor)

    def test_contracted_product_of_trivial_action(self, circle_cover):
        B = circle_cover.plain.with_group(circle_cover.group)
        BM = contracted_product(B, circle_cover.torsor)
        assert BM.group.order == 1
        assert all(BM.restriction(x, y).equals(B.restriction(x, y))
                   for x, y in B.site.covering_pairs())

    def test_invariants_sheaf(self, circle_cover):
        AG, incl = invariants_sheaf(circle_cover.sheaf)
        assert str(AG.stalks["v0"]) == "Z/2"
        assert all(incl.maps[p].is_injective() for p in AG.site.points)
        assert invariants_sheaf(circle_cover.sheaf)[0] is AG

    def test_adjunction(self, circle_cover):
        B = EquivariantSheaf.constant(circle_cover.site, Z2, circle_cover.group)
        check = adjunction_bijection(B, circle_cover.plain, circle_cover.torsor)
        assert check.equivariant_count > 0
        assert check.bijective


class TestLocalVanishing:
    def test_induced_stalks_vanish(self, circle_cover):
        for j in (1, 2):
            assert stalkwise_local_vanishing(circle_cover.sheaf, j).holds

    def test_branch_points_fail(self, interval_branched):
        report = stalkwise_local_vanishing(interval_branched.sheaf, 1)
        assert not report.holds
        assert report.failing == ["P", "Q"]

    def test_degree_zero_rejected(self, circle_cover):
        with pytest.raises(ValueError):
            stalkwise_local_vanishing(circle_cover.sheaf, 0)
