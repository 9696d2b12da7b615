"""Tests for model bundles, cocycle files and explicit export."""

import pytest
from pydantic import ValidationError

from descentiq.errors import ModelError
from descentiq.fixtures import circle4_poset, generator_cocycle, get_fixture, load_fixture
from descentiq.modelfile import (
    GroupPresentation,
    GroupSpec,
    ModelBundle,
    SheafSpec,
    TorsorSpec,
    cocycle_from_file,
    explicit_bundle,
    load_model,
    load_model_file,
    read_bundle,
    read_cocycle,
    write_bundle,
    write_cocycle,
)


def _make_sign_bundle(**overrides) -> ModelBundle:
    """Constant Z on the 4-point circle with Z/2 acting by -1."""
    poset = circle4_poset()
    data = dict(
        name="sign-circle",
        group=GroupSpec.cyclic(2),
        poset=poset,
        sheaf=SheafSpec(
            kind="explicit",
            stalks={p: GroupPresentation(rank=1) for p in poset.points},
            restrictions={f"{x}<={y}": [[1]] for x, y in poset.leq},
            action={"s": {p: [[-1]] for p in poset.points}},
        ),
    )
    data.update(overrides)
    return ModelBundle(**data)


class TestGroupPresentation:
    def test_parse(self):
        g = GroupPresentation.parse("Z^2 + Z/3")
        assert g.rank == 2
        assert g.torsion == [3]
        assert str(g.build()) == "Z^2 + Z/3"

    def test_parse_zero(self):
        assert GroupPresentation.parse("0").build().is_trivial()

    def test_parse_garbage(self):
        with pytest.raises(ValueError):
            GroupPresentation.parse("Q")

    def test_nonpositive_torsion(self):
        with pytest.raises(ValidationError):
            GroupPresentation(torsion=[0])


class TestSchema:
    def test_explicit_needs_stalks(self):
        with pytest.raises(ValidationError):
            SheafSpec(kind="explicit")

    def test_pushforward_needs_cover(self):
        bundle = get_fixture("interval-branched")
        with pytest.raises(ValidationError):
            ModelBundle(group=bundle.group, poset=bundle.poset, sheaf=bundle.sheaf)

    def test_internal_hom_needs_torsor(self):
        bundle = get_fixture("circle-cover")
        with pytest.raises(ValidationError):
            ModelBundle(group=bundle.group, poset=bundle.poset, sheaf=bundle.sheaf)

    def test_bad_group_table(self):
        spec = GroupSpec(elements=["e", "s"], table=[["e", "s"], ["s", "x"]])
        with pytest.raises(ModelError):
            spec.build()


class TestLoading:
    def test_explicit_sheaf(self):
        model = load_model(_make_sign_bundle())
        assert not model.sheaf.is_trivial_action()
        assert str(model.sheaf.cohomology(1).group) == "Z"
        assert str(model.invariants[0].cohomology(0).group) == "0"

    def test_action_must_commute(self):
        bundle = _make_sign_bundle()
        bundle.sheaf.action = {"s": {"v0": [[-1]]}}
        with pytest.raises(ModelError):
            load_model(bundle)

    def test_unknown_point_in_stalks(self):
        bundle = _make_sign_bundle()
        bundle.sheaf.stalks["nowhere"] = GroupPresentation(rank=1)
        with pytest.raises(ModelError, match="unknown points"):
            load_model(bundle)

    def test_group_order_cap(self):
        with pytest.raises(ModelError, match="max_order"):
            load_model(_make_sign_bundle(), max_order=1)

    def test_gtorsor_transitions(self):
        bundle = get_fixture("sphere-cover")
        model = load_model(bundle)
        assert model.cover is None
        assert str(model.sheaf.cohomology(0).group) == "Z^2"

    def test_bad_pair_key(self):
        bundle = get_fixture("sphere-cover")
        bundle.gtorsor = TorsorSpec(transitions={"N-v0": "s"})
        with pytest.raises(ModelError, match="Cannot read pair"):
            load_model(bundle)

    def test_deck_names_unknown_element(self):
        bundle = get_fixture("interval-branched")
        bundle.cover.deck["t"] = bundle.cover.deck["s"]
        with pytest.raises(ModelError, match="unknown group elements"):
            load_model(bundle)

    def test_deck_missing_element(self):
        bundle = get_fixture("interval-branched")
        bundle.cover.deck = {}
        with pytest.raises(ModelError, match="no entry"):
            load_model(bundle)


class TestFiles:
    def test_bundle_roundtrip(self, tmp_path):
        path = write_bundle(get_fixture("circle-cover"), tmp_path / "circle.json")
        assert read_bundle(path).name == "circle-cover"
        model = load_model_file(path)
        assert str(model.sheaf.cohomology(1).group) == "Z/2"

    def test_invalid_json_bundle(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{"group": {"elements": ["e"]}}')
        with pytest.raises(ValidationError):
            read_bundle(path)

    def test_cocycle_roundtrip(self, tmp_path):
        model = load_fixture("circle-cover")
        z = generator_cocycle(model, 1)
        path = write_cocycle(z, tmp_path / "t.json")
        data = read_cocycle(path)
        assert data.degree == 1
        assert cocycle_from_file(model, data) == z

    def test_invariants_cocycle_file(self, tmp_path):
        model = load_fixture("circle-cover")
        zbar = generator_cocycle(model, 1, invariants=True)
        path = write_cocycle(zbar, tmp_path / "tbar.json", sheaf="invariants")
        loaded = cocycle_from_file(model, read_cocycle(path))
        assert loaded.sheaf is model.invariants[0]
        assert loaded == zbar


class TestExplicitExport:
    @pytest.mark.parametrize("name", ["interval-branched", "circle-cover"])
    def test_same_cohomology(self, name):
        model = load_fixture(name)
        explicit = load_model(explicit_bundle(model))
        assert explicit.bundle.sheaf.kind == "explicit"
        assert explicit.bundle.parameters["derived_from"] == model.bundle.sheaf.kind
        for q in range(2):
            assert explicit.sheaf.cohomology(q).group.is_isomorphic(
                model.sheaf.cohomology(q).group)
        assert explicit.sheaf.is_trivial_action() == model.sheaf.is_trivial_action()
