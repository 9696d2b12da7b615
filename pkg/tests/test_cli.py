"""Tests for the command-line interface."""

import json

import pytest
from typer.testing import CliRunner

from descentiq.cli import EXIT_INVALID, EXIT_PRECONDITION, app
from descentiq.errors import NoConnecting
from descentiq.fixtures import circle4_poset, generator_cocycle, get_fixture, load_fixture
from descentiq.modelfile import (
    GroupPresentation,
    GroupSpec,
    ModelBundle,
    SheafSpec,
    load_model,
    write_bundle,
    write_cocycle,
)

runner = CliRunner()


def _make_example(tmp_path, name: str) -> str:
    path = tmp_path / f"{name}.json"
    result = runner.invoke(app, ["example", name, "--out", str(path)])
    assert result.exit_code == 0, result.output
    return str(path)


def _make_sign_model(tmp_path) -> tuple[str, str]:
    """A bundle on which Z/2 acts by -1 and a degree-1 cocycle it moves."""
    poset = circle4_poset()
    bundle = ModelBundle(
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
    model_path = write_bundle(bundle, tmp_path / "sign.json")
    model = load_model(bundle)
    cocycle_path = write_cocycle(generator_cocycle(model, 1), tmp_path / "t.json")
    return str(model_path), str(cocycle_path)


class TestExample:
    def test_writes_bundle_and_headline(self, tmp_path):
        path = tmp_path / "ib.json"
        result = runner.invoke(app, ["example", "interval-branched", "--out", str(path)])
        assert result.exit_code == 0, result.output
        assert path.exists()
        assert "H^1(X, A) = Z/2" in result.output
        assert "H^2(G, A(X)) = Z/2" in result.output

    def test_json_headline(self, tmp_path):
        path = tmp_path / "cc.json"
        result = runner.invoke(app, ["example", "circle-cover", "--out", str(path),
                                     "--coefficients", "Z/4", "--json"])
        assert result.exit_code == 0, result.output
        assert '"H^1(X, A)": "Z/4"' in result.output

    def test_unknown_example(self, tmp_path):
        result = runner.invoke(app, ["example", "torus", "--out", str(tmp_path / "t.json")])
        assert result.exit_code == EXIT_INVALID
        assert "Unknown fixture" in result.output


class TestCohomologyCommands:
    def test_sheaf_cohomology(self, tmp_path):
        path = _make_example(tmp_path, "interval-branched")
        result = runner.invoke(app, ["sheaf-cohomology", path, "--degree", "1"])
        assert result.exit_code == 0, result.output
        assert "H^1(X, A) = Z/2" in result.output
        assert "generator 1" in result.output

    def test_sheaf_cohomology_of_invariants(self, tmp_path):
        path = _make_example(tmp_path, "interval-branched")
        result = runner.invoke(app, ["sheaf-cohomology", path, "-q", "1", "--invariants"])
        assert result.exit_code == 0, result.output
        assert "H^1(X, A^G) = 0" in result.output

    def test_group_cohomology(self, tmp_path):
        path = _make_example(tmp_path, "interval-branched")
        result = runner.invoke(app, ["group-cohomology", path, "--degree", "2"])
        assert result.exit_code == 0, result.output
        assert "H^2(G, A(X)) = Z/2" in result.output

    def test_local_vanishing(self, tmp_path):
        path = _make_example(tmp_path, "interval-branched")
        result = runner.invoke(app, ["local-vanishing", path])
        assert result.exit_code == 0, result.output
        assert "fails at P, Q" in result.output

    def test_missing_model(self, tmp_path):
        result = runner.invoke(app, ["sheaf-cohomology", str(tmp_path / "nope.json")])
        assert result.exit_code == EXIT_INVALID

    def test_invalid_bundle(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{"group": {"elements": ["e"]}}')
        result = runner.invoke(app, ["sheaf-cohomology", str(path)])
        assert result.exit_code == EXIT_INVALID
        assert "Invalid input" in result.output


class TestObstructionCommands:
    def test_torsor_obstruction(self, tmp_path):
        path = _make_example(tmp_path, "circle-cover")
        cocycle = write_cocycle(generator_cocycle(load_fixture("circle-cover"), 1),
                                tmp_path / "t.json")
        result = runner.invoke(app, ["torsor-obstruction", path, "--cocycle", str(cocycle),
                                     "--json"])
        assert result.exit_code == 0, result.output
        assert '"kind": "torsor"' in result.output
        assert '"is_zero": false' in result.output

    def test_unstable_class_exits_with_precondition(self, tmp_path):
        model_path, cocycle_path = _make_sign_model(tmp_path)
        result = runner.invoke(app, ["torsor-obstruction", model_path,
                                     "--cocycle", cocycle_path])
        assert result.exit_code == EXIT_PRECONDITION
        assert "Precondition failed" in result.output

    def test_gerbe_without_connecting_data_emits_clean_json(self, tmp_path, monkeypatch):
        from descentiq.descent import gerbes

        path = _make_example(tmp_path, "sphere-branched")
        cocycle = write_cocycle(generator_cocycle(load_fixture("sphere-branched"), 2),
                                tmp_path / "m.json")

        def no_connecting(m, A=None):
            raise NoConnecting([1], {(1, 1): [1]})

        monkeypatch.setattr(gerbes, "find_gerbe_lift", no_connecting)
        result = runner.invoke(app, ["gerbe-obstruction", path, "--cocycle", str(cocycle),
                                     "--json"])
        assert result.exit_code == EXIT_PRECONDITION
        data = json.loads(result.stdout)
        assert data["lift_found"] is False
        assert "No connecting data" in data["message"]

    def test_induced_check_reports_local_failure(self, tmp_path):
        path = _make_example(tmp_path, "interval-branched")
        cocycle = write_cocycle(generator_cocycle(load_fixture("interval-branched"), 1),
                                tmp_path / "t.json")
        result = runner.invoke(app, ["induced-check", path, "--degree", "1",
                                     "--cocycle", str(cocycle)])
        assert result.exit_code == 0, result.output
        assert "induced from A^G in degree 1: no" in result.output
        assert "local vanishing fails at" in result.output

    def test_induced_check_degree_mismatch(self, tmp_path):
        path = _make_example(tmp_path, "interval-branched")
        cocycle = write_cocycle(generator_cocycle(load_fixture("interval-branched"), 1),
                                tmp_path / "t.json")
        result = runner.invoke(app, ["induced-check", path, "--degree", "2",
                                     "--cocycle", str(cocycle)])
        assert result.exit_code == EXIT_INVALID


class TestSequenceCommands:
    def test_les_check_on_cover(self, tmp_path):
        path = _make_example(tmp_path, "circle-cover")
        result = runner.invoke(app, ["les-check", path])
        assert result.exit_code == 0, result.output
        assert "exact=no" not in result.output
        assert "node H^2(X, A) gerbes" in result.output

    def test_les_check_on_branched_interval(self, tmp_path):
        path = _make_example(tmp_path, "interval-branched")
        result = runner.invoke(app, ["les-check", path, "--no-gerbe"])
        assert result.exit_code == 0, result.output
        assert "node H^1(X, A)^G:" in result.output
        assert "exact=no" in result.output
        assert "certificate:" in result.output

    def test_hs_compare(self, tmp_path):
        path = _make_example(tmp_path, "circle-cover")
        result = runner.invoke(app, ["hs-compare", path, "--json"])
        assert result.exit_code == 0, result.output
        assert '"local_vanishing_holds": true' in result.output

    def test_hs_compare_needs_internal_hom(self, tmp_path):
        path = _make_example(tmp_path, "interval-branched")
        result = runner.invoke(app, ["hs-compare", path])
        assert result.exit_code == EXIT_INVALID


class TestMiscCommands:
    @pytest.mark.parametrize("flag", ["--explicit", "--derived"])
    def test_emit_model(self, tmp_path, flag):
        out = tmp_path / "model.json"
        result = runner.invoke(app, ["emit-model", "interval-branched", "--out", str(out), flag])
        assert result.exit_code == 0, result.output
        bundle = ModelBundle.model_validate_json(out.read_text())
        expected = "explicit" if flag == "--explicit" else "pushforward"
        assert bundle.sheaf.kind == expected
        assert bundle.name == get_fixture("interval-branched").name

    def test_config_show(self):
        result = runner.invoke(app, ["config-show"])
        assert result.exit_code == 0
        assert "max_total_degree" in result.output
        assert '"json": false' in result.output

    def test_verify(self):
        result = runner.invoke(app, ["verify", "--trials", "2", "--oracle-order", "2",
                                     "--fixture", "circle-cover"])
        assert result.exit_code == 0, result.output
        assert "Property checks" in result.output
