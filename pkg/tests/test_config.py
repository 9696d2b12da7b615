"""Tests for configuration loading."""

from descentiq.config import AppConfig, load_config


def test_load_default_config():
    cfg = load_config()
    assert isinstance(cfg, AppConfig)
    assert cfg.lowdeg.max_total_degree == 3
    assert cfg.checks.trials == 200


def test_config_has_all_sections():
    cfg = load_config()
    assert cfg.site.chain_cap >= 0
    assert cfg.site.weak_chain_oracle_max_points > 0
    assert cfg.groups.max_order >= 2
    assert cfg.lowdeg.group_degree_margin >= 1
    assert cfg.checks.theta_trials > 0
    assert cfg.output.json_output is False
    assert cfg.output.show_certificates is True


def test_config_deep_merge():
    from descentiq.config import _deep_merge

    base = {"a": {"b": 1, "c": 2}, "d": 3}
    override = {"a": {"b": 10}, "e": 5}
    result = _deep_merge(base, override)
    assert result == {"a": {"b": 10, "c": 2}, "d": 3, "e": 5}


def test_local_file_overrides_defaults(tmp_path):
    local = tmp_path / "local.toml"
    local.write_text("[checks]\ntrials = 7\n\n[output]\njson = true\n")
    cfg = load_config(local)
    assert cfg.checks.trials == 7
    assert cfg.checks.seed == 20240607
    assert cfg.output.json_output is True


def test_env_overrides_seed(monkeypatch):
    monkeypatch.setenv("DESCENTIQ_SEED", "11")
    monkeypatch.setenv("DESCENTIQ_CHAIN_CAP", "2")
    cfg = load_config()
    assert cfg.checks.seed == 11
    assert cfg.site.chain_cap == 2
