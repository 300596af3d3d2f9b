from pathlib import Path

import pytest

from hyper_match.config import Config, ceil_log2, default_capacity, level_count, load_config
from hyper_match.errors import ConfigError, InputError


def test_derived_parameters():
    cfg = Config(r=2, N=64)
    assert cfg.alpha == 8
    assert cfg.L == 2
    assert Config(r=2, N=65).L == 3
    assert Config(r=3, N=12).L == 1
    assert cfg.log_n == 6
    assert cfg.threshold(2) == 64


def test_integer_helpers():
    assert ceil_log2(1) == 0
    assert ceil_log2(2) == 1
    assert ceil_log2(5) == 3
    assert level_count(1, 8) == 0
    assert default_capacity(100) == 2248


def test_repeat_cap_and_mu():
    assert Config(N=1024).repeat_cap == 640
    assert Config(N=1024, settle_repeat_cap=5).repeat_cap == 5
    assert 0 < Config(N=1024).mu < 1e-6


def test_doubled_keeps_other_fields():
    cfg = Config(r=3, N=10, seed=4).doubled(35)
    assert cfg.N == 40
    assert cfg.r == 3 and cfg.seed == 4


def test_invalid_values_raise_config_error():
    with pytest.raises(ConfigError):
        Config(r=1)
    with pytest.raises(ConfigError):
        Config(N=1)
    with pytest.raises(ConfigError):
        Config(c_sub=0)
    # ConfigError is an input error as well as a ValueError
    with pytest.raises(InputError):
        Config(c_luby=0)
    with pytest.raises(ValueError):
        Config(settle_repeat_cap=0)


def test_load_config_precedence(tmp_path: Path, monkeypatch: pytest.MonkeyPatch):
    path = tmp_path / "cfg.yaml"
    path.write_text("r: 3\nseed: 3\nc_sub: 2.5\nlog_level: DEBUG\n", encoding="utf-8")

    cfg = load_config(path, use_env=False, defaults={"N": 500, "seed": 1})
    assert (cfg.r, cfg.seed, cfg.c_sub, cfg.N) == (3, 3, 2.5, 500)

    monkeypatch.setenv("HYPER_MATCH_SEED", "9")
    cfg = load_config(path, {"seed": None, "r": None})
    assert cfg.seed == 9 and cfg.r == 3

    cfg = load_config(path, {"seed": 11})
    assert cfg.seed == 11


def test_load_config_costs(tmp_path: Path):
    path = tmp_path / "cfg.yaml"
    path.write_text("costs:\n  dict_work: 2\n", encoding="utf-8")
    cfg = load_config(path, use_env=False)
    assert cfg.costs.dict_work == 2
    assert cfg.costs.luby_depth == 1

    path.write_text("costs:\n  bogus: 2\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(path, use_env=False)


def test_load_config_rejects_bad_input(tmp_path: Path, monkeypatch: pytest.MonkeyPatch):
    path = tmp_path / "cfg.yaml"
    path.write_text("- 1\n- 2\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(path, use_env=False)

    path.write_text("r: [unclosed\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(path, use_env=False)

    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.yaml", use_env=False)

    path.write_text("r: 2\n", encoding="utf-8")
    monkeypatch.setenv("HYPER_MATCH_R", "abc")
    with pytest.raises(ConfigError):
        load_config(path)


def test_to_dict_includes_derived_fields():
    out = Config(r=2, N=64).to_dict()
    assert out["alpha"] == 8
    assert out["L"] == 2
    assert out["costs"]["dict_work"] == 1
