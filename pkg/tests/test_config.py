import json
from pathlib import Path

import pytest
from pydantic import ValidationError

from ol_index_ident_core.config import RunConfig, load_run_config


@pytest.fixture(autouse=True)
def _clean_env(monkeypatch: pytest.MonkeyPatch, tmp_path: Path) -> None:
    monkeypatch.chdir(tmp_path)
    for name in ("SEED", "WORKERS", "TOL_MATCH", "MODE"):
        monkeypatch.delenv(f"INDEX_IDENT_{name}", raising=False)


def test_defaults() -> None:
    cfg = RunConfig()
    assert cfg.command == "identify"
    assert cfg.tol_match == 1e-9
    assert cfg.workers == 1
    assert cfg.kernel is None
    opts = cfg.engine_options()
    assert opts.tol_match == 1e-9
    assert opts.budget is None


def test_environment_overrides_defaults(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setenv("INDEX_IDENT_SEED", "42")
    monkeypatch.setenv("INDEX_IDENT_WORKERS", "3")
    cfg = RunConfig()
    assert cfg.seed == 42
    assert cfg.workers == 3


def test_json_file_is_the_lowest_layer(monkeypatch: pytest.MonkeyPatch, tmp_path: Path) -> None:
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"seed": 5, "workers": 2, "mode": "noninjective"}))
    monkeypatch.setenv("INDEX_IDENT_WORKERS", "4")
    cfg = load_run_config(config_path=path, seed=9, mode=None)
    assert cfg.seed == 9
    assert cfg.workers == 4
    assert cfg.mode == "noninjective"


@pytest.mark.parametrize(
    "field, value",
    [
        ("tol_match", 0.0),
        ("tol_h", -1.0),
        ("workers", 0),
        ("budget", 0),
        ("starts_per_box", 0),
        ("report_format_version", 2),
        ("mode", "sideways"),
        ("kernel", "probit"),
        ("g_kind", "cubic"),
    ],
)
def test_invalid_values_are_rejected(field: str, value: object) -> None:
    with pytest.raises(ValidationError):
        RunConfig(**{field: value})


def test_unset_overrides_do_not_shadow(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setenv("INDEX_IDENT_SEED", "8")
    assert load_run_config(seed=None, workers=None).seed == 8


def test_log_level_is_normalized_and_checked() -> None:
    assert RunConfig(log_level="debug").log_level == "DEBUG"
    with pytest.raises(ValidationError, match="log level"):
        RunConfig(log_level="LOUD")
