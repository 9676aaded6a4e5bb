import json
from pathlib import Path

import pytest

from ol_index_ident_core.cli import (
    EXIT_ASSUMPTION,
    EXIT_INCOMPATIBLE,
    EXIT_OK,
    EXIT_REPLAY,
    EXIT_USAGE,
    main,
)
from ol_index_ident_core.documents import (
    AuditDoc,
    ResultDoc,
    comparable_json,
    load_document,
)

GEN = ["--seed", "7", "--J", "2", "--nX", "5", "--nZ", "2"]


def _reason(stderr: str) -> dict[str, str]:
    lines = [line for line in stderr.splitlines() if line.startswith("{")]
    return json.loads(lines[-1])


@pytest.fixture
def scenario_path(tmp_path: Path) -> Path:
    path = tmp_path / "scenario.json"
    assert main(["gen", *GEN, "--out", str(path)]) == EXIT_OK
    return path


def _identify(scenario: Path, out: Path, *extra: str) -> int:
    return main(
        ["identify", "--scenario", str(scenario), "--lambda-samples", "8", "--out", str(out), *extra]
    )


def test_gen_then_audit(scenario_path: Path, tmp_path: Path) -> None:
    out = tmp_path / "audit.json"
    assert main(["audit", "--scenario", str(scenario_path), "--out", str(out)]) == EXIT_OK
    doc = load_document(out, AuditDoc)
    assert doc.passed
    assert doc.z_pass == ["z0", "z1"]


def test_identify_verify_replay(scenario_path: Path, tmp_path: Path) -> None:
    result = tmp_path / "result.json"
    assert _identify(scenario_path, result) == EXIT_OK
    doc = load_document(result, ResultDoc)
    assert set(doc.h_hat) == {f"x{i}" for i in range(5)}
    assert len(doc.lambda_samples) == 8

    common = ["--scenario", str(scenario_path), "--result", str(result)]
    assert main(["verify", *common, "--out", str(tmp_path / "verify.json")]) == EXIT_OK
    assert main(["replay", *common, "--out", str(tmp_path / "replay.json")]) == EXIT_OK


def test_worker_count_does_not_change_the_result(scenario_path: Path, tmp_path: Path) -> None:
    one, four = tmp_path / "one.json", tmp_path / "four.json"
    assert _identify(scenario_path, one, "--workers", "1") == EXIT_OK
    assert _identify(scenario_path, four, "--workers", "4") == EXIT_OK
    assert comparable_json(load_document(one, ResultDoc)) == comparable_json(
        load_document(four, ResultDoc)
    )


def test_replay_rejects_a_tampered_result(
    scenario_path: Path, tmp_path: Path, capsys: pytest.CaptureFixture[str]
) -> None:
    result = tmp_path / "result.json"
    assert _identify(scenario_path, result) == EXIT_OK
    raw = json.loads(result.read_text())
    x = next(k for k in raw["h_hat"] if k != raw["x0"])
    raw["h_hat"][x] = [v + 1e-3 for v in raw["h_hat"][x]]
    result.write_text(json.dumps(raw))
    capsys.readouterr()
    common = ["--scenario", str(scenario_path), "--result", str(result)]
    code = main(["replay", *common, "--out", str(tmp_path / "replay.json")])
    assert code == EXIT_REPLAY
    assert _reason(capsys.readouterr().err)["reason"] == "replay-failure"


def test_noninjective_audit_fails(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    scenario = tmp_path / "scenario.json"
    assert main(["gen", "--seed", "3", "--mode", "noninjective", "--out", str(scenario)]) == EXIT_OK
    capsys.readouterr()
    code = main(["audit", "--scenario", str(scenario), "--out", str(tmp_path / "audit.json")])
    assert code == EXIT_ASSUMPTION
    reason = _reason(capsys.readouterr().err)
    assert reason["reason"] == "assumption-failure"
    assert "injectivity" in reason["message"]


def test_invalid_config_is_a_usage_error(
    tmp_path: Path, capsys: pytest.CaptureFixture[str]
) -> None:
    config = tmp_path / "run.json"
    config.write_text(json.dumps({"workers": 0}))
    assert main(["gen", "--config", str(config)]) == EXIT_USAGE
    assert _reason(capsys.readouterr().err)["reason"] == "usage"
    assert main(["gen", "--config", str(tmp_path / "missing.json")]) == EXIT_USAGE


def test_missing_scenario_flag_is_a_usage_error(capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["audit"]) == EXIT_USAGE
    assert "--scenario" in _reason(capsys.readouterr().err)["message"]


def test_unknown_command_is_a_usage_error(capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["frobnicate"]) == EXIT_USAGE
    assert _reason(capsys.readouterr().err)["reason"] == "usage"


def test_bad_flag_value_is_a_usage_error(capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["gen", "--seed", "seven"]) == EXIT_USAGE
    assert "--seed" in _reason(capsys.readouterr().err)["message"]


def test_unknown_log_level_is_a_usage_error(
    tmp_path: Path, capsys: pytest.CaptureFixture[str]
) -> None:
    out = tmp_path / "s.json"
    assert main(["gen", *GEN, "--log-level", "LOUD", "--out", str(out)]) == EXIT_USAGE
    assert _reason(capsys.readouterr().err)["reason"] == "usage"
    assert not out.exists()


def test_help_exits_cleanly(capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["--help"]) == EXIT_OK
    assert "identify" in capsys.readouterr().out


def test_future_document_version_is_incompatible(
    scenario_path: Path, capsys: pytest.CaptureFixture[str]
) -> None:
    raw = json.loads(scenario_path.read_text())
    raw["spec_version"] = 2
    scenario_path.write_text(json.dumps(raw))
    capsys.readouterr()
    assert main(["audit", "--scenario", str(scenario_path)]) == EXIT_INCOMPATIBLE
    assert _reason(capsys.readouterr().err)["reason"] == "incompatible-document"


@pytest.mark.slow
def test_kernel_test_command(tmp_path: Path) -> None:
    out = tmp_path / "kernel.json"
    assert main(["kernel-test", "--seed", "1", "--out", str(out)]) == EXIT_OK
