from __future__ import annotations

import argparse
import json
import logging
import sys
from collections.abc import Callable
from typing import NoReturn
from pathlib import Path

import numpy as np
from pydantic import BaseModel, ValidationError

from ol_index_ident_core.config import RunConfig, load_run_config
from ol_index_ident_core.documents import (
    DocumentTypeError,
    DocumentVersionError,
    ResultDoc,
    ScenarioDoc,
    audit_to_doc,
    kernel_suite_to_doc,
    load_document,
    result_from_doc,
    result_to_doc,
    scenario_fingerprint,
    scenario_from_doc,
    scenario_to_doc,
    verification_to_doc,
    write_document,
)
from ol_index_ident_core.engine.propagation import InconsistencyError, identify_global
from ol_index_ident_core.engine.recovery import (
    CoverageError,
    recover_lambda,
    sample_lambda_queries,
)
from ol_index_ident_core.engine.verification import verify_against_truth
from ol_index_ident_core.kernel_suite import SuiteOptions, run_kernel_suite
from ol_index_ident_core.models import Dimensions, Scenario
from ol_index_ident_core.oracle import make_oracle
from ol_index_ident_core.replay import replay, replay_to_doc
from ol_index_ident_core.scenarios import ScenarioGenerationError, gen_scenario
from ol_index_ident_core.topology.audit import assumption_audit
from ol_index_ident_core.util import canonical_json, deterministic_run_id, sha256_bytes, stable_stream

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2
EXIT_ASSUMPTION = 3
EXIT_TOLERANCE = 4
EXIT_REPLAY = 5
EXIT_INCOMPATIBLE = 6


class UsageError(ValueError):
    pass


class CommandFailed(RuntimeError):
    def __init__(self, reason: str, message: str, exit_code: int):
        super().__init__(message)
        self.reason = reason
        self.exit_code = exit_code


def _emit(cfg: RunConfig, doc: BaseModel) -> None:
    if cfg.out is None:
        sys.stdout.write(doc.model_dump_json(indent=2) + "\n")
        return
    write_document(cfg.out, doc)
    logger.info("wrote %s", cfg.out)


def _require(path: Path | None, flag: str) -> Path:
    if path is None:
        raise UsageError(f"{flag} is required")
    if not path.is_file():
        raise UsageError(f"{flag} {path} does not exist")
    return path


def _load_scenario(cfg: RunConfig) -> Scenario:
    return scenario_from_doc(load_document(_require(cfg.scenario_path, "--scenario"), ScenarioDoc))


def _cmd_gen(cfg: RunConfig) -> int:
    dims = Dimensions(J=cfg.J, dX=cfg.dX, nX=cfg.nX, nZ=cfg.nZ)
    scenario = gen_scenario(
        cfg.seed, dims, cfg.mode, kernel=cfg.kernel, g_kind=cfg.g_kind, draws=cfg.draws
    )
    _emit(cfg, scenario_to_doc(scenario))
    return EXIT_OK


def _cmd_audit(cfg: RunConfig) -> int:
    scenario = _load_scenario(cfg)
    report = assumption_audit(scenario, samples=cfg.probe_samples)
    _emit(cfg, audit_to_doc(report, scenario_fingerprint=scenario_fingerprint(scenario)))
    if not report.passed:
        failed = ", ".join(c.code for c in report.failures())
        raise CommandFailed("assumption-failure", f"failed checks: {failed}", EXIT_ASSUMPTION)
    return EXIT_OK


def _cmd_identify(cfg: RunConfig) -> int:
    scenario = _load_scenario(cfg)
    structure = scenario.known_structure()
    audit = assumption_audit(scenario, samples=cfg.probe_samples)
    oracle = make_oracle(scenario)
    opts = cfg.engine_options()
    if scenario.lambda_spec.is_mc:
        st = scenario.seed_triple
        opts = opts.with_stderr(float(np.max(oracle.stderr(st.w0, st.x0, st.z0))))
    result = identify_global(oracle, structure, opts, z_pass=audit.z_pass)
    if cfg.lambda_samples:
        queries = sample_lambda_queries(
            result,
            structure,
            count=cfg.lambda_samples,
            seed=stable_stream(cfg.seed, "lambda-queries"),
        )
        result = recover_lambda(oracle, result, structure, queries)

    options = {
        **opts.fingerprint(),
        "lambda_samples": cfg.lambda_samples,
        "probe_samples": cfg.probe_samples,
        "seed": cfg.seed,
    }
    fingerprint = scenario_fingerprint(scenario)
    run_id = deterministic_run_id(
        scenario_fingerprint=fingerprint,
        options_fingerprint=sha256_bytes(canonical_json(options).encode("utf-8")),
    )
    _emit(
        cfg,
        result_to_doc(result, run_id=run_id, scenario_fingerprint=fingerprint, options=options),
    )
    logger.info(
        "identified %d/%d x, %d unidentified, %d oracle queries",
        len(result.h_hat),
        len(scenario.x_ids),
        len(result.unidentified),
        result.oracle_queries,
    )
    return EXIT_OK


def _load_result(cfg: RunConfig) -> ResultDoc:
    return load_document(_require(cfg.result_path, "--result"), ResultDoc)


def _cmd_verify(cfg: RunConfig) -> int:
    scenario = _load_scenario(cfg)
    result_doc = _load_result(cfg)
    fingerprint = scenario_fingerprint(scenario)
    if result_doc.scenario_fingerprint != fingerprint:
        raise CommandFailed(
            "document-mismatch",
            "result was not produced from this scenario",
            EXIT_INCOMPATIBLE,
        )
    result = result_from_doc(result_doc)
    report = verify_against_truth(result, scenario, tol_h=cfg.tol_h, tol_lambda=cfg.tol_lambda)
    _emit(
        cfg,
        verification_to_doc(
            report,
            scenario_fingerprint=fingerprint,
            run_id=result_doc.run_id,
            lambda_samples=len(result.lambda_samples),
        ),
    )
    if not report.passed:
        raise CommandFailed("tolerance-breach", report.worst_offender() or "", EXIT_TOLERANCE)
    return EXIT_OK


def _cmd_kernel_test(cfg: RunConfig) -> int:
    rows = run_kernel_suite(cfg.seed, SuiteOptions(J=cfg.J, draws=cfg.draws))
    _emit(cfg, kernel_suite_to_doc(rows, seed=cfg.seed))
    failed = [r.name for r in rows if not r.passed]
    if failed:
        raise CommandFailed(
            "tolerance-breach", f"kernel checks failed: {', '.join(failed)}", EXIT_TOLERANCE
        )
    return EXIT_OK


def _cmd_replay(cfg: RunConfig) -> int:
    scenario_doc = load_document(_require(cfg.scenario_path, "--scenario"), ScenarioDoc)
    result_doc = _load_result(cfg)
    report = replay(result_doc, scenario_doc)
    _emit(cfg, replay_to_doc(report, result_doc))
    if not report.passed:
        raise CommandFailed("replay-failure", report.messages()[0], EXIT_REPLAY)
    return EXIT_OK


COMMANDS: dict[str, Callable[[RunConfig], int]] = {
    "gen": _cmd_gen,
    "audit": _cmd_audit,
    "identify": _cmd_identify,
    "verify": _cmd_verify,
    "kernel-test": _cmd_kernel_test,
    "replay": _cmd_replay,
}


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", dest="config_path", type=Path, help="JSON run configuration")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", type=Path, help="Output document (stdout when omitted)")
    p.add_argument("--workers", type=int)
    p.add_argument("--tol-match", dest="tol_match", type=float)
    p.add_argument("--budget", type=int, help="Oracle query budget")
    p.add_argument("--log-level", dest="log_level")


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog="ol-index-ident", description="Identification of additive index models"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="Generate a synthetic scenario")
    _common(p_gen)
    p_gen.add_argument("--mode")
    p_gen.add_argument("--J", dest="J", type=int)
    p_gen.add_argument("--dX", dest="dX", type=int)
    p_gen.add_argument("--nX", dest="nX", type=int)
    p_gen.add_argument("--nZ", dest="nZ", type=int)
    p_gen.add_argument("--kernel")
    p_gen.add_argument("--g-kind", dest="g_kind")
    p_gen.add_argument("--draws", type=int, help="Monte Carlo draws per z")

    p_audit = sub.add_parser("audit", help="Check the identifying assumptions")
    _common(p_audit)
    p_audit.add_argument("--scenario", dest="scenario_path", type=Path)
    p_audit.add_argument("--probe-samples", dest="probe_samples", type=int)

    p_ident = sub.add_parser("identify", help="Recover h and Lambda through the oracle")
    _common(p_ident)
    p_ident.add_argument("--scenario", dest="scenario_path", type=Path)
    p_ident.add_argument("--starts-per-box", dest="starts_per_box", type=int)
    p_ident.add_argument("--lambda-samples", dest="lambda_samples", type=int)
    p_ident.add_argument("--probe-samples", dest="probe_samples", type=int)

    p_verify = sub.add_parser("verify", help="Compare a result with the scenario truth")
    _common(p_verify)
    p_verify.add_argument("--scenario", dest="scenario_path", type=Path)
    p_verify.add_argument("--result", dest="result_path", type=Path)
    p_verify.add_argument("--tol-h", dest="tol_h", type=float)
    p_verify.add_argument("--tol-lambda", dest="tol_lambda", type=float)

    p_kernel = sub.add_parser("kernel-test", help="Run the kernel identity checks")
    _common(p_kernel)
    p_kernel.add_argument("--J", dest="J", type=int)
    p_kernel.add_argument("--draws", type=int)

    p_replay = sub.add_parser("replay", help="Re-execute the certificates of a result")
    _common(p_replay)
    p_replay.add_argument("--scenario", dest="scenario_path", type=Path)
    p_replay.add_argument("--result", dest="result_path", type=Path)
    return parser


def _fail(reason: str, message: str, code: int) -> int:
    sys.stderr.write(json.dumps({"reason": reason, "message": message}) + "\n")
    return code


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        return _fail("usage", str(exc), EXIT_USAGE)
    except SystemExit as exc:
        return int(exc.code or 0)

    overrides = vars(args)
    config_path = overrides.get("config_path")
    if config_path is not None and not Path(config_path).is_file():
        return _fail("usage", f"--config {config_path} does not exist", EXIT_USAGE)
    try:
        cfg = load_run_config(**overrides)
    except ValidationError as exc:
        return _fail("usage", str(exc), EXIT_USAGE)

    logging.basicConfig(
        level=cfg.log_level.upper(),
        format="%(asctime)s %(levelname)s %(name)s %(message)s",
        stream=sys.stderr,
    )
    try:
        return COMMANDS[cfg.command](cfg)
    except CommandFailed as exc:
        return _fail(exc.reason, str(exc), exc.exit_code)
    except (DocumentVersionError, DocumentTypeError) as exc:
        return _fail("incompatible-document", str(exc), EXIT_INCOMPATIBLE)
    except (UsageError, ValidationError, json.JSONDecodeError) as exc:
        return _fail("usage", str(exc), EXIT_USAGE)
    except ScenarioGenerationError as exc:
        return _fail("scenario-generation", str(exc), EXIT_RUNTIME)
    except InconsistencyError as exc:
        return _fail("inconsistency", str(exc), EXIT_RUNTIME)
    except CoverageError as exc:
        return _fail("coverage", str(exc), EXIT_RUNTIME)
    except Exception as exc:
        logger.exception("command %s failed", cfg.command)
        return _fail("runtime-error", str(exc), EXIT_RUNTIME)


if __name__ == "__main__":
    raise SystemExit(main())
