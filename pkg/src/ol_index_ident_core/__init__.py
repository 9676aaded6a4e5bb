from ol_index_ident_core.config import RunConfig, load_run_config
from ol_index_ident_core.documents import (
    DocumentVersionError,
    ResultDoc,
    ScenarioDoc,
    load_document,
    scenario_fingerprint,
    write_document,
)
from ol_index_ident_core.engine import (
    EngineOptions,
    IdentResult,
    InconsistencyError,
    MatchCertificate,
    brute_force_identified_set,
    identify_global,
    identify_within_z,
    match_solve,
    recover_lambda,
    verify_against_truth,
)
from ol_index_ident_core.index import eval_index, eval_pi, g_apply, g_inverse
from ol_index_ident_core.models import (
    Dimensions,
    DomainError,
    GSpec,
    IdentifierError,
    KnownStructure,
    LambdaKernelSpec,
    Scenario,
    ZKernelParams,
)
from ol_index_ident_core.oracle import CcpOracle, PiOracle, make_oracle
from ol_index_ident_core.replay import ReplayReport, replay, replay_result
from ol_index_ident_core.scenarios import ScenarioGenerationError, gen_scenario
from ol_index_ident_core.topology.audit import AuditReport, assumption_audit

__all__ = [
    "__version__",
    "AuditReport",
    "CcpOracle",
    "Dimensions",
    "DocumentVersionError",
    "DomainError",
    "EngineOptions",
    "GSpec",
    "IdentResult",
    "IdentifierError",
    "InconsistencyError",
    "KnownStructure",
    "LambdaKernelSpec",
    "MatchCertificate",
    "PiOracle",
    "ReplayReport",
    "ResultDoc",
    "RunConfig",
    "Scenario",
    "ScenarioDoc",
    "ScenarioGenerationError",
    "ZKernelParams",
    "assumption_audit",
    "brute_force_identified_set",
    "eval_index",
    "eval_pi",
    "g_apply",
    "g_inverse",
    "gen_scenario",
    "identify_global",
    "identify_within_z",
    "load_document",
    "load_run_config",
    "make_oracle",
    "match_solve",
    "recover_lambda",
    "replay",
    "replay_result",
    "scenario_fingerprint",
    "verify_against_truth",
    "write_document",
]

__version__ = "0.0.0"
