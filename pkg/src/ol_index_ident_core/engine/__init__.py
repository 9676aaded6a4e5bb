from __future__ import annotations

from ol_index_ident_core.engine.matching import (
    MatchCertificate,
    MatchSource,
    joint_refine,
    match_solve,
)
from ol_index_ident_core.engine.options import EngineOptions
from ol_index_ident_core.engine.propagation import (
    REASON_CODES,
    IdentResult,
    InconsistencyError,
    LambdaSample,
    WithinZResult,
    identify_global,
    identify_within_z,
)
from ol_index_ident_core.engine.reachability import Reachability, brute_force_identified_set
from ol_index_ident_core.engine.recovery import (
    CoverageError,
    LambdaQuery,
    recover_lambda,
    sample_lambda_queries,
)
from ol_index_ident_core.engine.verification import VerificationReport, verify_against_truth

__all__ = [
    "REASON_CODES",
    "CoverageError",
    "EngineOptions",
    "IdentResult",
    "InconsistencyError",
    "LambdaQuery",
    "LambdaSample",
    "MatchCertificate",
    "MatchSource",
    "Reachability",
    "VerificationReport",
    "WithinZResult",
    "brute_force_identified_set",
    "identify_global",
    "identify_within_z",
    "joint_refine",
    "match_solve",
    "recover_lambda",
    "sample_lambda_queries",
    "verify_against_truth",
]
