"""
Versioned JSON documents for scenarios, results, audits, verification reports and kernel
checks.

Floats are written in shortest round-trip form: the text reads back to the identical
double, so no precision is lost even where fewer than 17 digits are printed.
"""

from __future__ import annotations

import json
import math
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Literal, TypeVar
from uuid import UUID

from pydantic import BaseModel, Field

from ol_index_ident_core.engine.matching import MatchCertificate
from ol_index_ident_core.engine.propagation import IdentResult, LambdaSample
from ol_index_ident_core.engine.verification import VerificationReport
from ol_index_ident_core.kernel_suite import KernelCheck
from ol_index_ident_core.models import (
    Dimensions,
    GSpec,
    HTable,
    LambdaKernelSpec,
    Scenario,
    SeedTriple,
    XPoint,
    ZKernelParams,
)
from ol_index_ident_core.topology.audit import AuditReport
from ol_index_ident_core.topology.boxes import Box, BoxUnion
from ol_index_ident_core.util import atomic_write_text, canonical_json, sha256_bytes

UTC = timezone.utc

SPEC_VERSION = 1


class DocumentVersionError(ValueError):
    pass


class DocumentTypeError(ValueError):
    pass


def utc_now() -> datetime:
    return datetime.now(UTC)


def _finite_or_none(value: float) -> float | None:
    return value if math.isfinite(value) else None


class BoxDoc(BaseModel):
    lo: list[float]
    hi: list[float]


class SupportDoc(BaseModel):
    x_id: str
    z_id: str
    boxes: list[BoxDoc]


class DimensionsDoc(BaseModel):
    J: int
    dX: int
    nX: int
    nZ: int


class GSpecDoc(BaseModel):
    kind: Literal["identity", "negative-log", "affine"]
    J: int
    coefficients: list[list[float]] | None = None
    offset: list[float] | None = None


class ZParamsDoc(BaseModel):
    z_id: str
    scale: float
    family: Literal["gumbel", "gaussian", "point-mass"]
    draws: int
    smoothing: float
    perturbation: str


class KernelDoc(BaseModel):
    kind: str
    params: list[ZParamsDoc]
    shift: list[float] | None = None


class XPointDoc(BaseModel):
    x_id: str
    value: list[float]
    h: list[float]


class SeedTripleDoc(BaseModel):
    z0: str
    w0: list[float]
    x0: str


class ScenarioDoc(BaseModel):
    spec_version: Literal[1] = SPEC_VERSION
    document_type: Literal["scenario"] = "scenario"
    seed: int
    mode: str
    dims: DimensionsDoc
    g: GSpecDoc
    x0: str
    x_points: list[XPointDoc]
    z_ids: list[str]
    kernel: KernelDoc
    supports: list[SupportDoc]
    seed_triple: SeedTripleDoc


class CertificateDoc(BaseModel):
    z_id: str
    source_x: str
    source_w: list[float]
    source_h: list[float]
    target_x: str
    target_w: list[float]
    residual: float
    implied_h: list[float]


class LambdaSampleDoc(BaseModel):
    a: list[float]
    z_id: str
    x_id: str
    w: list[float]
    value: list[float]


class ResultDoc(BaseModel):
    spec_version: Literal[1] = SPEC_VERSION
    document_type: Literal["ident-result"] = "ident-result"
    run_id: UUID
    scenario_fingerprint: str
    options: dict[str, Any]
    x0: str
    h_hat: dict[str, list[float]]
    provenance: dict[str, list[CertificateDoc]]
    identified_z: list[str]
    unidentified: dict[str, str]
    z_pass: list[str]
    tol_match: float
    oracle_queries: int
    alternates_checked: int
    budget_exhausted: bool
    lambda_samples: list[LambdaSampleDoc] = Field(default_factory=list)
    generated_at: datetime


class CheckDoc(BaseModel):
    code: str
    passed: bool
    message: str
    details: dict[str, Any] | None = None


class ProbeDoc(BaseModel):
    z_id: str
    tested_pairs: int
    worst_separation: float | None
    collision_tol: float
    witness: dict[str, list[float]] | None = None


class AuditDoc(BaseModel):
    spec_version: Literal[1] = SPEC_VERSION
    document_type: Literal["audit"] = "audit"
    scenario_fingerprint: str
    passed: bool
    checks: list[CheckDoc]
    z_pass: list[str]
    probes: list[ProbeDoc]
    generated_at: datetime


class VerificationDoc(BaseModel):
    spec_version: Literal[1] = SPEC_VERSION
    document_type: Literal["verification"] = "verification"
    scenario_fingerprint: str
    run_id: UUID
    passed: bool
    worst_offender: str | None
    h_error: float
    h_worst_x: str | None
    lambda_error: float
    lambda_samples: int
    missing_x: list[str]
    extra_x: list[str]
    identified_z: list[str]
    reachable_z: list[str]
    oracle_queries: int
    stderr_bound: float
    tol_h: float
    tol_lambda: float
    generated_at: datetime


class KernelTestRow(BaseModel):
    name: str
    passed: bool
    value: float | None = None
    tolerance: float | None = None
    detail: str = ""


class KernelTestDoc(BaseModel):
    spec_version: Literal[1] = SPEC_VERSION
    document_type: Literal["kernel-test"] = "kernel-test"
    seed: int
    passed: bool
    rows: list[KernelTestRow]
    generated_at: datetime


class ReplayDoc(BaseModel):
    spec_version: Literal[1] = SPEC_VERSION
    document_type: Literal["replay"] = "replay"
    run_id: UUID
    scenario_fingerprint: str
    passed: bool
    certificates_checked: int
    failures: list[str]
    generated_at: datetime


DocT = TypeVar("DocT", bound=BaseModel)


def _floats(values) -> list[float]:
    return [float(v) for v in values]


def scenario_to_doc(scenario: Scenario) -> ScenarioDoc:
    g = scenario.g_spec
    spec = scenario.lambda_spec
    return ScenarioDoc(
        seed=scenario.seed,
        mode=scenario.mode,
        dims=DimensionsDoc(
            J=scenario.dims.J, dX=scenario.dims.dX, nX=scenario.dims.nX, nZ=scenario.dims.nZ
        ),
        g=GSpecDoc(
            kind=g.kind,
            J=g.J,
            coefficients=[_floats(row) for row in g.coefficients] if g.coefficients else None,
            offset=_floats(g.offset) if g.offset is not None else None,
        ),
        x0=scenario.h_table.x0,
        x_points=[
            XPointDoc(
                x_id=p.x_id, value=_floats(p.value), h=_floats(scenario.h_table.entries[p.x_id])
            )
            for p in scenario.x_points
        ],
        z_ids=list(scenario.z_ids),
        kernel=KernelDoc(
            kind=spec.kind,
            params=[
                ZParamsDoc(
                    z_id=z,
                    scale=spec.params[z].scale,
                    family=spec.params[z].family,
                    draws=spec.params[z].draws,
                    smoothing=spec.params[z].smoothing,
                    perturbation=spec.params[z].perturbation,
                )
                for z in scenario.z_ids
            ],
            shift=_floats(spec.shift) if spec.shift is not None else None,
        ),
        supports=[
            SupportDoc(
                x_id=x,
                z_id=z,
                boxes=[BoxDoc(lo=list(b.lo), hi=list(b.hi)) for b in scenario.supports[(x, z)]],
            )
            for z in scenario.z_ids
            for x in scenario.x_ids
            if (x, z) in scenario.supports and not scenario.supports[(x, z)].is_empty()
        ],
        seed_triple=SeedTripleDoc(
            z0=scenario.seed_triple.z0,
            w0=_floats(scenario.seed_triple.w0),
            x0=scenario.seed_triple.x0,
        ),
    )


def scenario_from_doc(doc: ScenarioDoc) -> Scenario:
    J = doc.dims.J
    return Scenario(
        seed=doc.seed,
        mode=doc.mode,
        dims=Dimensions(J=J, dX=doc.dims.dX, nX=doc.dims.nX, nZ=doc.dims.nZ),
        x_points=tuple(XPoint(x_id=p.x_id, value=tuple(p.value)) for p in doc.x_points),
        z_ids=tuple(doc.z_ids),
        g_spec=GSpec(
            kind=doc.g.kind,
            J=doc.g.J,
            coefficients=tuple(tuple(r) for r in doc.g.coefficients) if doc.g.coefficients else None,
            offset=tuple(doc.g.offset) if doc.g.offset is not None else None,
        ),
        h_table=HTable(entries={p.x_id: tuple(p.h) for p in doc.x_points}, x0=doc.x0),
        lambda_spec=LambdaKernelSpec(
            kind=doc.kernel.kind,  # type: ignore[arg-type]
            params={
                p.z_id: ZKernelParams(
                    scale=p.scale,
                    family=p.family,
                    draws=p.draws,
                    smoothing=p.smoothing,
                    perturbation=p.perturbation,
                )
                for p in doc.kernel.params
            },
            shift=tuple(doc.kernel.shift) if doc.kernel.shift is not None else None,
        ),
        supports={
            (s.x_id, s.z_id): BoxUnion.of((Box(lo=b.lo, hi=b.hi) for b in s.boxes), dim=J)
            for s in doc.supports
        },
        seed_triple=SeedTriple(
            z0=doc.seed_triple.z0, w0=tuple(doc.seed_triple.w0), x0=doc.seed_triple.x0
        ),
    )


def scenario_fingerprint(scenario: Scenario) -> str:
    payload = scenario_to_doc(scenario).model_dump(mode="json")
    return sha256_bytes(canonical_json(payload).encode("utf-8"))


def certificate_to_doc(cert: MatchCertificate) -> CertificateDoc:
    return CertificateDoc(
        z_id=cert.z_id,
        source_x=cert.source_x,
        source_w=list(cert.source_w),
        source_h=list(cert.source_h),
        target_x=cert.target_x,
        target_w=list(cert.target_w),
        residual=cert.residual,
        implied_h=list(cert.implied_h),
    )


def certificate_from_doc(doc: CertificateDoc) -> MatchCertificate:
    return MatchCertificate(
        z_id=doc.z_id,
        source_x=doc.source_x,
        source_w=tuple(doc.source_w),
        source_h=tuple(doc.source_h),
        target_x=doc.target_x,
        target_w=tuple(doc.target_w),
        residual=doc.residual,
        implied_h=tuple(doc.implied_h),
    )


def result_to_doc(
    result: IdentResult,
    *,
    run_id: UUID,
    scenario_fingerprint: str,
    options: dict[str, Any],
    generated_at: datetime | None = None,
) -> ResultDoc:
    return ResultDoc(
        run_id=run_id,
        scenario_fingerprint=scenario_fingerprint,
        options=options,
        x0=result.x0,
        h_hat={x: list(h) for x, h in result.h_hat.items()},
        provenance={
            x: [certificate_to_doc(c) for c in chain] for x, chain in result.provenance.items()
        },
        identified_z=list(result.identified_z),
        unidentified=dict(result.unidentified),
        z_pass=list(result.z_pass),
        tol_match=result.tol_match,
        oracle_queries=result.oracle_queries,
        alternates_checked=result.alternates_checked,
        budget_exhausted=result.budget_exhausted,
        lambda_samples=[
            LambdaSampleDoc(a=list(s.a), z_id=s.z_id, x_id=s.x_id, w=list(s.w), value=list(s.value))
            for s in result.lambda_samples
        ],
        generated_at=generated_at or utc_now(),
    )


def result_from_doc(doc: ResultDoc) -> IdentResult:
    return IdentResult(
        x0=doc.x0,
        h_hat={x: tuple(h) for x, h in doc.h_hat.items()},
        provenance={
            x: tuple(certificate_from_doc(c) for c in chain) for x, chain in doc.provenance.items()
        },
        identified_z=tuple(doc.identified_z),
        unidentified=dict(doc.unidentified),
        z_pass=tuple(doc.z_pass),
        tol_match=doc.tol_match,
        oracle_queries=doc.oracle_queries,
        alternates_checked=doc.alternates_checked,
        budget_exhausted=doc.budget_exhausted,
        lambda_samples=tuple(
            LambdaSample(a=tuple(s.a), z_id=s.z_id, x_id=s.x_id, w=tuple(s.w), value=tuple(s.value))
            for s in doc.lambda_samples
        ),
    )


def audit_to_doc(
    report: AuditReport, *, scenario_fingerprint: str, generated_at: datetime | None = None
) -> AuditDoc:
    probes = []
    for z_id, probe in report.injectivity.items():
        witness = None
        if probe.witness is not None:
            witness = {
                "a1": list(probe.witness.a1),
                "a2": list(probe.witness.a2),
                "value": list(probe.witness.value),
            }
        probes.append(
            ProbeDoc(
                z_id=z_id,
                tested_pairs=probe.tested_pairs,
                worst_separation=_finite_or_none(probe.worst_separation),
                collision_tol=probe.collision_tol,
                witness=witness,
            )
        )
    return AuditDoc(
        scenario_fingerprint=scenario_fingerprint,
        passed=report.passed,
        checks=[
            CheckDoc(code=c.code, passed=c.passed, message=c.message, details=c.details)
            for c in report.checks
        ],
        z_pass=list(report.z_pass),
        probes=probes,
        generated_at=generated_at or utc_now(),
    )


def verification_to_doc(
    report: VerificationReport,
    *,
    scenario_fingerprint: str,
    run_id: UUID,
    lambda_samples: int,
    generated_at: datetime | None = None,
) -> VerificationDoc:
    return VerificationDoc(
        scenario_fingerprint=scenario_fingerprint,
        run_id=run_id,
        passed=report.passed,
        worst_offender=report.worst_offender(),
        h_error=report.h_error,
        h_worst_x=report.h_worst_x,
        lambda_error=report.lambda_error,
        lambda_samples=lambda_samples,
        missing_x=list(report.missing_x),
        extra_x=list(report.extra_x),
        identified_z=list(report.identified_z),
        reachable_z=list(report.reachable_z),
        oracle_queries=report.oracle_queries,
        stderr_bound=report.stderr_bound,
        tol_h=report.tol_h,
        tol_lambda=report.tol_lambda,
        generated_at=generated_at or utc_now(),
    )


def load_document(path: Path, model: type[DocT]) -> DocT:
    """Parse a document, checking its format version and type before validation."""
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(raw, dict):
        raise DocumentTypeError(f"{path}: expected a JSON object")
    version = raw.get("spec_version")
    if version != SPEC_VERSION:
        raise DocumentVersionError(
            f"{path}: document version {version!r} is not supported (expected {SPEC_VERSION})"
        )
    expected = model.model_fields["document_type"].default
    if raw.get("document_type") != expected:
        raise DocumentTypeError(
            f"{path}: expected a {expected!r} document, got {raw.get('document_type')!r}"
        )
    return model.model_validate(raw)


def write_document(path: Path, doc: BaseModel) -> None:
    atomic_write_text(Path(path), doc.model_dump_json(indent=2) + "\n")


def comparable_json(doc: BaseModel) -> str:
    """Serialized form without the generation timestamp, for determinism checks."""
    return doc.model_dump_json(exclude={"generated_at"})


def kernel_suite_to_doc(
    rows: list[KernelCheck], *, seed: int, generated_at: datetime | None = None
) -> KernelTestDoc:
    return KernelTestDoc(
        seed=seed,
        passed=all(r.passed for r in rows),
        rows=[
            KernelTestRow(
                name=r.name,
                passed=r.passed,
                value=_finite_or_none(r.value) if r.value is not None else None,
                tolerance=r.tolerance,
                detail=r.detail,
            )
            for r in rows
        ],
        generated_at=generated_at or utc_now(),
    )
