from __future__ import annotations

import logging
from dataclasses import dataclass
from datetime import datetime

import numpy as np

from ol_index_ident_core.documents import (
    ReplayDoc,
    ResultDoc,
    ScenarioDoc,
    result_from_doc,
    scenario_fingerprint,
    scenario_from_doc,
    utc_now,
)
from ol_index_ident_core.engine.matching import MatchCertificate, implied_h
from ol_index_ident_core.engine.propagation import IdentResult
from ol_index_ident_core.index import g_apply
from ol_index_ident_core.models import DomainError, KnownStructure, Scenario
from ol_index_ident_core.oracle import make_oracle

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ReplayFailure:
    x_id: str
    # index of the certificate in the chain of x_id; -1 for chain-level failures
    position: int
    reason: str

    def describe(self) -> str:
        if self.position < 0:
            return f"x {self.x_id!r}: {self.reason}"
        return f"x {self.x_id!r} certificate {self.position}: {self.reason}"


@dataclass(frozen=True)
class ReplayReport:
    certificates_checked: int
    failures: tuple[ReplayFailure, ...]

    @property
    def passed(self) -> bool:
        return not self.failures

    def messages(self) -> list[str]:
        return [f.describe() for f in self.failures]


def _interior(structure: KnownStructure, x_id: str, z_id: str, w: tuple[float, ...]) -> bool:
    try:
        u = g_apply(structure.g_spec, w)
    except DomainError:
        return False
    return structure.support(x_id, z_id).contains_interior(u)


class _CertificateChecker:
    """Re-executes certificates against a fresh oracle; each distinct certificate runs once."""

    def __init__(self, scenario: Scenario, tol_match: float) -> None:
        self.structure = scenario.known_structure()
        self.oracle = make_oracle(scenario)
        self.tol_match = tol_match
        self._seen: dict[MatchCertificate, str | None] = {}

    @property
    def checked(self) -> int:
        return len(self._seen)

    def __call__(self, cert: MatchCertificate) -> str | None:
        if cert not in self._seen:
            self._seen[cert] = self._check(cert)
        return self._seen[cert]

    def _check(self, cert: MatchCertificate) -> str | None:
        label = f"(z {cert.z_id!r}: {cert.source_x!r} -> {cert.target_x!r})"
        st = self.structure
        for x_id in (cert.source_x, cert.target_x):
            if x_id not in st.x_ids:
                return f"{label} references unknown x {x_id!r}"
        if cert.z_id not in st.z_ids:
            return f"{label} references unknown z"
        if not _interior(st, cert.source_x, cert.z_id, cert.source_w):
            return f"{label} source point is not interior to its support"
        if not _interior(st, cert.target_x, cert.z_id, cert.target_w):
            return f"{label} target point is not interior to its support"
        source_pi = self.oracle.query(cert.source_w, cert.source_x, cert.z_id)
        target_pi = self.oracle.query(cert.target_w, cert.target_x, cert.z_id)
        residual = float(np.max(np.abs(source_pi - target_pi)))
        if residual > self.tol_match:
            return f"{label} replayed residual {residual:.3e} exceeds tol_match {self.tol_match:.3e}"
        expected = implied_h(
            st, source_h=cert.source_h, source_w=cert.source_w, target_w=cert.target_w
        )
        if tuple(float(v) for v in expected) != tuple(cert.implied_h):
            gap = float(np.max(np.abs(expected - np.asarray(cert.implied_h))))
            return f"{label} implied h does not recompute (gap {gap:.3e})"
        return None


def replay_result(result: IdentResult, scenario: Scenario) -> ReplayReport:
    """
    Re-check every provenance chain: each certificate must replay within tol_match and
    recompute its implied h bit for bit, consecutive certificates must hand h along
    unchanged, and the last implied h must be the reported ĥ.
    """
    checker = _CertificateChecker(scenario, result.tol_match)
    failures: list[ReplayFailure] = []
    x0 = result.x0
    if x0 != scenario.seed_triple.x0:
        failures.append(ReplayFailure(x0, -1, "normalization point differs from the scenario"))
    if x0 in result.h_hat and any(v != 0.0 for v in result.h_hat[x0]):
        failures.append(ReplayFailure(x0, -1, "h of the normalization point is not zero"))

    for x_id, h in result.h_hat.items():
        chain = result.provenance.get(x_id)
        if chain is None:
            failures.append(ReplayFailure(x_id, -1, "identified without a provenance chain"))
            continue
        if x_id == x0:
            if chain:
                failures.append(ReplayFailure(x_id, -1, "normalization point carries a chain"))
            continue
        if not chain:
            failures.append(ReplayFailure(x_id, -1, "empty provenance chain"))
            continue
        previous_x, previous_h = x0, (0.0,) * len(h)
        for position, cert in enumerate(chain):
            if cert.source_x != previous_x or tuple(cert.source_h) != tuple(previous_h):
                failures.append(
                    ReplayFailure(x_id, position, "does not continue the previous link")
                )
                break
            problem = checker(cert)
            if problem is not None:
                failures.append(ReplayFailure(x_id, position, problem))
                break
            previous_x, previous_h = cert.target_x, cert.implied_h
        else:
            if previous_x != x_id:
                failures.append(ReplayFailure(x_id, -1, "chain ends at a different x"))
            elif tuple(previous_h) != tuple(h):
                failures.append(ReplayFailure(x_id, -1, "chain sum differs from reported h"))

    for x_id in result.provenance:
        if x_id not in result.h_hat:
            failures.append(ReplayFailure(x_id, -1, "chain for an x that is not identified"))

    report = ReplayReport(certificates_checked=checker.checked, failures=tuple(failures))
    logger.info(
        "replay checked=%d failures=%d", report.certificates_checked, len(report.failures)
    )
    return report


def replay(result_doc: ResultDoc, scenario_doc: ScenarioDoc) -> ReplayReport:
    scenario = scenario_from_doc(scenario_doc)
    fingerprint = scenario_fingerprint(scenario)
    if fingerprint != result_doc.scenario_fingerprint:
        return ReplayReport(
            certificates_checked=0,
            failures=(
                ReplayFailure(
                    result_doc.x0,
                    -1,
                    f"result was produced from scenario {result_doc.scenario_fingerprint[:12]}, "
                    f"not {fingerprint[:12]}",
                ),
            ),
        )
    return replay_result(result_from_doc(result_doc), scenario)


def replay_to_doc(
    report: ReplayReport,
    result_doc: ResultDoc,
    *,
    generated_at: datetime | None = None,
) -> ReplayDoc:
    return ReplayDoc(
        run_id=result_doc.run_id,
        scenario_fingerprint=result_doc.scenario_fingerprint,
        passed=report.passed,
        certificates_checked=report.certificates_checked,
        failures=report.messages(),
        generated_at=generated_at or utc_now(),
    )
