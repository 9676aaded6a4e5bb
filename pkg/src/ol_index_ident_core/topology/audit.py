from __future__ import annotations

import logging
from collections.abc import Mapping
from dataclasses import dataclass, field

import numpy as np

from ol_index_ident_core.index import g_apply
from ol_index_ident_core.kernels.injectivity import InjectivityReport, injectivity_probe
from ol_index_ident_core.kernels.registry import build_kernel
from ol_index_ident_core.models import DomainError, Scenario
from ol_index_ident_core.topology.graphs import a_union, is_connected, mz_overlap_graph
from ol_index_ident_core.util import stable_stream

logger = logging.getLogger(__name__)

CHECK_INJECTIVITY = "injectivity"
CHECK_CONNECTIVITY = "within-z-connectivity"
CHECK_Z_OVERLAP = "z-overlap"
CHECK_NORMALIZATION = "normalization"
CHECK_CODES = (CHECK_INJECTIVITY, CHECK_CONNECTIVITY, CHECK_Z_OVERLAP, CHECK_NORMALIZATION)

DEFAULT_PROBE_SAMPLES = 64


@dataclass(frozen=True)
class AssumptionCheck:
    code: str
    passed: bool
    message: str
    details: dict[str, object] | None = None


@dataclass(frozen=True)
class AuditReport:
    checks: tuple[AssumptionCheck, ...]
    # z's whose kernel passed the injectivity probe
    z_pass: tuple[str, ...]
    injectivity: Mapping[str, InjectivityReport] = field(default_factory=dict)

    def check(self, code: str) -> AssumptionCheck:
        for c in self.checks:
            if c.code == code:
                return c
        raise KeyError(code)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[AssumptionCheck]:
        return [c for c in self.checks if not c.passed]


def _shifted_kernel(scenario: Scenario, z_id: str):
    kernel = build_kernel(scenario.lambda_spec, z_id, seed=scenario.seed)
    shift = scenario.lambda_spec.shift
    if shift is None:
        return kernel
    offset = np.asarray(shift, dtype=float)
    return lambda a: kernel(np.asarray(a, dtype=float) + offset)


def _injectivity(
    scenario: Scenario, *, samples: int
) -> tuple[AssumptionCheck, tuple[str, ...], dict[str, InjectivityReport]]:
    reports: dict[str, InjectivityReport] = {}
    z_pass: list[str] = []
    failed: dict[str, object] = {}
    for z_id in scenario.z_ids:
        domain = a_union(scenario, z_id)
        if domain.is_empty():
            continue
        report = injectivity_probe(
            _shifted_kernel(scenario, z_id),
            domain,
            samples=samples,
            seed=stable_stream(scenario.seed, "audit-injectivity", z_id),
        )
        reports[z_id] = report
        if report.passed:
            z_pass.append(z_id)
        else:
            assert report.witness is not None
            failed[z_id] = {
                "a1": list(report.witness.a1),
                "a2": list(report.witness.a2),
                "value": list(report.witness.value),
                "worst_separation": report.worst_separation,
            }
    if failed:
        check = AssumptionCheck(
            code=CHECK_INJECTIVITY,
            passed=False,
            message=f"Kernel collision found at {len(failed)} z value(s).",
            details={"collisions": failed},
        )
    else:
        check = AssumptionCheck(
            code=CHECK_INJECTIVITY,
            passed=True,
            message="No collision found by the probe.",
            details={"probed_z": len(reports)},
        )
    return check, tuple(z_pass), reports


def _connectivity(scenario: Scenario, z_pass: tuple[str, ...]) -> AssumptionCheck:
    split: dict[str, object] = {}
    for z_id in z_pass:
        report = is_connected(a_union(scenario, z_id))
        if not report.connected:
            split[z_id] = {"components": report.components, "labels": list(report.labels)}
    if split:
        return AssumptionCheck(
            code=CHECK_CONNECTIVITY,
            passed=False,
            message=f"Index support is disconnected at {len(split)} z value(s).",
            details={"disconnected": split},
        )
    return AssumptionCheck(
        code=CHECK_CONNECTIVITY, passed=True, message="Every retained index support is connected."
    )


def _z_overlap(scenario: Scenario, z_pass: tuple[str, ...]) -> AssumptionCheck:
    graph = mz_overlap_graph(scenario, z_ids=z_pass)
    components = graph.components()
    details: dict[str, object] = {
        "components": components,
        "edges": [
            {"a": e.a, "b": e.b, "via": e.via, "witness": list(e.witness)} for e in graph.edges
        ],
    }
    if len(components) > 1:
        return AssumptionCheck(
            code=CHECK_Z_OVERLAP,
            passed=False,
            message=f"z-overlap graph has {len(components)} components.",
            details=details,
        )
    return AssumptionCheck(
        code=CHECK_Z_OVERLAP, passed=True, message="z-overlap graph is connected.", details=details
    )


def _normalization(scenario: Scenario, z_pass: tuple[str, ...]) -> AssumptionCheck:
    st = scenario.seed_triple
    h0 = scenario.h_table.value(st.x0)
    problems: list[str] = []
    if np.any(h0 != 0.0):
        problems.append("h(x0) is not zero")
    try:
        u0 = g_apply(scenario.g_spec, st.w0)
    except DomainError as exc:
        problems.append(f"w0 outside the domain of g: {exc}")
        u0 = None
    if u0 is not None and not scenario.support(st.x0, st.z0).contains_interior(u0):
        problems.append("g(w0) is not interior to G(x0, z0)")
    details: dict[str, object] = {
        "x0": st.x0,
        "z0": st.z0,
        "w0": list(st.w0),
        "z0_retained": st.z0 in z_pass,
    }
    if problems:
        return AssumptionCheck(
            code=CHECK_NORMALIZATION, passed=False, message="; ".join(problems), details=details
        )
    return AssumptionCheck(
        code=CHECK_NORMALIZATION, passed=True, message="Seed triple is valid.", details=details
    )


def assumption_audit(scenario: Scenario, *, samples: int = DEFAULT_PROBE_SAMPLES) -> AuditReport:
    """
    Injectivity probe per z, connectivity of each true A(z), connectivity of the z-overlap
    graph, and validity of the seed triple.

    Connectivity checks run over the z's that pass the probe; that set is reported as
    `z_pass` and is what the engine treats as Z0.
    """
    injectivity, z_pass, reports = _injectivity(scenario, samples=samples)
    checks = (
        injectivity,
        _connectivity(scenario, z_pass),
        _z_overlap(scenario, z_pass),
        _normalization(scenario, z_pass),
    )
    for c in checks:
        logger.info("audit %s passed=%s %s", c.code, c.passed, c.message)
    return AuditReport(checks=checks, z_pass=z_pass, injectivity=reports)
