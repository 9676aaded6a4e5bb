from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ol_index_ident_core.engine.propagation import IdentResult
from ol_index_ident_core.engine.reachability import brute_force_identified_set
from ol_index_ident_core.kernels.registry import build_kernel, kernel_stderr
from ol_index_ident_core.models import Scenario

logger = logging.getLogger(__name__)

# h and Λ tolerances widen to this multiple of the kernel's stderr for Monte Carlo kernels
STDERR_MULTIPLE = 5.0


@dataclass(frozen=True)
class VerificationReport:
    h_error: float
    h_worst_x: str | None
    lambda_error: float
    lambda_worst: tuple[str, tuple[float, ...]] | None
    missing_x: tuple[str, ...]
    extra_x: tuple[str, ...]
    identified_z: tuple[str, ...]
    reachable_z: tuple[str, ...]
    oracle_queries: int
    stderr_bound: float
    tol_h: float
    tol_lambda: float

    @property
    def set_difference_empty(self) -> bool:
        return not self.missing_x and not self.extra_x

    @property
    def passed(self) -> bool:
        return (
            self.h_error <= self.tol_h
            and self.lambda_error <= self.tol_lambda
            and self.set_difference_empty
        )

    def worst_offender(self) -> str | None:
        if self.h_error > self.tol_h:
            return f"h error {self.h_error:.3e} at x {self.h_worst_x!r} exceeds {self.tol_h:.3e}"
        if self.lambda_error > self.tol_lambda:
            assert self.lambda_worst is not None
            z_id, a = self.lambda_worst
            return (
                f"lambda error {self.lambda_error:.3e} at z {z_id!r} a={list(a)} exceeds "
                f"{self.tol_lambda:.3e}"
            )
        if self.missing_x:
            return f"identifiable x not identified: {', '.join(self.missing_x)}"
        if self.extra_x:
            return f"x identified beyond the reachable set: {', '.join(self.extra_x)}"
        return None


def _true_lambda(scenario: Scenario, a: np.ndarray, z_id: str) -> np.ndarray:
    # ĥ is normalized at x0, so Λ̂(a) estimates the true kernel at a + h(x0)
    spec = scenario.lambda_spec
    point = a + scenario.h_table.value(scenario.h_table.x0)
    if spec.shift is not None:
        point = point + np.asarray(spec.shift, dtype=float)
    return build_kernel(spec, z_id, seed=scenario.seed)(point)


def verify_against_truth(
    result: IdentResult,
    scenario: Scenario,
    *,
    tol_h: float | None = None,
    tol_lambda: float | None = None,
) -> VerificationReport:
    """
    Compare ĥ with h(x) - h(x0), Λ̂ samples with the true kernel, and the identified x set
    with the brute-force reachable set over the same retained z's.
    """
    h0 = scenario.h_table.value(scenario.h_table.x0)
    h_error, h_worst = 0.0, None
    for x_id in result.h_hat:
        err = float(np.max(np.abs(result.h(x_id) - (scenario.h_table.value(x_id) - h0))))
        if h_worst is None or err > h_error:
            h_error, h_worst = err, x_id

    lambda_error, lambda_worst = 0.0, None
    stderr_bound = 0.0
    for sample in result.lambda_samples:
        a = np.asarray(sample.a, dtype=float)
        truth = _true_lambda(scenario, a, sample.z_id)
        err = float(np.max(np.abs(np.asarray(sample.value) - truth)))
        if err > lambda_error:
            lambda_error, lambda_worst = err, (sample.z_id, sample.a)
        if scenario.lambda_spec.is_mc:
            se = kernel_stderr(
                scenario.lambda_spec, sample.z_id, a + h0, seed=scenario.seed
            )
            stderr_bound = max(stderr_bound, float(np.max(se)))

    base_h = tol_h if tol_h is not None else 10.0 * result.tol_match
    base_lambda = tol_lambda if tol_lambda is not None else base_h
    reach = brute_force_identified_set(scenario, z_pass=result.z_pass)
    identified = set(result.h_hat)
    report = VerificationReport(
        h_error=h_error,
        h_worst_x=h_worst,
        lambda_error=lambda_error,
        lambda_worst=lambda_worst,
        missing_x=tuple(x for x in scenario.x_ids if x in reach.x_ids and x not in identified),
        extra_x=tuple(x for x in scenario.x_ids if x in identified and x not in reach.x_ids),
        identified_z=result.identified_z,
        reachable_z=tuple(z for z in scenario.z_ids if z in reach.z_ids),
        oracle_queries=result.oracle_queries,
        stderr_bound=stderr_bound,
        tol_h=max(base_h, STDERR_MULTIPLE * stderr_bound),
        tol_lambda=max(base_lambda, STDERR_MULTIPLE * stderr_bound),
    )
    logger.info(
        "verification h_error=%.3e lambda_error=%.3e missing=%d extra=%d passed=%s",
        report.h_error,
        report.lambda_error,
        len(report.missing_x),
        len(report.extra_x),
        report.passed,
    )
    return report
