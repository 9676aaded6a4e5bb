from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ol_index_ident_core.kernels.arum import (
    arum_lambda_gumbel,
    ccp_mc,
    wdz_gap_mc,
    wdz_gradient_check,
)
from ol_index_ident_core.kernels.competing_risks import (
    competing_risks_lambda_gumbel,
    competing_risks_mc,
)
from ol_index_ident_core.kernels.injectivity import injectivity_probe
from ol_index_ident_core.kernels.perturbed import (
    entropy_perturbation,
    foc_residual,
    log_barrier_perturbation,
    perturbed_lambda,
    perturbed_solve,
)
from ol_index_ident_core.kernels.registry import build_kernel
from ol_index_ident_core.models import LambdaKernelSpec, ZKernelParams
from ol_index_ident_core.topology.boxes import Box, BoxUnion
from ol_index_ident_core.util import stable_stream

logger = logging.getLogger(__name__)

SOFTMAX_TOL = 1e-8
FOC_TOL = 1e-10
WDZ_TOL = 1e-6
# central differences: shrinking the step tenfold should shrink the gap about a hundredfold
WDZ_RATIO_RANGE = (50.0, 200.0)
MC_STDERRS = 4.0
# covers the O(step²) bias of the central difference at step 1e-3
WDZ_FLOOR = 1e-6
Z_SCORE_LIMIT = 3.0
Z_SCORE_HARD_LIMIT = 5.0
# share of components allowed outside Z_SCORE_LIMIT standard errors
Z_SCORE_SLACK = 0.01


@dataclass(frozen=True)
class KernelCheck:
    name: str
    passed: bool
    value: float | None = None
    tolerance: float | None = None
    detail: str = ""


@dataclass(frozen=True)
class SuiteOptions:
    J: int = 2
    points: int = 100
    softmax_points: int = 1_000
    draws: int = 1_000_000
    wdz_mc_draws: int = 100_000


def _rng(seed: int, name: str) -> np.random.Generator:
    return np.random.default_rng(stable_stream(seed, "kernel-suite", name))


def check_entropy_softmax(seed: int, opts: SuiteOptions) -> KernelCheck:
    rng = _rng(seed, "entropy-softmax")
    worst = 0.0
    for _ in range(opts.softmax_points):
        a = rng.uniform(-3.0, 3.0, size=opts.J)
        c = float(rng.uniform(0.2, 5.0))
        q = perturbed_lambda(a, entropy_perturbation(default_scale=c))
        worst = max(worst, float(np.max(np.abs(q - arum_lambda_gumbel(a, scale=c)))))
    return KernelCheck(
        name="entropy-softmax",
        passed=worst <= SOFTMAX_TOL,
        value=worst,
        tolerance=SOFTMAX_TOL,
        detail=f"{opts.softmax_points} random (a, c)",
    )


def check_log_barrier_foc(seed: int, opts: SuiteOptions) -> KernelCheck:
    rng = _rng(seed, "log-barrier-foc")
    worst = 0.0
    for _ in range(opts.points):
        a = np.concatenate([[0.0], rng.uniform(-3.0, 3.0, size=opts.J)])
        pert = log_barrier_perturbation(default_scale=float(rng.uniform(0.2, 5.0)))
        q = perturbed_solve(a, pert)
        worst = max(worst, foc_residual(a, q, pert))
    return KernelCheck(
        name="log-barrier-foc",
        passed=worst <= FOC_TOL,
        value=worst,
        tolerance=FOC_TOL,
        detail=f"{opts.points} random (a, c)",
    )


def _z_score_check(name: str, z_scores: list[float], draws: int) -> KernelCheck:
    scores = np.asarray(z_scores)
    outside = float(np.mean(scores > Z_SCORE_LIMIT))
    worst = float(scores.max()) if scores.size else 0.0
    return KernelCheck(
        name=name,
        passed=outside <= Z_SCORE_SLACK and worst <= Z_SCORE_HARD_LIMIT,
        value=worst,
        tolerance=Z_SCORE_HARD_LIMIT,
        detail=(
            f"{scores.size} components at {draws} draws, "
            f"{outside:.2%} beyond {Z_SCORE_LIMIT:g} standard errors"
        ),
    )


def check_competing_risks_mc(seed: int, opts: SuiteOptions) -> KernelCheck:
    rng = _rng(seed, "competing-risks-mc")
    stream = stable_stream(seed, "kernel-suite", "competing-risks-draws")
    scores: list[float] = []
    for _ in range(opts.points):
        a = rng.uniform(-1.0, 0.2, size=opts.J)
        estimate = competing_risks_mc(a, draws=opts.draws, stream=stream)
        exact = competing_risks_lambda_gumbel(a)
        scores.extend((np.abs(estimate.values - exact) / estimate.stderr).tolist())
    return _z_score_check("competing-risks-mc", scores, opts.draws)


def check_arum_mc(seed: int, opts: SuiteOptions) -> KernelCheck:
    rng = _rng(seed, "arum-mc")
    stream = stable_stream(seed, "kernel-suite", "arum-draws")
    scores: list[float] = []
    for _ in range(opts.points):
        a = rng.uniform(-2.0, 2.0, size=opts.J)
        estimate = ccp_mc(a, draws=opts.draws, stream=stream)
        exact = arum_lambda_gumbel(a)
        scores.extend((np.abs(estimate.values - exact) / estimate.stderr).tolist())
    return _z_score_check("arum-mc", scores, opts.draws)


def check_wdz_closed_form(seed: int, opts: SuiteOptions) -> KernelCheck:
    rng = _rng(seed, "wdz-closed-form")
    coarse = fine = 0.0
    for _ in range(opts.points):
        a = rng.uniform(-2.0, 2.0, size=opts.J)
        coarse = max(coarse, wdz_gradient_check(a, fd_step=1e-2, analytic=True))
        fine = max(fine, wdz_gradient_check(a, fd_step=1e-3, analytic=True))
    ratio = coarse / fine if fine > 0 else float("inf")
    lo, hi = WDZ_RATIO_RANGE
    return KernelCheck(
        name="wdz-closed-form",
        passed=fine <= WDZ_TOL and lo <= ratio <= hi,
        value=fine,
        tolerance=WDZ_TOL,
        detail=f"gap at step 1e-3, step 1e-2 / step 1e-3 ratio {ratio:.1f}",
    )


def check_wdz_mc(seed: int, opts: SuiteOptions) -> KernelCheck:
    rng = _rng(seed, "wdz-mc")
    worst = 0.0
    tolerance = 0.0
    breaches = 0
    for i in range(min(opts.points, 10)):
        a = rng.uniform(-2.0, 2.0, size=opts.J)
        gap = wdz_gap_mc(
            a,
            draws=opts.wdz_mc_draws,
            fd_step=1e-3,
            stream=stable_stream(seed, "kernel-suite", "wdz-draws", str(i)),
        )
        bound = MC_STDERRS * gap.stderr + WDZ_FLOOR
        breaches += int(np.sum(np.abs(gap.values) > bound))
        worst = max(worst, float(np.max(np.abs(gap.values))))
        tolerance = max(tolerance, float(np.max(bound)))
    return KernelCheck(
        name="wdz-mc",
        passed=breaches == 0,
        value=worst,
        tolerance=tolerance,
        detail=(
            f"common random numbers, {opts.wdz_mc_draws} draws, "
            f"{breaches} coordinates beyond {MC_STDERRS:g} standard errors"
        ),
    )


def check_injectivity_probe(seed: int, opts: SuiteOptions) -> KernelCheck:
    domain = BoxUnion.of([Box(lo=(-1.0,) * opts.J, hi=(1.0,) * opts.J)])
    params = {"z": ZKernelParams()}
    verdicts = {}
    for kind in ("arum-gumbel", "noninjective-test"):
        kernel = build_kernel(LambdaKernelSpec(kind=kind, params=params), "z", seed=seed)
        report = injectivity_probe(
            kernel, domain, samples=32, seed=stable_stream(seed, "kernel-suite", kind)
        )
        verdicts[kind] = report.passed
    passed = verdicts["arum-gumbel"] and not verdicts["noninjective-test"]
    return KernelCheck(
        name="injectivity-probe",
        passed=passed,
        detail=(
            f"arum-gumbel passed={verdicts['arum-gumbel']}, "
            f"noninjective-test passed={verdicts['noninjective-test']}"
        ),
    )


SUITE = (
    check_entropy_softmax,
    check_log_barrier_foc,
    check_wdz_closed_form,
    check_wdz_mc,
    check_arum_mc,
    check_competing_risks_mc,
    check_injectivity_probe,
)


def run_kernel_suite(seed: int, opts: SuiteOptions | None = None) -> list[KernelCheck]:
    opts = opts or SuiteOptions()
    rows = []
    for check in SUITE:
        row = check(seed, opts)
        logger.info("kernel check %s passed=%s value=%s", row.name, row.passed, row.value)
        rows.append(row)
    return rows
