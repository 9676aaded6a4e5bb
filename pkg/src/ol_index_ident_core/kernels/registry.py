from __future__ import annotations

from collections.abc import Callable

import numpy as np

from ol_index_ident_core.kernels.arum import (
    ConfigurationError,
    arum_lambda_gumbel,
    smoothed_ccp_mc,
)
from ol_index_ident_core.kernels.competing_risks import (
    competing_risks_lambda_gumbel,
    smoothed_competing_risks_mc,
)
from ol_index_ident_core.kernels.perturbed import (
    CUSTOM_PERTURBATIONS,
    PerturbationSpec,
    entropy_perturbation,
    perturbed_solve,
)
from ol_index_ident_core.models import LambdaKernelSpec, ZKernelParams
from ol_index_ident_core.util import stable_stream

Kernel = Callable[[np.ndarray], np.ndarray]

# Tighter than the public FOC default so the engine sees a smooth Π.
KERNEL_FOC_TOL = 1e-13


def mc_stream(seed: int, kind: str, z_id: str) -> int:
    """One stream per (scenario seed, kernel kind, z): common random numbers across (w, x)."""
    return stable_stream(seed, kind, z_id)


def perturbation_for(params: ZKernelParams, *, kind: str) -> PerturbationSpec:
    if kind == "perturbed-entropy":
        return entropy_perturbation(default_scale=params.scale)
    try:
        factory = CUSTOM_PERTURBATIONS[params.perturbation]
    except KeyError:
        raise ConfigurationError(f"unknown custom perturbation: {params.perturbation!r}") from None
    return factory(default_scale=params.scale)


def _noninjective(a: np.ndarray, *, scale: float) -> np.ndarray:
    # Constant in the first coordinate of a.
    masked = np.array(a, dtype=float)
    masked[0] = 0.0
    return arum_lambda_gumbel(masked, scale=scale)


def build_kernel(spec: LambdaKernelSpec, z_id: str, *, seed: int) -> Kernel:
    """The map a ↦ Λ(a, z) for one z, without the scenario shift."""
    params = spec.for_z(z_id)
    kind = spec.kind
    if kind == "arum-gumbel":
        return lambda a: arum_lambda_gumbel(a, scale=params.scale)
    if kind == "competing-risks-gumbel":
        return lambda a: competing_risks_lambda_gumbel(a, scale=params.scale)
    if kind == "noninjective-test":
        return lambda a: _noninjective(a, scale=params.scale)
    if kind == "arum-mc":
        stream = mc_stream(seed, kind, z_id)
        return lambda a: smoothed_ccp_mc(
            a,
            family=params.family,
            draws=params.draws,
            stream=stream,
            scale=params.scale,
            smoothing=params.smoothing,
        ).values
    if kind == "competing-risks-mc":
        stream = mc_stream(seed, kind, z_id)
        return lambda a: smoothed_competing_risks_mc(
            a,
            family=params.family,
            draws=params.draws,
            stream=stream,
            scale=params.scale,
            smoothing=params.smoothing,
        ).values
    if kind in ("perturbed-entropy", "perturbed-custom"):
        pert = perturbation_for(params, kind=kind)
        return lambda a: perturbed_solve(
            np.concatenate([[0.0], np.asarray(a, dtype=float)]), pert, z_id, tol=KERNEL_FOC_TOL
        )[1:]
    raise ConfigurationError(f"unsupported kernel kind: {kind!r}")


def kernel_stderr(spec: LambdaKernelSpec, z_id: str, a: np.ndarray, *, seed: int) -> np.ndarray:
    """Monte Carlo standard error of Λ(a, z); zeros for closed-form and solver kernels."""
    a_arr = np.asarray(a, dtype=float)
    if spec.shift is not None:
        a_arr = a_arr + np.asarray(spec.shift, dtype=float)
    if not spec.is_mc:
        return np.zeros_like(a_arr)
    params = spec.for_z(z_id)
    estimator = smoothed_ccp_mc if spec.kind == "arum-mc" else smoothed_competing_risks_mc
    return estimator(
        a_arr,
        family=params.family,
        draws=params.draws,
        stream=mc_stream(seed, spec.kind, z_id),
        scale=params.scale,
        smoothing=params.smoothing,
    ).stderr
