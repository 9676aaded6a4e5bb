from __future__ import annotations

from collections.abc import Sequence

import numpy as np
from scipy.special import logsumexp, softmax

from ol_index_ident_core.kernels.arum import (
    EULER_GAMMA,
    CcpEstimate,
    ConfigurationError,
    as_index_vector,
    error_draws,
)


def competing_risks_parts(a: Sequence[float], *, scale: float = 1.0) -> tuple[float, np.ndarray]:
    """
    Expected log failure time G(a) and cause probabilities P(a) for ln T_j = a_j - σ ε_j
    with i.i.d. standard Gumbel ε.

    G(a) = -σ (ln Σ_k exp(-a_k/σ) + γ), P_j(a) = exp(-a_j/σ) / Σ_k exp(-a_k/σ).
    """
    arr = as_index_vector(a)
    scaled = -arr / scale
    g = -scale * (float(logsumexp(scaled)) + EULER_GAMMA)
    return g, softmax(scaled)


def competing_risks_lambda_gumbel(a: Sequence[float], *, scale: float = 1.0) -> np.ndarray:
    g, p = competing_risks_parts(a, scale=scale)
    return g * p


def _product_estimate(
    times: np.ndarray, causes: np.ndarray, draws: int
) -> CcpEstimate:
    # times: (draws,), causes: (draws, J); Λ_j estimated by mean(times) * mean(causes_j)
    g_hat = times.mean()
    p_hat = causes.mean(axis=0)
    ddof = 1 if draws > 1 else 0
    var_g = times.var(ddof=ddof)
    var_p = causes.var(axis=0, ddof=ddof)
    centered = times - g_hat
    cov = (centered[:, None] * (causes - p_hat)).sum(axis=0) / max(draws - ddof, 1)
    var = p_hat**2 * var_g + g_hat**2 * var_p + 2.0 * g_hat * p_hat * cov
    return CcpEstimate(
        values=g_hat * p_hat,
        stderr=np.sqrt(np.maximum(var, 0.0) / draws),
        draws=draws,
    )


def competing_risks_mc(
    a: Sequence[float],
    *,
    family: str = "gumbel",
    draws: int,
    stream: int,
    scale: float = 1.0,
) -> CcpEstimate:
    """
    Simulated E[ln min_j T_j] · P(D = j) with delta-method standard errors.

    The cause D is the argmin of the log failure times; ties go to the lowest index.
    """
    if draws < 1:
        raise ConfigurationError("draws must be >= 1")
    arr = as_index_vector(a)
    eps = error_draws(family, arr.size, draws, stream)
    log_times = arr[None, :] - scale * eps
    causes = np.argmin(log_times, axis=1)
    hits = (causes[:, None] == np.arange(arr.size)[None, :]).astype(float)
    return _product_estimate(log_times.min(axis=1), hits, draws)


def smoothed_competing_risks_mc(
    a: Sequence[float],
    *,
    family: str = "gumbel",
    draws: int,
    stream: int,
    scale: float = 1.0,
    smoothing: float = 0.05,
) -> CcpEstimate:
    """
    Smoothed simulator: the minimum is replaced by -τ·logsumexp(-(a - σε)/τ) and the cause
    indicator by its softmax. With the draws held fixed P̃ is the gradient of G̃, so the
    product keeps the G·P structure and stays injective.
    """
    if draws < 1:
        raise ConfigurationError("draws must be >= 1")
    arr = as_index_vector(a)
    eps = error_draws(family, arr.size, draws, stream)
    scaled = (scale * eps - arr[None, :]) / smoothing
    times = -smoothing * logsumexp(scaled, axis=1)
    causes = softmax(scaled, axis=1)
    return _product_estimate(times, causes, draws)
