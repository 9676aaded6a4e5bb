from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import logsumexp, softmax

EULER_GAMMA = float(np.euler_gamma)


class ConfigurationError(ValueError):
    pass


@dataclass(frozen=True)
class SurplusEstimate:
    value: float
    stderr: float
    draws: int


@dataclass(frozen=True)
class CcpEstimate:
    values: np.ndarray
    stderr: np.ndarray
    draws: int


def as_index_vector(a: Sequence[float]) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(a, dtype=float))
    if arr.ndim != 1 or not np.all(np.isfinite(arr)):
        raise ValueError("index vector must be a finite 1-d array")
    return arr


def _with_outside(a: np.ndarray) -> np.ndarray:
    return np.concatenate([[0.0], a])


@lru_cache(maxsize=64)
def _cached_draws(family: str, width: int, draws: int, stream: int) -> np.ndarray:
    rng = np.random.default_rng(stream)
    if family == "gumbel":
        out = rng.gumbel(size=(draws, width))
    elif family == "gaussian":
        out = rng.standard_normal(size=(draws, width))
    elif family == "point-mass":
        out = np.zeros((draws, width))
    else:
        raise ConfigurationError(f"unsupported error family: {family!r}")
    out.setflags(write=False)
    return out


def error_draws(family: str, width: int, draws: int, stream: int) -> np.ndarray:
    """
    Standardized i.i.d. error draws, shape (draws, width), read-only.

    The same (family, width, draws, stream) always returns the same array, which is
    how common random numbers are shared across evaluations.
    """
    if draws < 1:
        raise ConfigurationError("draws must be >= 1")
    return _cached_draws(family, int(width), int(draws), int(stream))


def arum_lambda_gumbel(a: Sequence[float], *, scale: float = 1.0) -> np.ndarray:
    """
    CCPs of the inside alternatives under i.i.d. Gumbel errors with the outside
    utility normalized to zero: Λ_j = exp(a_j/σ) / (1 + Σ_k exp(a_k/σ)).
    """
    arr = as_index_vector(a)
    return softmax(_with_outside(arr) / scale)[1:]


def arum_surplus_gumbel(a: Sequence[float], *, scale: float = 1.0) -> float:
    arr = as_index_vector(a)
    return float(scale * (logsumexp(_with_outside(arr) / scale) + EULER_GAMMA))


def surplus_mc(
    a: Sequence[float],
    *,
    family: str = "gumbel",
    draws: int,
    stream: int,
    scale: float = 1.0,
) -> SurplusEstimate:
    """Sample mean of max_j(σ ε_j + a_j) over j = 0..J with a_0 = 0."""
    if draws < 2:
        raise ConfigurationError("surplus_mc needs draws >= 2")
    arr = as_index_vector(a)
    eps = error_draws(family, arr.size + 1, draws, stream)
    maxima = np.max(scale * eps + _with_outside(arr), axis=1)
    return SurplusEstimate(
        value=float(maxima.mean()),
        stderr=float(maxima.std(ddof=1) / np.sqrt(draws)),
        draws=draws,
    )


def ccp_mc(
    a: Sequence[float],
    *,
    family: str = "gumbel",
    draws: int,
    stream: int,
    scale: float = 1.0,
) -> CcpEstimate:
    """Argmax frequencies of the inside alternatives; ties go to the lowest index."""
    arr = as_index_vector(a)
    eps = error_draws(family, arr.size + 1, draws, stream)
    winners = np.argmax(scale * eps + _with_outside(arr), axis=1)
    hits = winners[:, None] == np.arange(1, arr.size + 1)[None, :]
    values = hits.mean(axis=0)
    stderr = np.sqrt(values * (1.0 - values) / draws)
    return CcpEstimate(values=values, stderr=stderr, draws=draws)


def smoothed_ccp_mc(
    a: Sequence[float],
    *,
    family: str = "gumbel",
    draws: int,
    stream: int,
    scale: float = 1.0,
    smoothing: float = 0.05,
) -> CcpEstimate:
    """
    Logit-smoothed frequency simulator: mean over draws of softmax((a + σ ε) / τ).

    For fixed draws this is the gradient of the strictly convex smooth surplus
    mean(τ · logsumexp((a + σ ε) / τ)), so it is itself a smooth injective map of a.
    """
    arr = as_index_vector(a)
    eps = error_draws(family, arr.size + 1, draws, stream)
    probs = softmax((scale * eps + _with_outside(arr)) / smoothing, axis=1)[:, 1:]
    ddof = 1 if draws > 1 else 0
    return CcpEstimate(
        values=probs.mean(axis=0),
        stderr=probs.std(axis=0, ddof=ddof) / np.sqrt(draws),
        draws=draws,
    )


def surplus_gradient_fd(
    a: Sequence[float],
    *,
    family: str = "gumbel",
    draws: int,
    stream: int,
    fd_step: float,
    scale: float = 1.0,
) -> np.ndarray:
    """Central differences of surplus_mc; both sides reuse the same draws."""
    if fd_step <= 0:
        raise ValueError("fd_step must be > 0")
    arr = as_index_vector(a)
    grad = np.empty_like(arr)
    for j in range(arr.size):
        step = np.zeros_like(arr)
        step[j] = fd_step
        up = surplus_mc(arr + step, family=family, draws=draws, stream=stream, scale=scale)
        down = surplus_mc(arr - step, family=family, draws=draws, stream=stream, scale=scale)
        grad[j] = (up.value - down.value) / (2.0 * fd_step)
    return grad


def wdz_gradient_check(
    a: Sequence[float],
    *,
    family: str = "gumbel",
    draws: int = 100_000,
    fd_step: float = 1e-3,
    stream: int = 0,
    scale: float = 1.0,
    analytic: bool = False,
) -> float:
    """
    Worst coordinatewise gap between the surplus gradient and the CCPs.

    `analytic=True` differentiates the closed-form Gumbel surplus and compares with
    `arum_lambda_gumbel`; otherwise the MC surplus is differentiated with common random
    numbers and compared with the MC argmax frequencies of the same draws.
    """
    if fd_step <= 0:
        raise ValueError("fd_step must be > 0")
    arr = as_index_vector(a)
    if analytic:
        grad = np.empty_like(arr)
        for j in range(arr.size):
            step = np.zeros_like(arr)
            step[j] = fd_step
            grad[j] = (
                arum_surplus_gumbel(arr + step, scale=scale)
                - arum_surplus_gumbel(arr - step, scale=scale)
            ) / (2.0 * fd_step)
        return float(np.max(np.abs(grad - arum_lambda_gumbel(arr, scale=scale))))
    grad = surplus_gradient_fd(
        arr, family=family, draws=draws, stream=stream, fd_step=fd_step, scale=scale
    )
    ccp = ccp_mc(arr, family=family, draws=draws, stream=stream, scale=scale)
    return float(np.max(np.abs(grad - ccp.values)))


def wdz_gap_mc(
    a: Sequence[float],
    *,
    family: str = "gumbel",
    draws: int = 100_000,
    stream: int = 0,
    fd_step: float = 1e-3,
    scale: float = 1.0,
) -> CcpEstimate:
    """
    Per-coordinate mean and standard error of the draw-level gap between the
    central-difference surplus derivative and the argmax indicator.

    Both terms use the same draws, so the gap is nonzero only for draws whose winner
    changes within ±fd_step.
    """
    if fd_step <= 0:
        raise ValueError("fd_step must be > 0")
    if draws < 2:
        raise ConfigurationError("wdz_gap_mc needs draws >= 2")
    arr = as_index_vector(a)
    utilities = scale * error_draws(family, arr.size + 1, draws, stream) + _with_outside(arr)
    winners = np.argmax(utilities, axis=1)
    means = np.empty_like(arr)
    stderr = np.empty_like(arr)
    for j in range(arr.size):
        step = np.zeros(arr.size + 1)
        step[j + 1] = fd_step
        slope = (np.max(utilities + step, axis=1) - np.max(utilities - step, axis=1)) / (
            2.0 * fd_step
        )
        gap = slope - (winners == j + 1)
        means[j] = gap.mean()
        stderr[j] = gap.std(ddof=1) / np.sqrt(draws)
    return CcpEstimate(values=means, stderr=stderr, draws=draws)
