from __future__ import annotations

from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy.special import logsumexp

from ol_index_ident_core.models import DomainError

GradientFn = Callable[[np.ndarray, float], np.ndarray]

TOL_FOC = 1e-10
MAX_ITER = 100_000


class PerturbedSolveError(RuntimeError):
    def __init__(self, message: str, *, residual: float, iterations: int):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


def entropy_gradient(q: np.ndarray, c: float) -> np.ndarray:
    return -c * (np.log(q) + 1.0)


def log_barrier_gradient(q: np.ndarray, c: float) -> np.ndarray:
    return c / q


@dataclass(frozen=True)
class PerturbationSpec:
    """
    Concave perturbation Ω(q | z) on the simplex, given through its gradient.

    Custom gradients must diverge in norm as q approaches the simplex boundary so that
    demand is interior.
    """

    kind: Literal["entropy", "custom"]
    scales: Mapping[str, float] = field(default_factory=dict)
    default_scale: float = 1.0
    gradient: GradientFn | None = None
    name: str = "entropy"

    def __post_init__(self) -> None:
        if self.kind not in ("entropy", "custom"):
            raise ValueError(f"unknown perturbation kind: {self.kind!r}")
        if self.kind == "custom" and self.gradient is None:
            raise ValueError("custom perturbation requires a gradient evaluator")
        if self.default_scale <= 0 or any(c <= 0 for c in self.scales.values()):
            raise ValueError("perturbation scales must be > 0")

    def scale(self, z_id: str | None) -> float:
        if z_id is None:
            return self.default_scale
        return float(self.scales.get(z_id, self.default_scale))

    def grad(self, q: np.ndarray, z_id: str | None) -> np.ndarray:
        c = self.scale(z_id)
        if self.kind == "entropy":
            return entropy_gradient(q, c)
        assert self.gradient is not None
        return np.asarray(self.gradient(q, c), dtype=float)


def entropy_perturbation(
    scales: Mapping[str, float] | None = None, *, default_scale: float = 1.0
) -> PerturbationSpec:
    return PerturbationSpec(kind="entropy", scales=dict(scales or {}), default_scale=default_scale)


def log_barrier_perturbation(
    scales: Mapping[str, float] | None = None, *, default_scale: float = 1.0
) -> PerturbationSpec:
    """Ω(q) = c Σ_j ln q_j."""
    return PerturbationSpec(
        kind="custom",
        scales=dict(scales or {}),
        default_scale=default_scale,
        gradient=log_barrier_gradient,
        name="log-barrier",
    )


CUSTOM_PERTURBATIONS: dict[str, Callable[..., PerturbationSpec]] = {
    "log-barrier": log_barrier_perturbation,
}


def _projected(v: np.ndarray) -> np.ndarray:
    # M v = v - v_0 ι
    return v - v[0]


def _residual(a: np.ndarray, q: np.ndarray, pert: PerturbationSpec, z_id: str | None) -> float:
    return float(np.max(np.abs(_projected(a + pert.grad(q, z_id)))))


def foc_residual(
    a: Sequence[float], q: Sequence[float], pert: PerturbationSpec, z_id: str | None = None
) -> float:
    """‖M(a + ∇Ω(q | z))‖∞, zero iff q satisfies the interior first-order condition."""
    a_arr = np.asarray(a, dtype=float)
    q_arr = np.asarray(q, dtype=float)
    if a_arr.shape != q_arr.shape:
        raise ValueError("a and q must have the same length J+1")
    if np.any(q_arr <= 0.0) or not np.isclose(q_arr.sum(), 1.0, rtol=0.0, atol=1e-12):
        raise DomainError("q must be a strictly interior point of the simplex")
    return _residual(a_arr, q_arr, pert, z_id)


def perturbed_solve(
    a: Sequence[float],
    pert: PerturbationSpec,
    z_id: str | None = None,
    *,
    tol: float = TOL_FOC,
    max_iter: int = MAX_ITER,
) -> np.ndarray:
    """
    argmax_q a·q + Ω(q | z) over the unit simplex, a including the outside index a_0.

    Entropic mirror ascent in log space: iterates stay interior, the step grows while the
    projected FOC residual falls and halves when it does not.
    """
    a_arr = np.asarray(a, dtype=float)
    if a_arr.ndim != 1 or a_arr.size < 2 or not np.all(np.isfinite(a_arr)):
        raise ValueError("a must be a finite vector of length J+1 >= 2")
    log_q = np.full(a_arr.size, -np.log(a_arr.size))
    q = np.exp(log_q)
    step = 1.0 / pert.scale(z_id)
    residual = _residual(a_arr, q, pert, z_id)
    for iteration in range(max_iter):
        if residual <= tol:
            return q
        direction = a_arr + pert.grad(q, z_id)
        for _ in range(60):
            trial = log_q + step * direction
            trial -= logsumexp(trial)
            q_trial = np.exp(trial)
            if np.all(q_trial > 0.0):
                trial_residual = _residual(a_arr, q_trial, pert, z_id)
                if trial_residual < residual:
                    break
            step *= 0.5
        else:
            raise PerturbedSolveError(
                "mirror ascent step collapsed", residual=residual, iterations=iteration
            )
        log_q, q, residual = trial, q_trial, trial_residual
        step *= 1.5
    if residual <= tol:
        return q
    raise PerturbedSolveError(
        f"mirror ascent did not reach tol={tol:g} in {max_iter} iterations",
        residual=residual,
        iterations=max_iter,
    )


def perturbed_lambda(
    a_inside: Sequence[float], pert: PerturbationSpec, z_id: str | None = None
) -> np.ndarray:
    """Inside-alternative demands with the outside index normalized to zero."""
    a_arr = np.asarray(a_inside, dtype=float)
    return perturbed_solve(np.concatenate([[0.0], a_arr]), pert, z_id)[1:]
