from __future__ import annotations

import math
from collections.abc import Sequence

import numpy as np

from ol_index_ident_core.kernels.registry import build_kernel
from ol_index_ident_core.models import DomainError, GSpec, Scenario


def g_apply(g_spec: GSpec, w: Sequence[float]) -> np.ndarray:
    w_arr = np.asarray(w, dtype=float)
    if w_arr.shape != (g_spec.dW,):
        raise DomainError(f"w must have dimension {g_spec.dW}, got shape {w_arr.shape}")
    if not np.all(np.isfinite(w_arr)):
        raise DomainError("w must be finite")
    if g_spec.kind == "identity":
        return w_arr.copy()
    if g_spec.kind == "negative-log":
        if np.any(w_arr <= 0):
            raise DomainError(f"negative-log g requires strictly positive w, got {w_arr.tolist()}")
        return -np.log(w_arr)
    matrix = np.asarray(g_spec.coefficients, dtype=float)
    return matrix @ w_arr + np.asarray(g_spec.offset, dtype=float)


def g_inverse(g_spec: GSpec, u: Sequence[float]) -> np.ndarray:
    """A preimage of u under g (minimum-norm for the affine kind)."""
    u_arr = np.asarray(u, dtype=float)
    if u_arr.shape != (g_spec.J,):
        raise DomainError(f"u must have dimension {g_spec.J}, got shape {u_arr.shape}")
    if g_spec.kind == "identity":
        return u_arr.copy()
    if g_spec.kind == "negative-log":
        return np.exp(-u_arr)
    matrix = np.asarray(g_spec.coefficients, dtype=float)
    return np.linalg.pinv(matrix) @ (u_arr - np.asarray(g_spec.offset, dtype=float))


def exact_sum(*terms: np.ndarray) -> np.ndarray:
    """Coordinatewise correctly rounded sum, independent of term order."""
    stacked = np.vstack([np.asarray(t, dtype=float) for t in terms])
    return np.asarray([math.fsum(col) for col in stacked.T])


def eval_index(scenario: Scenario, w: Sequence[float], x_id: str) -> np.ndarray:
    h = scenario.h_table.value(x_id)
    return exact_sum(g_apply(scenario.g_spec, w), h)


def eval_pi(scenario: Scenario, w: Sequence[float], x_id: str, z_id: str) -> np.ndarray:
    """Ground-truth Π(w, x, z) = Λ(g(w) + h(x), z)."""
    kernel = build_kernel(scenario.lambda_spec, z_id, seed=scenario.seed)
    g = g_apply(scenario.g_spec, w)
    h = scenario.h_table.value(x_id)
    shift = scenario.lambda_spec.shift
    a = exact_sum(g, h) if shift is None else exact_sum(g, h, np.asarray(shift))
    return kernel(a)
