import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ol_index_ident_core.kernels.arum import arum_lambda_gumbel
from ol_index_ident_core.kernels.perturbed import (
    PerturbationSpec,
    PerturbedSolveError,
    entropy_perturbation,
    foc_residual,
    log_barrier_perturbation,
    perturbed_lambda,
    perturbed_solve,
)
from ol_index_ident_core.models import DomainError


@settings(max_examples=50, deadline=None)
@given(
    st.lists(st.floats(min_value=-3, max_value=3), min_size=1, max_size=4),
    st.floats(min_value=0.2, max_value=5.0),
)
def test_entropy_demand_is_rescaled_softmax(a: list[float], c: float) -> None:
    q = perturbed_lambda(a, entropy_perturbation(default_scale=c))
    np.testing.assert_allclose(q, arum_lambda_gumbel(a, scale=c), atol=1e-8, rtol=0)


def test_per_z_scale_is_used() -> None:
    pert = entropy_perturbation({"z1": 2.0}, default_scale=0.5)
    a = [0.7, -0.2]
    np.testing.assert_allclose(
        perturbed_lambda(a, pert, "z1"), arum_lambda_gumbel(a, scale=2.0), atol=1e-8
    )
    np.testing.assert_allclose(
        perturbed_lambda(a, pert, "other"), arum_lambda_gumbel(a, scale=0.5), atol=1e-8
    )


def test_log_barrier_solution_is_interior_and_stationary() -> None:
    pert = log_barrier_perturbation(default_scale=0.3)
    a = np.asarray([0.0, 2.0, -1.5])
    q = perturbed_solve(a, pert)
    assert np.all(q > 0)
    assert q.sum() == pytest.approx(1.0)
    assert foc_residual(a, q, pert) <= 1e-10


def test_custom_gradient_is_required() -> None:
    with pytest.raises(ValueError):
        PerturbationSpec(kind="custom")
    with pytest.raises(ValueError):
        entropy_perturbation(default_scale=0.0)


def test_foc_residual_rejects_boundary_points() -> None:
    pert = entropy_perturbation()
    with pytest.raises(DomainError):
        foc_residual([0.0, 1.0], [1.0, 0.0], pert)


def test_unreachable_tolerance_raises() -> None:
    with pytest.raises(PerturbedSolveError) as info:
        perturbed_solve([0.0, 1.0, 2.0], entropy_perturbation(), max_iter=2)
    assert info.value.iterations <= 2
    assert info.value.residual > 0


def test_higher_index_raises_own_demand() -> None:
    pert = log_barrier_perturbation()
    low = perturbed_lambda([0.0, 0.0], pert)
    high = perturbed_lambda([0.5, 0.0], pert)
    assert high[0] > low[0]
    assert high[1] < low[1]
