import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import softmax

from ol_index_ident_core.kernels.arum import (
    EULER_GAMMA,
    ConfigurationError,
    arum_lambda_gumbel,
    arum_surplus_gumbel,
    ccp_mc,
    error_draws,
    smoothed_ccp_mc,
    surplus_mc,
    wdz_gap_mc,
    wdz_gradient_check,
)

index_vectors = st.lists(
    st.floats(min_value=-5, max_value=5, allow_nan=False), min_size=1, max_size=4
)


def test_logit_ccps_at_zero() -> None:
    np.testing.assert_allclose(arum_lambda_gumbel([0.0, 0.0]), [1 / 3, 1 / 3])
    assert arum_surplus_gumbel([0.0]) == pytest.approx(np.log(2.0) + EULER_GAMMA)


@given(index_vectors, st.floats(min_value=0.2, max_value=5.0))
def test_logit_is_rescaled_softmax(a: list[float], scale: float) -> None:
    expected = softmax(np.concatenate([[0.0], a]) / scale)[1:]
    np.testing.assert_allclose(arum_lambda_gumbel(a, scale=scale), expected, rtol=1e-12)
    assert arum_lambda_gumbel(a, scale=scale).sum() < 1.0


def test_large_indices_do_not_overflow() -> None:
    probs = arum_lambda_gumbel([800.0, 799.0])
    assert np.all(np.isfinite(probs))
    assert probs[0] > probs[1]


def test_non_finite_index_is_rejected() -> None:
    with pytest.raises(ValueError):
        arum_lambda_gumbel([np.nan])


def test_error_draws_are_shared_and_read_only() -> None:
    a = error_draws("gumbel", 3, 100, stream=5)
    assert a is error_draws("gumbel", 3, 100, stream=5)
    assert not a.flags.writeable
    with pytest.raises(ConfigurationError):
        error_draws("cauchy", 3, 100, stream=5)


def test_surplus_mc_matches_closed_form() -> None:
    est = surplus_mc([0.3, -0.4], draws=200_000, stream=11)
    assert abs(est.value - arum_surplus_gumbel([0.3, -0.4])) <= 4 * est.stderr


def test_ccp_mc_matches_closed_form() -> None:
    est = ccp_mc([0.3, -0.4], draws=200_000, stream=12)
    assert np.all(np.abs(est.values - arum_lambda_gumbel([0.3, -0.4])) <= 4 * est.stderr)


def test_point_mass_breaks_ties_to_the_lowest_index() -> None:
    est = ccp_mc([0.0, 0.0], family="point-mass", draws=10, stream=0)
    # the outside option (index 0) wins every tie
    np.testing.assert_array_equal(est.values, [0.0, 0.0])
    est = ccp_mc([1.0, 1.0], family="point-mass", draws=10, stream=0)
    np.testing.assert_array_equal(est.values, [1.0, 0.0])


def test_smoothed_simulator_is_smooth_and_reproducible() -> None:
    a = np.asarray([0.2, -0.1])
    first = smoothed_ccp_mc(a, draws=5_000, stream=3).values
    np.testing.assert_array_equal(first, smoothed_ccp_mc(a, draws=5_000, stream=3).values)
    nudged = smoothed_ccp_mc(a + [1e-7, 0.0], draws=5_000, stream=3).values
    assert 0.0 < np.max(np.abs(nudged - first)) < 1e-5


def test_smoothed_simulator_tracks_logit() -> None:
    est = smoothed_ccp_mc([0.5, 0.0], draws=100_000, stream=4, smoothing=0.01)
    np.testing.assert_allclose(est.values, arum_lambda_gumbel([0.5, 0.0]), atol=0.01)


def test_wdz_closed_form_converges_quadratically() -> None:
    a = [0.4, -0.7, 1.1]
    coarse = wdz_gradient_check(a, fd_step=1e-2, analytic=True)
    fine = wdz_gradient_check(a, fd_step=1e-3, analytic=True)
    assert fine <= 1e-6
    assert 50.0 <= coarse / fine <= 200.0


@settings(max_examples=20, deadline=None)
@given(st.lists(st.floats(min_value=-2, max_value=2), min_size=1, max_size=3))
def test_wdz_mc_gap_is_order_of_step(a: list[float]) -> None:
    assert wdz_gradient_check(a, draws=20_000, fd_step=1e-3, stream=1) <= 5e-3


def test_wdz_gap_mean_matches_the_gradient_check() -> None:
    a = [0.3, -0.5]
    gap = wdz_gap_mc(a, draws=20_000, fd_step=1e-3, stream=4)
    worst = wdz_gradient_check(a, draws=20_000, fd_step=1e-3, stream=4)
    assert float(np.max(np.abs(gap.values))) == pytest.approx(worst, abs=1e-9)
    assert np.all(gap.stderr > 0)
    assert np.all(np.abs(gap.values) <= 4.0 * gap.stderr + 1e-6)


def test_wdz_gap_vanishes_without_noise() -> None:
    gap = wdz_gap_mc([0.5, -0.5], family="point-mass", draws=10, fd_step=1e-3)
    np.testing.assert_allclose(gap.values, 0.0, atol=1e-12)
    np.testing.assert_allclose(gap.stderr, 0.0, atol=1e-12)
