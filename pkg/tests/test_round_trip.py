import pytest

from ol_index_ident_core.engine.propagation import identify_global
from ol_index_ident_core.engine.reachability import brute_force_identified_set
from ol_index_ident_core.engine.recovery import recover_lambda, sample_lambda_queries
from ol_index_ident_core.engine.verification import VerificationReport, verify_against_truth
from ol_index_ident_core.models import Dimensions
from ol_index_ident_core.oracle import make_oracle
from ol_index_ident_core.scenarios import gen_scenario

TOL = 1e-8


def _round_trip(
    seed: int, dims: Dimensions, *, kernel: str, g_kind: str, samples: int
) -> VerificationReport:
    scenario = gen_scenario(seed, dims, "connected", kernel=kernel, g_kind=g_kind)
    structure = scenario.known_structure()
    oracle = make_oracle(scenario)
    result = identify_global(oracle, structure)
    assert set(result.h_hat) == set(brute_force_identified_set(scenario).x_ids)
    queries = sample_lambda_queries(result, structure, count=samples, seed=seed)
    result = recover_lambda(oracle, result, structure, queries)
    assert len(result.lambda_samples) == samples
    return verify_against_truth(result, scenario, tol_h=TOL, tol_lambda=TOL)


@pytest.mark.parametrize(
    ("kernel", "g_kind"),
    [
        ("arum-gumbel", "identity"),
        ("arum-gumbel", "negative-log"),
        ("arum-gumbel", "affine"),
        ("competing-risks-gumbel", "identity"),
        ("perturbed-entropy", "identity"),
        ("perturbed-custom", "identity"),
    ],
)
def test_kernels_and_g_forms_round_trip(kernel: str, g_kind: str) -> None:
    report = _round_trip(
        1, Dimensions(J=2, dX=1, nX=4, nZ=2), kernel=kernel, g_kind=g_kind, samples=20
    )
    assert report.passed, report.worst_offender()
    assert report.missing_x == ()


@pytest.mark.parametrize("J", [1, 3])
def test_round_trip_in_other_dimensions(J: int) -> None:
    report = _round_trip(
        2, Dimensions(J=J, dX=1, nX=4, nZ=2), kernel="arum-gumbel", g_kind="identity", samples=20
    )
    assert report.passed, report.worst_offender()


@pytest.mark.slow
@pytest.mark.parametrize("kernel", ["arum-gumbel", "competing-risks-gumbel"])
@pytest.mark.parametrize("J", [1, 2, 3])
@pytest.mark.parametrize("seed", range(20))
def test_round_trip_sweep(kernel: str, J: int, seed: int) -> None:
    dims = Dimensions(J=J, dX=1, nX=3 + seed % 4, nZ=1 + seed % 3)
    report = _round_trip(seed, dims, kernel=kernel, g_kind="identity", samples=100)
    assert report.passed, report.worst_offender()
    assert report.h_error <= TOL
    assert report.lambda_error <= TOL


@pytest.mark.slow
@pytest.mark.parametrize(
    "kernel", ["arum-gumbel", "competing-risks-gumbel", "perturbed-entropy", "perturbed-custom"]
)
@pytest.mark.parametrize("g_kind", ["identity", "negative-log", "affine"])
@pytest.mark.parametrize("J", [1, 2, 3])
def test_round_trip_grid(kernel: str, g_kind: str, J: int) -> None:
    report = _round_trip(
        7, Dimensions(J=J, dX=1, nX=5, nZ=2), kernel=kernel, g_kind=g_kind, samples=100
    )
    assert report.passed, report.worst_offender()
