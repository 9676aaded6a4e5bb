import numpy as np
import pytest

from ol_index_ident_core.engine.options import EngineOptions
from ol_index_ident_core.engine.propagation import (
    REASON_BUDGET_EXHAUSTED,
    REASON_NO_A_OVERLAP,
    REASON_NO_Z_OVERLAP,
    REASON_SOLVER_EXHAUSTED,
    REASON_Z_EXCLUDED,
    IdentResult,
    InconsistencyError,
    identify_global,
    identify_within_z,
)
from ol_index_ident_core.engine.reachability import brute_force_identified_set
from ol_index_ident_core.engine.verification import verify_against_truth
from ol_index_ident_core.models import Dimensions, Scenario
from ol_index_ident_core.oracle import make_oracle
from ol_index_ident_core.scenarios import gen_scenario
from ol_index_ident_core.topology.audit import assumption_audit
from ol_index_ident_core.topology.boxes import Box, BoxUnion
from ol_index_ident_core.topology.graphs import components_overlap_graph


def _identify(scenario: Scenario, **opts) -> IdentResult:
    return identify_global(
        make_oracle(scenario), scenario.known_structure(), EngineOptions(**opts)
    )


def _h_error(result: IdentResult, scenario: Scenario) -> float:
    return max(
        float(np.max(np.abs(result.h(x) - scenario.h_table.value(x)))) for x in result.h_hat
    )


def test_connected_scenario_is_fully_identified(
    connected_scenario: Scenario, connected_result: IdentResult
) -> None:
    assert set(connected_result.h_hat) == set(connected_scenario.x_ids)
    assert connected_result.unidentified == {}
    assert connected_result.identified_z == connected_scenario.z_ids
    assert _h_error(connected_result, connected_scenario) <= 1e-8
    assert connected_result.oracle_queries > 0


def test_provenance_chains_telescope(connected_result: IdentResult) -> None:
    assert connected_result.provenance["x0"] == ()
    for x, chain in connected_result.provenance.items():
        if x == "x0":
            continue
        assert chain[0].source_x == "x0"
        assert chain[-1].target_x == x
        assert chain[-1].implied_h == connected_result.h_hat[x]
        for prev, nxt in zip(chain, chain[1:]):
            assert nxt.source_x == prev.target_x
            assert nxt.source_h == prev.implied_h


def test_within_z_identifies_the_seed_component(within_z_scenario: Scenario) -> None:
    result = _identify(within_z_scenario)
    stranded = within_z_scenario.x_ids[-1]
    assert stranded not in result.h_hat
    assert result.unidentified[stranded] == REASON_NO_A_OVERLAP
    z0 = within_z_scenario.seed_triple.z0
    component = components_overlap_graph(within_z_scenario, z0).component_of("x0")
    assert set(component) <= set(result.h_hat)
    assert _h_error(result, within_z_scenario) <= 1e-8


def test_across_z_identifies_the_z0_group(across_z_scenario: Scenario) -> None:
    result = _identify(across_z_scenario)
    reach = brute_force_identified_set(across_z_scenario)
    assert set(result.h_hat) == set(reach.x_ids)
    assert set(result.identified_z) == set(reach.z_ids)
    assert len(result.identified_z) < len(across_z_scenario.z_ids)
    assert result.unidentified
    assert set(result.unidentified.values()) == {REASON_NO_Z_OVERLAP}


def test_excluding_z0_leaves_only_the_normalization(connected_scenario: Scenario) -> None:
    result = identify_global(
        make_oracle(connected_scenario),
        connected_scenario.known_structure(),
        z_pass=connected_scenario.z_ids[1:],
    )
    assert list(result.h_hat) == ["x0"]
    assert result.identified_z == ()
    assert set(result.unidentified.values()) == {REASON_Z_EXCLUDED}


def test_shift_gives_identical_results(
    connected_scenario: Scenario, connected_result: IdentResult
) -> None:
    for c in [(0.5, -0.25), (-1.0, 0.125)]:
        shifted = connected_scenario.shifted(c)
        assert _identify(shifted) == connected_result


def test_workers_do_not_change_the_result(
    connected_scenario: Scenario, connected_result: IdentResult
) -> None:
    assert _identify(connected_scenario, workers=8) == connected_result


def test_budget_exhaustion_is_reported(connected_scenario: Scenario) -> None:
    result = _identify(connected_scenario, budget=1)
    assert result.budget_exhausted
    assert result.oracle_queries == 0
    assert list(result.h_hat) == ["x0"]
    assert set(result.unidentified.values()) == {REASON_BUDGET_EXHAUSTED}


def test_budget_is_never_exceeded(connected_scenario: Scenario) -> None:
    result = _identify(connected_scenario, budget=3_000)
    assert result.oracle_queries <= 3_000
    if result.budget_exhausted:
        assert set(result.unidentified.values()) <= {REASON_BUDGET_EXHAUSTED}


def test_within_z_conflicting_seeds_raise(connected_scenario: Scenario) -> None:
    structure = connected_scenario.known_structure()
    z_id, a, b = next(
        (z, e.a, e.b)
        for z in connected_scenario.z_ids
        for e in components_overlap_graph(connected_scenario, z).edges
    )
    wrong = connected_scenario.h_table.value(b) + 0.01
    seeds = {a: connected_scenario.h_table.value(a), b: wrong}
    with pytest.raises(InconsistencyError) as info:
        identify_within_z(make_oracle(connected_scenario), z_id, seeds, structure)
    assert info.value.first.target_x == info.value.second.target_x


def test_within_z_requires_member_seeds(connected_scenario: Scenario) -> None:
    structure = connected_scenario.known_structure()
    with pytest.raises(ValueError):
        identify_within_z(make_oracle(connected_scenario), "z0", {}, structure)


@pytest.mark.parametrize("mode", ["connected", "disconnected-within-z", "disconnected-across-z"])
@pytest.mark.parametrize("seed", [1, 2, 3])
def test_identified_set_matches_brute_force(mode: str, seed: int) -> None:
    scenario = gen_scenario(seed, Dimensions(J=1, dX=1, nX=5, nZ=3), mode)
    result = _identify(scenario)
    reach = brute_force_identified_set(scenario)
    assert set(result.h_hat) == set(reach.x_ids)
    assert _h_error(result, scenario) <= 1e-8


@pytest.mark.slow
@pytest.mark.parametrize("mode", ["connected", "disconnected-within-z", "disconnected-across-z"])
@pytest.mark.parametrize("seed", range(50))
def test_identified_set_matches_brute_force_sweep(mode: str, seed: int) -> None:
    J = 1 + seed % 3
    scenario = gen_scenario(seed, Dimensions(J=J, dX=1, nX=4 + seed % 5, nZ=2 + seed % 3), mode)
    result = _identify(scenario)
    assert set(result.h_hat) == set(brute_force_identified_set(scenario).x_ids)


def test_noninjective_scenario_is_not_propagated(noninjective_scenario: Scenario) -> None:
    z_pass = assumption_audit(noninjective_scenario).z_pass
    result = identify_global(
        make_oracle(noninjective_scenario), noninjective_scenario.known_structure(), z_pass=z_pass
    )
    reach = brute_force_identified_set(noninjective_scenario, z_pass=z_pass)
    assert set(result.h_hat) == set(reach.x_ids) == {"x0"}


@pytest.mark.slow
@pytest.mark.parametrize("kernel", ["arum-mc", "competing-risks-mc"])
def test_monte_carlo_kernels_identify_within_their_error(kernel: str) -> None:
    scenario = gen_scenario(
        4, Dimensions(J=2, dX=1, nX=5, nZ=2), "connected", kernel=kernel, draws=20_000
    )
    oracle = make_oracle(scenario)
    st = scenario.seed_triple
    opts = EngineOptions().with_stderr(float(np.max(oracle.stderr(st.w0, st.x0, st.z0))))
    result = identify_global(oracle, scenario.known_structure(), opts)
    report = verify_against_truth(result, scenario)
    assert report.passed, report.worst_offender()


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(3))
def test_random_dyadic_shifts_give_identical_results(seed: int) -> None:
    scenario = gen_scenario(seed, Dimensions(J=2, dX=1, nX=5, nZ=2), "connected")
    baseline = _identify(scenario)
    rng = np.random.default_rng(seed)
    for _ in range(10):
        c = tuple(float(v) for v in rng.integers(-64, 64, size=2) / 32.0)
        assert _identify(scenario.shifted(c)) == baseline


@pytest.mark.parametrize("mode", ["connected", "disconnected-within-z"])
def test_three_alternatives_match_brute_force(mode: str) -> None:
    scenario = gen_scenario(2, Dimensions(J=3, dX=1, nX=5, nZ=2), mode)
    result = _identify(scenario)
    assert set(result.h_hat) == set(brute_force_identified_set(scenario).x_ids)
    assert _h_error(result, scenario) <= 1e-8


def test_cut_short_searches_are_not_read_as_disjoint(connected_scenario: Scenario) -> None:
    result = _identify(connected_scenario, max_evals_per_solve=5)
    assert list(result.h_hat) == ["x0"]
    reasons = set(result.unidentified.values())
    assert REASON_SOLVER_EXHAUSTED in reasons
    assert REASON_NO_A_OVERLAP not in reasons


def _translated(union: BoxUnion, t: np.ndarray) -> BoxUnion:
    return BoxUnion.of([b.translated(t.tolist()) for b in union], dim=union.dim)


def test_bridging_a_stranded_support_only_grows_the_set(within_z_scenario: Scenario) -> None:
    scenario = within_z_scenario
    z0 = scenario.seed_triple.z0
    stranded = scenario.x_ids[-1]
    # give the stranded x a box whose index image is A(x0, z0)
    shift = scenario.h_table.value("x0") - scenario.h_table.value(stranded)
    bridge = _translated(scenario.support("x0", z0), shift)
    enlarged = scenario.with_support(stranded, z0, scenario.support(stranded, z0).union(bridge))

    before = _identify(scenario)
    after = _identify(enlarged)
    assert stranded not in before.h_hat
    assert stranded in after.h_hat
    assert set(before.h_hat) <= set(after.h_hat)
    assert set(after.h_hat) == set(brute_force_identified_set(enlarged).x_ids)
    assert _h_error(after, enlarged) <= 1e-8


@pytest.mark.parametrize("mode", ["disconnected-within-z", "disconnected-across-z"])
@pytest.mark.parametrize("seed", [1, 2])
def test_enlarging_a_support_never_shrinks_the_set(mode: str, seed: int) -> None:
    scenario = gen_scenario(seed, Dimensions(J=1, dX=1, nX=5, nZ=3), mode)
    rng = np.random.default_rng(seed)
    x_id, z_id = sorted(scenario.supports)[int(rng.integers(len(scenario.supports)))]
    union = scenario.support(x_id, z_id)
    pad = float(rng.uniform(0.1, 0.6))
    outer = Box(
        lo=tuple(min(b.lo[k] for b in union) - pad for k in range(union.dim)),
        hi=tuple(max(b.hi[k] for b in union) + pad for k in range(union.dim)),
    )
    enlarged = scenario.with_support(x_id, z_id, union.union(BoxUnion.of([outer])))

    before, after = _identify(scenario), _identify(enlarged)
    assert set(before.h_hat) <= set(after.h_hat)
    assert set(brute_force_identified_set(scenario).x_ids) <= set(
        brute_force_identified_set(enlarged).x_ids
    )
