from ol_index_ident_core.engine.reachability import brute_force_identified_set
from ol_index_ident_core.models import Scenario


def test_connected_reaches_everything(connected_scenario: Scenario) -> None:
    reach = brute_force_identified_set(connected_scenario)
    assert reach.x_ids == frozenset(connected_scenario.x_ids)
    assert reach.z_ids == frozenset(connected_scenario.z_ids)


def test_within_z_strands_the_last_x(within_z_scenario: Scenario) -> None:
    reach = brute_force_identified_set(within_z_scenario)
    assert within_z_scenario.x_ids[-1] not in reach.x_ids
    assert "x0" in reach.x_ids


def test_across_z_stops_at_the_seed_group(across_z_scenario: Scenario) -> None:
    reach = brute_force_identified_set(across_z_scenario)
    assert across_z_scenario.seed_triple.z0 in reach.z_ids
    assert reach.z_ids < frozenset(across_z_scenario.z_ids)
    assert reach.x_ids < frozenset(across_z_scenario.x_ids)


def test_empty_z_pass_leaves_only_the_normalization(connected_scenario: Scenario) -> None:
    reach = brute_force_identified_set(connected_scenario, z_pass=())
    assert reach.x_ids == frozenset({"x0"})
    assert reach.z_ids == frozenset()
