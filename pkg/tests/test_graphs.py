import pytest

from ol_index_ident_core.models import Scenario
from ol_index_ident_core.topology.boxes import Box, BoxUnion
from ol_index_ident_core.topology.graphs import (
    AvailabilityError,
    a_support,
    a_union,
    components_overlap_graph,
    is_connected,
    mz_overlap_graph,
)


def test_chain_of_boxes_is_connected() -> None:
    u = BoxUnion.of(
        [
            Box(lo=(0.0, 0.0), hi=(1.0, 1.0)),
            Box(lo=(2.5, 0.0), hi=(3.5, 1.0)),
            Box(lo=(0.5, 0.0), hi=(3.0, 1.0)),
        ]
    )
    report = is_connected(u)
    assert report.connected
    assert report.components == 1


def test_touching_boxes_are_not_connected() -> None:
    u = BoxUnion.of([Box(lo=(0.0,), hi=(1.0,)), Box(lo=(1.0,), hi=(2.0,))])
    report = is_connected(u)
    assert not report.connected
    assert report.labels == (0, 1)


def test_a_support_needs_truth_or_recovered_h(connected_scenario: Scenario) -> None:
    structure = connected_scenario.known_structure()
    with pytest.raises(AvailabilityError):
        a_support(structure, "x0", "z0")
    with pytest.raises(AvailabilityError):
        a_support(structure, "x1", "z0", h_source="recovered", h_hat={"x0": (0.0, 0.0)})
    recovered = a_support(structure, "x0", "z0", h_source="recovered", h_hat={"x0": (0.0, 0.0)})
    assert recovered == a_support(connected_scenario, "x0", "z0")


def test_connected_scenario_overlap_graphs(connected_scenario: Scenario) -> None:
    assert mz_overlap_graph(connected_scenario).is_connected()
    for z in connected_scenario.z_ids:
        assert is_connected(a_union(connected_scenario, z)).connected
        assert components_overlap_graph(connected_scenario, z).is_connected()


def test_within_z_scenario_has_stranded_component(within_z_scenario: Scenario) -> None:
    z0 = within_z_scenario.seed_triple.z0
    graph = components_overlap_graph(within_z_scenario, z0)
    assert not graph.is_connected()
    assert "x0" in graph.component_of("x0")
