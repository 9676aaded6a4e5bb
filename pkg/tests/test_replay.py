from dataclasses import replace
from uuid import uuid4

from ol_index_ident_core.documents import result_to_doc, scenario_fingerprint, scenario_to_doc
from ol_index_ident_core.engine.propagation import IdentResult
from ol_index_ident_core.models import Dimensions, Scenario
from ol_index_ident_core.replay import replay, replay_result, replay_to_doc
from ol_index_ident_core.scenarios import gen_scenario


def _target(result: IdentResult) -> str:
    return next(x for x in result.h_hat if x != result.x0)


def test_untampered_result_replays(
    connected_scenario: Scenario, connected_result: IdentResult
) -> None:
    report = replay_result(connected_result, connected_scenario)
    assert report.passed
    assert report.messages() == []
    assert report.certificates_checked > 0


def test_perturbed_implied_h_names_the_certificate(
    connected_scenario: Scenario, connected_result: IdentResult
) -> None:
    x = _target(connected_result)
    chain = list(connected_result.provenance[x])
    bumped = tuple(v + 1e-6 for v in chain[-1].implied_h)
    chain[-1] = replace(chain[-1], implied_h=bumped)
    tampered = replace(
        connected_result,
        h_hat={**connected_result.h_hat, x: bumped},
        provenance={**connected_result.provenance, x: tuple(chain)},
    )
    report = replay_result(tampered, connected_scenario)
    assert not report.passed
    (failure,) = report.failures
    assert failure.x_id == x
    assert failure.position == len(chain) - 1
    assert "does not recompute" in failure.reason


def test_reported_h_must_match_the_chain(
    connected_scenario: Scenario, connected_result: IdentResult
) -> None:
    x = _target(connected_result)
    h_hat = {**connected_result.h_hat, x: tuple(v + 1e-6 for v in connected_result.h_hat[x])}
    report = replay_result(replace(connected_result, h_hat=h_hat), connected_scenario)
    assert [f.reason for f in report.failures] == ["chain sum differs from reported h"]


def test_identified_x_needs_a_chain(
    connected_scenario: Scenario, connected_result: IdentResult
) -> None:
    x = _target(connected_result)
    provenance = {k: v for k, v in connected_result.provenance.items() if k != x}
    report = replay_result(replace(connected_result, provenance=provenance), connected_scenario)
    assert report.messages() == [f"x {x!r}: identified without a provenance chain"]


def test_result_is_bound_to_its_scenario(
    connected_scenario: Scenario, connected_result: IdentResult
) -> None:
    result_doc = result_to_doc(
        connected_result,
        run_id=uuid4(),
        scenario_fingerprint=scenario_fingerprint(connected_scenario),
        options={},
    )
    assert replay(result_doc, scenario_to_doc(connected_scenario)).passed

    other = gen_scenario(8, Dimensions(J=2, dX=1, nX=5, nZ=2), "connected")
    report = replay(result_doc, scenario_to_doc(other))
    assert not report.passed
    assert "was produced from scenario" in report.messages()[0]

    doc = replay_to_doc(report, result_doc)
    assert doc.run_id == result_doc.run_id
    assert not doc.passed
    assert doc.failures == report.messages()
