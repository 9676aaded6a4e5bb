from __future__ import annotations

import pytest

from ol_index_ident_core.engine import EngineOptions, IdentResult, identify_global
from ol_index_ident_core.models import Dimensions, Scenario
from ol_index_ident_core.oracle import make_oracle
from ol_index_ident_core.scenarios import gen_scenario


@pytest.fixture(scope="session")
def connected_scenario() -> Scenario:
    return gen_scenario(7, Dimensions(J=2, dX=1, nX=5, nZ=2), "connected")


@pytest.fixture(scope="session")
def connected_result(connected_scenario: Scenario) -> IdentResult:
    oracle = make_oracle(connected_scenario)
    return identify_global(oracle, connected_scenario.known_structure(), EngineOptions())


@pytest.fixture(scope="session")
def within_z_scenario() -> Scenario:
    return gen_scenario(11, Dimensions(J=2, dX=1, nX=6, nZ=2), "disconnected-within-z")


@pytest.fixture(scope="session")
def across_z_scenario() -> Scenario:
    return gen_scenario(5, Dimensions(J=1, dX=1, nX=6, nZ=4), "disconnected-across-z")


@pytest.fixture(scope="session")
def noninjective_scenario() -> Scenario:
    return gen_scenario(3, Dimensions(J=2, dX=1, nX=4, nZ=2), "noninjective")
