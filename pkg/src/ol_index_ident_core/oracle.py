from __future__ import annotations

import threading
from collections.abc import Sequence
from typing import Protocol

import numpy as np

from ol_index_ident_core.index import eval_index, eval_pi
from ol_index_ident_core.kernels.registry import kernel_stderr
from ol_index_ident_core.models import Scenario


class PiOracle(Protocol):
    """The only channel through which the identification engine sees the model."""

    def query(self, w: Sequence[float], x_id: str, z_id: str) -> np.ndarray: ...

    def stderr(self, w: Sequence[float], x_id: str, z_id: str) -> np.ndarray: ...

    @property
    def queries(self) -> int: ...


class CcpOracle:
    """
    Black-box evaluator of Π(w, x, z) closed over a scenario.

    Safe for concurrent queries; the query counter is the only mutable state.
    """

    __slots__ = ("__scenario", "_lock", "_queries")

    def __init__(self, scenario: Scenario) -> None:
        self.__scenario = scenario
        self._lock = threading.Lock()
        self._queries = 0

    def __repr__(self) -> str:
        return f"CcpOracle(queries={self.queries})"

    def query(self, w: Sequence[float], x_id: str, z_id: str) -> np.ndarray:
        value = eval_pi(self.__scenario, w, x_id, z_id)
        with self._lock:
            self._queries += 1
        return value

    __call__ = query

    def stderr(self, w: Sequence[float], x_id: str, z_id: str) -> np.ndarray:
        """Monte Carlo standard error at a query point; not counted as a query."""
        scenario = self.__scenario
        a = eval_index(scenario, w, x_id)
        return kernel_stderr(scenario.lambda_spec, z_id, a, seed=scenario.seed)

    @property
    def queries(self) -> int:
        with self._lock:
            return self._queries


def make_oracle(scenario: Scenario) -> CcpOracle:
    return CcpOracle(scenario)
