from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass, replace

import numpy as np

from ol_index_ident_core.engine.propagation import IdentResult, LambdaSample
from ol_index_ident_core.index import g_apply, g_inverse
from ol_index_ident_core.models import DomainError, KnownStructure
from ol_index_ident_core.oracle import PiOracle
from ol_index_ident_core.topology.graphs import a_support

logger = logging.getLogger(__name__)

# sampled query points keep this fraction of each box width away from its faces
SAMPLE_MARGIN = 1e-3


class CoverageError(ValueError):
    def __init__(self, message: str, *, a: Sequence[float], z_id: str):
        super().__init__(message)
        self.a = tuple(float(v) for v in a)
        self.z_id = z_id


@dataclass(frozen=True)
class LambdaQuery:
    a: tuple[float, ...]
    z_id: str


def _locate(
    result: IdentResult, structure: KnownStructure, a: np.ndarray, z_id: str
) -> tuple[str, np.ndarray] | None:
    for x_id in structure.xs_in(z_id):
        if x_id not in result.h_hat:
            continue
        u = a - result.h(x_id)
        support = structure.support(x_id, z_id)
        if not support.contains_interior(u):
            continue
        w = g_inverse(structure.g_spec, u)
        try:
            if support.contains_interior(g_apply(structure.g_spec, w)):
                return x_id, w
        except DomainError:
            continue
    return None


def recover_lambda(
    oracle: PiOracle,
    result: IdentResult,
    structure: KnownStructure,
    queries: Sequence[LambdaQuery],
) -> IdentResult:
    """
    Λ̂(a, z) = Π(w, x, z) for an identified x with g(w) = a - ĥ(x) interior to G(x, z).

    One oracle query per point. Every query is located before any is evaluated, so a
    point outside Â(z) raises CoverageError without emitting samples.
    """
    located = []
    for q in queries:
        a = np.asarray(q.a, dtype=float)
        if a.shape != (structure.J,):
            raise ValueError(f"query point must have dimension {structure.J}")
        hit = _locate(result, structure, a, q.z_id)
        if hit is None:
            raise CoverageError(
                f"a={a.tolist()} is outside the recovered index support at z {q.z_id!r}",
                a=a,
                z_id=q.z_id,
            )
        located.append((q, hit))

    samples = []
    for q, (x_id, w) in located:
        value = oracle.query(w, x_id, q.z_id)
        samples.append(
            LambdaSample(
                a=tuple(float(v) for v in q.a),
                z_id=q.z_id,
                x_id=x_id,
                w=tuple(float(v) for v in w),
                value=tuple(float(v) for v in value),
            )
        )
    logger.info("recovered %d lambda samples", len(samples))
    return replace(
        result,
        lambda_samples=result.lambda_samples + tuple(samples),
        oracle_queries=result.oracle_queries + len(samples),
    )


def sample_lambda_queries(
    result: IdentResult,
    structure: KnownStructure,
    *,
    count: int,
    seed: int,
) -> list[LambdaQuery]:
    """Points drawn inside Â(z), cycling over identified z's in order."""
    rng = np.random.default_rng(seed)
    pools = []
    for z_id in result.identified_z:
        boxes = []
        for x_id in structure.xs_in(z_id):
            if x_id not in result.h_hat:
                continue
            boxes.extend(
                a_support(structure, x_id, z_id, h_source="recovered", h_hat=result.h_hat).boxes
            )
        if boxes:
            pools.append((z_id, boxes))
    if not pools:
        return []
    out = []
    for i in range(count):
        z_id, boxes = pools[i % len(pools)]
        volumes = np.asarray([b.volume() for b in boxes])
        box = boxes[int(rng.choice(len(boxes), p=volumes / volumes.sum()))]
        lo, hi = box.shrunk(SAMPLE_MARGIN)
        out.append(LambdaQuery(a=tuple(float(v) for v in rng.uniform(lo, hi)), z_id=z_id))
    return out
