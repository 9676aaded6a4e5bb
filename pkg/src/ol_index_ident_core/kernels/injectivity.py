from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from ol_index_ident_core.topology.boxes import BoxUnion

Kernel = Callable[[np.ndarray], np.ndarray]

COLLISION_TOL = 1e-10
SEPARATION_FLOOR = 1e-6
AXIS_STEP = 1e-3


@dataclass(frozen=True)
class CollisionWitness:
    a1: tuple[float, ...]
    a2: tuple[float, ...]
    value: tuple[float, ...]


@dataclass(frozen=True)
class InjectivityReport:
    """
    Outcome of a sampled injectivity probe. A pass is evidence, not proof.

    `worst_separation` is the smallest ‖Λ(a1) - Λ(a2)‖∞ / ‖a1 - a2‖∞ seen over the tested
    pairs (infinite when no pair was tested).
    """

    tested_pairs: int
    worst_separation: float
    witness: CollisionWitness | None
    collision_tol: float = COLLISION_TOL

    @property
    def passed(self) -> bool:
        return self.witness is None


def _sample_points(domain: BoxUnion, count: int, rng: np.random.Generator) -> np.ndarray:
    volumes = np.asarray([b.volume() for b in domain.boxes])
    picks = rng.choice(len(domain.boxes), size=count, p=volumes / volumes.sum())
    points = np.empty((count, domain.dim))
    for i, k in enumerate(picks):
        box = domain.boxes[k]
        points[i] = rng.uniform(np.asarray(box.lo), np.asarray(box.hi))
    return points


def _pairs(points: np.ndarray, *, axis_pairs: bool) -> list[tuple[np.ndarray, np.ndarray]]:
    pairs = [(points[i], points[i + 1]) for i in range(len(points) - 1)]
    if axis_pairs:
        dim = points.shape[1]
        for p in points:
            for k in range(dim):
                q = p.copy()
                q[k] += AXIS_STEP
                pairs.append((p, q))
    return pairs


def injectivity_probe(
    kernel: Kernel,
    domain: BoxUnion,
    *,
    samples: int,
    seed: int,
    collision_tol: float = COLLISION_TOL,
    separation_floor: float = SEPARATION_FLOOR,
    axis_pairs: bool = True,
) -> InjectivityReport:
    """
    Sample `samples` points of the domain and test consecutive pairs, plus (with
    `axis_pairs`) each point against a small step along every coordinate axis.

    Pairs closer than `separation_floor` in the sup norm are skipped.
    """
    if domain.is_empty():
        raise ValueError("injectivity probe needs a nonempty domain")
    if samples < 2:
        raise ValueError("samples must be >= 2")
    rng = np.random.default_rng(seed)
    points = _sample_points(domain, samples, rng)

    tested = 0
    worst = math.inf
    witness: CollisionWitness | None = None
    for a1, a2 in _pairs(points, axis_pairs=axis_pairs):
        gap = float(np.max(np.abs(a1 - a2)))
        if gap < separation_floor:
            continue
        v1 = np.asarray(kernel(a1), dtype=float)
        v2 = np.asarray(kernel(a2), dtype=float)
        tested += 1
        separation = float(np.max(np.abs(v1 - v2))) / gap
        if separation < worst:
            worst = separation
            if separation <= collision_tol:
                witness = CollisionWitness(
                    a1=tuple(a1.tolist()), a2=tuple(a2.tolist()), value=tuple(v1.tolist())
                )
    return InjectivityReport(
        tested_pairs=tested, worst_separation=worst, witness=witness, collision_tol=collision_tol
    )
