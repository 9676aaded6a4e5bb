from __future__ import annotations

import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import least_squares
from scipy.stats import qmc

from ol_index_ident_core.engine.options import EngineOptions
from ol_index_ident_core.index import exact_sum, g_apply, g_inverse
from ol_index_ident_core.models import KnownStructure
from ol_index_ident_core.oracle import PiOracle
from ol_index_ident_core.topology.boxes import Box

logger = logging.getLogger(__name__)

SOLVER_TOL = 1e-12


class EvaluationCapReached(RuntimeError):
    pass


class _Converged(Exception):
    def __init__(self, x: np.ndarray, residual: float) -> None:
        super().__init__()
        self.x = x
        self.residual = residual


class QueryMeter:
    """Oracle view for one task: counts queries and stops at the per-task cap."""

    def __init__(self, oracle: PiOracle, *, cap: int) -> None:
        self.oracle = oracle
        self.cap = cap
        self.used = 0

    @property
    def remaining(self) -> int:
        return max(self.cap - self.used, 0)

    def query(self, w: Sequence[float], x_id: str, z_id: str) -> np.ndarray:
        if self.used >= self.cap:
            raise EvaluationCapReached(f"task reached its cap of {self.cap} queries")
        self.used += 1
        return self.oracle.query(w, x_id, z_id)


@dataclass(frozen=True)
class MatchSource:
    x_id: str
    w: tuple[float, ...]
    known_h: tuple[float, ...]


@dataclass(frozen=True)
class MatchCertificate:
    """
    A solved matching equation Π(w*, x*, z) = Π(w, x, z).

    implied_h = source_h + g(w*) - g(w), summed with exact rounding.
    """

    z_id: str
    source_x: str
    source_w: tuple[float, ...]
    source_h: tuple[float, ...]
    target_x: str
    target_w: tuple[float, ...]
    residual: float
    implied_h: tuple[float, ...]


@dataclass(frozen=True)
class MatchAttempt:
    certificate: MatchCertificate | None
    best_residual: float
    evaluations: int
    # the query cap stopped the search before every start ran
    capped: bool = False


@dataclass(frozen=True)
class RefinedSource:
    w: tuple[float, ...]
    # target-side starting point in g-space
    hint: tuple[float, ...]
    residual: float


def implied_h(
    structure: KnownStructure,
    *,
    source_h: Sequence[float],
    source_w: Sequence[float],
    target_w: Sequence[float],
) -> np.ndarray:
    u_star = g_apply(structure.g_spec, source_w)
    u = g_apply(structure.g_spec, target_w)
    return exact_sum(np.asarray(source_h, dtype=float), u_star, -u)


def _certificate(
    structure: KnownStructure,
    z_id: str,
    source: MatchSource,
    target_x: str,
    w: np.ndarray,
    residual: float,
) -> MatchCertificate:
    h = implied_h(structure, source_h=source.known_h, source_w=source.w, target_w=w)
    return MatchCertificate(
        z_id=z_id,
        source_x=source.x_id,
        source_w=tuple(float(v) for v in source.w),
        source_h=tuple(float(v) for v in source.known_h),
        target_x=target_x,
        target_w=tuple(float(v) for v in w),
        residual=float(residual),
        implied_h=tuple(float(v) for v in h),
    )


@lru_cache(maxsize=32)
def _halton(dim: int, count: int) -> np.ndarray:
    # the first unscrambled Halton point is the origin, which sits on the boundary
    points = qmc.Halton(d=dim, scramble=False).random(count + 1)[1:]
    points.setflags(write=False)
    return points


def interior_bounds(box: Box, margin: float) -> tuple[np.ndarray, np.ndarray]:
    return box.shrunk(margin)


def start_points(box: Box, count: int, *, margin: float) -> list[np.ndarray]:
    """Box midpoint first, then low-discrepancy points inside the shrunk box."""
    lo, hi = interior_bounds(box, margin)
    points = [box.center]
    if count > 1:
        points.extend(lo + p * (hi - lo) for p in _halton(box.dim, count - 1))
    return points


@dataclass(frozen=True)
class _Solve:
    x: np.ndarray
    residual: float


def _least_squares(
    fun: Callable[[np.ndarray], np.ndarray],
    start: np.ndarray,
    lo: np.ndarray,
    hi: np.ndarray,
    *,
    evaluations_left: int,
    opts: EngineOptions,
) -> _Solve:
    """
    Bounded trust-region least squares that stops at the first evaluation within
    `opts.stop_tol`. Each iteration costs one evaluation plus a forward-difference
    Jacobian, so `max_nfev` is sized from the evaluations left.
    """
    x0 = np.clip(start, lo, hi)
    max_nfev = min(opts.max_iter_per_start, evaluations_left // (x0.size + 1))
    if max_nfev < 1:
        raise EvaluationCapReached("no evaluations left for another start")

    def stopping(x: np.ndarray) -> np.ndarray:
        r = fun(x)
        residual = float(np.max(np.abs(r)))
        if residual <= opts.stop_tol:
            raise _Converged(np.array(x, dtype=float), residual)
        return r

    try:
        result = least_squares(
            stopping,
            x0,
            bounds=(lo, hi),
            method="trf",
            xtol=SOLVER_TOL,
            ftol=SOLVER_TOL,
            gtol=SOLVER_TOL,
            max_nfev=max_nfev,
        )
    except _Converged as done:
        return _Solve(x=done.x, residual=done.residual)
    return _Solve(x=result.x, residual=float(np.max(np.abs(result.fun))))


def _check_source(structure: KnownStructure, z_id: str, source: MatchSource) -> np.ndarray:
    u_star = g_apply(structure.g_spec, source.w)
    if not structure.support(source.x_id, z_id).contains_interior(u_star):
        raise ValueError(
            f"source point for x {source.x_id!r} is not interior to its support at z {z_id!r}"
        )
    return u_star


def match_attempt(
    meter: QueryMeter,
    z_id: str,
    source: MatchSource,
    target_x: str,
    structure: KnownStructure,
    opts: EngineOptions,
    *,
    starts: int | None = None,
    hint: Sequence[float] | None = None,
) -> MatchAttempt:
    """
    Multistart bounded least squares on Π(w, target, z) - Π(w*, x*, z) over each box of
    G(target, z), with finite-difference Jacobians. Returns the first certificate whose
    residual is within tol_match.
    """
    u_star = _check_source(structure, z_id, source)
    support = structure.support(target_x, z_id)
    if support.is_empty():
        raise ValueError(f"x {target_x!r} has no support at z {z_id!r}")
    best = math.inf
    if target_x == source.x_id and support.contains_interior(u_star):
        return MatchAttempt(
            certificate=_certificate(
                structure, z_id, source, target_x, np.asarray(source.w, dtype=float), 0.0
            ),
            best_residual=0.0,
            evaluations=meter.used,
        )
    try:
        pi_star = meter.query(source.w, source.x_id, z_id)
        g_spec = structure.g_spec

        def fun(u: np.ndarray) -> np.ndarray:
            return meter.query(g_inverse(g_spec, u), target_x, z_id) - pi_star

        count = starts if starts is not None else opts.starts_for(structure.J)
        for box in support:
            lo, hi = interior_bounds(box, opts.interior_margin)
            candidates = start_points(box, count, margin=opts.interior_margin)
            if hint is not None and box.contains_interior(hint):
                candidates.insert(0, np.asarray(hint, dtype=float))
            for start in candidates:
                solve = _least_squares(
                    fun, start, lo, hi, evaluations_left=meter.remaining, opts=opts
                )
                best = min(best, solve.residual)
                if solve.residual <= opts.tol_match:
                    w = g_inverse(g_spec, solve.x)
                    logger.debug(
                        "match z=%s %s->%s residual=%.3g",
                        z_id,
                        source.x_id,
                        target_x,
                        solve.residual,
                    )
                    return MatchAttempt(
                        certificate=_certificate(
                            structure, z_id, source, target_x, w, solve.residual
                        ),
                        best_residual=best,
                        evaluations=meter.used,
                    )
    except EvaluationCapReached:
        logger.debug("match z=%s %s->%s hit the query cap", z_id, source.x_id, target_x)
        return MatchAttempt(
            certificate=None, best_residual=best, evaluations=meter.used, capped=True
        )
    return MatchAttempt(certificate=None, best_residual=best, evaluations=meter.used)


def match_solve(
    oracle: PiOracle,
    z_id: str,
    source: MatchSource,
    target_x: str,
    structure: KnownStructure,
    opts: EngineOptions | None = None,
) -> MatchCertificate | None:
    """
    Solve the matching equation from a known source point into G(target_x, z).

    None means no solution was found within the starts and query cap; it is not a proof
    that the index supports do not overlap.
    """
    opts = opts or EngineOptions()
    meter = QueryMeter(oracle, cap=opts.task_cap(structure.J))
    return match_attempt(meter, z_id, source, target_x, structure, opts).certificate


@dataclass(frozen=True)
class JointRefinement:
    source: RefinedSource | None
    best_residual: float
    # every box pair was searched without hitting the query cap
    conclusive: bool


def joint_refine(
    meter: QueryMeter,
    z_id: str,
    source_x: str,
    target_x: str,
    structure: KnownStructure,
    opts: EngineOptions,
) -> JointRefinement:
    """
    Search (u*, u) in G(x*, z) x G(x, z) with Π(u*, x*, z) = Π(u, x, z) jointly.

    Every solution shares the offset δ = u* - u, so the source point is re-centred in
    G(x*, z) ∩ (G(x, z) + δ), deep inside the overlap. A cap abort leaves the search
    inconclusive; only a completed search may rule the pair out.
    """
    g_spec = structure.g_spec
    J = structure.J
    best = math.inf

    def fun(theta: np.ndarray) -> np.ndarray:
        left = meter.query(g_inverse(g_spec, theta[:J]), source_x, z_id)
        right = meter.query(g_inverse(g_spec, theta[J:]), target_x, z_id)
        return left - right

    try:
        for src_box in structure.support(source_x, z_id):
            src_lo, src_hi = interior_bounds(src_box, opts.interior_margin)
            for dst_box in structure.support(target_x, z_id):
                dst_lo, dst_hi = interior_bounds(dst_box, opts.interior_margin)
                solve = _least_squares(
                    fun,
                    np.concatenate([src_box.center, dst_box.center]),
                    np.concatenate([src_lo, dst_lo]),
                    np.concatenate([src_hi, dst_hi]),
                    # each joint evaluation spends two queries
                    evaluations_left=meter.remaining // 2,
                    opts=opts,
                )
                best = min(best, solve.residual)
                if solve.residual > opts.tol_match:
                    continue
                theta = solve.x
                delta = theta[:J] - theta[J:]
                overlap = src_box.interior_intersection(dst_box.translated(delta.tolist()))
                center = overlap.center if overlap is not None else theta[:J]
                refined = RefinedSource(
                    w=tuple(float(v) for v in g_inverse(g_spec, center)),
                    hint=tuple(float(v) for v in center - delta),
                    residual=solve.residual,
                )
                return JointRefinement(source=refined, best_residual=best, conclusive=True)
    except EvaluationCapReached:
        logger.debug("joint refinement z=%s %s->%s hit the query cap", z_id, source_x, target_x)
        return JointRefinement(source=None, best_residual=best, conclusive=False)
    return JointRefinement(source=None, best_residual=best, conclusive=True)

