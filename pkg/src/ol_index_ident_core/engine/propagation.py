from __future__ import annotations

import logging
import math
from collections.abc import Callable, Iterable, Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from ol_index_ident_core.engine.matching import (
    MatchAttempt,
    MatchCertificate,
    MatchSource,
    QueryMeter,
    joint_refine,
    match_attempt,
    start_points,
)
from ol_index_ident_core.engine.options import EngineOptions
from ol_index_ident_core.index import g_inverse
from ol_index_ident_core.models import KnownStructure
from ol_index_ident_core.oracle import PiOracle
from ol_index_ident_core.topology.graphs import g_overlap

logger = logging.getLogger(__name__)

REASON_NO_Z_OVERLAP = "no-z-overlap"
REASON_NO_A_OVERLAP = "no-a-overlap"
REASON_SOLVER_EXHAUSTED = "solver-exhausted"
REASON_BUDGET_EXHAUSTED = "budget-exhausted"
REASON_Z_EXCLUDED = "z-excluded"
REASON_CODES = (
    REASON_NO_Z_OVERLAP,
    REASON_NO_A_OVERLAP,
    REASON_SOLVER_EXHAUSTED,
    REASON_BUDGET_EXHAUSTED,
    REASON_Z_EXCLUDED,
)
# source query plus one target query
MIN_TASK_QUERIES = 2


class InconsistencyError(RuntimeError):
    """Two certificates imply different h for the same x: Π is not an index model here."""

    def __init__(self, message: str, *, first: MatchCertificate, second: MatchCertificate):
        super().__init__(message)
        self.first = first
        self.second = second


@dataclass(frozen=True)
class LambdaSample:
    a: tuple[float, ...]
    z_id: str
    x_id: str
    w: tuple[float, ...]
    value: tuple[float, ...]


@dataclass(frozen=True)
class IdentResult:
    x0: str
    h_hat: Mapping[str, tuple[float, ...]]
    # certificate chain from x0 to each identified x
    provenance: Mapping[str, tuple[MatchCertificate, ...]]
    identified_z: tuple[str, ...]
    unidentified: Mapping[str, str]
    z_pass: tuple[str, ...]
    tol_match: float
    oracle_queries: int = 0
    alternates_checked: int = 0
    budget_exhausted: bool = False
    lambda_samples: tuple[LambdaSample, ...] = ()

    @property
    def identified_x(self) -> tuple[str, ...]:
        return tuple(self.h_hat)

    def h(self, x_id: str) -> np.ndarray:
        return np.asarray(self.h_hat[x_id], dtype=float)


@dataclass(frozen=True)
class WithinZResult:
    z_id: str
    h_hat: Mapping[str, tuple[float, ...]]
    certificates: tuple[MatchCertificate, ...]
    oracle_queries: int
    budget_exhausted: bool


@dataclass(frozen=True)
class _Task:
    z_id: str
    source_x: str
    target_x: str
    cross_check: bool = False
    # oracle queries this task may spend
    cap: int = 0


@dataclass
class _State:
    structure: KnownStructure
    opts: EngineOptions
    oracle: PiOracle
    mapper: Callable[[Callable[[_Task], MatchAttempt], Iterable[_Task]], Iterable[MatchAttempt]]
    h_hat: dict[str, np.ndarray] = field(default_factory=dict)
    provenance: dict[str, tuple[MatchCertificate, ...]] = field(default_factory=dict)
    tried: set[tuple[str, str, str]] = field(default_factory=set)
    best_residual: dict[str, float] = field(default_factory=dict)
    # targets whose search was cut short by a task cap
    capped: set[str] = field(default_factory=set)
    certificates: list[MatchCertificate] = field(default_factory=list)
    queries: int = 0
    alternates: int = 0
    budget_exhausted: bool = False


def _source_points(structure: KnownStructure, x_id: str, z_id: str, opts: EngineOptions):
    """Candidate w* in G(x, z): every box midpoint, then low-discrepancy points per box."""
    boxes = list(structure.support(x_id, z_id))
    for box in boxes:
        yield g_inverse(structure.g_spec, box.center)
    if opts.source_points <= 0:
        return
    for box in boxes:
        for u in start_points(box, opts.source_points + 1, margin=opts.interior_margin)[1:]:
            yield g_inverse(structure.g_spec, u)


def _source(x_id: str, w: np.ndarray, h: np.ndarray) -> MatchSource:
    return MatchSource(x_id=x_id, w=tuple(float(v) for v in w), known_h=tuple(float(v) for v in h))


def _run_task(state: _State, task: _Task) -> MatchAttempt:
    """
    Midpoint sources with a single start, then joint refinement, then the full multistart
    grid over every candidate source point when the refinement was inconclusive.
    """
    structure, opts = state.structure, state.opts
    meter = QueryMeter(state.oracle, cap=task.cap)
    known_h = state.h_hat[task.source_x]
    best = math.inf
    capped = False

    def attempt(source: MatchSource, **kwargs) -> MatchAttempt | None:
        nonlocal best, capped
        result = match_attempt(meter, task.z_id, source, task.target_x, structure, opts, **kwargs)
        best = min(best, result.best_residual)
        capped = capped or result.capped
        return result if result.certificate is not None else None

    def failed() -> MatchAttempt:
        return MatchAttempt(
            certificate=None, best_residual=best, evaluations=meter.used, capped=capped
        )

    for box in structure.support(task.source_x, task.z_id):
        w_star = g_inverse(structure.g_spec, box.center)
        found = attempt(_source(task.source_x, w_star, known_h), starts=1)
        if found is not None:
            return found

    if opts.refine:
        joint = joint_refine(meter, task.z_id, task.source_x, task.target_x, structure, opts)
        best = min(best, joint.best_residual)
        capped = capped or not joint.conclusive
        if joint.source is not None:
            found = attempt(
                _source(task.source_x, np.asarray(joint.source.w), known_h),
                starts=1,
                hint=joint.source.hint,
            )
            if found is not None:
                return found
        elif joint.conclusive and joint.best_residual > opts.no_overlap_factor * opts.tol_match:
            return failed()

    for w_star in _source_points(structure, task.source_x, task.z_id, opts):
        found = attempt(_source(task.source_x, w_star, known_h))
        if found is not None:
            return found
    return failed()


def _commit(state: _State, task: _Task, result: MatchAttempt) -> bool:
    state.queries += result.evaluations
    state.tried.add((task.z_id, task.source_x, task.target_x))
    if not task.cross_check:
        previous = state.best_residual.get(task.target_x, math.inf)
        state.best_residual[task.target_x] = min(previous, result.best_residual)
        if result.capped:
            state.capped.add(task.target_x)
    cert = result.certificate
    if cert is None:
        return False
    implied = np.asarray(cert.implied_h, dtype=float)
    if cert.target_x in state.h_hat:
        state.alternates += 1
        known = state.h_hat[cert.target_x]
        gap = float(np.max(np.abs(implied - known)))
        if gap > state.opts.tol_conflict:
            chain = state.provenance.get(cert.target_x, ())
            first = chain[-1] if chain else cert
            raise InconsistencyError(
                f"conflicting h for x {cert.target_x!r} at z {cert.z_id!r}: gap {gap:.3e} exceeds "
                f"tol_conflict {state.opts.tol_conflict:.3e}",
                first=first,
                second=cert,
            )
        return False
    state.h_hat[cert.target_x] = implied
    state.provenance[cert.target_x] = state.provenance[cert.source_x] + (cert,)
    state.certificates.append(cert)
    return True


def _run_round(state: _State, tasks: list[_Task]) -> int:
    """
    Run one round of tasks and commit them in task order.

    Without a budget every task gets the full query cap and the round fans out over the
    worker pool. Under a budget tasks run one at a time, each capped by what is left, so
    the outcome never depends on the worker count; a task that cannot get
    MIN_TASK_QUERIES ends the run.
    """
    full = state.opts.task_cap(state.structure.J)
    budget = state.opts.budget
    if budget is None:
        admitted = [replace(task, cap=full) for task in tasks]
        results = state.mapper(lambda task: _run_task(state, task), admitted)
        pairs = zip(admitted, results, strict=True)
        return sum(_commit(state, task, result) for task, result in pairs)
    added = 0
    for task in tasks:
        if not task.cross_check and task.target_x in state.h_hat:
            continue
        cap = min(full, budget - state.queries)
        if cap < MIN_TASK_QUERIES:
            state.budget_exhausted = True
            break
        task = replace(task, cap=cap)
        added += _commit(state, task, _run_task(state, task))
    return added


def _propagate(state: _State, z_id: str, seeds: Sequence[str], *, cross_check: bool) -> int:
    structure = state.structure
    members = structure.xs_in(z_id)
    added = 0
    first_round = True
    while not state.budget_exhausted:
        sources = [x for x in members if x in state.h_hat]
        targets = [x for x in members if x not in state.h_hat]
        tasks = [
            _Task(z_id, s, t)
            for t in targets
            for s in sources
            if (z_id, s, t) not in state.tried
        ]
        if first_round and cross_check:
            tasks.extend(
                _Task(z_id, s, t, cross_check=True)
                for i, s in enumerate(seeds)
                for t in seeds[i + 1 :]
                if (z_id, s, t) not in state.tried
            )
        first_round = False
        if not tasks:
            break
        added += _run_round(state, tasks)
        logger.debug(
            "z=%s round: %d tasks, %d identified so far", z_id, len(tasks), len(state.h_hat)
        )
    return added


def _with_mapper(workers: int):
    if workers <= 1:
        return None, map
    pool = ThreadPoolExecutor(max_workers=workers, thread_name_prefix="index-ident")
    return pool, pool.map


def identify_within_z(
    oracle: PiOracle,
    z_id: str,
    seeds: Mapping[str, Sequence[float]],
    structure: KnownStructure,
    opts: EngineOptions | None = None,
) -> WithinZResult:
    """
    Worklist propagation inside one z from seeds with known h.

    Every round tries each identified x against each unidentified x in X(z) once; the
    fixed point is reached when a round adds nothing. When A(z) is connected this covers
    X(z).
    """
    opts = opts or EngineOptions()
    if not seeds:
        raise ValueError("identify_within_z needs at least one seed")
    members = set(structure.xs_in(z_id))
    pool, mapper = _with_mapper(opts.workers)
    try:
        state = _State(structure=structure, opts=opts, oracle=oracle, mapper=mapper)
        seed_ids = [x for x in structure.x_ids if x in seeds]
        for x in seed_ids:
            if x not in members:
                raise ValueError(f"seed {x!r} is not in X({z_id!r})")
            state.h_hat[x] = np.asarray(seeds[x], dtype=float)
            state.provenance[x] = ()
        _propagate(state, z_id, seed_ids, cross_check=opts.cross_check)
    finally:
        if pool is not None:
            pool.shutdown()
    return WithinZResult(
        z_id=z_id,
        h_hat={x: tuple(float(v) for v in h) for x, h in state.h_hat.items()},
        certificates=tuple(state.certificates),
        oracle_queries=state.queries,
        budget_exhausted=state.budget_exhausted,
    )


def _identified_in(state: _State, z_id: str) -> list[str]:
    return [x for x in state.structure.xs_in(z_id) if x in state.h_hat]


def _linked_z(state: _State, processed: Sequence[str], candidate: str) -> bool:
    structure = state.structure
    for x in _identified_in(state, candidate):
        for z_id in processed:
            if x in structure.xs_in(z_id) and not g_overlap(structure, x, z_id, candidate).is_empty():
                return True
    return False


def _reason(state: _State, x_id: str, *, processed: Sequence[str], z_pass: Sequence[str]) -> str:
    structure, opts = state.structure, state.opts
    zs = structure.zs_of(x_id)
    if state.budget_exhausted:
        return REASON_BUDGET_EXHAUSTED
    if structure.seed_triple.z0 not in z_pass or not any(z in z_pass for z in zs):
        return REASON_Z_EXCLUDED
    if not any(z in processed for z in zs):
        return REASON_NO_Z_OVERLAP
    if x_id in state.capped:
        return REASON_SOLVER_EXHAUSTED
    if state.best_residual.get(x_id, math.inf) > opts.no_overlap_factor * opts.tol_match:
        return REASON_NO_A_OVERLAP
    return REASON_SOLVER_EXHAUSTED


def identify_global(
    oracle: PiOracle,
    structure: KnownStructure,
    opts: EngineOptions | None = None,
    *,
    z_pass: Sequence[str] | None = None,
) -> IdentResult:
    """
    Seed h(x0) = 0, propagate at z0, then paste across z: an unprocessed z in Z0 is
    seeded once an identified x of a processed z has overlapping G(x, z) there. All
    identified x's in the new z act as seeds and are cross-checked against each other.
    Processed z's are revisited when they gain new identified members.
    """
    opts = opts or EngineOptions()
    st = structure.seed_triple
    retained = tuple(z for z in structure.z_ids if z_pass is None or z in z_pass)
    pool, mapper = _with_mapper(opts.workers)
    try:
        state = _State(structure=structure, opts=opts, oracle=oracle, mapper=mapper)
        state.h_hat[st.x0] = np.zeros(structure.J)
        state.provenance[st.x0] = ()
        processed: list[str] = []
        seen: dict[str, int] = {}
        queue: list[str] = [st.z0] if st.z0 in retained else []
        while queue and not state.budget_exhausted:
            z_id = queue.pop(0)
            seeds = _identified_in(state, z_id)
            added = _propagate(
                state, z_id, seeds, cross_check=opts.cross_check and z_id not in processed
            )
            if z_id not in processed:
                processed.append(z_id)
            seen[z_id] = len(_identified_in(state, z_id))
            logger.info(
                "processed z=%s: %d seeds, %d added, %d/%d identified overall",
                z_id,
                len(seeds),
                added,
                len(state.h_hat),
                len(structure.x_ids),
            )
            for other in processed:
                if other not in queue and len(_identified_in(state, other)) > seen[other]:
                    queue.append(other)
            for other in retained:
                if other in processed or other in queue:
                    continue
                if _linked_z(state, processed, other):
                    queue.append(other)
    finally:
        if pool is not None:
            pool.shutdown()

    order = [x for x in structure.x_ids if x in state.h_hat]
    unidentified = {
        x: _reason(state, x, processed=processed, z_pass=retained)
        for x in structure.x_ids
        if x not in state.h_hat
    }
    return IdentResult(
        x0=st.x0,
        h_hat={x: tuple(float(v) for v in state.h_hat[x]) for x in order},
        provenance={x: state.provenance[x] for x in order},
        identified_z=tuple(z for z in structure.z_ids if z in processed),
        unidentified=unidentified,
        z_pass=retained,
        tol_match=opts.tol_match,
        oracle_queries=state.queries,
        alternates_checked=state.alternates,
        budget_exhausted=state.budget_exhausted,
    )
