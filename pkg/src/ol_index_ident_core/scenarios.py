from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ol_index_ident_core.index import g_apply, g_inverse
from ol_index_ident_core.models import (
    KERNEL_KINDS,
    SCENARIO_MODES,
    Dimensions,
    GSpec,
    HTable,
    LambdaKernelSpec,
    Scenario,
    SeedTriple,
    XPoint,
    ZKernelParams,
)
from ol_index_ident_core.topology.boxes import Box, BoxUnion
from ol_index_ident_core.util import stable_stream

logger = logging.getLogger(__name__)

# Chain geometry in index space: consecutive slots overlap by >= 0.35 per coordinate,
# slots two or more apart are separated by >= 0.3 in every coordinate.
STEP = 0.95
HALF_WIDTH_RANGE = (0.70, 0.75)
JITTER = 0.05
MARGIN = HALF_WIDTH_RANGE[1] + JITTER
BOX_GRID = 2.0**-20
H_GRID = 2.0**-30
SPLIT_PROBABILITY = 0.25
SPLIT_OVERLAP = 0.125
# Competing-risks index values stay below this so that G(a) < 0.
CR_INDEX_CEILING = 0.2
DEFAULT_DRAWS = 20_000


class ScenarioGenerationError(ValueError):
    pass


@dataclass(frozen=True)
class _Chain:
    z_id: str
    members: list[str]
    # slot index of each member along the chain
    slots: list[int]


def _quantize(values: np.ndarray, grid: float) -> np.ndarray:
    return np.round(np.asarray(values, dtype=float) / grid) * grid


def _scale_range(kernel: str) -> tuple[float, float]:
    if kernel.startswith("competing-risks"):
        return 0.5, 0.7
    return 0.75, 1.25


def _window_center(kernel: str, J: int, span: float) -> np.ndarray:
    if kernel.startswith("competing-risks"):
        return np.full(J, CR_INDEX_CEILING - MARGIN - span / 2.0)
    return np.zeros(J)


def _g_spec(kind: str, J: int, rng: np.random.Generator) -> GSpec:
    if kind != "affine":
        return GSpec(kind=kind, J=J)  # type: ignore[arg-type]
    while True:
        matrix = rng.normal(size=(J, J + 1))
        if np.linalg.matrix_rank(matrix) == J and np.linalg.cond(matrix) < 50:
            break
    offset = rng.uniform(-0.5, 0.5, size=J)
    return GSpec(
        kind="affine",
        J=J,
        coefficients=tuple(tuple(float(v) for v in row) for row in matrix),
        offset=tuple(float(v) for v in offset),
    )


def _h_values(x_ids: list[str], J: int, rng: np.random.Generator) -> dict[str, tuple[float, ...]]:
    raw = {x: rng.uniform(-1.0, 1.0, size=J) for x in x_ids}
    base = raw[x_ids[0]]
    return {x: tuple(float(v) for v in _quantize(raw[x] - base, H_GRID)) for x in x_ids}


def _member_chains(
    x_ids: list[str], z_ids: list[str], rng: np.random.Generator
) -> list[_Chain]:
    """
    Chain order per z: the first z starts with x_ids[0]; every later z starts with the
    last member of the previous chain, which links consecutive z's.
    """
    n = len(x_ids)
    sets: list[set[str]] = []
    for _ in z_ids:
        size = int(rng.integers(1, n + 1))
        sets.append({x_ids[int(i)] for i in rng.choice(n, size=size, replace=False)})
    sets[0].add(x_ids[0])
    covered = set().union(*sets)
    for x in x_ids:
        if x not in covered:
            sets[int(rng.integers(0, len(z_ids)))].add(x)

    chains: list[_Chain] = []
    head = x_ids[0]
    for z_id, members in zip(z_ids, sets, strict=True):
        rest = sorted(members - {head}, key=x_ids.index)
        order = [head] + [rest[int(i)] for i in rng.permutation(len(rest))]
        chains.append(_Chain(z_id=z_id, members=order, slots=list(range(len(order)))))
        head = order[-1]
    return chains


def _slot_box(position: np.ndarray, rng: np.random.Generator) -> Box:
    J = position.size
    center = position + rng.uniform(-JITTER, JITTER, size=J)
    half = rng.uniform(*HALF_WIDTH_RANGE, size=J)
    lo = _quantize(center - half, BOX_GRID)
    hi = _quantize(center + half, BOX_GRID)
    return Box(lo=tuple(lo.tolist()), hi=tuple(hi.tolist()))


def _maybe_split(box: Box, rng: np.random.Generator) -> tuple[Box, ...]:
    if rng.uniform() >= SPLIT_PROBABILITY:
        return (box,)
    mid = float(_quantize(box.center[0], BOX_GRID))
    first_hi = list(box.hi)
    first_hi[0] = mid + SPLIT_OVERLAP
    second_lo = list(box.lo)
    second_lo[0] = mid - SPLIT_OVERLAP
    return Box(lo=box.lo, hi=tuple(first_hi)), Box(lo=tuple(second_lo), hi=box.hi)


def _place_chains(
    chains: list[_Chain],
    *,
    J: int,
    center: np.ndarray,
    span: float,
    rng: np.random.Generator,
) -> dict[tuple[str, str], tuple[Box, ...]]:
    """Index-space boxes A(x, z) for one linked group of chains."""
    boxes: dict[tuple[str, str], tuple[Box, ...]] = {}
    lo_pos, hi_pos = center - span / 2.0, center + span / 2.0
    start = rng.uniform(lo_pos, hi_pos) if span > 0 else center.copy()
    for chain in chains:
        direction = np.where(start <= center, 1.0, -1.0)
        positions = {}
        for member, slot in zip(chain.members, chain.slots, strict=True):
            position = start + direction * STEP * slot
            positions[member] = position
            boxes[(member, chain.z_id)] = _maybe_split(_slot_box(position, rng), rng)
        # next chain is linked through the last connected member
        start = positions[chain.members[_last_linked(chain)]]
    return boxes


def _last_linked(chain: _Chain) -> int:
    # members after a skipped slot are stranded and never link
    for i in range(1, len(chain.slots)):
        if chain.slots[i] != chain.slots[i - 1] + 1:
            return i - 1
    return len(chain.slots) - 1


def gen_scenario(
    seed: int,
    dims: Dimensions,
    mode: str,
    *,
    kernel: str | None = None,
    g_kind: str = "identity",
    draws: int = DEFAULT_DRAWS,
) -> Scenario:
    """
    Deterministic synthetic scenario for (seed, dims, mode) and the keyword options.

    Supports are laid out in index space as chains of overlapping boxes, one chain per z,
    and translated back by -h(x) to give G(x, z).
    """
    if mode not in SCENARIO_MODES:
        raise ScenarioGenerationError(f"unknown scenario mode: {mode!r}")
    if mode == "noninjective":
        if kernel not in (None, "noninjective-test"):
            raise ScenarioGenerationError("noninjective mode fixes the kernel to noninjective-test")
        kernel = "noninjective-test"
    kernel = kernel or "arum-gumbel"
    if kernel not in KERNEL_KINDS:
        raise ScenarioGenerationError(f"unknown kernel kind: {kernel!r}")
    if mode in ("disconnected-within-z", "disconnected-across-z") and dims.nX < 2:
        raise ScenarioGenerationError(f"mode {mode} needs nX >= 2, got {dims.nX}")
    if mode == "disconnected-across-z" and dims.nZ < 2:
        raise ScenarioGenerationError(f"mode {mode} needs nZ >= 2, got {dims.nZ}")
    if draws < 1:
        raise ScenarioGenerationError("draws must be >= 1")

    J = dims.J
    rng = np.random.default_rng(stable_stream(seed, "scenario", mode, kernel, g_kind))
    x_ids = [f"x{i}" for i in range(dims.nX)]
    z_ids = [f"z{i}" for i in range(dims.nZ)]
    x_points = tuple(
        XPoint(x_id=x, value=tuple(float(v) for v in rng.uniform(-1.0, 1.0, size=dims.dX)))
        for x in x_ids
    )
    try:
        g_spec = _g_spec(g_kind, J, rng)
    except ValueError as exc:
        raise ScenarioGenerationError(str(exc)) from exc
    h = _h_values(x_ids, J, rng)

    groups: list[list[_Chain]] = []
    if mode == "disconnected-across-z":
        z_split = max(1, dims.nZ // 2)
        x_split = max(1, dims.nX // 3)
        first_x, second_x = x_ids[: dims.nX - x_split], x_ids[dims.nX - x_split :]
        first_z, second_z = z_ids[: dims.nZ - z_split], z_ids[dims.nZ - z_split :]
        groups.append(_member_chains(first_x, first_z, rng))
        groups.append(_member_chains(second_x, second_z, rng))
    elif mode == "disconnected-within-z":
        stranded = x_ids[dims.nX - max(1, (dims.nX - 1) // 3) :]
        linked = [x for x in x_ids if x not in stranded]
        chains = _member_chains(linked, z_ids, rng)
        head = chains[0]
        gap_slot = len(head.members) + 1
        chains[0] = _Chain(
            z_id=head.z_id,
            members=head.members + stranded,
            slots=head.slots + list(range(gap_slot, gap_slot + len(stranded))),
        )
        groups.append(chains)
    else:
        groups.append(_member_chains(x_ids, z_ids, rng))

    longest = max(max(c.slots) + 1 for group in groups for c in group)
    span = 2.0 * STEP * (longest - 1)
    center = _window_center(kernel, J, span)
    a_boxes: dict[tuple[str, str], tuple[Box, ...]] = {}
    for group in groups:
        a_boxes.update(_place_chains(group, J=J, center=center, span=span, rng=rng))

    supports = {
        (x, z): BoxUnion.of((b.translated([-v for v in h[x]]) for b in bs), dim=J)
        for (x, z), bs in a_boxes.items()
    }

    lo, hi = _scale_range(kernel)
    params = {
        z: ZKernelParams(
            scale=float(_quantize(rng.uniform(lo, hi), BOX_GRID)),
            draws=draws,
        )
        for z in z_ids
    }
    lambda_spec = LambdaKernelSpec(kind=kernel, params=params)  # type: ignore[arg-type]

    x0, z0 = x_ids[0], z_ids[0]
    seed_box = supports[(x0, z0)].boxes[0]
    w0 = g_inverse(g_spec, seed_box.center)
    if not supports[(x0, z0)].contains_interior(g_apply(g_spec, w0)):
        raise ScenarioGenerationError("seed point fell outside G(x0, z0)")

    scenario = Scenario(
        seed=int(seed),
        mode=mode,
        dims=dims,
        x_points=x_points,
        z_ids=tuple(z_ids),
        g_spec=g_spec,
        h_table=HTable(entries=h, x0=x0),
        lambda_spec=lambda_spec,
        supports=supports,
        seed_triple=SeedTriple(z0=z0, w0=tuple(float(v) for v in w0), x0=x0),
    )
    logger.debug(
        "generated scenario seed=%s mode=%s kernel=%s J=%s nX=%s nZ=%s",
        seed,
        mode,
        kernel,
        J,
        dims.nX,
        dims.nZ,
    )
    return scenario
