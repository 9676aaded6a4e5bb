from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from typing import Literal, Protocol

import numpy as np

from ol_index_ident_core.topology.boxes import BoxUnion, box_union_intersect, translate
from ol_index_ident_core.topology.union_find import UnionFind

HSource = Literal["truth", "recovered"]


class AvailabilityError(LookupError):
    pass


class SupportStructure(Protocol):
    """Anything exposing G(x, z) supports over finite x and z identifiers."""

    @property
    def x_ids(self) -> tuple[str, ...]: ...

    @property
    def z_ids(self) -> tuple[str, ...]: ...

    def support(self, x_id: str, z_id: str) -> BoxUnion: ...

    def xs_in(self, z_id: str) -> tuple[str, ...]: ...


@dataclass(frozen=True)
class ConnectivityReport:
    connected: bool
    # component label per box, in box order
    labels: tuple[int, ...]

    @property
    def components(self) -> int:
        return len(set(self.labels))


@dataclass(frozen=True)
class OverlapEdge:
    a: str
    b: str
    witness: tuple[float, ...]
    via: str | None = None


@dataclass(frozen=True)
class OverlapGraph:
    nodes: tuple[str, ...]
    edges: tuple[OverlapEdge, ...]

    def _union_find(self) -> UnionFind:
        uf = UnionFind(self.nodes)
        for edge in self.edges:
            uf.union(edge.a, edge.b)
        return uf

    def components(self) -> list[list[str]]:
        return [list(c) for c in self._union_find().components()]  # type: ignore[arg-type]

    def is_connected(self) -> bool:
        return len(self.components()) <= 1

    def component_of(self, node: str) -> list[str]:
        uf = self._union_find()
        return [n for n in self.nodes if uf.connected(n, node)]


def _witness(intersection: BoxUnion) -> tuple[float, ...]:
    return tuple(float(v) for v in intersection.boxes[0].center)


def is_connected(u: BoxUnion) -> ConnectivityReport:
    """Connectedness of a box union under interior overlap; face contact does not connect."""
    boxes = u.boxes
    uf = UnionFind(range(len(boxes)))
    for i in range(len(boxes)):
        for j in range(i + 1, len(boxes)):
            if boxes[i].interior_intersection(boxes[j]) is not None:
                uf.union(i, j)
    labels = uf.labels()
    ordered = tuple(labels[i] for i in range(len(boxes)))
    return ConnectivityReport(connected=len(set(ordered)) <= 1, labels=ordered)


def _h_value(
    structure: object,
    x_id: str,
    *,
    h_source: HSource,
    h_hat: Mapping[str, Sequence[float]] | None,
) -> np.ndarray:
    if h_source == "truth":
        h_table = getattr(structure, "h_table", None)
        if h_table is None:
            raise AvailabilityError("true h is only available from a ground-truth scenario")
        return h_table.value(x_id)
    if h_source != "recovered":
        raise ValueError(f"unknown h source: {h_source!r}")
    if h_hat is None or x_id not in h_hat:
        raise AvailabilityError(f"x {x_id!r} has not been identified")
    return np.asarray(h_hat[x_id], dtype=float)


def a_support(
    structure: SupportStructure,
    x_id: str,
    z_id: str,
    *,
    h_source: HSource = "truth",
    h_hat: Mapping[str, Sequence[float]] | None = None,
) -> BoxUnion:
    """A(x, z) = G(x, z) + {h(x)} with h from the scenario or from a recovered table."""
    h = _h_value(structure, x_id, h_source=h_source, h_hat=h_hat)
    return translate(structure.support(x_id, z_id), h.tolist())


def a_union(
    structure: SupportStructure,
    z_id: str,
    *,
    h_source: HSource = "truth",
    h_hat: Mapping[str, Sequence[float]] | None = None,
    x_ids: Sequence[str] | None = None,
) -> BoxUnion:
    """A(z): union of A(x, z) over x in X(z), or over the given subset."""
    members = structure.xs_in(z_id) if x_ids is None else x_ids
    out: BoxUnion | None = None
    for x_id in members:
        piece = a_support(structure, x_id, z_id, h_source=h_source, h_hat=h_hat)
        out = piece if out is None else out.union(piece)
    if out is None:
        return BoxUnion.empty(structure.support(structure.x_ids[0], z_id).dim)
    return out


def components_overlap_graph(
    structure: SupportStructure,
    z_id: str,
    *,
    h_source: HSource = "truth",
    h_hat: Mapping[str, Sequence[float]] | None = None,
) -> OverlapGraph:
    """Graph on X(z) with an edge wherever A(x, z) and A(x', z) overlap."""
    xs = structure.xs_in(z_id)
    if h_source == "recovered":
        xs = tuple(x for x in xs if h_hat is not None and x in h_hat)
    supports = {
        x: a_support(structure, x, z_id, h_source=h_source, h_hat=h_hat) for x in xs
    }
    edges = []
    for i, x in enumerate(xs):
        for y in xs[i + 1 :]:
            inter = box_union_intersect(supports[x], supports[y])
            if not inter.is_empty():
                edges.append(OverlapEdge(a=x, b=y, witness=_witness(inter)))
    return OverlapGraph(nodes=xs, edges=tuple(edges))


def g_overlap(structure: SupportStructure, x_id: str, z_a: str, z_b: str) -> BoxUnion:
    return box_union_intersect(structure.support(x_id, z_a), structure.support(x_id, z_b))


def mz_overlap_graph(
    structure: SupportStructure, *, z_ids: Sequence[str] | None = None
) -> OverlapGraph:
    """
    Graph on z identifiers: (z, z') is an edge iff some x in X(z) ∩ X(z') has overlapping
    G(x, z) and G(x, z'). The witness is a g-space point interior to both supports.

    For finite Z, the retained z's cannot be split into two groups with no overlap
    between them iff this graph is connected.
    """
    nodes = tuple(structure.z_ids if z_ids is None else z_ids)
    edges = []
    for i, z in enumerate(nodes):
        members = set(structure.xs_in(z))
        for other in nodes[i + 1 :]:
            for x in structure.xs_in(other):
                if x not in members:
                    continue
                inter = g_overlap(structure, x, z, other)
                if not inter.is_empty():
                    edges.append(OverlapEdge(a=z, b=other, witness=_witness(inter), via=x))
                    break
    return OverlapGraph(nodes=nodes, edges=tuple(edges))
