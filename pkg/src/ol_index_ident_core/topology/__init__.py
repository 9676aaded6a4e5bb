from __future__ import annotations

from ol_index_ident_core.topology.boxes import (
    Box,
    BoxUnion,
    DimensionMismatchError,
    box_union_intersect,
    translate,
)
from ol_index_ident_core.topology.union_find import UnionFind

__all__ = [
    "Box",
    "BoxUnion",
    "DimensionMismatchError",
    "UnionFind",
    "box_union_intersect",
    "translate",
]
