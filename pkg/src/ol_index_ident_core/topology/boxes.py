from __future__ import annotations

import itertools
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

import numpy as np


class DimensionMismatchError(ValueError):
    pass


def _as_tuple(values: Iterable[float]) -> tuple[float, ...]:
    return tuple(float(v) for v in values)


@dataclass(frozen=True)
class Box:
    """
    Closed axis-aligned box with positive volume.

    Overlap is always decided on interiors: boxes that only share a face do not
    overlap.
    """

    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "lo", _as_tuple(self.lo))
        object.__setattr__(self, "hi", _as_tuple(self.hi))
        if len(self.lo) != len(self.hi) or not self.lo:
            raise DimensionMismatchError("lo and hi must be non-empty and of equal length")
        if not all(lo < hi for lo, hi in zip(self.lo, self.hi, strict=True)):
            raise ValueError(f"box must have lo < hi componentwise: lo={self.lo} hi={self.hi}")

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def center(self) -> np.ndarray:
        return (np.asarray(self.lo) + np.asarray(self.hi)) / 2.0

    @property
    def widths(self) -> np.ndarray:
        return np.asarray(self.hi) - np.asarray(self.lo)

    def volume(self) -> float:
        return float(np.prod(self.widths))

    def interior_intersection(self, other: Box) -> Box | None:
        if other.dim != self.dim:
            raise DimensionMismatchError(f"dimension mismatch: {self.dim} != {other.dim}")
        lo = tuple(max(a, b) for a, b in zip(self.lo, other.lo, strict=True))
        hi = tuple(min(a, b) for a, b in zip(self.hi, other.hi, strict=True))
        if all(a < b for a, b in zip(lo, hi, strict=True)):
            return Box(lo=lo, hi=hi)
        return None

    def translated(self, t: Sequence[float]) -> Box:
        if len(t) != self.dim:
            raise DimensionMismatchError(f"dimension mismatch: {self.dim} != {len(t)}")
        return Box(
            lo=tuple(a + float(s) for a, s in zip(self.lo, t, strict=True)),
            hi=tuple(b + float(s) for b, s in zip(self.hi, t, strict=True)),
        )

    def contains_interior(self, point: Sequence[float], *, margin: float = 0.0) -> bool:
        p = np.asarray(point, dtype=float)
        return bool(np.all(p > np.asarray(self.lo) + margin) and np.all(p < np.asarray(self.hi) - margin))

    def shrunk(self, fraction: float) -> tuple[np.ndarray, np.ndarray]:
        """Bounds pulled inwards by `fraction` of each width (used to keep iterates interior)."""
        pad = self.widths * fraction
        return np.asarray(self.lo) + pad, np.asarray(self.hi) - pad


@dataclass(frozen=True)
class BoxUnion:
    dim: int
    boxes: tuple[Box, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "boxes", tuple(self.boxes))
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        for b in self.boxes:
            if b.dim != self.dim:
                raise DimensionMismatchError(f"box of dimension {b.dim} in a union of dimension {self.dim}")

    @classmethod
    def of(cls, boxes: Iterable[Box], *, dim: int | None = None) -> BoxUnion:
        items = tuple(boxes)
        if dim is None:
            if not items:
                raise ValueError("dim is required for an empty union")
            dim = items[0].dim
        return cls(dim=dim, boxes=items)

    @classmethod
    def empty(cls, dim: int) -> BoxUnion:
        return cls(dim=dim, boxes=())

    def is_empty(self) -> bool:
        return not self.boxes

    def __len__(self) -> int:
        return len(self.boxes)

    def __iter__(self):
        return iter(self.boxes)

    def union(self, other: BoxUnion) -> BoxUnion:
        _check_dims(self, other)
        return BoxUnion(dim=self.dim, boxes=self.boxes + other.boxes)

    def contains_interior(self, point: Sequence[float], *, margin: float = 0.0) -> bool:
        return any(b.contains_interior(point, margin=margin) for b in self.boxes)

    def volume(self) -> float:
        """Exact Lebesgue measure of the union via coordinate compression."""
        if not self.boxes:
            return 0.0
        axes = [
            np.unique(np.concatenate([[b.lo[k] for b in self.boxes], [b.hi[k] for b in self.boxes]]))
            for k in range(self.dim)
        ]
        los = np.asarray([b.lo for b in self.boxes])
        his = np.asarray([b.hi for b in self.boxes])
        total = 0.0
        for cell in itertools.product(*[range(len(a) - 1) for a in axes]):
            lo = np.asarray([axes[k][i] for k, i in enumerate(cell)])
            hi = np.asarray([axes[k][i + 1] for k, i in enumerate(cell)])
            mid = (lo + hi) / 2.0
            if np.any(np.all((los < mid) & (mid < his), axis=1)):
                total += float(np.prod(hi - lo))
        return total


def _check_dims(u: BoxUnion, v: BoxUnion) -> None:
    if u.dim != v.dim:
        raise DimensionMismatchError(f"dimension mismatch: {u.dim} != {v.dim}")


def box_union_intersect(u: BoxUnion, v: BoxUnion) -> BoxUnion:
    """Pairwise interior intersections; an empty result means no interior overlap."""
    _check_dims(u, v)
    pieces: list[Box] = []
    for a in u.boxes:
        for b in v.boxes:
            inter = a.interior_intersection(b)
            if inter is not None:
                pieces.append(inter)
    return BoxUnion(dim=u.dim, boxes=tuple(pieces))


def translate(u: BoxUnion, t: Sequence[float]) -> BoxUnion:
    if len(t) != u.dim:
        raise DimensionMismatchError(f"dimension mismatch: {u.dim} != {len(t)}")
    return BoxUnion(dim=u.dim, boxes=tuple(b.translated(t) for b in u.boxes))
