from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np

from ol_index_ident_core.topology.boxes import BoxUnion

GKind = Literal["identity", "negative-log", "affine"]
KernelKind = Literal[
    "arum-gumbel",
    "arum-mc",
    "perturbed-entropy",
    "perturbed-custom",
    "competing-risks-gumbel",
    "competing-risks-mc",
    "noninjective-test",
]
ErrorFamily = Literal["gumbel", "gaussian", "point-mass"]
ScenarioMode = Literal["connected", "disconnected-within-z", "disconnected-across-z", "noninjective"]

G_KINDS: tuple[str, ...] = ("identity", "negative-log", "affine")
KERNEL_KINDS: tuple[str, ...] = (
    "arum-gumbel",
    "arum-mc",
    "perturbed-entropy",
    "perturbed-custom",
    "competing-risks-gumbel",
    "competing-risks-mc",
    "noninjective-test",
)
MC_KERNEL_KINDS: frozenset[str] = frozenset({"arum-mc", "competing-risks-mc"})
ERROR_FAMILIES: tuple[str, ...] = ("gumbel", "gaussian", "point-mass")
SCENARIO_MODES: tuple[str, ...] = (
    "connected",
    "disconnected-within-z",
    "disconnected-across-z",
    "noninjective",
)


class IdentifierError(KeyError):
    pass


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class Dimensions:
    J: int
    dX: int
    nX: int
    nZ: int

    def __post_init__(self) -> None:
        if self.J < 1:
            raise ValueError("J must be >= 1")
        if self.dX < 1:
            raise ValueError("dX must be >= 1")
        if self.nX < 1:
            raise ValueError("nX must be >= 1")
        if self.nZ < 1:
            raise ValueError("nZ must be >= 1")


@dataclass(frozen=True)
class GSpec:
    """
    Known map g from W to R^J.

    `affine` carries a J x dW coefficient matrix of full row rank and a length-J offset.
    """

    kind: GKind
    J: int
    coefficients: tuple[tuple[float, ...], ...] | None = None
    offset: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if self.kind not in G_KINDS:
            raise ValueError(f"unknown g kind: {self.kind!r}")
        if self.kind != "affine":
            return
        if self.coefficients is None or self.offset is None:
            raise ValueError("affine g requires coefficients and offset")
        matrix = np.asarray(self.coefficients, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != self.J or len(self.offset) != self.J:
            raise ValueError("affine g coefficients must be J x dW and offset of length J")
        if np.linalg.matrix_rank(matrix) != self.J:
            raise ValueError("affine g coefficients must have full row rank J")

    @property
    def dW(self) -> int:
        if self.kind == "affine":
            assert self.coefficients is not None
            return len(self.coefficients[0])
        return self.J


@dataclass(frozen=True)
class XPoint:
    x_id: str
    value: tuple[float, ...]


@dataclass(frozen=True)
class HTable:
    entries: Mapping[str, tuple[float, ...]]
    x0: str

    def __post_init__(self) -> None:
        if self.x0 not in self.entries:
            raise IdentifierError(f"normalization point {self.x0!r} missing from h table")

    def value(self, x_id: str) -> np.ndarray:
        try:
            return np.asarray(self.entries[x_id], dtype=float)
        except KeyError:
            raise IdentifierError(f"unknown x identifier: {x_id!r}") from None


@dataclass(frozen=True)
class ZKernelParams:
    """
    Per-z kernel parameters.

    `scale` is the Gumbel/Gaussian error scale for ARUM and competing-risks kinds and
    the perturbation scale c(z) for perturbed kinds. `smoothing` is the temperature
    of the smoothed MC simulators.
    """

    scale: float = 1.0
    family: ErrorFamily = "gumbel"
    draws: int = 20_000
    smoothing: float = 0.05
    perturbation: str = "log-barrier"

    def __post_init__(self) -> None:
        if self.scale <= 0:
            raise ValueError("scale must be > 0")
        if self.family not in ERROR_FAMILIES:
            raise ValueError(f"unknown error family: {self.family!r}")
        if self.draws < 1:
            raise ValueError("draws must be >= 1")
        if self.smoothing <= 0:
            raise ValueError("smoothing must be > 0")


@dataclass(frozen=True)
class LambdaKernelSpec:
    kind: KernelKind
    params: Mapping[str, ZKernelParams]
    # Λ'(a, z) = Λ(a + shift, z); used to build observationally equivalent scenarios.
    shift: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if self.kind not in KERNEL_KINDS:
            raise ValueError(f"unknown kernel kind: {self.kind!r}")

    def for_z(self, z_id: str) -> ZKernelParams:
        try:
            return self.params[z_id]
        except KeyError:
            raise IdentifierError(f"kernel has no parameters for z {z_id!r}") from None

    @property
    def is_mc(self) -> bool:
        return self.kind in MC_KERNEL_KINDS


@dataclass(frozen=True)
class SeedTriple:
    z0: str
    w0: tuple[float, ...]
    x0: str


@dataclass(frozen=True)
class KnownStructure:
    """What the identification engine may know: g, supports and identifiers. Never h or Λ."""

    J: int
    g_spec: GSpec
    x_ids: tuple[str, ...]
    z_ids: tuple[str, ...]
    supports: Mapping[tuple[str, str], BoxUnion]
    seed_triple: SeedTriple

    def support(self, x_id: str, z_id: str) -> BoxUnion:
        return self.supports.get((x_id, z_id)) or BoxUnion.empty(self.J)

    def xs_in(self, z_id: str) -> tuple[str, ...]:
        """X(z) in canonical x order."""
        return tuple(x for x in self.x_ids if not self.support(x, z_id).is_empty())

    def zs_of(self, x_id: str) -> tuple[str, ...]:
        return tuple(z for z in self.z_ids if not self.support(x_id, z).is_empty())


@dataclass(frozen=True)
class Scenario:
    seed: int
    mode: str
    dims: Dimensions
    x_points: tuple[XPoint, ...]
    z_ids: tuple[str, ...]
    g_spec: GSpec
    h_table: HTable
    lambda_spec: LambdaKernelSpec
    supports: Mapping[tuple[str, str], BoxUnion]
    seed_triple: SeedTriple
    _x_index: dict[str, int] = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        x_ids = [p.x_id for p in self.x_points]
        if len(set(x_ids)) != len(x_ids):
            raise ValueError("duplicate x identifiers")
        if len(set(self.z_ids)) != len(self.z_ids):
            raise ValueError("duplicate z identifiers")
        if len(x_ids) != self.dims.nX or len(self.z_ids) != self.dims.nZ:
            raise ValueError("x/z counts do not match dims")
        if self.g_spec.J != self.dims.J:
            raise ValueError("g dimension does not match dims.J")
        for p in self.x_points:
            if len(p.value) != self.dims.dX:
                raise ValueError(f"x point {p.x_id!r} has dimension {len(p.value)} != {self.dims.dX}")
        for x_id in x_ids:
            if x_id not in self.h_table.entries:
                raise IdentifierError(f"h table missing x {x_id!r}")
        for z_id in self.z_ids:
            self.lambda_spec.for_z(z_id)
        for (x_id, z_id), union in self.supports.items():
            if x_id not in x_ids or z_id not in self.z_ids:
                raise IdentifierError(f"support references unknown pair ({x_id!r}, {z_id!r})")
            if union.dim != self.dims.J:
                raise ValueError(f"support ({x_id!r}, {z_id!r}) has dimension {union.dim}")
        st = self.seed_triple
        if st.x0 not in x_ids or st.z0 not in self.z_ids:
            raise IdentifierError("seed triple references unknown identifiers")
        if st.x0 != self.h_table.x0:
            raise ValueError("seed triple x0 differs from the h table normalization point")
        if len(st.w0) != self.g_spec.dW:
            raise ValueError("seed w0 has the wrong dimension")
        self._x_index.update({x: i for i, x in enumerate(x_ids)})

    @property
    def x_ids(self) -> tuple[str, ...]:
        return tuple(p.x_id for p in self.x_points)

    def has_x(self, x_id: str) -> bool:
        return x_id in self._x_index

    def support(self, x_id: str, z_id: str) -> BoxUnion:
        return self.supports.get((x_id, z_id)) or BoxUnion.empty(self.dims.J)

    def xs_in(self, z_id: str) -> tuple[str, ...]:
        return tuple(x for x in self.x_ids if not self.support(x, z_id).is_empty())

    def known_structure(self) -> KnownStructure:
        return KnownStructure(
            J=self.dims.J,
            g_spec=self.g_spec,
            x_ids=self.x_ids,
            z_ids=self.z_ids,
            supports=self.supports,
            seed_triple=self.seed_triple,
        )

    def shifted(self, c: tuple[float, ...]) -> Scenario:
        """
        Observationally equivalent scenario: h' = h - c and Λ'(a, z) = Λ(a + c, z).

        Π agrees bit for bit when every h - c is exact (h is quantized by the generator,
        so dyadic c qualify).
        """
        if len(c) != self.dims.J:
            raise ValueError("shift must have length J")
        cvec = tuple(float(v) for v in c)
        entries = {
            x: tuple(h - s for h, s in zip(vals, cvec, strict=True))
            for x, vals in self.h_table.entries.items()
        }
        old = self.lambda_spec.shift or (0.0,) * self.dims.J
        shift = tuple(a + b for a, b in zip(old, cvec, strict=True))
        return replace(
            self,
            h_table=HTable(entries=entries, x0=self.h_table.x0),
            lambda_spec=replace(self.lambda_spec, shift=shift),
        )

    def with_seed_point(self, w0: tuple[float, ...]) -> Scenario:
        st = self.seed_triple
        return replace(self, seed_triple=SeedTriple(z0=st.z0, w0=tuple(w0), x0=st.x0))

    def with_support(self, x_id: str, z_id: str, union: BoxUnion) -> Scenario:
        supports = dict(self.supports)
        supports[(x_id, z_id)] = union
        return replace(self, supports=supports)
