from __future__ import annotations

from dataclasses import dataclass, replace

STOP_FRACTION = 1e-3
# box pairs the default task cap pays a joint solve for
CAP_BOX_PAIRS = 4


@dataclass(frozen=True)
class EngineOptions:
    """
    Tolerances and search effort for the identification engine.

    `tol_h` and `tol_conflict` are derived from `tol_match`. `starts_per_box=None` means
    3**J multistart points per support box. `max_iter_per_start` bounds the least-squares
    evaluations of one start. `max_evals_per_solve` caps the oracle queries spent on one
    (source, target) task; None pays for the joint refinement and one multistart grid.
    Under a query budget a task may spend at most what the budget has left.
    """

    tol_match: float = 1e-9
    starts_per_box: int | None = None
    source_points: int = 2
    max_evals_per_solve: int | None = None
    max_iter_per_start: int = 100
    interior_margin: float = 1e-6
    no_overlap_factor: float = 1e3
    budget: int | None = None
    workers: int = 1
    cross_check: bool = True
    refine: bool = True

    def __post_init__(self) -> None:
        if self.tol_match <= 0:
            raise ValueError("tol_match must be > 0")
        if self.starts_per_box is not None and self.starts_per_box < 1:
            raise ValueError("starts_per_box must be >= 1")
        if self.source_points < 0:
            raise ValueError("source_points must be >= 0")
        if self.max_evals_per_solve is not None and self.max_evals_per_solve < 2:
            raise ValueError("max_evals_per_solve must be >= 2")
        if self.max_iter_per_start < 1:
            raise ValueError("max_iter_per_start must be >= 1")
        if not 0 <= self.interior_margin < 0.5:
            raise ValueError("interior_margin must be in [0, 0.5)")
        if self.budget is not None and self.budget < 1:
            raise ValueError("budget must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    @property
    def tol_h(self) -> float:
        return 10.0 * self.tol_match

    @property
    def stop_tol(self) -> float:
        # a start stops as soon as any evaluation is this close
        return STOP_FRACTION * self.tol_match

    @property
    def tol_conflict(self) -> float:
        return 100.0 * self.tol_match

    def starts_for(self, J: int) -> int:
        return self.starts_per_box if self.starts_per_box is not None else 3**J

    def task_cap(self, J: int) -> int:
        if self.max_evals_per_solve is not None:
            return self.max_evals_per_solve
        # priced at the joint solve: two queries per evaluation of a 2J-dimensional problem
        per_solve = self.max_iter_per_start * 2 * (2 * J + 1)
        return per_solve * (CAP_BOX_PAIRS + self.starts_for(J))

    def with_stderr(self, stderr: float) -> EngineOptions:
        """tol_match = max(tol_match, 4 * stderr) for Monte Carlo oracles."""
        return replace(self, tol_match=max(self.tol_match, 4.0 * float(stderr)))

    def fingerprint(self) -> dict[str, object]:
        # workers is excluded: results never depend on it
        return {
            "tol_match": self.tol_match,
            "starts_per_box": self.starts_per_box,
            "source_points": self.source_points,
            "max_evals_per_solve": self.max_evals_per_solve,
            "max_iter_per_start": self.max_iter_per_start,
            "interior_margin": self.interior_margin,
            "no_overlap_factor": self.no_overlap_factor,
            "budget": self.budget,
            "cross_check": self.cross_check,
            "refine": self.refine,
        }
