import pytest

from ol_index_ident_core.engine.options import CAP_BOX_PAIRS, EngineOptions


def test_task_cap_grows_with_the_dimension() -> None:
    opts = EngineOptions()
    assert opts.task_cap(1) == 100 * 2 * 3 * (CAP_BOX_PAIRS + 3)
    assert opts.task_cap(1) < opts.task_cap(2) < opts.task_cap(3)


def test_explicit_cap_wins() -> None:
    assert EngineOptions(max_evals_per_solve=50).task_cap(3) == 50


def test_stop_tolerance_sits_below_the_match_tolerance() -> None:
    opts = EngineOptions(tol_match=1e-6)
    assert opts.stop_tol == pytest.approx(1e-9)
    assert opts.tol_h > opts.tol_match > opts.stop_tol


@pytest.mark.parametrize(
    "kwargs",
    [
        {"tol_match": 0.0},
        {"max_evals_per_solve": 1},
        {"max_iter_per_start": 0},
        {"interior_margin": 0.5},
        {"workers": 0},
    ],
)
def test_invalid_options_are_rejected(kwargs: dict[str, float]) -> None:
    with pytest.raises(ValueError):
        EngineOptions(**kwargs)


def test_fingerprint_ignores_workers() -> None:
    assert EngineOptions(workers=1).fingerprint() == EngineOptions(workers=8).fingerprint()
    assert "max_iter_per_start" in EngineOptions().fingerprint()
