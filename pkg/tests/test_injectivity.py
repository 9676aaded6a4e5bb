import numpy as np
import pytest

from ol_index_ident_core.kernels.arum import arum_lambda_gumbel
from ol_index_ident_core.kernels.injectivity import injectivity_probe
from ol_index_ident_core.topology.boxes import Box, BoxUnion

DOMAIN = BoxUnion.of([Box(lo=(-1.0, -1.0), hi=(1.0, 1.0)), Box(lo=(0.5, 0.5), hi=(2.0, 2.0))])


def test_logit_passes() -> None:
    report = injectivity_probe(arum_lambda_gumbel, DOMAIN, samples=32, seed=1)
    assert report.passed
    assert report.tested_pairs > 0
    assert report.worst_separation > 0


def test_constant_coordinate_collides() -> None:
    def kernel(a: np.ndarray) -> np.ndarray:
        return arum_lambda_gumbel([0.0, a[1]])

    report = injectivity_probe(kernel, DOMAIN, samples=16, seed=2)
    assert not report.passed
    assert report.witness is not None
    np.testing.assert_array_equal(kernel(np.asarray(report.witness.a1)), report.witness.value)
    assert report.witness.a1 != report.witness.a2


def test_probe_is_deterministic() -> None:
    a = injectivity_probe(arum_lambda_gumbel, DOMAIN, samples=16, seed=3)
    b = injectivity_probe(arum_lambda_gumbel, DOMAIN, samples=16, seed=3)
    assert a == b


def test_probe_needs_a_domain() -> None:
    with pytest.raises(ValueError):
        injectivity_probe(arum_lambda_gumbel, BoxUnion.empty(2), samples=8, seed=0)
    with pytest.raises(ValueError):
        injectivity_probe(arum_lambda_gumbel, DOMAIN, samples=1, seed=0)
