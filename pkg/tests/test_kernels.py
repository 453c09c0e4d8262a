import numpy as np
import pytest

from dynbip import kernels
from dynbip.evaluation import _csr, bcc, mmd
from dynbip.generator import generate

from conftest import make_config

needs_ext = pytest.mark.skipif("cython" not in kernels.BACKENDS,
                               reason="compiled extension not built")


def test_default_backend_is_registered():
    assert kernels.BACKEND in kernels.BACKENDS
    assert kernels.get() is kernels.BACKENDS[kernels.BACKEND]


@needs_ext
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_bcc_backends_identical(seed):
    g = generate(make_config(seed=seed, total_edges=3000))
    for side in "UV":
        a = bcc(g, side, backend="python").values
        b = bcc(g, side, backend="cython").values
        np.testing.assert_allclose(a, b, rtol=0, atol=1e-15)


@needs_ext
def test_rbf_sum_backends_agree(rng):
    x, y = rng.normal(size=3000), rng.normal(size=2500)
    wx, wy = rng.random(3000), rng.random(2500)
    a = kernels.get("python").rbf_sum(x, wx, y, wy, 0.7)
    b = kernels.get("cython").rbf_sum(x, wx, y, wy, 0.7)
    assert a == pytest.approx(b, rel=1e-9)


@needs_ext
def test_mmd_backends_agree(rng):
    a, b = rng.normal(size=5000), rng.normal(0.1, 1, size=5000)
    assert mmd(a, b, backend="python") == pytest.approx(mmd(a, b, backend="cython"),
                                                        rel=1e-9, abs=1e-15)


def test_csr_is_deduplicated(star):
    ptr_u, idx_u, ptr_v, idx_v = _csr(star)
    assert ptr_u.tolist() == [0, 3] and idx_u.tolist() == [0, 1, 2]
    assert ptr_v.tolist() == [0, 1, 2, 3] and idx_v.tolist() == [0, 0, 0]
