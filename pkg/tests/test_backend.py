import numpy as np
import pytest

from artifact import _backend, _pycore
from artifact.contour import FourierShape, eval_F

pytestmark = pytest.mark.skipif("cython" not in _backend.available(),
                                reason="compiled extension not built")


@pytest.fixture
def ccore():
    from artifact import _ccore
    return _ccore


@pytest.fixture
def restore_backend():
    name = _backend.name
    yield
    _backend.use_backend(name)


def test_jn_parity(ccore):
    x = np.concatenate([[0.0, 1e-300, 1e-8], np.linspace(0.0, 300.0, 3001)])
    for n in (0, 1, 2, 9, 40, 150):
        a, b = ccore.jn(n, x), _pycore.jn(n, x)
        assert np.max(np.abs(a - b)) < 1e-14


def test_log_ik_parity(ccore):
    x = np.geomspace(1e-4, 800.0, 400)
    for a, b in zip(ccore.log_ik(30, x), _pycore.log_ik(30, x)):
        assert np.allclose(a, b, rtol=1e-13, atol=1e-12)


def test_hermite_parity(ccore, rng):
    data = rng.standard_normal((6, 7, 8, 8))
    p = [rng.uniform(0.0, 5.0 * s, 500) for s in (0.2, 0.3, 0.1)]
    a = ccore.hermite3(data, (0.0, 0.0, 0.0), (0.2, 0.3, 0.1), *p)
    b = _pycore.hermite3(data, (0.0, 0.0, 0.0), (0.2, 0.3, 0.1), *p)
    for u, v in zip(a, b):
        assert np.max(np.abs(u - v)) < 1e-12


def test_switch_and_functional_parity(cgrid, kgrid, restore_backend):
    shape = FourierShape(2, [0.01, 0.002], 0.25)
    assert _backend.use_backend("python") == "python"
    f_py = eval_F(0.3, shape, cgrid, kgrid).F
    assert _backend.use_backend("cython") == "cython"
    f_c = eval_F(0.3, shape, cgrid, kgrid).F
    assert np.max(np.abs(f_py - f_c)) < 1e-12


def test_unknown_backend():
    with pytest.raises(ValueError):
        _backend.use_backend("fortran")
