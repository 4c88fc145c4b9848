import math

import numpy as np
import pytest

from artifact.errors import DomainError, QuadratureError
from artifact.quadrature import (
    composite_legendre, gauss_jacobi, gauss_jacobi_01, gauss_legendre, quad_algebraic, quad_gk,
)
from artifact.specfun import gamma


def test_gauss_legendre_polynomial_exactness():
    x, w = gauss_legendre(10, 0.0, 2.0)
    assert np.dot(w, x ** 19) == pytest.approx(2.0 ** 20 / 20, rel=1e-13)


def test_composite_legendre():
    x, w = composite_legendre(np.linspace(0.0, math.pi, 9), 12)
    assert np.dot(w, np.sin(x)) == pytest.approx(2.0, rel=1e-14)


@pytest.mark.parametrize("a,b", [(0.0, 0.0), (-0.5, 0.3), (0.7, -0.9)])
def test_gauss_jacobi_moments(a, b):
    x, w = gauss_jacobi(16, a, b)
    total = 2.0 ** (a + b + 1) * gamma(a + 1) * gamma(b + 1) / gamma(a + b + 2)
    assert w.sum() == pytest.approx(total, rel=1e-13)


def test_gauss_jacobi_01_singular_weight():
    t, w = gauss_jacobi_01(20, -0.5, 0.3)
    assert np.dot(w, np.cos(t)) == pytest.approx(
        sum((-1) ** k * 0.3 ** (2 * k + 0.5) / (math.factorial(2 * k) * (2 * k + 0.5))
            for k in range(12)), rel=1e-13)
    with pytest.raises(DomainError):
        gauss_jacobi(4, -1.0, 0.0)


def test_quad_gk_peaked():
    val, err = quad_gk(lambda x: 1.0 / (1e-4 + x * x), -1.0, 1.0)
    assert val == pytest.approx(2.0 / 1e-2 * math.atan(1.0 / 1e-2), rel=1e-12)
    assert err < 1e-9


def test_quad_gk_budget():
    with pytest.raises(QuadratureError):
        quad_gk(lambda x: np.sin(1.0 / np.maximum(x, 1e-300)), 0.0, 1.0, limit=20)


def test_quad_algebraic():
    val, _ = quad_algebraic(lambda t: np.exp(-t), -0.5, 60.0)
    assert val == pytest.approx(math.sqrt(math.pi), rel=1e-12)
