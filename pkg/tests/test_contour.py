import math

import numpy as np
import pytest

from artifact.contour import (
    CollocationGrid, FourierShape, cosine_coefficients, d_omega, eval_F, eval_F1, eval_F2,
    gateaux, linearized_diag, radius, sine_coefficients,
)
from artifact.dispersion import omega
from artifact.errors import DomainError, InvalidShapeError, OutOfGridError, StepTooLargeError

M_FOLD = 2
B = 0.25


@pytest.fixture(scope="module")
def shape():
    return FourierShape(M_FOLD, [0.01, 0.002, -0.0005], B)


def test_radius_examples():
    t = np.linspace(0.0, 2.0 * math.pi, 37)
    assert np.all(radius(FourierShape.zero(3, 0.4, 5), t) == 0.4)
    s = 0.02
    one = FourierShape.mode(3, 0.4, 1, s)
    assert radius(one, 0.0) == pytest.approx(math.sqrt(0.16 + 2 * s), rel=1e-15)
    sh = FourierShape(3, [0.01, -0.004, 0.002], 0.4)
    assert np.allclose(radius(sh, t + 2.0 * math.pi / 3), radius(sh, t), rtol=0, atol=1e-15)
    assert np.all(radius(sh, t) > 0.0)


def test_shape_validation():
    with pytest.raises(InvalidShapeError):
        FourierShape(2, [-0.04], 0.25)          # R^2 becomes negative
    with pytest.raises(InvalidShapeError):
        FourierShape(2, [0.5], 0.9)             # leaves the disc
    with pytest.raises(InvalidShapeError):
        FourierShape(2, [np.nan], 0.5)
    with pytest.raises(DomainError):
        FourierShape(0, [], 0.5)


def test_shape_derivatives(shape):
    t = np.linspace(0.0, math.pi, 11)
    h = 1e-6
    assert np.allclose(shape.dr(t), (shape.r(t + h) - shape.r(t - h)) / (2 * h), atol=1e-9)
    dz = (shape.z(t + h) - shape.z(t - h)) / (2 * h)
    assert np.allclose(shape.dz(t), dz, atol=1e-8)


def test_shape_json_roundtrip(shape):
    text = shape.to_json(alpha=0.5)
    back = FourierShape.from_json(text)
    assert back.m == shape.m and back.b == shape.b
    assert np.array_equal(back.coeffs, shape.coeffs)


def test_collocation_grid():
    with pytest.raises(DomainError):
        CollocationGrid(M=40, N=12)
    g = CollocationGrid()
    th = g.nodes(3)
    assert th.size == 64 and th[0] == 0.0 and th[-1] < 2 * math.pi / 3
    u, w = g.singular_rule(0.5)
    # int_{-pi}^{pi} |u|^-alpha du = 2 pi^(1-alpha) / (1-alpha)
    assert 2.0 * w.sum() == pytest.approx(2.0 * math.pi ** 0.5 / 0.5, rel=1e-13)


@pytest.mark.parametrize("Omega", [0.0, 0.3])
def test_equilibrium_residual(Omega, cgrid, kgrid):
    zero = FourierShape.zero(M_FOLD, B, 12)
    res = eval_F(Omega, zero, cgrid, kgrid)
    assert np.max(np.abs(res.F1)) < 1e-9
    assert np.max(np.abs(res.F2)) < 1e-9
    assert np.max(np.abs(res.F)) < 1e-9


def test_F_odd_and_m_fold(shape, cgrid, kgrid):
    th = np.linspace(0.1, 1.3, 7)
    f1 = eval_F1(0.2, shape, cgrid, th, alpha=0.5)
    assert np.allclose(eval_F1(0.2, shape, cgrid, -th, alpha=0.5), -f1, atol=1e-12)
    assert np.allclose(eval_F1(0.2, shape, cgrid, th + math.pi, alpha=0.5), f1, atol=1e-12)
    f2 = eval_F2(shape, cgrid, kgrid, th)
    assert np.allclose(eval_F2(shape, cgrid, kgrid, -th), -f2, atol=1e-10)
    assert np.allclose(eval_F2(shape, cgrid, kgrid, th + math.pi), f2, atol=1e-10)
    res = eval_F(0.2, shape, cgrid, kgrid)
    assert np.max(np.abs(res.cosine)) < 1e-9 * max(1.0, np.max(np.abs(res.sine)))


def test_F2_magnitude(shape, cgrid, kgrid):
    f2 = eval_F2(shape, cgrid, kgrid)
    ratio = np.max(np.abs(f2)) / np.sum(np.abs(shape.coeffs))
    assert 0.0 < ratio < 1.0


def test_out_of_grid(cgrid, kgrid):
    big = FourierShape(M_FOLD, [0.1], 0.6)
    with pytest.raises(OutOfGridError):
        eval_F2(big, cgrid, kgrid)


def test_omega_derivative(shape, cgrid, kgrid):
    f0 = eval_F(0.1, shape, cgrid, kgrid).F
    f1 = eval_F(0.6, shape, cgrid, kgrid).F
    assert np.allclose((f1 - f0) / 0.5, d_omega(shape, cgrid), atol=1e-12)


def test_refined_quadrature_consistency(shape, cgrid, kgrid):
    f = eval_F(0.15, shape, cgrid, kgrid).F
    g = eval_F(0.15, shape, cgrid.refined(), kgrid).F
    assert np.max(np.abs(f - g)) < 10 * 1e-9


def test_sine_cosine_transforms():
    m, N = 3, 8
    th = CollocationGrid().nodes(m)
    vals = 0.7 * np.sin(2 * m * th) - 0.2 * np.sin(5 * m * th) + 0.4 + 0.1 * np.cos(m * th)
    s = sine_coefficients(vals, m, N)
    c = cosine_coefficients(vals, m, N)
    assert np.allclose(s, [0, 0.7, 0, 0, -0.2, 0, 0, 0], atol=1e-14)
    assert np.allclose(c, [0.4, 0.1, 0, 0, 0, 0, 0, 0, 0], atol=1e-14)


def test_linearized_diag_examples(params):
    om2 = omega(0.5, 0.25, 2)
    assert linearized_diag(params, 2, 1, om2) == 0.0
    assert linearized_diag(params, 2, 1, om2 + 0.1) < 0.0
    assert linearized_diag(params, 2, 1, 0.0) == pytest.approx(2.0 * om2, rel=1e-14)
    # transversality: d/dOmega of the coefficient is -n m
    for n in (1, 2, 3):
        d = linearized_diag(params, 2, n, 1.0) - linearized_diag(params, 2, n, 0.0)
        assert d == pytest.approx(-2.0 * n, rel=1e-12)


def test_gateaux_diagonal(params, cgrid, kgrid):
    zero = FourierShape.zero(M_FOLD, B, 12)
    G = gateaux(0.0, zero, np.eye(12)[0], 1e-6, cgrid, kgrid)
    c = linearized_diag(params, M_FOLD, 1, 0.0)
    th = cgrid.nodes(M_FOLD)
    assert np.max(np.abs(G - c * np.sin(M_FOLD * th))) < 1e-4 * abs(c)
    s = sine_coefficients(G, M_FOLD, 12)
    assert np.max(np.abs(s[1:])) < 1e-6 * abs(c)


def test_gateaux_linear_in_direction(shape, cgrid, kgrid):
    h = np.array([0.0, 1.0, 0.5])
    g1 = gateaux(0.2, shape, h, 1e-5, cgrid, kgrid)
    g2 = gateaux(0.2, shape, 2.0 * h, 1e-5, cgrid, kgrid)
    assert np.max(np.abs(g2 - 2.0 * g1)) < 1e-6 * max(1.0, np.max(np.abs(g1)))


def test_gateaux_step_checks(cgrid, kgrid):
    zero = FourierShape.zero(M_FOLD, B, 4)
    om = omega(0.5, B, M_FOLD)
    # along the kernel direction the linear part vanishes and the quadratic part dominates
    with pytest.raises(StepTooLargeError):
        gateaux(om, zero, [1.0], 0.02, cgrid, kgrid)
    with pytest.raises(DomainError):
        gateaux(0.0, zero, [1.0], 0.0, cgrid, kgrid)


def test_residual_csv(shape, cgrid, kgrid):
    res = eval_F(0.2, shape, cgrid, kgrid)
    lines = res.to_csv().splitlines()
    assert lines[0] == "theta,F,F1,F2" and len(lines) == cgrid.M + 1
    assert float(lines[3].split(",")[1]) == res.F[2]
