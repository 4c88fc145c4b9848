import math

import numpy as np
import pytest
from scipy import integrate, special

from artifact.errors import DomainError, OutOfGridError, ToleranceNotMetError
from artifact.greenkernel import (
    H_MIN, ModalKernel, SmoothKernelGrid, SpectralParams, build_smooth_grid, c_alpha,
    kernel_series, kernel_singular, mode_bound, smooth_kernel_eval, sneddon_j,
)

REFERENCE_VALUE = 0.08988340305340381   # alpha=0.5, rho=(0.25, 0.6), dtheta=pi/2


def _pairs(rng, count, r_max, min_dist=0.0, max_dist=2.0):
    out = []
    while len(out) < count:
        x = r_max * np.sqrt(rng.uniform()) * np.exp(2j * np.pi * rng.uniform())
        y = r_max * np.sqrt(rng.uniform()) * np.exp(2j * np.pi * rng.uniform())
        if min_dist <= abs(x - y) <= max_dist:
            out.append((complex(x), complex(y)))
    return out


def _series_at(p, x, y):
    return kernel_series(p, abs(x), abs(y), math.atan2(x.imag, x.real) - math.atan2(y.imag, y.real))


# ------------------------------------------------------- planar part ---

def test_c_alpha_examples():
    assert c_alpha(1.0) == pytest.approx(1.0 / (2.0 * math.pi), rel=1e-15)
    assert c_alpha(0.5) == pytest.approx(0.33296793550170, rel=1e-13)
    ref = 4.0 ** (-0.75) * special.gamma(0.25) / (math.pi * special.gamma(0.75))
    assert c_alpha(0.5) == pytest.approx(ref, rel=1e-14)
    assert c_alpha(1e-3) * 2.0 * math.pi * 1e-3 == pytest.approx(1.0, rel=2e-3)
    with pytest.raises(DomainError):
        c_alpha(1e-4)
    with pytest.raises(DomainError):
        c_alpha(2.0)


def test_kernel_singular_examples():
    assert kernel_singular(0.5, 0j, 1 + 0j) == pytest.approx(c_alpha(0.5), rel=1e-15)
    assert kernel_singular(1.0, (0.0, 0.0), (0.3, 0.4)) == pytest.approx(1.0 / math.pi, rel=1e-15)
    d1 = kernel_singular(0.7, 0.1 + 0.1j, 0.1 + 0.3j)
    d2 = kernel_singular(0.7, 0.1 + 0.1j, 0.1 + 0.5j)
    assert d2 == pytest.approx(2.0 ** -0.7 * d1, rel=1e-14)
    with pytest.raises(DomainError):
        kernel_singular(0.5, 0.2j, 0.2j)


@pytest.mark.parametrize("n,a,b", [(0, 0.25, 0.6), (3, 0.5, 0.55), (7, 0.1, 0.9)])
def test_sneddon_term_against_quadrature(n, a, b):
    alpha = 0.5
    q = 2.0 - alpha

    def f(t):
        return t ** (1.0 - q) * special.ive(n, a * t) * special.kve(n, b * t) * math.exp((a - b) * t)

    val = sum(integrate.quad(f, lo, hi, epsabs=0.0, epsrel=1e-12, limit=400)[0]
              for lo, hi in ((0.0, 40.0), (40.0, np.inf)))
    ref = math.sin(0.5 * math.pi * q) / math.pi * val
    assert sneddon_j(n, n, q, a, b) == pytest.approx(ref, rel=1e-9)


# -------------------------------------------------------------- series ---

def test_series_regression(params):
    out = kernel_series(SpectralParams(0.5, 0.25), 0.25, 0.6, 0.5 * math.pi)
    assert abs(out.value - REFERENCE_VALUE) < 1e-8
    assert out.est_error < 1e-6


def test_series_matches_modal_route():
    modal = ModalKernel(0.5, 0.75)
    r1, r2, dt = 0.25, 0.6, 0.5 * math.pi
    smooth = modal.value(r1, r2, dt)
    singular = kernel_singular(0.5, complex(r1), r2 * complex(math.cos(dt), math.sin(dt)))
    assert abs(smooth + singular - REFERENCE_VALUE) < 1e-8


def test_series_symmetry_reflection_rotation_positivity(params, rng):
    for x, y in _pairs(rng, 100, 0.7):
        r1, r2 = abs(x), abs(y)
        dt = math.atan2(x.imag, x.real) - math.atan2(y.imag, y.real)
        v = kernel_series(params, r1, r2, dt).value
        assert v > 0.0
        assert abs(kernel_series(params, r2, r1, dt).value - v) < 1e-8
        assert abs(kernel_series(params, r1, r2, -dt).value - v) < 1e-8
        phi = rng.uniform(0.0, 2.0 * math.pi)
        rot = complex(math.cos(phi), math.sin(phi))
        assert abs(_series_at(params, rot * x, rot * y).value - v) < 1e-8


def test_series_domain(params):
    with pytest.raises(DomainError):
        kernel_series(params, 0.0, 0.5, 1.0)
    with pytest.raises(DomainError):
        kernel_series(params, 0.3, 0.3, 0.0)


def test_tolerance_not_met():
    p = SpectralParams(0.5, 0.25, n_zeros=8, tol=1e-13)
    with pytest.raises(ToleranceNotMetError) as info:
        kernel_series(p, 0.3, 0.8, 1.0)
    assert info.value.est_error > 1e-13
    assert math.isfinite(info.value.value)


def test_no_tolerance_signal_inside_diagonal_band():
    p = SpectralParams(0.5, 0.25, n_zeros=8, tol=1e-13)
    out = kernel_series(p, 0.5, 0.5, 0.5 * H_MIN)
    assert out.est_error > 1e-13


def test_mode_bound_decreasing():
    vals = [mode_bound(0.5, n, 0.6, 0.6) for n in range(40)]
    assert all(b1 < b0 for b0, b1 in zip(vals, vals[1:]))


# ---------------------------------------------------------- smooth grid ---

def test_split_consistency(params, kgrid, rng):
    for x, y in _pairs(rng, 40, kgrid.r_max, 0.05, 0.3):
        full = _series_at(params, x, y).value
        val, _ = smooth_kernel_eval(kgrid, x, y)
        assert abs(full - kernel_singular(params.alpha, x, y) - val) < 1e-5


def test_grid_swap_symmetry(params, kgrid):
    v = kgrid.values
    assert np.max(np.abs(v - v.transpose(1, 0, 2))) < 10.0 * params.tol


def test_grid_metadata(kgrid):
    assert kgrid.resolution == (64, 64, 128)
    assert kgrid.rho1_nodes[0] == 0.0 and kgrid.rho1_nodes[-1] == pytest.approx(0.625)
    assert kgrid.dtheta_nodes[-1] == pytest.approx(math.pi)
    assert kgrid.grad_values.shape == (64, 64, 128, 2)
    assert np.all(np.isfinite(kgrid.values))


def test_grid_reproduces_nodes(kgrid, rng):
    for _ in range(50):
        i, j, k = rng.integers(0, 64), rng.integers(0, 64), rng.integers(0, 128)
        r1, r2, t = kgrid.rho_nodes[i], kgrid.rho_nodes[j], kgrid.dtheta_nodes[k]
        assert kgrid.value(r1, r2, t) == pytest.approx(kgrid.values[i, j, k], rel=1e-13, abs=1e-15)


def test_grid_rotation_invariance(kgrid, rng):
    for x, y in _pairs(rng, 30, kgrid.r_max):
        rot = np.exp(1j * rng.uniform(0, 2 * np.pi))
        v0, g0 = smooth_kernel_eval(kgrid, x, y)
        v1, g1 = smooth_kernel_eval(kgrid, rot * x, rot * y)
        assert abs(v1 - v0) < 1e-10
        g0r = rot * complex(*g0)
        assert abs(complex(*g1) - g0r) < 1e-8


def test_grid_off_node_vs_series(params, kgrid, rng):
    for x, y in _pairs(rng, 20, kgrid.r_max, min_dist=0.05):
        direct = _series_at(params, x, y).value - kernel_singular(params.alpha, x, y)
        assert abs(smooth_kernel_eval(kgrid, x, y)[0] - direct) < 1e-5


def test_grid_gradient_vs_finite_difference(kgrid, rng):
    h = 1e-5
    for x, y in _pairs(rng, 40, 0.6):
        _, g = smooth_kernel_eval(kgrid, x, y)
        fx = (smooth_kernel_eval(kgrid, x + h, y)[0] - smooth_kernel_eval(kgrid, x - h, y)[0]) / (2 * h)
        fy = (smooth_kernel_eval(kgrid, x + 1j * h, y)[0]
              - smooth_kernel_eval(kgrid, x - 1j * h, y)[0]) / (2 * h)
        assert abs(g[0] - fx) < 1e-4 and abs(g[1] - fy) < 1e-4


def test_grid_smooth_across_zero_angle(kgrid):
    v = kgrid.values
    across = np.abs(2.0 * v[:, :, 1] - 2.0 * v[:, :, 0])
    interior = np.abs(v[:, :, 2:] - 2.0 * v[:, :, 1:-1] + v[:, :, :-2])
    assert across.max() <= 100.0 * max(np.median(interior), 1e-300) or across.max() < 1e-12


def test_grid_precondition_and_bounds(params, kgrid):
    with pytest.raises(DomainError):
        build_smooth_grid(params, 0.7)
    with pytest.raises(DomainError):
        build_smooth_grid(params, 0.5, resolution=(8, 9, 8))
    with pytest.raises(OutOfGridError):
        kgrid.value(0.7, 0.2, 0.0)
    with pytest.raises(OutOfGridError):
        smooth_kernel_eval(kgrid, 0.1 + 0.0j, 0.64 + 0.0j)


def test_grid_save_load_and_checksum(params, tmp_path):
    grid = build_smooth_grid(params, 0.5, resolution=(8, 8, 8))
    path = grid.save(tmp_path / "g.bin")
    back = SmoothKernelGrid.load(path)
    assert np.array_equal(back.data, grid.data)
    assert back.alpha == grid.alpha and back.r_max == grid.r_max
    raw = bytearray(path.read_bytes())
    raw[-3] ^= 0xFF
    path.write_bytes(bytes(raw))
    with pytest.raises(ValueError):
        SmoothKernelGrid.load(path)


def test_grid_cache_reuse(params, tmp_path):
    g1 = build_smooth_grid(params, 0.5, resolution=(8, 8, 8), cache=True, path=tmp_path)
    assert list(tmp_path.glob("kgrid_*.bin"))
    g2 = build_smooth_grid(params, 0.5, resolution=(8, 8, 8), cache=True, path=tmp_path)
    assert np.array_equal(g1.data, g2.data)
