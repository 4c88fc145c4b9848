"""Acceptance suite: one PASS/FAIL line per criterion, printed to the terminal."""
import math

import numpy as np
import pytest
from scipy import integrate

from artifact.branch import bifurcation_point, continue_branch, solve_at_amplitude
from artifact.contour import FourierShape, eval_F, gateaux, linearized_diag, sine_coefficients
from artifact.dispersion import (
    alpha_mb_asymptotic, euler_limit, monotonicity_scan, mstar_bound, omega, omega_sneddon,
    omega_zero_sum, plane_limit, sqg_limit,
)
from artifact.errors import DomainError
from artifact.greenkernel import SpectralParams
from artifact.specfun import bessel_i, bessel_j, bessel_k, gamma, hyp2f1, wallis


@pytest.fixture
def report(capsys):
    def emit(number, title, ok, detail):
        with capsys.disabled():
            print(f"\nCRITERION {number:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}")
        assert ok, f"criterion {number}: {detail}"
    return emit


def test_criterion_01_two_route_dispersion(report):
    worst = 0.0
    for a in (0.1, 0.5, 0.9):
        for b in (0.25, 0.5):
            p = SpectralParams(a, b, n_zeros=4000)
            for m in range(1, 7):
                worst = max(worst, abs(omega_zero_sum(p, m).omega - omega_sneddon(p, m).omega))
    report(1, "two-route dispersion", worst < 1e-6, f"max |diff| = {worst:.2e} (< 1e-6)")


def test_criterion_02_euler_limit(report):
    worst = 0.0
    for b in (0.25, 0.5):
        for m in range(1, 7):
            worst = max(worst, abs(omega(1e-4, b, m) - euler_limit(b, m)))
    report(2, "Euler limit", worst < 1e-3, f"max |diff| = {worst:.2e} (< 1e-3)")


def test_criterion_03_sqg_limit(report):
    d = abs(omega(0.999, 0.25, 2) - sqg_limit(0.25, 2))
    report(3, "SQG limit", d < 1e-2, f"|diff| = {d:.2e} (< 1e-2)")


def test_criterion_04_plane_limit(report):
    R = 50.0
    d = max(abs(R ** -0.5 * omega(0.5, 1.0 / R, m) - plane_limit(0.5, m)) for m in (2, 3))
    report(4, "plane limit", d < 1e-2, f"max |diff| = {d:.2e} (< 1e-2)")


def test_criterion_05_large_m_asymptotics(report):
    p = SpectralParams(0.5, 0.5)
    r64, r128 = (omega_sneddon(p, m).alpha_mb / alpha_mb_asymptotic(p, m) for m in (64, 128))
    ok = 0.995 <= r64 <= 1.005 and abs(r128 - 1.0) < abs(r64 - 1.0)
    report(5, "large-m asymptotics", ok, f"ratio m=64 {r64:.7f}, m=128 {r128:.7f}")


def test_criterion_06_monotonicity(report):
    alphas = (0.1, 0.3, 0.5, 0.7, 0.9)
    bs = (0.1, 0.25, 0.4, 0.5)
    rows = [r for r in monotonicity_scan(alphas, bs, 33) if r.case13]
    bad13 = sum(len(r.violations) for r in rows)
    (row,) = monotonicity_scan([0.1], [0.9], 33)
    try:
        ceil_bound = math.ceil(mstar_bound(0.1, 0.9))
    except DomainError:
        ceil_bound = None
    empirical = max(row.violations) + 1 if row.violations else 1
    late = [m for m in row.violations if ceil_bound is not None and m >= ceil_bound]
    ok = bad13 == 0 and not late and len(rows) > 0
    report(6, "monotonicity in m", ok,
           f"{len(rows)} case-(1.3) pairs, {bad13} violations; (0.1, 0.9): violations "
           f"{row.violations}, empirical m* {empirical}, ceil(bound) {ceil_bound}")


def test_criterion_07_equilibrium(report, cgrid, kgrid):
    zero = FourierShape.zero(2, 0.25, cgrid.N)
    v = max(float(np.max(np.abs(eval_F(om, zero, cgrid, kgrid).F))) for om in (0.0, 0.3))
    report(7, "equilibrium residual", v < 1e-9, f"max |F(Omega, 0)| = {v:.2e} (< 1e-9)")


def test_criterion_08_linearized_diagonal(report, params, cgrid, kgrid):
    m = 2
    zero = FourierShape.zero(m, params.b, cgrid.N)
    th = cgrid.nodes(m)
    err = leak = 0.0
    for n in (1, 2, 3):
        g = gateaux(0.0, zero, np.eye(cgrid.N)[n - 1], 1e-6, cgrid, kgrid)
        c = linearized_diag(params, m, n, 0.0)
        err = max(err, float(np.max(np.abs(g - c * np.sin(n * m * th)))) / abs(c))
        sc = sine_coefficients(g, m, cgrid.N)
        leak = max(leak, float(np.max(np.abs(np.delete(sc, n - 1)))) / abs(c))
    report(8, "linearized diagonal", err < 1e-4 and leak < 1e-6,
           f"relative error {err:.2e} (< 1e-4), leakage {leak:.2e} (< 1e-6)")


def test_criterion_09_branch_onset(report, params, cgrid, kgrid):
    m = 2
    pts = continue_branch(params, m, 0.01, 0.002, cgrid, kgrid, tol=1e-9)
    om = bifurcation_point(params, m)
    res = max(pt.residual_inf for pt in pts)
    half = solve_at_amplitude(params, m, 0.001, (om, np.zeros(cgrid.N)), cgrid, kgrid)
    shrink = abs(pts[0].omega - om) / abs(half.omega - om)
    decay = float(np.max(np.abs(pts[0].shape.coeffs[1:]))) / pts[0].s
    ok = len(pts) == 5 and res < 1e-9 and half.residual_inf < 1e-9 and shrink >= 1.8 and decay < 0.1
    report(9, "branch onset", ok,
           f"{len(pts)} points, max residual {res:.2e}, drift ratio {shrink:.3f}, "
           f"max|a_n|/s {decay:.3f}")


def test_criterion_10_special_function_identities(report):
    errs = {}
    xs = np.linspace(0.05, 30.0, 200)
    errs["gamma recurrence"] = max(abs(gamma(x + 1) / (x * gamma(x)) - 1.0) for x in xs)
    errs["Wallis difference"] = max(
        abs(wallis(a, m + 1) - wallis(a, m) + (1 - a) / (1 + m - a / 2) * wallis(a, m))
        for a in (0.1, 0.5, 0.9) for m in range(0, 60))
    errs["Wronskian"] = max(
        abs(x * (bessel_i(n, x) * bessel_k(n + 1, x) + bessel_i(n + 1, x) * bessel_k(n, x)) - 1.0)
        for n in (0, 1, 4, 10) for x in (0.1, 1.0, 5.0, 20.0))
    errs["int t J0"] = max(
        abs(integrate.quad(lambda t: t * bessel_j(0, t), 0, a, epsabs=1e-13, epsrel=1e-13,
                           limit=200)[0] - a * bessel_j(1, a))
        for a in (0.5, 2.0, 7.5))
    errs["2F1(1,1;2;z)"] = max(
        abs(hyp2f1(1, 1, 2, z) * z / -math.log1p(-z) - 1.0) for z in (0.01, 0.3, 0.7, 0.95))
    limits = {"gamma recurrence": 1e-12, "Wallis difference": 1e-12, "Wronskian": 1e-10,
              "int t J0": 1e-10, "2F1(1,1;2;z)": 1e-12}
    ok = all(errs[k] < limits[k] for k in errs)
    report(10, "special-function identities", ok,
           ", ".join(f"{k} {errs[k]:.1e}/{limits[k]:.0e}" for k in errs))
