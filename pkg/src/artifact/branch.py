"""Amplitude-pinned Newton continuation of bifurcating V-states.

Near Omega_{m,b} the solutions form a curve s -> (Omega(s), r_s) with
r_s = s cos(m theta) + O(s^2). The branch is parameterised by the first
coefficient: a_1 = s is pinned, the unknowns are (Omega, a_2, ..., a_N),
and the equations are the sine coefficients 1..N of F(Omega, r). The
Jacobian is built by forward differences and refreshed every iteration.
"""
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .contour import CollocationGrid, FourierShape, eval_F
from .errors import (
    ConvergenceError, DomainError, InvalidShapeError, PartialBranchError, SingularJacobianError,
)
from .greenkernel import SpectralParams

__all__ = [
    "BranchPoint", "bifurcation_point", "solve_at_amplitude", "continue_branch",
    "residual_inf",
]


@dataclass(frozen=True)
class BranchPoint:
    """One converged point of a branch.

    Attributes
    ----------
    s : float
        Amplitude, equal to the pinned coefficient a_1.
    omega : float
        Angular velocity Omega(s).
    shape : FourierShape
        Boundary perturbation with ``shape.coeffs[0] == s``.
    residual_inf : float
        max |F| over the collocation nodes.
    newton_iters : int
        Newton steps taken.
    jacobian_cond : float
        2-norm condition number of the last Jacobian (nan if none was built).
    """

    s: float
    omega: float
    shape: FourierShape
    residual_inf: float
    newton_iters: int
    jacobian_cond: float = float("nan")

    def to_json(self):
        """One JSON-lines record with 17-significant-digit numbers."""
        def num(v):
            return float(f"{v:.17g}")
        return json.dumps({
            "s": num(self.s), "omega": num(self.omega), "m": self.shape.m,
            "b": num(self.shape.b), "residual_inf": num(self.residual_inf),
            "newton_iters": int(self.newton_iters),
            "jacobian_cond": None if math.isnan(self.jacobian_cond) else num(self.jacobian_cond),
            "coeffs": [num(c) for c in self.shape.coeffs],
        })

    @classmethod
    def from_json(cls, text):
        obj = json.loads(text)
        shape = FourierShape(obj["m"], np.array(obj["coeffs"], dtype=np.float64), obj["b"])
        cond = obj.get("jacobian_cond")
        return cls(obj["s"], obj["omega"], shape, obj["residual_inf"], obj["newton_iters"],
                   float("nan") if cond is None else cond)


def bifurcation_point(p, m, ell=1):
    """Omega_{ell m, b}: the value of Omega at which cos(ell m theta) spans the kernel."""
    from .dispersion import omega

    if not isinstance(p, SpectralParams):
        raise DomainError("p must be SpectralParams")
    if m < 1 or ell < 1:
        raise DomainError("need m, ell >= 1")
    return omega(p.alpha, p.b, ell * m)


def residual_inf(Omega, shape, grid, kgrid, alpha=None):
    """max |F(Omega, r)| over the collocation nodes."""
    return float(np.max(np.abs(eval_F(Omega, shape, grid, kgrid, alpha).F)))


def _pack(omega, coeffs):
    return np.concatenate([[omega], coeffs[1:]])


def _shape(template, s, x):
    return template.with_coeffs(np.concatenate([[s], x[1:]]))


def _map(fn, items, workers):
    if workers is None or workers <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def solve_at_amplitude(p, m, s, init, grid=None, kgrid=None, tol=1e-9, max_iter=20,
                       step=1e-7, workers=None):
    """Newton solve for (Omega, a_2..a_N) with a_1 = s.

    Parameters
    ----------
    p : SpectralParams
    m : int
        Fold number.
    s : float
        Amplitude.
    init : (float, array)
        Initial Omega and coefficients (a_1 is overwritten by s; shorter
        arrays are zero-padded to ``grid.N``).
    grid : CollocationGrid
        Defaults to N = 12 harmonics on M = 64 nodes.
    kgrid : SmoothKernelGrid
        Smooth-kernel table covering the patch.
    tol : float
        Target for max |F| at the nodes.
    step : float
        Forward-difference step for the Jacobian.
    workers : int, optional
        Threads evaluating Jacobian columns.

    Raises
    ------
    ConvergenceError
        If ``max_iter`` steps do not reach ``tol``.
    SingularJacobianError
        If the finite-difference Jacobian is numerically singular.
    """
    grid = grid or CollocationGrid()
    if kgrid is None:
        raise DomainError("solve_at_amplitude needs a kernel grid")
    alpha = p.alpha
    N = grid.N
    omega0, c0 = init
    c0 = np.asarray(c0, dtype=np.float64).ravel()[:N]
    coeffs = np.zeros(N)
    coeffs[:c0.size] = c0
    coeffs[0] = s
    template = FourierShape(m, coeffs, p.b)
    x = _pack(float(omega0), coeffs)

    def system(xv):
        shp = _shape(template, s, xv)
        res = eval_F(xv[0], shp, grid, kgrid, alpha)
        return res.sine, float(np.max(np.abs(res.F)))

    f, r_inf = system(x)
    cond = float("nan")
    for it in range(max_iter + 1):
        if r_inf < tol:
            return BranchPoint(float(s), float(x[0]), _shape(template, s, x), r_inf, it, cond)
        if it == max_iter:
            break
        cols = []
        for j in range(N):
            xp = x.copy()
            h = step * max(1.0, abs(x[j])) if j == 0 else step
            xp[j] += h
            cols.append((xp, h))
        fs = _map(lambda c: system(c[0])[0], cols, workers)
        jac = np.column_stack([(fj - f) / h for fj, (_, h) in zip(fs, cols)])
        cond = float(np.linalg.cond(jac))
        if not np.isfinite(cond) or cond > 1e14:
            raise SingularJacobianError(f"Jacobian condition number {cond:.3e} at s={s:g}")
        dx = np.linalg.solve(jac, -f)
        lam = 1.0
        while True:
            try:
                xn = x + lam * dx
                fn, rn = system(xn)
            except InvalidShapeError:
                fn, rn = None, math.inf
            if rn < r_inf or lam < 1.0 / 64.0:
                break
            lam *= 0.5
        if fn is None:
            raise ConvergenceError(f"Newton step leaves the admissible shapes at s={s:g}")
        x, f, r_inf = xn, fn, rn
    raise ConvergenceError(
        f"Newton did not reach {tol:g} in {max_iter} steps at s={s:g} (residual {r_inf:.3e})")


def continue_branch(p, m, s_max, ds, grid=None, kgrid=None, tol=1e-9, max_iter=20,
                    workers=None, callback=None):
    """Branch points at s = ds, 2 ds, ... up to s_max.

    The first point starts from (Omega_{m,b}, 0); the second from the first;
    later points from the secant extrapolation of the previous two.

    Raises
    ------
    PartialBranchError
        On the first failure, carrying the points computed so far and the
        last amplitude that converged.
    """
    if ds == 0.0 or s_max * ds <= 0.0:
        raise DomainError("ds must be nonzero with the sign of s_max")
    grid = grid or CollocationGrid()
    count = int(math.floor(abs(s_max / ds) + 1e-9))
    omega_m = bifurcation_point(p, m)
    points = []
    for k in range(1, count + 1):
        s = k * ds
        if len(points) >= 2:
            x1 = _pack(points[-1].omega, points[-1].shape.coeffs)
            x0 = _pack(points[-2].omega, points[-2].shape.coeffs)
            xg = 2.0 * x1 - x0
            init = (xg[0], np.concatenate([[s], xg[1:]]))
        elif points:
            init = (points[-1].omega, points[-1].shape.coeffs)
        else:
            init = (omega_m, np.zeros(grid.N))
        try:
            pt = solve_at_amplitude(p, m, s, init, grid, kgrid, tol, max_iter, workers=workers)
        except (ConvergenceError, SingularJacobianError, InvalidShapeError) as exc:
            last = points[-1].s if points else None
            raise PartialBranchError(f"branch stopped at s={s:g}: {exc}", points, last) from exc
        points.append(pt)
        if callback is not None:
            callback(pt)
    return points
