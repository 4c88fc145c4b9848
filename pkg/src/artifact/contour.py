"""m-fold patch boundaries and the V-state functional F = F1 + F2.

A patch boundary is z(theta) = R(theta) e^(i theta) with
R = sqrt(b^2 + 2 r) and r(theta) = sum_n a_n cos(n m theta). The rotating
patch equation reads F(Omega, r) = 0 with

    F1 = Omega r'(theta) - int K0(z(theta) - z(eta)) Im(z'(eta) conj z'(theta)) d eta,
    F2 = int int grad_x K1(z(theta), rho e^(i eta)) . z'(theta) rho d rho d eta,

where K0 = c_alpha |.|^(-alpha) is the planar part of the Green function
and K1 its smooth remainder. In polar form the F2 integrand is
(R'(theta) d K1/d rho1 + d K1/d dtheta) rho with dtheta = theta - eta.

F1 uses the substitution eta = theta + u: on |u| <= delta the integrand
is h(u) |u|^(-alpha) with h smooth and a Gauss-Jacobi rule absorbs the
weight (nodes mirrored on both sides); the rest of the period uses
composite Gauss-Legendre panels. F2 uses the periodic trapezoid rule in
eta and Gauss-Legendre in rho mapped to [0, R(eta)].
"""
import json
import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .errors import DomainError, InvalidShapeError, OutOfGridError, StepTooLargeError
from .greenkernel import SpectralParams, c_alpha
from .quadrature import composite_legendre, gauss_jacobi_01, gauss_legendre

__all__ = [
    "FourierShape", "CollocationGrid", "FResult", "radius", "eval_F1", "eval_F2",
    "eval_F", "linearized_diag", "gateaux", "d_omega", "sine_coefficients",
    "cosine_coefficients",
]


@dataclass(frozen=True)
class FourierShape:
    """Perturbation r(theta) = sum_{n=1}^N a_n cos(n m theta) of the disc of radius b.

    Parameters
    ----------
    m : int
        Fold number.
    coeffs : sequence of float
        a_1 .. a_N.
    b : float
        Base radius in (0, 1).
    margin : float
        Lower bound required for min R.
    r_max : float
        Upper bound required for max R (below 1).

    Raises
    ------
    InvalidShapeError
        If R is not real and above ``margin`` or exceeds ``r_max``.
    """

    m: int
    coeffs: np.ndarray = field(default_factory=lambda: np.zeros(0))
    b: float = 0.5
    margin: float = 1e-3
    r_max: float = 0.999

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise DomainError("m must be a positive integer")
        if not 0.0 < self.b < 1.0:
            raise DomainError("b must lie in (0, 1)")
        a = np.array(self.coeffs, dtype=np.float64).ravel()
        if not np.all(np.isfinite(a)):
            raise InvalidShapeError("non-finite coefficient")
        a.setflags(write=False)
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "coeffs", a)
        if not 0.0 < self.r_max < 1.0:
            raise DomainError("r_max must lie in (0, 1)")
        bound = float(np.sum(np.abs(a)))
        if bound > 0.0:
            # sampled check, refined well beyond the highest harmonic
            t = np.linspace(0.0, 2.0 * math.pi / self.m, 64 * max(self.n, 1) + 1)
            sq = self.b ** 2 + 2.0 * self.r(t)
            lo, hi = float(sq.min()), float(sq.max())
        else:
            lo = hi = self.b ** 2
        if lo < self.margin ** 2:
            raise InvalidShapeError(
                f"min R^2 = {lo:.3e} below margin^2 = {self.margin ** 2:.3e}")
        if math.sqrt(hi) > self.r_max:
            raise InvalidShapeError(f"max R = {math.sqrt(hi):.6f} exceeds r_max = {self.r_max}")

    @property
    def n(self):
        """Number of retained harmonics."""
        return int(self.coeffs.shape[0])

    @classmethod
    def zero(cls, m, b, n=0, **kw):
        return cls(m, np.zeros(n), b, **kw)

    @classmethod
    def mode(cls, m, b, n, amplitude=1.0, size=None, **kw):
        """Single harmonic amplitude * cos(n m theta)."""
        a = np.zeros(max(n, size or 0))
        a[n - 1] = amplitude
        return cls(m, a, b, **kw)

    def with_coeffs(self, coeffs):
        return replace(self, coeffs=np.asarray(coeffs, dtype=np.float64))

    def padded(self, size):
        a = np.zeros(max(size, self.n))
        a[:self.n] = self.coeffs
        return self.with_coeffs(a)

    def _harmonics(self, theta):
        theta = np.asarray(theta, dtype=np.float64)
        k = self.m * np.arange(1, self.n + 1)
        return theta[..., None] * k, k

    def r(self, theta):
        """r(theta)."""
        if self.n == 0:
            return np.zeros_like(np.asarray(theta, dtype=np.float64))
        ph, _ = self._harmonics(theta)
        return np.cos(ph) @ self.coeffs

    def dr(self, theta):
        """r'(theta)."""
        if self.n == 0:
            return np.zeros_like(np.asarray(theta, dtype=np.float64))
        ph, k = self._harmonics(theta)
        return -np.sin(ph) @ (k * self.coeffs)

    def radius(self, theta):
        """R(theta) = sqrt(b^2 + 2 r(theta))."""
        return np.sqrt(self.b ** 2 + 2.0 * self.r(theta))

    def dradius(self, theta):
        """R'(theta) = r'(theta) / R(theta)."""
        return self.dr(theta) / self.radius(theta)

    def z(self, theta):
        theta = np.asarray(theta, dtype=np.float64)
        return self.radius(theta) * np.exp(1j * theta)

    def dz(self, theta):
        """z'(theta) = (R' + i R) e^(i theta)."""
        theta = np.asarray(theta, dtype=np.float64)
        rad = self.radius(theta)
        return (self.dr(theta) / rad + 1j * rad) * np.exp(1j * theta)

    def max_radius(self, samples=None):
        t = np.linspace(0.0, 2.0 * math.pi / self.m, samples or 64 * max(self.n, 1) + 1)
        return float(self.radius(t).max())

    def to_json(self, alpha=None):
        """JSON text {m, b, alpha, coeffs[]} with 17 significant digits."""
        obj = {"m": self.m, "b": float(f"{self.b:.17g}"),
               "alpha": None if alpha is None else float(f"{alpha:.17g}"),
               "coeffs": [float(f"{c:.17g}") for c in self.coeffs]}
        return json.dumps(obj)

    @classmethod
    def from_json(cls, text, **kw):
        obj = json.loads(text)
        return cls(int(obj["m"]), np.array(obj["coeffs"], dtype=np.float64), float(obj["b"]), **kw)


def radius(shape, theta):
    """R(theta) of ``shape``; positive by construction of :class:`FourierShape`."""
    return shape.radius(theta)


@dataclass(frozen=True)
class CollocationGrid:
    """Collocation nodes and quadrature controls.

    Attributes
    ----------
    M : int
        Equispaced nodes theta_i = 2 pi i / (m M) on one period.
    N : int
        Number of retained harmonics; M >= 4 N.
    jacobi_order : int
        Gauss-Jacobi nodes on each side of the singular window.
    n_panels, panel_order : int
        Gauss-Legendre panels covering delta <= |u| <= pi on each side.
    delta : float
        Half-width of the singular window.
    n_eta, n_rho : int
        Trapezoid nodes in eta and Gauss-Legendre nodes in rho for F2.
    """

    M: int = 64
    N: int = 12
    jacobi_order: int = 24
    n_panels: int = 8
    panel_order: int = 20
    delta: float = math.pi / 8.0
    n_eta: int = 128
    n_rho: int = 24

    def __post_init__(self):
        if self.N < 1 or self.M < 4 * self.N:
            raise DomainError(f"need M >= 4 N, got M={self.M}, N={self.N}")
        if min(self.jacobi_order, self.n_panels, self.panel_order, self.n_eta, self.n_rho) < 1:
            raise DomainError("quadrature orders must be positive")
        if not 0.0 < self.delta < math.pi:
            raise DomainError("delta must lie in (0, pi)")

    def nodes(self, m):
        return 2.0 * math.pi / m * np.arange(self.M) / self.M

    def refined(self):
        """All quadrature step sizes halved (node counts doubled); collocation unchanged."""
        return replace(self, jacobi_order=2 * self.jacobi_order, n_panels=2 * self.n_panels,
                       n_eta=2 * self.n_eta, n_rho=2 * self.n_rho)

    def singular_rule(self, alpha):
        """Nodes u in (0, pi] and weights for int_{-pi}^{pi} h(u) |u|^(-alpha) du.

        The same rule is used on both sides: the integral equals
        sum w (h(u) + h(-u)).
        """
        u0, w0 = gauss_jacobi_01(self.jacobi_order, -alpha, self.delta)
        edges = np.linspace(self.delta, math.pi, self.n_panels + 1)
        u1, w1 = composite_legendre(edges, self.panel_order)
        w1 = w1 * u1 ** (-alpha)
        return np.concatenate([u0, u1]), np.concatenate([w0, w1])


def _theta(shape, grid, theta):
    return grid.nodes(shape.m) if theta is None else np.asarray(theta, dtype=np.float64)


def eval_F1(Omega, shape, grid, theta=None, alpha=None):
    """F1(Omega, r)(theta) at the collocation nodes (or at ``theta``).

    ``alpha`` is the kernel order and is required.
    """
    if alpha is None:
        raise DomainError("eval_F1 needs alpha")
    th = _theta(shape, grid, theta)
    u, w = grid.singular_rule(alpha)
    dzt = shape.dz(th)
    zt = shape.z(th)
    total = np.zeros(th.shape)
    for sgn in (1.0, -1.0):
        eta = th[:, None] + sgn * u[None, :]
        ze = shape.z(eta)
        dze = shape.dz(eta)
        dist = np.abs(zt[:, None] - ze)
        # h(u) |u|^-alpha = K0 * Im(...), with |u|^-alpha carried by the weights
        h = (u[None, :] / dist) ** alpha * np.imag(dze * np.conj(dzt)[:, None])
        total += h @ w
    return Omega * shape.dr(th) - c_alpha(alpha) * total


def _kernel_eval(kgrid, rho1, rho2, dtheta):
    try:
        return kgrid.evaluate(rho1, rho2, dtheta)
    except OutOfGridError:
        raise
    except DomainError as exc:
        raise OutOfGridError(str(exc)) from exc


def eval_F2(shape, grid, kgrid, theta=None):
    """F2(r)(theta): area integral of grad_x K1 . z'(theta).

    ``kgrid`` is a :class:`~artifact.greenkernel.SmoothKernelGrid` or any
    object with ``r_max`` and ``evaluate(rho1, rho2, dtheta)`` returning
    (K1, d K1/d rho1, d K1/d dtheta).

    Raises
    ------
    OutOfGridError
        If the patch reaches beyond ``kgrid.r_max``.
    """
    th = _theta(shape, grid, theta)
    if shape.max_radius() > kgrid.r_max * (1.0 + 1e-12):
        raise OutOfGridError(f"patch radius {shape.max_radius():.6f} exceeds grid r_max {kgrid.r_max}")
    n_eta = grid.n_eta
    u = 2.0 * math.pi * np.arange(n_eta) / n_eta
    t, wt = gauss_legendre(grid.n_rho, 0.0, 1.0)
    r_th = shape.radius(th)
    dr_th = shape.dradius(th)
    eta = th[:, None] + u[None, :]
    r_eta = shape.radius(eta)
    rho = r_eta[..., None] * t
    shp = rho.shape
    r1 = np.broadcast_to(r_th[:, None, None], shp).ravel()
    dt = np.broadcast_to(-u[None, :, None], shp).ravel()
    _, g_r, g_t = _kernel_eval(kgrid, r1, rho.ravel(), dt)
    integrand = (np.broadcast_to(dr_th[:, None, None], shp).ravel() * g_r + g_t).reshape(shp) * rho
    radial = (integrand @ wt) * r_eta
    out = radial.sum(axis=1) * (2.0 * math.pi / n_eta)
    return out


def sine_coefficients(values, m, N):
    """Coefficients of sin(n m theta), n = 1..N, from samples on one period."""
    values = np.asarray(values, dtype=np.float64)
    M = values.shape[-1]
    th = 2.0 * math.pi / m * np.arange(M) / M
    basis = np.sin(np.outer(m * np.arange(1, N + 1), th))
    return 2.0 / M * values @ basis.T


def cosine_coefficients(values, m, N):
    """Coefficients of cos(n m theta), n = 0..N (n = 0 is the mean)."""
    values = np.asarray(values, dtype=np.float64)
    M = values.shape[-1]
    th = 2.0 * math.pi / m * np.arange(M) / M
    basis = np.cos(np.outer(m * np.arange(N + 1), th))
    scale = np.full(N + 1, 2.0 / M)
    scale[0] = 1.0 / M
    return (values @ basis.T) * scale


class FResult(NamedTuple):
    """Residual of the V-state equation at the collocation nodes."""

    theta: np.ndarray
    F: np.ndarray
    F1: np.ndarray
    F2: np.ndarray
    sine: np.ndarray
    cosine: np.ndarray

    def to_csv(self):
        rows = ["theta,F,F1,F2"]
        for row in zip(self.theta, self.F, self.F1, self.F2):
            rows.append(",".join(f"{v:.17g}" for v in row))
        return "\n".join(rows) + "\n"


def eval_F(Omega, shape, grid, kgrid, alpha=None):
    """F = F1 + F2 at the collocation nodes with its discrete sine/cosine coefficients.

    ``alpha`` defaults to ``kgrid.alpha``.
    """
    if alpha is None:
        alpha = kgrid.alpha
    th = grid.nodes(shape.m)
    f1 = eval_F1(Omega, shape, grid, th, alpha=alpha)
    f2 = eval_F2(shape, grid, kgrid, th)
    f = f1 + f2
    return FResult(th, f, f1, f2, sine_coefficients(f, shape.m, grid.N),
                   cosine_coefficients(f, shape.m, grid.N))


def linearized_diag(p, m, n, Omega):
    """Coefficient -(Omega - Omega_{nm,b}) n m of d_r F(Omega, 0)[cos(n m theta)] on sin(n m theta)."""
    from .dispersion import omega

    if not isinstance(p, SpectralParams):
        raise DomainError("p must be SpectralParams")
    if n < 1 or m < 1:
        raise DomainError("need n, m >= 1")
    nm = n * m
    return -(Omega - omega(p.alpha, p.b, nm)) * nm


def d_omega(shape, grid):
    """Derivative of F in Omega: r'(theta) at the collocation nodes."""
    return shape.dr(grid.nodes(shape.m))


def gateaux(Omega, shape, direction, eps, grid, kgrid, alpha=None, check=True):
    """Central difference (F(Omega, r + eps h) - F(Omega, r - eps h)) / (2 eps).

    ``direction`` is a :class:`FourierShape` or a coefficient array (a
    direction need not be an admissible shape itself). Returns the
    derivative sampled at the collocation nodes.

    Raises
    ------
    StepTooLargeError
        If ``check`` and the second difference F(r+eps h) - 2 F(r) + F(r-eps h)
        is as large as the first, so that the quadratic term dominates.
    InvalidShapeError
        If r +- eps h leaves the admissible set.
    """
    if eps <= 0.0:
        raise DomainError("eps must be positive")
    h = np.asarray(getattr(direction, "coeffs", direction), dtype=np.float64).ravel()
    size = max(shape.n, h.size)
    a = shape.padded(size).coeffs
    h = np.concatenate([h, np.zeros(size - h.size)])
    plus = eval_F(Omega, shape.with_coeffs(a + eps * h), grid, kgrid, alpha).F
    minus = eval_F(Omega, shape.with_coeffs(a - eps * h), grid, kgrid, alpha).F
    first = plus - minus
    if check:
        if np.any(a):
            base = eval_F(Omega, shape, grid, kgrid, alpha).F
        else:
            base = np.zeros_like(first)
        second = plus - 2.0 * base + minus
        if np.max(np.abs(second)) > 0.5 * np.max(np.abs(first)) and np.max(np.abs(first)) > 0:
            raise StepTooLargeError(f"second difference dominates at eps={eps:g}")
    return first / (2.0 * eps)
