"""Green function of the spectral fractional Laplacian on the unit disc.

The kernel K of (-Delta)^(-1 + alpha/2) with Dirichlet conditions has the
eigenfunction expansion

    K(x, y) = sum_n sum_k x_{n,k}^(alpha-2) A_{n,k}^2
              J_n(x_{n,k} rho1) J_n(x_{n,k} rho2) cos(n dtheta),

with pi A_{0,k}^2 = 1 / J_1(x_{0,k})^2 and pi A_{n,k}^2 = 2 / J_{n+1}(x_{n,k})^2.
It splits as K = c_alpha |x - y|^(-alpha) + K1 with K1 smooth in the open
disc. Mode by mode, the Sneddon integral identity gives

    K1 = -(sin(alpha pi / 2) / pi^2) sum_n eps_n cos(n dtheta) g_n(rho1, rho2),
    g_n = int_0^inf t^(alpha-1) I_n(rho1 t) I_n(rho2 t) K_n(t) / I_n(t) dt,

(eps_0 = 1, eps_n = 2), which is how :class:`ModalKernel` evaluates K1.
"""
import hashlib
import json
import math
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import DomainError, OutOfGridError
from .specfun import gamma, hyp2f1, lgamma

__all__ = [
    "SpectralParams", "SeriesValue", "ModalKernel", "H_MIN", "c_alpha",
    "kernel_singular", "kernel_series", "mode_bound", "sneddon_j",
    "SmoothKernelGrid", "build_smooth_grid", "smooth_kernel_eval", "grid_path",
]


@dataclass(frozen=True)
class SpectralParams:
    """Order, base radius and truncation controls.

    Attributes
    ----------
    alpha : float
        Order in (0, 1).
    b : float
        Base patch radius in (0, 1).
    n_ang : int
        Largest angular order used by series evaluations.
    n_zeros : int
        Bessel zeros per order.
    tol : float
        Target tolerance for truncated expansions.
    """

    alpha: float
    b: float
    n_ang: int = 256
    n_zeros: int = 4000
    tol: float = 1e-6

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise DomainError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not 0.0 < self.b < 1.0:
            raise DomainError(f"b must lie in (0, 1), got {self.b}")
        if self.n_ang < 0 or self.n_zeros < 4:
            raise DomainError("need n_ang >= 0 and n_zeros >= 4")
        if not self.tol > 0.0:
            raise DomainError("tol must be positive")


def c_alpha(alpha):
    """Constant of the planar singular part, 4^(alpha/2-1) Gamma(alpha/2) / (pi Gamma(1-alpha/2)).

    Defined for 1e-3 <= alpha < 2; it diverges like 1/(2 pi alpha) as alpha -> 0.
    """
    alpha = float(alpha)
    if not 1e-3 <= alpha < 2.0:
        raise DomainError(f"c_alpha needs 1e-3 <= alpha < 2, got {alpha}")
    return 4.0 ** (0.5 * alpha - 1.0) * gamma(0.5 * alpha) / (math.pi * gamma(1.0 - 0.5 * alpha))


def kernel_singular(alpha, x, y):
    """Planar part c_alpha |x - y|^(-alpha) for points given as pairs or complex numbers.

    Raises
    ------
    DomainError
        If x coincides with y.
    """
    d = np.abs(_as_complex(x) - _as_complex(y))
    if np.any(d == 0.0):
        raise DomainError("kernel_singular is infinite at x = y")
    out = c_alpha(alpha) * d ** (-float(alpha))
    return float(out) if np.ndim(out) == 0 else out


def _as_complex(p):
    p = np.asarray(p)
    if np.iscomplexobj(p):
        return p
    if p.shape[-1:] != (2,):
        raise DomainError("points must be complex or have a trailing axis of length 2")
    return p[..., 0] + 1j * p[..., 1]


def sneddon_j(beta, gam, q, a, b):
    """Closed-form term of the Sneddon identity for 0 < a <= b.

    Equals (1/pi) sin(pi (gam - beta + q) / 2) int_0^inf rho^(1-q) I_beta(a rho) K_gam(b rho) d rho,
    evaluated as a Gauss hypergeometric function of a^2 / b^2.
    """
    if not 0.0 < a <= b:
        raise DomainError("sneddon_j needs 0 < a <= b")
    c1 = 1.0 + 0.5 * (beta + gam - q)
    c2 = 1.0 + 0.5 * (beta - gam - q)
    den = 0.5 * (gam - beta + q)
    if den <= 0.0 and den == math.floor(den):
        return 0.0
    logpre = (beta * math.log(a) + lgamma(c1) - q * math.log(2.0)
              - (2.0 + beta - q) * math.log(b) - lgamma(beta + 1.0) - lgamma(den))
    sign = math.copysign(1.0, gamma(c1)) * math.copysign(1.0, gamma(den))
    return sign * math.exp(logpre) * hyp2f1(c1, c2, beta + 1.0, (a / b) ** 2)


# ------------------------------------------------------ modal smooth part ---

def _moment_rule(alpha, t_max):
    """Nodes and weights for int_0^t_max t^(alpha-1) h(t) dt with h smooth or log-singular at 0."""
    from .quadrature import composite_legendre, gauss_jacobi_01

    # the head [0, 2^-k] is negligible once 2^(-k alpha) is below 1e-19
    k = min(1200, int(math.ceil(64.0 / alpha)))
    head = 2.0 ** -k
    t0, w0 = gauss_jacobi_01(24, alpha - 1.0, head)
    geo = head * 2.0 ** np.arange(k + 1)
    t1, w1 = composite_legendre(geo, 12)
    w1 = w1 * t1 ** (alpha - 1.0)
    edges = np.arange(1.0, t_max + 1.0)
    t2, w2 = composite_legendre(edges, 16)
    w2 = w2 * t2 ** (alpha - 1.0)
    return np.concatenate([t0, t1, t2]), np.concatenate([w0, w1, w2])


class ModalKernel:
    """Smooth remainder K1 from its angular-mode expansion.

    For each order n the mode g_n(rho1, rho2) is expanded in the power
    series of I_n,

        g_n = sum_{i,j} c_i c_j mu_{i+j} rho1^(n+2i) rho2^(n+2j),
        c_i = 1 / (2^(n+2i) i! (n+i)!),
        mu_p = int_0^inf t^(alpha-1+2n+2p) K_n(t) / I_n(t) dt,

    and stored in balanced form g_n = u(rho1)^T H u(rho2) with
    u_i(rho) = c_i sqrt(mu_{2i}) rho^(n+2i) and |H_ij| <= 1, so that no
    term overflows and all terms are positive.

    Parameters
    ----------
    alpha : float
        Order in (0, 1).
    r_max : float
        Largest radius at which the kernel is evaluated, below 1.
    eps : float
        Relative truncation level for modes and series terms.
    """

    def __init__(self, alpha, r_max=0.75, eps=1e-17):
        if not 0.0 < alpha < 1.0:
            raise DomainError("alpha must lie in (0, 1)")
        if not 0.0 < r_max < 1.0:
            raise DomainError("r_max must lie in (0, 1)")
        self.alpha = float(alpha)
        self.r_max = float(r_max)
        self.eps = float(eps)
        self.scale = -math.sin(0.5 * math.pi * self.alpha) / math.pi ** 2
        lr = math.log(self.r_max)
        n_cap = int(math.ceil(math.log(eps) / (2.0 * lr))) + 12
        p_cap = int(math.ceil(math.log(eps) / (2.0 * lr))) + 12
        self._build(n_cap, p_cap)

    def _build(self, n_cap, p_cap):
        from .specfun import log_bessel_ik_table

        a = self.alpha
        t_max = 2.0 * (n_cap + 2 * p_cap) + 120.0
        t, w = _moment_rule(a, t_max)
        log_t = np.log(t)
        log_w = np.log(w)
        li, lk = log_bessel_ik_table(n_cap, t)
        lr = math.log(self.r_max)
        self.modes = []
        peak0 = None
        for n in range(n_cap + 1):
            base = lk[n] - li[n] + log_w
            pw = 2.0 * np.arange(2 * p_cap + 1) + 2 * n
            expo = pw[:, None] * log_t[None, :] + base[None, :]
            top = expo.max(axis=1)
            log_mu = top + np.log(np.exp(expo - top[:, None]).sum(axis=1))
            i = np.arange(p_cap + 1)
            log_c = -(n + 2 * i) * math.log(2.0) - np.array(
                [lgamma(k + 1.0) + lgamma(n + k + 1.0) for k in i])
            # log u_i(r_max)
            log_u = log_c + 0.5 * log_mu[2 * i] + (n + 2 * i) * lr
            keep = log_u >= log_u.max() + math.log(self.eps)
            p = int(np.nonzero(keep)[0].max()) + 1
            ii = np.arange(p)
            log_h = (log_mu[ii[:, None] + ii[None, :]]
                     - 0.5 * log_mu[2 * ii][:, None] - 0.5 * log_mu[2 * ii][None, :])
            h = np.exp(log_h)
            coef = np.exp(log_u[:p])
            powers = n + 2 * ii
            peak = float(coef @ h @ coef)
            if peak0 is None:
                peak0 = peak
            self.modes.append((powers, coef, h))
            if n >= 2 and peak < self.eps * peak0:
                break
        self.n_modes = len(self.modes)

    def features(self, n, rho, deriv=0):
        """u_n(rho) (deriv=0) or d u_n / d rho (deriv=1), shape (len(rho), P)."""
        powers, coef, _ = self.modes[n]
        s = np.atleast_1d(np.asarray(rho, dtype=np.float64)) / self.r_max
        if deriv == 0:
            return coef * s[:, None] ** powers
        e = np.maximum(powers - 1, 0)
        return coef * powers / self.r_max * s[:, None] ** e

    def mode_matrix(self, n, rho1, rho2, d1=0, d2=0):
        """g_n (or its rho derivatives) on the tensor grid rho1 x rho2."""
        h = self.modes[n][2]
        return self.features(n, rho1, d1) @ h @ self.features(n, rho2, d2).T

    def mode_values(self, n, rho1, rho2, d1=0, d2=0):
        """g_n (or its rho derivatives) at paired points."""
        h = self.modes[n][2]
        u1 = self.features(n, rho1, d1)
        u2 = self.features(n, rho2, d2)
        return np.einsum("ij,jk,ik->i", u1, h, u2)

    def _check(self, *rhos):
        for r in rhos:
            if np.any(np.asarray(r) < 0.0) or np.any(np.asarray(r) > self.r_max * (1 + 1e-12)):
                raise OutOfGridError(f"radius outside [0, {self.r_max}]")

    def value(self, rho1, rho2, dtheta):
        """K1 at polar separation (rho1, rho2, dtheta)."""
        return self.evaluate(rho1, rho2, dtheta)[0]

    def evaluate(self, rho1, rho2, dtheta):
        """K1, d K1 / d rho1 and d K1 / d dtheta at paired points.

        ``dtheta`` is the angle of the first point minus that of the second.
        """
        scalar = np.ndim(rho1) == 0 and np.ndim(rho2) == 0 and np.ndim(dtheta) == 0
        r1, r2, dt = np.broadcast_arrays(np.atleast_1d(rho1), np.atleast_1d(rho2),
                                         np.atleast_1d(dtheta))
        r1, r2, dt = (np.asarray(v, dtype=np.float64).ravel() for v in (r1, r2, dt))
        self._check(r1, r2)
        val = np.zeros_like(r1)
        dr = np.zeros_like(r1)
        dth = np.zeros_like(r1)
        for n in range(self.n_modes):
            eps_n = 1.0 if n == 0 else 2.0
            g = self.mode_values(n, r1, r2)
            g1 = self.mode_values(n, r1, r2, d1=1)
            c = np.cos(n * dt)
            val += eps_n * c * g
            dr += eps_n * c * g1
            dth -= eps_n * n * np.sin(n * dt) * g
        out = (self.scale * val, self.scale * dr, self.scale * dth)
        if scalar:
            return tuple(float(v[0]) for v in out)
        return out


# ------------------------------------------------------ eigenseries route ---

_GL16 = np.polynomial.legendre.leggauss(16)


def _oscillatory_tail(sig, tau):
    """int_1^inf u^sig exp(i tau u) du for sig < -1, tau >= 0.

    Rotating the contour to u = 1 + i y gives i e^(i tau) int_0^inf
    (1 + i y)^sig e^(-tau y) dy; with y = e^t the integrand is analytic in a
    strip of half-width pi/2 and decays doubly exponentially once
    tau e^t is large, so a fixed composite Gauss-Legendre rule suffices.
    """
    if tau == 0.0:
        return complex(1.0 / (-sig - 1.0))
    top = max(5.0, math.log(60.0 / tau) + 2.0)
    if sig + 1.0 < 0.0:
        top = min(top, max(5.0, 60.0 / (-sig - 1.0)))
    edges = np.arange(-45.0, top + 0.5, 0.5)
    x, w = _GL16
    half = 0.25
    t = (edges[:-1, None] + half * (x + 1.0)).ravel()
    wt = np.tile(half * w, edges.size - 1)
    y = np.exp(t)
    val = np.sum(wt * (1.0 + 1j * y) ** sig * np.exp(-tau * y) * y)
    return 1j * complex(np.exp(1j * tau)) * val


def _slow_tail(alpha, n, rho1, rho2, k):
    """Model of sum_{j>k} of the eigenseries terms for nearly equal radii.

    The terms follow the large-zero asymptotics
    x^(alpha-2) (1 + C / x^2 - i delta c' / x) e^(i delta x) / (2 sqrt(rho1 rho2))
    (real part) with x = pi (j + n/2 - 1/4); the sum is approximated by the
    Euler-Maclaurin formula with three derivative corrections.
    """
    s = alpha - 2.0
    delta = abs(rho1 - rho2)
    om = math.pi * delta
    v = k + 1.0 + 0.5 * n - 0.25
    c = (4.0 * n * n - 1.0) / 8.0
    big_c = c * (1.0 + 0.5 / rho1 ** 2 + 0.5 / rho2 ** 2 + (2.0 - alpha))
    c_phase = c * (1.0 + 1.0 / (rho1 * rho2))
    total = 0.0j
    for sig, coef in ((s, 1.0), (s - 2.0, big_c), (s - 1.0, -1j * delta * c_phase)):
        integ = v ** (sig + 1.0) * _oscillatory_tail(sig, om * v)
        f = v ** sig * complex(np.exp(1j * om * v))
        p = sig / v + 1j * om
        d1 = p * f
        d3 = (p ** 3 - 3.0 * p * sig / v ** 2 + 2.0 * sig / v ** 3) * f
        total += coef * math.pi ** sig * (integ + 0.5 * f - d1 / 12.0 + d3 / 720.0)
    return total.real / (2.0 * math.sqrt(rho1 * rho2))


def _stride(w):
    return 1 if w > 0.25 * math.pi else max(1, int(round(0.5 * math.pi / w)))


def _filter(seq, specs):
    """Annihilate the oscillations e^(+-i w k) of a partial-sum sequence.

    Each (w, stride) pair applies a double-root three-term filter over the
    given stride, which also removes the leading algebraic correction.
    """
    for w, st in specs:
        c = math.cos(st * w)
        d = 2.0 - 2.0 * c
        for _ in range(2):
            seq = (seq[2 * st:] - 2.0 * c * seq[st:-st] + seq[:-2 * st]) / d
    return seq


def _accelerated_sum(alpha, n, rho1, rho2, partial, k):
    """Limit estimate of the mode sum from the first ``k`` partial sums."""
    w1 = math.pi * abs(rho1 - rho2)
    w2 = math.pi * (rho1 + rho2)
    if w1 > 0.25 * math.pi:
        specs = [(w2, _stride(w2)), (w1, _stride(w1))]
        if k <= sum(4 * st for _, st in specs):
            return float(partial[k - 1])
        return float(_filter(partial[:k], specs)[-1])
    st = _stride(w2)
    width = 4 * st + 1
    if k < width:
        # too few zeros for the filter stencil
        return float(partial[k - 1]) + _slow_tail(alpha, n, rho1, rho2, k)
    # the model terms telescope: tail(k-1) = tail(k) + term(k)
    tails = np.empty(width)
    tails[-1] = _slow_tail(alpha, n, rho1, rho2, k)
    s = alpha - 2.0
    delta = abs(rho1 - rho2)
    c = (4.0 * n * n - 1.0) / 8.0
    big_c = c * (1.0 + 0.5 / rho1 ** 2 + 0.5 / rho2 ** 2 + (2.0 - alpha))
    c_phase = c * (1.0 + 1.0 / (rho1 * rho2))
    for i in range(width - 2, -1, -1):
        j = k - (width - 1 - i) + 1
        x = math.pi * (j + 0.5 * n - 0.25)
        term = (x ** s * (1.0 + big_c / x ** 2) * math.cos(delta * x)
                + x ** (s - 1.0) * delta * c_phase * math.sin(delta * x))
        tails[i] = tails[i + 1] + term / (2.0 * math.sqrt(rho1 * rho2))
    seq = partial[k - width:k] + tails
    return float(_filter(seq, [(w2, st)])[-1])


def _mode_sum(alpha, n, rho1, rho2, count, path=None):
    """sum_k x_{n,k}^(alpha-2) J_n(x rho1) J_n(x rho2) / J_{n+1}(x)^2 and an error estimate."""
    from .specfun import bessel_j, bessel_zeros

    x = bessel_zeros(n, count, path=path).zeros
    terms = (x ** (alpha - 2.0) * bessel_j(n, x * rho1) * bessel_j(n, x * rho2)
             / bessel_j(n + 1, x) ** 2)
    partial = np.cumsum(terms)
    full = _accelerated_sum(alpha, n, rho1, rho2, partial, count)
    half = _accelerated_sum(alpha, n, rho1, rho2, partial, count // 2)
    return full, abs(full - half)


def _ik_moment(alpha, n):
    """int_0^inf t^(alpha-1) I_n(t) K_n(t) dt in closed form."""
    return math.exp(lgamma(0.5 * alpha) + lgamma(n + 0.5 * alpha) + lgamma(0.5 - 0.5 * alpha)
                    - lgamma(1.0 + n - 0.5 * alpha)) / (4.0 * math.sqrt(math.pi))


def mode_bound(alpha, n, rho1, rho2):
    """Bound on the modes of K1 beyond order n-1.

    Uses g_k(rho1, rho2) <= (rho1 rho2)^k int t^(alpha-1) I_k K_k dt, which
    follows from I_k(r t) <= r^k I_k(t) for r <= 1, and the decrease of the
    moment in k.
    """
    q = rho1 * rho2
    scale = math.sin(0.5 * math.pi * alpha) / math.pi ** 2
    return 2.0 * scale * _ik_moment(alpha, n) * q ** n / (1.0 - q)


class SeriesValue(NamedTuple):
    """Kernel value with its estimated truncation error and the orders summed."""

    value: float
    est_error: float
    n_modes: int


H_MIN = 2.0 * math.pi / 127.0


def kernel_series(params, rho1, rho2, dtheta, h_min=H_MIN, path=None):
    """Green function K(x, y) from its Bessel eigenseries.

    Each angular order n is summed over ``params.n_zeros`` zeros with the
    oscillatory tail accelerated; the planar part c_alpha |x - y|^(-alpha)
    is subtracted mode by mode in closed form and added back exactly, so
    the returned value is

        c_alpha |x - y|^(-alpha) + sum_n (eps_n / pi) cos(n dtheta) (S_n - J_n),

    where S_n is the mode sum and J_n its Sneddon term. Orders stop once
    the a-priori bound of the remaining modes drops below tol / 10.

    Parameters
    ----------
    params : SpectralParams
        Order, truncation (``n_ang``, ``n_zeros``) and tolerance.
    rho1, rho2 : float
        Radii in (0, 1).
    dtheta : float
        Angle between the two points.
    h_min : float
        Half-width of the diagonal band inside which a missed tolerance is
        tolerated (the series is slow there).

    Returns
    -------
    SeriesValue
        ``est_error`` adds the change between the full and the halved zero
        count, summed over orders, to the bound of the omitted orders.

    Raises
    ------
    DomainError
        For radii outside (0, 1) or coincident points.
    ToleranceNotMetError
        If ``est_error`` exceeds ``params.tol`` (relative to max(1, |K|))
        at a distance from the diagonal larger than ``h_min``.
    """
    from .errors import ToleranceNotMetError

    rho1, rho2, dtheta = float(rho1), float(rho2), float(dtheta)
    if not (0.0 < rho1 < 1.0 and 0.0 < rho2 < 1.0):
        raise DomainError("kernel_series needs radii in (0, 1)")
    a = params.alpha
    dist = abs(rho1 - rho2 * complex(math.cos(dtheta), math.sin(dtheta)))
    if dist == 0.0:
        raise DomainError("kernel_series is infinite at x = y")
    lo, hi = min(rho1, rho2), max(rho1, rho2)
    value = c_alpha(a) * dist ** (-a)
    modes = []
    est = 0.0
    n = 0
    tail = mode_bound(a, 0, rho1, rho2)
    while n <= params.n_ang:
        tail = mode_bound(a, n, rho1, rho2)
        if n >= 2 and tail < 0.1 * params.tol:
            break
        s_n, e_n = _mode_sum(a, n, lo, hi, params.n_zeros, path)
        eps_n = 1.0 if n == 0 else 2.0
        j_n = sneddon_j(n, n, 2.0 - a, lo, hi)
        modes.append(eps_n / math.pi * math.cos(n * dtheta) * (s_n - j_n))
        est += eps_n / math.pi * e_n
        n += 1
    else:
        tail = mode_bound(a, n, rho1, rho2)
    value += math.fsum(modes)
    est += tail
    if est > params.tol * max(1.0, abs(value)) and dist > h_min:
        raise ToleranceNotMetError(
            f"kernel_series: estimated error {est:.2e} above tol {params.tol:.1e}",
            value=value, est_error=est)
    return SeriesValue(value, est, len(modes))


# ------------------------------------------------------ smooth-part grid ---

_GRID_MAGIC = b"ARTKGRID"
_GRID_VERSION = 1


def _reduce_angle(dtheta):
    """Map an angle to [0, pi] using evenness and periodicity; returns (angle, sign)."""
    d = np.remainder(np.asarray(dtheta, dtype=np.float64) + math.pi, 2.0 * math.pi) - math.pi
    return np.abs(d), np.where(d < 0.0, -1.0, 1.0)


@dataclass(frozen=True, eq=False)
class SmoothKernelGrid:
    """Tabulated smooth remainder K1(rho1, rho2, dtheta) with tricubic Hermite interpolation.

    ``data[i, j, k, d1 + 2 d2 + 4 d3]`` holds the mixed derivative of order
    (d1, d2, d3) in (rho1, rho2, dtheta) at the node, so the interpolant is
    C^1 and reproduces nodal values exactly. Angles are folded to [0, pi]
    by evenness of K1 in dtheta.
    """

    alpha: float
    b: float
    r_max: float
    rho_nodes: np.ndarray = None
    dtheta_nodes: np.ndarray = None
    data: np.ndarray = None
    truncation: dict = None

    @property
    def rho1_nodes(self):
        return self.rho_nodes

    @property
    def rho2_nodes(self):
        return self.rho_nodes

    @property
    def resolution(self):
        return tuple(int(v) for v in self.data.shape[:3])

    @property
    def values(self):
        """K1 at the nodes, shape (n1, n2, n3)."""
        return self.data[..., 0]

    @property
    def grad_values(self):
        """Polar components (d/d rho1, rho1^-1 d/d dtheta) of grad_x K1 at the nodes.

        At rho1 = 0 the angular component is the limit d^2 K1 / d rho1 d dtheta.
        """
        r = self.rho_nodes[:, None, None]
        safe = np.where(r > 0.0, r, 1.0)
        ang = np.where(r > 0.0, self.data[..., 4] / safe, self.data[..., 5])
        return np.stack([self.data[..., 1], ang], axis=-1)

    @property
    def step(self):
        return (self.rho_nodes[1] - self.rho_nodes[0],) * 2 + (
            self.dtheta_nodes[1] - self.dtheta_nodes[0],)

    def evaluate(self, rho1, rho2, dtheta):
        """Interpolated K1, d K1 / d rho1 and d K1 / d dtheta at paired points."""
        from ._backend import core

        scalar = np.ndim(rho1) == 0 and np.ndim(rho2) == 0 and np.ndim(dtheta) == 0
        r1, r2, dt = (np.ascontiguousarray(v, dtype=np.float64).ravel() for v in
                      np.broadcast_arrays(np.atleast_1d(rho1), np.atleast_1d(rho2),
                                          np.atleast_1d(dtheta)))
        top = self.r_max * (1.0 + 1e-12)
        if np.any(r1 < 0.0) or np.any(r2 < 0.0) or np.any(r1 > top) or np.any(r2 > top):
            raise OutOfGridError(f"radius outside [0, {self.r_max}]")
        if not np.all(np.isfinite(dt)):
            raise OutOfGridError("non-finite angle")
        a, sign = _reduce_angle(dt)
        val, g1, _, g3 = core.hermite3(self.data, (0.0, 0.0, 0.0), self.step,
                                       np.minimum(r1, self.r_max), np.minimum(r2, self.r_max), a)
        out = (val, g1, sign * g3)
        if scalar:
            return tuple(float(v[0]) for v in out)
        return out

    def value(self, rho1, rho2, dtheta):
        return self.evaluate(rho1, rho2, dtheta)[0]

    # -------------------------------------------------------- persistence --

    def header(self):
        blob = np.ascontiguousarray(self.data, dtype="<f8").tobytes()
        return {
            "format": "artifact.SmoothKernelGrid", "version": _GRID_VERSION,
            "alpha": self.alpha, "b": self.b, "r_max": self.r_max,
            "resolution": list(self.resolution), "truncation": self.truncation or {},
            "sha256": hashlib.sha256(blob).hexdigest(),
        }

    def save(self, path):
        """Write magic, JSON header length and header, then the raw node data."""
        blob = np.ascontiguousarray(self.data, dtype="<f8").tobytes()
        head = json.dumps(self.header(), sort_keys=True).encode("utf-8")
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(path.suffix + ".tmp")
        with open(tmp, "wb") as fh:
            fh.write(_GRID_MAGIC)
            fh.write(struct.pack("<II", _GRID_VERSION, len(head)))
            fh.write(head)
            fh.write(blob)
        tmp.replace(path)
        return path

    @classmethod
    def load(cls, path):
        """Read a grid written by :meth:`save`; raises ValueError if corrupt."""
        raw = Path(path).read_bytes()
        if raw[:8] != _GRID_MAGIC:
            raise ValueError("not a kernel grid file")
        version, n_head = struct.unpack("<II", raw[8:16])
        if version != _GRID_VERSION:
            raise ValueError(f"unsupported grid version {version}")
        head = json.loads(raw[16:16 + n_head].decode("utf-8"))
        blob = raw[16 + n_head:]
        if hashlib.sha256(blob).hexdigest() != head["sha256"]:
            raise ValueError("grid checksum mismatch")
        n1, n2, n3 = head["resolution"]
        data = np.frombuffer(blob, dtype="<f8").reshape(n1, n2, n3, 8).astype(np.float64)
        data.setflags(write=False)
        return _grid_from_data(head["alpha"], head["b"], head["r_max"], data,
                               head.get("truncation"))


def _grid_from_data(alpha, b, r_max, data, truncation):
    n1, _, n3 = data.shape[:3]
    rho = np.linspace(0.0, r_max, n1)
    dth = np.linspace(0.0, math.pi, n3)
    for arr in (rho, dth):
        arr.setflags(write=False)
    return SmoothKernelGrid(float(alpha), float(b), float(r_max), rho, dth, data,
                            dict(truncation or {}))


def grid_path(params, r_max, resolution, directory=None):
    """Cache file name for a grid with the given parameters."""
    from .specfun import cache_dir

    n1, n2, n3 = resolution
    name = f"kgrid_a{params.alpha!r}_b{params.b!r}_r{r_max!r}_{n1}x{n2}x{n3}.bin"
    return cache_dir(directory) / name


def build_smooth_grid(params, r_max, resolution=(64, 64, 128), cache=False, path=None):
    """Tabulate K1 and its mixed first derivatives on a uniform polar grid.

    Nodes are rho in [0, r_max] (both radii) and dtheta in [0, pi]. Values
    come from :class:`ModalKernel`, whose modes are the Sneddon-subtracted
    eigenseries in closed integral form, so no near-diagonal band needs
    extrapolation.

    Parameters
    ----------
    params : SpectralParams
    r_max : float
        Largest radius, at most (1 + b) / 2.
    resolution : (int, int, int)
        Node counts in rho1, rho2 and dtheta; the two radial counts must agree.
    cache : bool
        Reuse or store the grid in the cache directory (``path`` overrides it).

    Raises
    ------
    DomainError
        If r_max exceeds (1 + b) / 2 or the resolution is invalid.
    """
    r_max = float(r_max)
    if not 0.0 < r_max <= 0.5 * (1.0 + params.b) + 1e-15:
        raise DomainError(f"r_max must lie in (0, (1 + b) / 2], got {r_max}")
    n1, n2, n3 = (int(v) for v in resolution)
    if n1 != n2 or n1 < 4 or n3 < 4:
        raise DomainError("resolution needs equal radial counts >= 4 and >= 4 angles")
    file = grid_path(params, r_max, (n1, n2, n3), path) if cache else None
    if file is not None and file.exists():
        try:
            grid = SmoothKernelGrid.load(file)
        except (ValueError, KeyError, OSError):
            pass
        else:
            if grid.alpha == params.alpha and grid.resolution == (n1, n2, n3):
                return grid
    modal = ModalKernel(params.alpha, r_max)
    rho = np.linspace(0.0, r_max, n1)
    dth = np.linspace(0.0, math.pi, n3)
    data = np.zeros((n1, n1, n3, 8))
    for n in range(modal.n_modes):
        eps_n = 1.0 if n == 0 else 2.0
        ang = (np.cos(n * dth), -n * np.sin(n * dth))
        for d1 in (0, 1):
            for d2 in (0, 1):
                g = eps_n * modal.mode_matrix(n, rho, rho, d1, d2)
                for d3 in (0, 1):
                    data[..., d1 + 2 * d2 + 4 * d3] += g[:, :, None] * ang[d3][None, None, :]
    data *= modal.scale
    data.setflags(write=False)
    trunc = {"method": "modal", "n_modes": modal.n_modes, "eps": modal.eps}
    grid = _grid_from_data(params.alpha, params.b, r_max, data, trunc)
    if file is not None:
        try:
            grid.save(file)
        except OSError:
            pass
    return grid


def smooth_kernel_eval(grid, x, y):
    """K1(x, y) and its Cartesian gradient in x, interpolated from ``grid``.

    Points are complex numbers or arrays with a trailing axis of length 2.

    Returns
    -------
    value : float or ndarray
    gradient : ndarray, shape (..., 2)

    Raises
    ------
    OutOfGridError
        If |x| or |y| exceeds the grid radius.
    """
    zx = _as_complex(x)
    zy = _as_complex(y)
    zx, zy = np.broadcast_arrays(zx, zy)
    r1 = np.abs(zx)
    r2 = np.abs(zy)
    th1 = np.angle(zx)
    dt = th1 - np.angle(zy)
    val, d_r, d_t = grid.evaluate(r1, r2, dt)
    val, d_r, d_t = (np.reshape(v, zx.shape) for v in (val, d_r, d_t))
    safe = np.where(r1 > 0.0, r1, 1.0)
    ang = np.where(r1 > 0.0, d_t / safe, 0.0)
    c, s = np.cos(th1), np.sin(th1)
    grad = np.stack([d_r * c - ang * s, d_r * s + ang * c], axis=-1)
    if np.ndim(val) == 0:
        return float(val), grad
    return val, grad
