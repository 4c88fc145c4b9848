"""Angular velocities of the m-fold bifurcation points and their limits.

Two independent evaluators of

    Omega_{m,b} = 2 sum_k x_{0,k}^(alpha-2) J_1(x_{0,k} b)^2 / J_1(x_{0,k})^2
                - 2 sum_k x_{m,k}^(alpha-2) J_m(x_{m,k} b)^2 / J_{m+1}(x_{m,k})^2

are provided. ``omega_zero_sum`` sums the Bessel-zero series directly (with
an optional tail correction); ``omega_sneddon`` uses the integral
representation

    -V1(0)   = G1 / b^alpha + (2/pi) sin(alpha pi/2) int rho^(alpha-1) I_1(b rho)^2 K_0/I_0 d rho
    alpha_mb = Gm / b^alpha - (2/pi) sin(alpha pi/2) int rho^(alpha-1) I_m(b rho)^2 K_m/I_m d rho

with Gm = 2^(alpha-1) Gamma(1-alpha) W_alpha(m) / Gamma(1-alpha/2)^2, and
Omega = -V1(0) - alpha_mb.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import DomainError
from .greenkernel import SpectralParams
from .quadrature import quad_algebraic
from .specfun import (
    bessel_j, bessel_zeros, hurwitz_zeta, lgamma, log_bessel_ik_table, wallis,
)

__all__ = [
    "DispersionResult", "omega_zero_sum", "omega_sneddon", "omega",
    "sneddon_integral", "zero_sum_series", "gamma_term", "alpha_mb_21",
    "euler_limit", "sqg_limit", "plane_limit", "alpha_mb_asymptotic",
    "mstar_bound", "case_flags", "flag_string", "monotonicity_scan", "ScanRow",
]


@dataclass(frozen=True)
class DispersionResult:
    """Angular velocity Omega_{m,b} with its decomposition.

    ``omega`` equals ``minus_V1_0 - alpha_mb`` exactly as stored.
    """

    m: int
    omega: float
    route: str
    est_error: float
    minus_V1_0: float
    alpha_mb: float
    alpha: float = float("nan")
    b: float = float("nan")

    @classmethod
    def build(cls, m, route, est_error, minus_v1, alpha_mb, alpha, b):
        return cls(m=int(m), omega=minus_v1 - alpha_mb, route=route,
                   est_error=float(est_error), minus_V1_0=float(minus_v1),
                   alpha_mb=float(alpha_mb), alpha=float(alpha), b=float(b))

    @property
    def pieces(self):
        return self.minus_V1_0, self.alpha_mb


def _check_m(m):
    if int(m) != m or m < 1:
        raise DomainError(f"m must be a positive integer, got {m}")
    return int(m)


def _check_ab(alpha, b):
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    if not 0.0 < b < 1.0:
        raise DomainError(f"b must lie in (0, 1), got {b}")


# ------------------------------------------------------------ zero sums ---

def zero_sum_series(alpha, b, n, count, accelerate=True, path=None):
    """Sum over k of x_{n,k}^(alpha-2) J_p(x_{n,k} b)^2 / J_{n+1}(x_{n,k})^2.

    The numerator order is p = 1 for n = 0 and p = n otherwise.

    With ``accelerate`` the non-oscillating part of the tail is added in
    closed form (a Hurwitz zeta value) and the residual oscillation of
    frequency 2 pi b in k is removed by a three-point filter; the error
    estimate is the change between K/2 and K zeros. Without it the plain
    partial sum is returned with the algebraic bound C K^(alpha-1).

    Returns
    -------
    value, est_error : float
    """
    table = bessel_zeros(n, count, path=path)
    x = np.asarray(table.zeros)
    p = 1 if n == 0 else n
    terms = x ** (alpha - 2.0) * (bessel_j(p, b * x) / bessel_j(n + 1, x)) ** 2
    partial = np.cumsum(terms)
    if not accelerate:
        c = (math.pi ** (alpha - 2.0) / (2.0 * b)) / (1.0 - alpha)
        return float(partial[-1]), c * count ** (alpha - 1.0)

    def tail(k):
        return math.pi ** (alpha - 2.0) * hurwitz_zeta(2.0 - alpha, k + 1 + 0.5 * n - 0.25) / (2.0 * b)

    cw = math.cos(2.0 * math.pi * b)
    filt = 2.0 - 2.0 * cw

    def level(k):
        s = [partial[j - 1] + tail(j) for j in (k - 2, k - 1, k)]
        if filt < 1e-3:
            return s[2]
        return (s[2] - 2.0 * cw * s[1] + s[0]) / filt

    hi = level(count)
    lo = level(count // 2)
    return float(hi), abs(hi - lo)


def omega_zero_sum(p: SpectralParams, m, accelerate=True, path=None):
    """Omega_{m,b} from the Bessel-zero series with ``p.n_zeros`` zeros per order."""
    m = _check_m(m)
    s0, e0 = zero_sum_series(p.alpha, p.b, 0, p.n_zeros, accelerate, path)
    sm, em = zero_sum_series(p.alpha, p.b, m, p.n_zeros, accelerate, path)
    return DispersionResult.build(m, "zero_sum", 2.0 * (e0 + em), 2.0 * s0, 2.0 * sm,
                                  p.alpha, p.b)


# ------------------------------------------------------- Sneddon route ---

def gamma_term(alpha, m):
    """2^(alpha-1) Gamma(1-alpha) W_alpha(m) / Gamma(1-alpha/2)^2 (b-free factor)."""
    logc = (alpha - 1.0) * math.log(2.0) + lgamma(1.0 - alpha) - 2.0 * lgamma(1.0 - 0.5 * alpha)
    return math.exp(logc) * wallis(alpha, m)


def alpha_mb_21(alpha, b, m):
    """Upper bound 2^(alpha-1) Gamma(1-alpha) b^(2m) W_alpha(m) / Gamma(1-alpha/2)^2."""
    return gamma_term(alpha, m) * b ** (2 * m)


def _rho_star(b, m):
    return max(50.0, 4.0 * m, 40.0 / (1.0 - b))


def _integrand(power, b, num, den):
    """rho^power I_num(b rho)^2 K_den(rho) / I_den(rho), in log space."""
    top = max(num, den)

    def f(r):
        r = np.asarray(r, dtype=np.float64)
        li, lk = log_bessel_ik_table(top, np.concatenate([b * r, r]))
        k = r.shape[0]
        with np.errstate(divide="ignore"):
            expo = 2.0 * li[num, :k] + lk[den, k:] - li[den, k:] + power * np.log(r)
        return np.exp(expo)

    return f


@lru_cache(maxsize=4096)
def sneddon_integral(alpha, b, num, den, epsrel=1e-12):
    """int_0^inf rho^(alpha-1) I_num(b rho)^2 K_den(rho) / I_den(rho) d rho.

    Adaptive quadrature on [0, rho*] with rho* = max(50, 4 m, 40 / (1 - b)),
    plus a bound on the exponentially small tail beyond rho*.

    Returns
    -------
    value, est_error : float
    """
    upper = _rho_star(b, max(num, den))
    f = _integrand(0.0, b, num, den)
    val, err = quad_algebraic(f, alpha - 1.0, upper, epsabs=1e-15, epsrel=epsrel)
    # beyond rho* the integrand decays at least like exp(-2 (1 - b) rho)
    g = _integrand(alpha - 1.0, b, num, den)
    f_end = float(g(np.array([upper]))[0])
    tail = 2.0 * f_end / (2.0 * (1.0 - b))
    return val, err + tail


@lru_cache(maxsize=256)
def _minus_v1(alpha, b):
    s = math.sin(0.5 * math.pi * alpha) * 2.0 / math.pi
    integ, err = sneddon_integral(alpha, b, 1, 0)
    return gamma_term(alpha, 1) / b ** alpha + s * integ, s * err


def _alpha_mb(alpha, b, m):
    s = math.sin(0.5 * math.pi * alpha) * 2.0 / math.pi
    integ, err = sneddon_integral(alpha, b, m, m)
    return gamma_term(alpha, m) / b ** alpha - s * integ, s * err


def omega_sneddon(p: SpectralParams, m):
    """Omega_{m,b} from the Sneddon integral representation."""
    m = _check_m(m)
    v1, e1 = _minus_v1(p.alpha, p.b)
    am, em = _alpha_mb(p.alpha, p.b, m)
    return DispersionResult.build(m, "sneddon", e1 + em, v1, am, p.alpha, p.b)


def omega(alpha, b, m):
    """Omega_{m,b} by the Sneddon route, as a float."""
    return omega_sneddon(SpectralParams(alpha, b), m).omega


# -------------------------------------------------------------- limits ---

def euler_limit(b, m):
    """Limit alpha -> 0: (m - 1 + b^(2m)) / (2m)."""
    m = _check_m(m)
    if not 0.0 < b < 1.0:
        raise DomainError("b must lie in (0, 1)")
    return (m - 1.0 + b ** (2 * m)) / (2.0 * m)


def sqg_limit(b, m, full_output=False):
    """Limit alpha -> 1 of Omega_{m,b}.

    (2/(pi b)) sum_{k=1}^{m-1} 1/(2k+1)
    + (2/pi) int_0^inf (I_1(b rho)^2 K_0/I_0 + I_m(b rho)^2 K_m/I_m) d rho.
    """
    m = _check_m(m)
    if not 0.0 < b < 1.0:
        raise DomainError("b must lie in (0, 1)")
    harm = math.fsum(1.0 / (2 * k + 1) for k in range(1, m)) * 2.0 / (math.pi * b)
    i0, e0 = _sqg_integral(b, 1, 0)
    im, em = _sqg_integral(b, m, m)
    val = harm + 2.0 / math.pi * (i0 + im)
    err = 2.0 / math.pi * (e0 + em)
    return (val, err) if full_output else val


def _sqg_integral(b, num, den):
    upper = _rho_star(b, max(num, den))
    f = _integrand(0.0, b, num, den)
    val, err = quad_algebraic(f, 0.0, upper, epsabs=1e-15, epsrel=1e-12)
    f_end = float(f(np.array([upper]))[0])
    return val, err + f_end / (1.0 - b)


def plane_limit(alpha, m):
    """Whole-plane limit of R^(-alpha) Omega_{m, 1/R} as R -> inf."""
    m = _check_m(m)
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must lie in (0, 1)")
    return gamma_term(alpha, 1) - gamma_term(alpha, m)


def alpha_mb_asymptotic(p: SpectralParams, m):
    """Leading large-m term 2^(alpha-1) Gamma(1-alpha) m^(alpha-1) / (b^alpha Gamma(1-alpha/2)^2)."""
    m = _check_m(m)
    a = p.alpha
    logc = (a - 1.0) * math.log(2.0) + lgamma(1.0 - a) - 2.0 * lgamma(1.0 - 0.5 * a)
    return math.exp(logc) * m ** (a - 1.0) / p.b ** a


def mstar_bound(alpha, b):
    """Rough bound (1/log b) log((1-alpha) / (1 - alpha/2 - 1/(e log b))) on m*.

    Raises
    ------
    DomainError
        Outside (0, 1)^2 or when the fraction inside the logarithm is not positive.
    """
    _check_ab(alpha, b)
    lb = math.log(b)
    den = 1.0 - 0.5 * alpha - 1.0 / (math.e * lb)
    frac = (1.0 - alpha) / den
    if not (den > 0.0 and frac > 0.0):
        raise DomainError("mstar_bound outside its validity region")
    return math.log(frac) / lb


def case_flags(alpha, b, m=None):
    """Which sufficient conditions of the existence result hold.

    Returns a dict with ``case13`` (b <= sqrt((1-alpha)/(2-alpha/2)), any m),
    ``mstar`` (the rough bound) and, when m is given, ``case14``
    (m >= ceil(mstar)).
    """
    _check_ab(alpha, b)
    bstar = math.sqrt((1.0 - alpha) / (2.0 - 0.5 * alpha))
    flags = {"case13": b <= bstar, "bstar": bstar}
    try:
        flags["mstar"] = mstar_bound(alpha, b)
    except DomainError:
        flags["mstar"] = float("nan")
    if m is not None:
        ms = flags["mstar"]
        flags["case14"] = bool(np.isfinite(ms) and m >= math.ceil(ms))
    return flags


def flag_string(alpha, b, m):
    """Compact text form of :func:`case_flags`, e.g. ``"1.3|1.4"`` or ``"-"``."""
    f = case_flags(alpha, b, m)
    tags = [t for t, on in (("1.3", f["case13"]), ("1.4", f["case14"])) if on]
    return "|".join(tags) or "-"


@dataclass
class ScanRow:
    """Monotonicity verdict for one (alpha, b)."""

    alpha: float
    b: float
    m_max: int
    case13: bool
    mstar: float
    omegas: list = field(default_factory=list)
    violations: list = field(default_factory=list)

    @property
    def first_violation(self):
        return self.violations[0] if self.violations else None

    @property
    def monotone(self):
        return not self.violations


def _scan_one(alpha, b, m_max):
    flags = case_flags(alpha, b)
    om = [omega(alpha, b, m) for m in range(1, m_max + 1)]
    viol = [m for m in range(1, m_max) if not om[m] > om[m - 1]]
    return ScanRow(alpha, b, m_max, flags["case13"], flags["mstar"], om, viol)


def monotonicity_scan(alpha_grid, b_grid, m_max, workers=None):
    """Check Omega_{m+1,b} > Omega_{m,b} for all m + 1 <= m_max.

    A violation at m means Omega_{m+1} <= Omega_m. Rows come back in
    grid order regardless of ``workers``.

    Returns
    -------
    list of ScanRow
    """
    m_max = _check_m(m_max)
    jobs = [(float(a), float(b)) for a in alpha_grid for b in b_grid]
    for a, b in jobs:
        _check_ab(a, b)
    if workers == 1 or len(jobs) == 1:
        return [_scan_one(a, b, m_max) for a, b in jobs]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(lambda ab: _scan_one(ab[0], ab[1], m_max), jobs))
