"""Real-argument special functions and Bessel-zero tables.

Gamma-type functions use a Lanczos approximation (g = 7, nine terms) with
reflection below 1/2. Bessel functions of integer order use recurrences:
Miller's backward recurrence or Hankel asymptotics plus upward recurrence
for J_n, continued-fraction ratios for I_n and an upward ratio recurrence
seeded by a trapezoidal integral for K_n. The modified functions are
evaluated in log space so products I_n K_n and ratios K_n / I_n never
overflow.

Scalars in give floats out; arrays in give arrays out.
"""
import hashlib
import json
import math
import os
import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _backend
from .errors import (
    ConvergenceError,
    DivergenceError,
    DomainError,
    PoleError,
)

__all__ = [
    "gamma", "lgamma", "rgamma", "gamma_ratio", "pochhammer", "wallis",
    "bessel_j", "bessel_j_prime", "bessel_i", "bessel_k", "bessel_i_scaled",
    "bessel_k_scaled", "log_bessel_i", "log_bessel_k", "log_bessel_ik_table",
    "bessel_ik", "bessel_k_over_i", "bessel_i_ratio",
    "BesselZeroTable", "bessel_zeros", "mcmahon", "hyp2f1", "hurwitz_zeta",
    "cache_dir",
]

# ---------------------------------------------------------------- gamma ---

_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_SQRT_2PI = math.sqrt(2.0 * math.pi)
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


def _is_nonpos_int(x):
    return x <= 0 and float(x) == math.floor(x)


def _sinpi(x):
    """sin(pi x) with exact argument reduction."""
    r = x - 2.0 * round(0.5 * x)
    if r > 0.5:
        r = 1.0 - r
    elif r < -0.5:
        r = -1.0 - r
    return math.sin(math.pi * r)


def _lanczos_sum(z):
    s = _LANCZOS[0]
    for i in range(1, 9):
        s += _LANCZOS[i] / (z + i)
    return s


def _gamma_scalar(x):
    if _is_nonpos_int(x):
        raise PoleError(f"gamma has a pole at {x}")
    if x == math.floor(x) and x <= 171.0:
        return float(math.factorial(int(x) - 1))
    if x < 0.5:
        return math.pi / (_sinpi(x) * _gamma_scalar(1.0 - x))
    z = x - 1.0
    t = z + _LANCZOS_G + 0.5
    if x < 140.0:
        p = t ** (0.5 * (z + 0.5))
        return _SQRT_2PI * p * (p * math.exp(-t)) * _lanczos_sum(z)
    return math.exp(_lgamma_scalar(x))


def _lgamma_scalar(x):
    if _is_nonpos_int(x):
        raise PoleError(f"lgamma has a pole at {x}")
    if x < 0.5:
        return math.log(math.pi / abs(_sinpi(x))) - _lgamma_scalar(1.0 - x)
    z = x - 1.0
    t = z + _LANCZOS_G + 0.5
    return _LOG_SQRT_2PI + (z + 0.5) * math.log(t) - t + math.log(_lanczos_sum(z))


def _vectorize(fn, x):
    if np.ndim(x) == 0:
        return fn(float(x))
    arr = np.asarray(x, dtype=np.float64)
    return np.array([fn(v) for v in arr.ravel()]).reshape(arr.shape)


def gamma(x):
    """Gamma function for real x not a nonpositive integer.

    Parameters
    ----------
    x : float or array_like

    Returns
    -------
    float or ndarray

    Raises
    ------
    PoleError
        If any x is 0, -1, -2, ...
    """
    return _vectorize(_gamma_scalar, x)


def lgamma(x):
    """log|Gamma(x)|."""
    return _vectorize(_lgamma_scalar, x)


def rgamma(x):
    """1 / Gamma(x), equal to 0 at the poles."""
    def f(v):
        if _is_nonpos_int(v):
            return 0.0
        if v > 170.0:
            return math.exp(-_lgamma_scalar(v))
        return 1.0 / _gamma_scalar(v)
    return _vectorize(f, x)


def gamma_ratio(a, b):
    """Gamma(a) / Gamma(b), accurate when a - b is small and a, b large."""
    a = float(a)
    b = float(b)
    if a >= 0.5 and b >= 0.5:
        za, zb = a - 1.0, b - 1.0
        ta = za + _LANCZOS_G + 0.5
        tb = zb + _LANCZOS_G + 0.5
        d = a - b
        expo = d * (math.log(ta) - 1.0) + (b - 0.5) * math.log1p(d / tb)
        return math.exp(expo) * _lanczos_sum(za) / _lanczos_sum(zb)
    if _is_nonpos_int(a):
        raise PoleError(f"numerator Gamma({a}) has a pole")
    return _gamma_scalar(a) * rgamma(b)


def pochhammer(z, n):
    """Rising factorial (z)_n = z (z+1) ... (z+n-1).

    Raises
    ------
    PoleError
        When z is a nonpositive integer and z + n <= 0, so that the
        quotient Gamma(z+n) / Gamma(z) is a ratio of two poles.
    """
    n = int(n)
    if n < 0:
        raise DomainError("pochhammer needs n >= 0")
    z = float(z)
    if n > 0 and _is_nonpos_int(z) and z + n <= 0:
        raise PoleError(f"Gamma({z}) and Gamma({z + n}) are both poles")
    out = 1.0
    for k in range(n):
        out *= z + k
    return out


def wallis(alpha, m):
    """Wallis-type quotient W_alpha(m) = Gamma(m + alpha/2) / Gamma(m + 1 - alpha/2)."""
    return gamma_ratio(m + 0.5 * alpha, m + 1.0 - 0.5 * alpha)


# ------------------------------------------------------------ Bessel J ---

def _as_array(x):
    scalar = np.ndim(x) == 0
    return scalar, np.atleast_1d(np.asarray(x, dtype=np.float64))


def _check_order(n):
    if int(n) != n or n < 0:
        raise DomainError(f"order must be a nonnegative integer, got {n}")
    return int(n)


def bessel_j(n, x):
    """Bessel function of the first kind J_n(x) for x >= 0."""
    n = _check_order(n)
    scalar, xa = _as_array(x)
    if np.any(xa < 0) or np.any(np.isnan(xa)):
        raise DomainError("bessel_j needs x >= 0")
    out = _backend.core.jn(n, xa)
    return float(out[0]) if scalar else out


def bessel_j_prime(n, x):
    """Derivative J_n'(x) = (n/x) J_n(x) - J_{n+1}(x) (and -J_1 for n = 0)."""
    n = _check_order(n)
    scalar, xa = _as_array(x)
    if n == 0:
        out = -_backend.core.jn(1, xa)
    else:
        out = 0.5 * (_backend.core.jn(n - 1, xa) - _backend.core.jn(n + 1, xa))
    return float(out[0]) if scalar else out


# --------------------------------------------------------- Bessel I, K ---

def log_bessel_ik_table(nmax, x):
    """log I_n(x) and log K_n(x) for all n = 0..nmax.

    Returns
    -------
    log_i, log_k : ndarray, shape (nmax + 1,) + shape(x)
        log K_n(0) is +inf and log I_n(0) is -inf for n >= 1.
    """
    nmax = _check_order(nmax)
    xa = np.asarray(x, dtype=np.float64)
    flat = np.atleast_1d(xa).ravel()
    if np.any(flat < 0) or np.any(np.isnan(flat)):
        raise DomainError("modified Bessel functions need x >= 0")
    with np.errstate(divide="ignore"):
        li, lk = _backend.core.log_ik(nmax, flat)
    shape = (nmax + 1,) + xa.shape
    return li.reshape(shape), lk.reshape(shape)


def _log_ik(n, x):
    n = _check_order(n)
    scalar, xa = _as_array(x)
    li, lk = log_bessel_ik_table(n, xa)
    return scalar, li[n], lk[n]


def _out(scalar, arr):
    return float(arr[0]) if scalar else arr


def log_bessel_i(n, x):
    """log I_n(x)."""
    scalar, li, _ = _log_ik(n, x)
    return _out(scalar, li)


def log_bessel_k(n, x):
    """log K_n(x); raises DomainError at x = 0."""
    scalar, _, lk = _log_ik(n, x)
    if np.any(np.isinf(lk)):
        raise DomainError("K_n is singular at x = 0")
    return _out(scalar, lk)


def bessel_i(n, x):
    """Modified Bessel function I_n(x), x >= 0 (overflows to inf past x ~ 700)."""
    scalar, li, _ = _log_ik(n, x)
    with np.errstate(over="ignore"):
        return _out(scalar, np.exp(li))


def bessel_k(n, x):
    """Modified Bessel function K_n(x), x > 0.

    K_n diverges as x -> 0+ (logarithmically for n = 0, like x^-n otherwise);
    values beyond the float range are returned as inf.

    Raises
    ------
    DomainError
        At x = 0.
    """
    scalar, _, lk = _log_ik(n, x)
    if np.any(np.isinf(lk)):
        raise DomainError("K_n is singular at x = 0")
    with np.errstate(over="ignore"):
        return _out(scalar, np.exp(lk))


def bessel_i_scaled(n, x):
    """exp(-x) I_n(x)."""
    scalar, li, _ = _log_ik(n, x)
    xa = np.atleast_1d(np.asarray(x, dtype=np.float64))
    return _out(scalar, np.exp(li - xa))


def bessel_k_scaled(n, x):
    """exp(x) K_n(x), x > 0."""
    scalar, _, lk = _log_ik(n, x)
    if np.any(np.isinf(lk)):
        raise DomainError("K_n is singular at x = 0")
    xa = np.atleast_1d(np.asarray(x, dtype=np.float64))
    with np.errstate(over="ignore"):
        return _out(scalar, np.exp(lk + xa))


def bessel_ik(n, x):
    """Product I_n(x) K_n(x) for x > 0, without overflow."""
    scalar, li, lk = _log_ik(n, x)
    if np.any(np.isinf(lk)):
        raise DomainError("K_n is singular at x = 0")
    return _out(scalar, np.exp(li + lk))


def bessel_k_over_i(n, x):
    """Ratio K_n(x) / I_n(x) for x > 0, without overflow."""
    scalar, li, lk = _log_ik(n, x)
    if np.any(np.isinf(lk)):
        raise DomainError("K_n is singular at x = 0")
    with np.errstate(over="ignore"):
        return _out(scalar, np.exp(lk - li))


def bessel_i_ratio(n, a, x):
    """I_n(a x) / I_n(x) for 0 <= a and x > 0."""
    n = _check_order(n)
    scalar, xa = _as_array(x)
    li, _ = log_bessel_ik_table(n, np.concatenate([a * xa, xa]))
    k = xa.shape[0]
    return _out(scalar, np.exp(li[n, :k] - li[n, k:]))


# ---------------------------------------------------------- zero tables ---

def mcmahon(n, k, terms=2):
    """McMahon asymptotic estimate of the k-th positive zero of J_n.

    ``terms=1`` gives (k + n/2 - 1/4) pi; ``terms=2`` adds -(4n^2-1)/(8 beta).
    """
    beta = (np.asarray(k, dtype=np.float64) + 0.5 * n - 0.25) * math.pi
    if terms <= 1:
        return beta
    mu = 4.0 * n * n
    est = beta - (mu - 1.0) / (8.0 * beta)
    if terms >= 3:
        est = est - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * (8.0 * beta) ** 3)
    return est


@dataclass(frozen=True)
class BesselZeroTable:
    """Positive zeros x_{n,1} < ... < x_{n,K} of J_n."""

    order: int
    zeros: np.ndarray = field(repr=False)

    def __post_init__(self):
        z = np.array(self.zeros, dtype=np.float64)
        z.setflags(write=False)
        object.__setattr__(self, "zeros", z)

    @property
    def count(self):
        return int(self.zeros.shape[0])

    def __len__(self):
        return self.count

    def head(self, count):
        """Table restricted to the first ``count`` zeros."""
        if count > self.count:
            raise DomainError("table too short")
        return BesselZeroTable(self.order, self.zeros[:count])

    def _encoded(self):
        # shortest round-trip decimals: exact and independent of formatting width
        return ",".join(repr(float(z)) for z in self.zeros)

    def checksum(self):
        return hashlib.sha256(self._encoded().encode("ascii")).hexdigest()

    def to_json(self):
        """JSON text {order, count, zeros[], checksum} with round-trip decimals."""
        return (
            f'{{"order": {self.order}, "count": {self.count}, '
            f'"checksum": "{self.checksum()}", "zeros": [{self._encoded()}]}}'
        )

    @classmethod
    def from_json(cls, text):
        """Parse and validate; raises ValueError on any inconsistency."""
        obj = json.loads(text)
        table = cls(int(obj["order"]), np.array(obj["zeros"], dtype=np.float64))
        if table.count != int(obj["count"]):
            raise ValueError("count mismatch")
        if "checksum" in obj and obj["checksum"] != table.checksum():
            raise ValueError("checksum mismatch")
        if table.count > 1 and np.any(np.diff(table.zeros) <= 0):
            raise ValueError("zeros not increasing")
        return table


def cache_dir(path=None):
    """Directory for persisted tables: argument, else $ARTIFACT_CACHE_DIR,
    else ~/.cache/artifact."""
    if path is not None:
        return Path(path)
    env = os.environ.get("ARTIFACT_CACHE_DIR")
    if env:
        return Path(env)
    return Path.home() / ".cache" / "artifact"


_memo = {}
_memo_lock = threading.Lock()


def _newton_zeros(n, lo, hi, seed):
    """Safeguarded Newton on J_n inside sign-change brackets [lo, hi]."""
    core = _backend.core
    x = np.where((seed > lo) & (seed < hi), seed, 0.5 * (lo + hi))
    flo = core.jn(n, lo)
    for _ in range(200):
        f = core.jn(n, x)
        fp = -core.jn(1, x) if n == 0 else (n / x) * f - core.jn(n + 1, x)
        same = np.sign(f) == np.sign(flo)
        lo = np.where(same, x, lo)
        flo = np.where(same, f, flo)
        hi = np.where(same, hi, x)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = f / fp
        xn = x - step
        bad = ~np.isfinite(xn) | (xn <= lo) | (xn >= hi)
        xn = np.where(bad, 0.5 * (lo + hi), xn)
        done = np.abs(xn - x) <= 4e-16 * x
        x = xn
        if np.all(done):
            break
    # the stopping rule leaves up to an ulp or two; keep the neighbour with least |J_n|
    cand = np.stack([np.nextafter(np.nextafter(x, 0.0), 0.0), np.nextafter(x, 0.0), x,
                     np.nextafter(x, np.inf), np.nextafter(np.nextafter(x, np.inf), np.inf)])
    pick = np.argmin(np.abs(core.jn(n, cand.ravel())).reshape(cand.shape), axis=0)
    return cand[pick, np.arange(x.size)]


def _compute_zeros(n, count):
    start = max(float(n), 0.5)
    stop = float(mcmahon(n, count, terms=1)) + math.pi
    grid = np.arange(start, stop + 1.5, 1.5)
    vals = _backend.core.jn(n, grid)
    exact = np.nonzero(vals[1:] == 0.0)[0] + 1
    sgn = np.nonzero(vals[:-1] * vals[1:] < 0.0)[0]
    lo = grid[sgn]
    hi = grid[sgn + 1]
    zeros = _newton_zeros(n, lo, hi, mcmahon(n, np.arange(1, lo.size + 1), terms=3))
    if exact.size:
        zeros = np.sort(np.concatenate([zeros, grid[exact]]))
    if zeros.size < count:
        raise ConvergenceError(f"found {zeros.size} of {count} zeros of J_{n}")
    zeros = zeros[:count]
    resid = np.abs(_backend.core.jn(n, zeros))
    if np.any(resid >= 1e-12) or np.any(np.diff(zeros) <= 0):
        raise ConvergenceError(f"zero refinement failed for J_{n}")
    return zeros


def _write_table(table, fname):
    try:
        fname.parent.mkdir(parents=True, exist_ok=True)
        tmp = fname.with_suffix(f".tmp{os.getpid()}")
        tmp.write_text(table.to_json())
        os.replace(tmp, fname)
    except OSError:
        pass


def bessel_zeros(n, count, cache=True, path=None):
    """First ``count`` positive zeros of J_n.

    Zeros are bracketed by a sign scan with step 1.5 (below the minimal
    zero spacing), then refined by Newton iteration seeded from McMahon's
    expansion with bisection fallback.

    Parameters
    ----------
    n : int
        Order, n >= 0.
    count : int
        Number of zeros, >= 1.
    cache : bool
        Read and write the on-disk JSON cache.
    path : str or Path, optional
        Cache directory (see :func:`cache_dir`).

    Returns
    -------
    BesselZeroTable
    """
    n = _check_order(n)
    count = int(count)
    if count < 1:
        raise DomainError("count must be >= 1")
    fname = cache_dir(path) / f"bessel_zeros_n{n}_k{count}.json"
    table = None
    with _memo_lock:
        hit = _memo.get(n)
        if hit is not None and hit.count >= count:
            table = hit if hit.count == count else hit.head(count)
    if table is not None:
        if cache and not fname.exists():
            _write_table(table, fname)
        return table
    if cache and fname.exists():
        try:
            table = BesselZeroTable.from_json(fname.read_text())
            if table.order != n or table.count != count:
                table = None
        except (ValueError, KeyError, OSError):
            table = None
    if table is None:
        table = BesselZeroTable(n, _compute_zeros(n, count))
        if cache:
            _write_table(table, fname)
    with _memo_lock:
        old = _memo.get(n)
        if old is None or old.count < table.count:
            _memo[n] = table
    return table


# ---------------------------------------------------------- hypergeometric ---

def hyp2f1(c1, c2, c3, z, max_terms=2_000_000):
    """Gauss hypergeometric function 2F1(c1, c2; c3; z) for z in [0, 1].

    Power series with a rigorous tail bound below 1e-16 relative; at z = 1
    the Gauss closed form is returned.

    Raises
    ------
    PoleError
        If c3 is a nonpositive integer.
    DivergenceError
        If z = 1 and c1 + c2 - c3 >= 0 (non-terminating series).
    """
    c1, c2, c3, z = float(c1), float(c2), float(c3), float(z)
    if _is_nonpos_int(c3):
        raise PoleError("c3 must not be a nonpositive integer")
    if not 0.0 <= z <= 1.0:
        raise DomainError("z must lie in [0, 1]")
    terminating = _is_nonpos_int(c1) or _is_nonpos_int(c2)
    if z == 0.0:
        return 1.0
    if z == 1.0 and not terminating:
        s = c3 - c1 - c2
        if s <= 0.0:
            raise DivergenceError("2F1 diverges at z = 1 when c1 + c2 - c3 >= 0")
        return gamma(c3) * gamma(s) * rgamma(c3 - c1) * rgamma(c3 - c2)
    s = c3 - c1 - c2
    if z > 0.999 and not terminating and abs(s - round(s)) > 1e-6:
        return _hyp2f1_reflect(c1, c2, c3, z, s)
    return _hyp2f1_series(c1, c2, c3, z, max_terms)


def _gamma_sign(x):
    if x > 0.0:
        return 1.0
    return -1.0 if math.floor(-x) % 2 == 0 else 1.0


def _gamma_quotient(nums, dens):
    """prod Gamma(nums) / prod Gamma(dens); zero when a denominator is a pole."""
    if any(_is_nonpos_int(d) for d in dens):
        return 0.0
    if any(_is_nonpos_int(n) for n in nums):
        raise PoleError("Gamma pole in numerator")
    sign = 1.0
    logv = 0.0
    for v in nums:
        sign *= _gamma_sign(v)
        logv += _lgamma_scalar(v)
    for v in dens:
        sign *= _gamma_sign(v)
        logv -= _lgamma_scalar(v)
    return sign * math.exp(logv)


def _hyp2f1_reflect(c1, c2, c3, z, s):
    """Connection formula z -> 1 - z, valid when c3 - c1 - c2 is not an integer."""
    w = 1.0 - z
    f1 = _gamma_quotient((c3, s), (c3 - c1, c3 - c2))
    f2 = _gamma_quotient((c3, -s), (c1, c2))
    out = 0.0
    if f1 != 0.0:
        out += f1 * _hyp2f1_series(c1, c2, 1.0 - s, w)
    if f2 != 0.0:
        out += f2 * w ** s * _hyp2f1_series(c3 - c1, c3 - c2, 1.0 + s, w)
    return out


def _hyp2f1_series(c1, c2, c3, z, max_terms=2_000_000):
    if z == 0.0:
        return 1.0
    total = 1.0
    term = 1.0
    k0 = abs(c1) + abs(c2) + abs(c3) + 2.0
    chunk = 256
    k = 0
    while k < max_terms:
        ks = np.arange(k, k + chunk, dtype=np.float64)
        ratio = (c1 + ks) * (c2 + ks) / ((c3 + ks) * (ks + 1.0)) * z
        terms = term * np.cumprod(ratio)
        total += float(np.sum(terms))
        term = float(terms[-1])
        k += chunk
        if term == 0.0:
            return total
        r_now = abs(float(ratio[-1]))
        if k > k0:
            rho = max(r_now, z)
            if rho < 1.0 and abs(term) * rho / (1.0 - rho) <= 1e-16 * abs(total):
                return total
    raise ConvergenceError("2F1 series did not converge")


# ------------------------------------------------------------ Hurwitz zeta ---

_BERNOULLI = (1.0 / 6, -1.0 / 30, 1.0 / 42, -1.0 / 30, 5.0 / 66,
              -691.0 / 2730, 7.0 / 6, -3617.0 / 510)


def hurwitz_zeta(s, q):
    """Hurwitz zeta sum_{k>=0} (k + q)^-s for s > 1, q > 0 (Euler-Maclaurin)."""
    s, q = float(s), float(q)
    if s <= 1.0 or q <= 0.0:
        raise DomainError("hurwitz_zeta needs s > 1, q > 0")
    total = 0.0
    while q < 16.0:
        total += q ** (-s)
        q += 1.0
    total += q ** (1.0 - s) / (s - 1.0) + 0.5 * q ** (-s)
    fact = 1.0
    rising = s
    power = q ** (-s - 1.0)
    for j, b2j in enumerate(_BERNOULLI, start=1):
        fact *= (2 * j - 1) * (2 * j)
        total += b2j / fact * rising * power
        rising *= (s + 2 * j - 1) * (s + 2 * j)
        power /= q * q
    return total
