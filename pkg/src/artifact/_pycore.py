"""Pure-numpy implementations of the hot numerical kernels.

This module mirrors the compiled extension ``artifact._ccore`` function by
function. It is selected when the extension is unavailable or when the
environment variable ``ARTIFACT_BACKEND=python`` is set.

All kernels take float64 arrays and return float64 arrays; scalar handling
and argument validation live in the public modules.
"""
import math

import numpy as np

_SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)
_HANKEL_MIN_X = 25.0
_TINY_X = 1e-5
_RESCALE = 1e250


def _hankel_j01(x):
    """J_0 and J_1 from the Hankel asymptotic expansion (x >= 25)."""
    out = []
    c, s = np.cos(x), np.sin(x)
    inv = 1.0 / x
    for nu in (0, 1):
        mu = 4.0 * nu * nu
        p = np.ones_like(x)
        q = np.zeros_like(x)
        term = np.ones_like(x)
        for k in range(1, 40):
            term = term * (mu - (2 * k - 1) ** 2) / (8.0 * k) * inv
            if k % 2:
                q += term if (k // 2) % 2 == 0 else -term
            else:
                p += term if (k // 2) % 2 == 0 else -term
            if np.max(np.abs(term)) < 1e-17:
                break
        if nu == 0:
            cchi, schi = (c + s), (s - c)
        else:
            cchi, schi = (s - c), -(s + c)
        out.append(_SQRT_2_OVER_PI * np.sqrt(inv) * (p * cchi - q * schi) / math.sqrt(2.0))
    return out[0], out[1]


def _jn_miller(n, x):
    """Miller backward recurrence normalised by J_0 + 2 sum J_2k = 1."""
    top = max(float(n), float(np.max(x)))
    start = int(top + 30 + 3 * math.sqrt(top))
    start += start % 2
    jp1 = np.zeros_like(x)
    j = np.full_like(x, 1e-30)
    res = np.zeros_like(x)
    norm = np.zeros_like(x)
    if start == n:
        res = j.copy()
    for k in range(start, 0, -1):
        jm1 = (2.0 * k / x) * j - jp1
        jp1, j = j, jm1
        if k - 1 == n:
            res = j.copy()
        if (k - 1) % 2 == 0:
            norm += j if k - 1 == 0 else 2.0 * j
        big = np.abs(j) > _RESCALE
        if np.any(big):
            f = np.where(big, 1.0 / _RESCALE, 1.0)
            j *= f
            jp1 *= f
            norm *= f
            res *= f
    return res / norm


def jn(n, x):
    """J_n(x) for integer n >= 0 and an array of x >= 0."""
    x = np.asarray(x, dtype=np.float64)
    out = np.zeros_like(x)
    zero = x == 0.0
    out[zero] = 1.0 if n == 0 else 0.0
    tiny = (~zero) & (x < _TINY_X)
    if np.any(tiny):
        xt = x[tiny]
        lead = np.exp(n * np.log(0.5 * xt) - math.lgamma(n + 1.0))
        out[tiny] = lead * (1.0 - 0.25 * xt * xt / (n + 1.0))
    big = (x >= _HANKEL_MIN_X) & (x >= n)
    if np.any(big):
        xb = x[big]
        j0, j1 = _hankel_j01(xb)
        if n == 0:
            out[big] = j0
        else:
            jm, jc = j0, j1
            for k in range(1, n):
                jm, jc = jc, (2.0 * k / xb) * jc - jm
            out[big] = jc
    mid = ~(zero | tiny | big)
    if np.any(mid):
        out[mid] = _jn_miller(n, x[mid])
    return out


def _k01_scaled(x):
    """exp(x) K_0(x) and exp(x) K_1(x) by the trapezoidal rule.

    Uses exp(x) K_nu(x) = int_0^inf exp(-x (cosh t - 1)) cosh(nu t) dt, whose
    integrand is analytic in a strip; the rule converges geometrically.
    """
    tmax = np.arccosh(1.0 + 80.0 / x)
    nodes = max(400, int(math.ceil(float(np.max(tmax)) / 0.08)))
    h = tmax / nodes
    k0 = 0.5 * np.ones_like(x)
    k1 = 0.5 * np.ones_like(x)
    for j in range(1, nodes + 1):
        t = j * h
        e = np.exp(-x * (np.cosh(t) - 1.0))
        k0 += e
        k1 += e * np.cosh(t)
    return k0 * h, k1 * h


def log_ik(nmax, x):
    """log I_n(x) and log K_n(x) for n = 0..nmax.

    Returns two arrays of shape (nmax + 1, len(x)). I_n uses backward
    continued-fraction ratios normalised by exp(x) = I_0 + 2 sum I_k;
    K_n uses an upward ratio recurrence from K_0, K_1.
    """
    x = np.asarray(x, dtype=np.float64)
    nx = x.shape[0]
    log_i = np.empty((nmax + 1, nx))
    log_k = np.empty((nmax + 1, nx))
    pos = x > 0.0
    log_i[:, ~pos] = -np.inf
    log_i[0, ~pos] = 0.0
    log_k[:, ~pos] = np.inf
    if not np.any(pos):
        return log_i, log_k
    xp = x[pos]
    top = nmax + 30 + int(10.0 * math.sqrt(float(np.max(xp))))
    r = np.zeros_like(xp)
    tail = np.zeros_like(xp)
    ratios = np.empty((max(nmax, 1), xp.shape[0]))
    for k in range(top, -1, -1):
        r = xp / (2.0 * (k + 1) + xp * r)
        tail = r * (1.0 + tail)
        if k < nmax:
            ratios[k] = r
    li = xp - np.log1p(2.0 * tail)
    rows_i = [li]
    for k in range(nmax):
        li = li + np.log(ratios[k])
        rows_i.append(li)
    log_i[:, pos] = np.array(rows_i)

    k0s, k1s = _k01_scaled(xp)
    lk = np.log(k0s) - xp
    rows_k = [lk]
    q = k1s / k0s
    for k in range(nmax):
        lk = lk + np.log(q)
        rows_k.append(lk)
        q = 1.0 / q + 2.0 * (k + 1) / xp
    log_k[:, pos] = np.array(rows_k)
    return log_i, log_k


def _hermite_basis(t, h):
    t2 = t * t
    t3 = t2 * t
    b = (
        (2 * t3 - 3 * t2 + 1, (t3 - 2 * t2 + t) * h),
        (-2 * t3 + 3 * t2, (t3 - t2) * h),
    )
    db = (
        ((6 * t2 - 6 * t) / h, 3 * t2 - 4 * t + 1),
        ((-6 * t2 + 6 * t) / h, 3 * t2 - 2 * t),
    )
    return b, db


def hermite3(data, origin, step, p1, p2, p3):
    """Tricubic Hermite interpolation on a uniform grid.

    Parameters
    ----------
    data : ndarray, shape (n1, n2, n3, 8)
        Channel ``d1 + 2*d2 + 4*d3`` holds the mixed derivative of order
        (d1, d2, d3) at each node.
    origin, step : sequences of 3 floats
        Grid origin and spacing per axis.
    p1, p2, p3 : ndarray
        Query coordinates (already inside the grid).

    Returns
    -------
    value, d1, d2, d3 : ndarray
        Interpolant and its first partial derivatives.
    """
    shape = data.shape[:3]
    idx = []
    loc = []
    for p, o, h, n in zip((p1, p2, p3), origin, step, shape):
        s = (np.asarray(p, dtype=np.float64) - o) / h
        i = np.clip(np.floor(s).astype(np.intp), 0, n - 2)
        idx.append(i)
        loc.append(s - i)
    bases = [_hermite_basis(t, h) for t, h in zip(loc, step)]
    val = np.zeros_like(loc[0])
    g1 = np.zeros_like(val)
    g2 = np.zeros_like(val)
    g3 = np.zeros_like(val)
    i1, i2, i3 = idx
    (b1, db1), (b2, db2), (b3, db3) = bases
    for c1 in (0, 1):
        for c2 in (0, 1):
            for c3 in (0, 1):
                node = data[i1 + c1, i2 + c2, i3 + c3]
                for d1 in (0, 1):
                    for d2 in (0, 1):
                        for d3 in (0, 1):
                            f = node[:, d1 + 2 * d2 + 4 * d3]
                            w1, w2, w3 = b1[c1][d1], b2[c2][d2], b3[c3][d3]
                            val += w1 * w2 * w3 * f
                            g1 += db1[c1][d1] * w2 * w3 * f
                            g2 += w1 * db2[c2][d2] * w3 * f
                            g3 += w1 * w2 * db3[c3][d3] * f
    return val, g1, g2, g3
