# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot numerical kernels.

Mirrors :mod:`artifact._pycore` function by function with per-element
loops instead of whole-array passes. Results agree with the numpy
fallback to rounding level.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, cos, sin, exp, log, log1p, fabs, floor, acosh, cosh, lgamma, M_PI

cnp.import_array()

cdef double SQRT_2_OVER_PI = sqrt(2.0 / M_PI)
cdef double HANKEL_MIN_X = 25.0
cdef double TINY_X = 1e-5
cdef double RESCALE = 1e250


cdef void _hankel_j01(double x, double *j0, double *j1) noexcept nogil:
    cdef double c = cos(x), s = sin(x), inv = 1.0 / x
    cdef double mu, p, q, term, cchi, schi, val
    cdef int nu, k
    for nu in range(2):
        mu = 4.0 * nu * nu
        p = 1.0
        q = 0.0
        term = 1.0
        for k in range(1, 40):
            term = term * (mu - (2 * k - 1) * (2 * k - 1)) / (8.0 * k) * inv
            if k % 2:
                if (k // 2) % 2 == 0:
                    q += term
                else:
                    q -= term
            else:
                if (k // 2) % 2 == 0:
                    p += term
                else:
                    p -= term
            if fabs(term) < 1e-17:
                break
        if nu == 0:
            cchi = c + s
            schi = s - c
        else:
            cchi = s - c
            schi = -(s + c)
        val = SQRT_2_OVER_PI * sqrt(inv) * (p * cchi - q * schi) / sqrt(2.0)
        if nu == 0:
            j0[0] = val
        else:
            j1[0] = val


cdef double _jn_miller(int n, double x) noexcept nogil:
    cdef double top = n if n > x else x
    cdef int start = <int>(top + 30 + 3 * sqrt(top))
    cdef double jp1 = 0.0, j = 1e-30, jm1, res = 0.0, norm = 0.0
    cdef int k
    start += start % 2
    if start == n:
        res = j
    for k in range(start, 0, -1):
        jm1 = (2.0 * k / x) * j - jp1
        jp1 = j
        j = jm1
        if k - 1 == n:
            res = j
        if (k - 1) % 2 == 0:
            norm += j if k - 1 == 0 else 2.0 * j
        if fabs(j) > RESCALE:
            j /= RESCALE
            jp1 /= RESCALE
            norm /= RESCALE
            res /= RESCALE
    return res / norm


cdef double _jn_one(int n, double x) noexcept nogil:
    cdef double j0, j1, jm, jc, jt
    cdef int k
    if x == 0.0:
        return 1.0 if n == 0 else 0.0
    if x < TINY_X:
        return exp(n * log(0.5 * x) - lgamma(n + 1.0)) * (1.0 - 0.25 * x * x / (n + 1.0))
    if x >= HANKEL_MIN_X and x >= n:
        _hankel_j01(x, &j0, &j1)
        if n == 0:
            return j0
        jm = j0
        jc = j1
        for k in range(1, n):
            jt = (2.0 * k / x) * jc - jm
            jm = jc
            jc = jt
        return jc
    return _jn_miller(n, x)


def jn(int n, x):
    """J_n(x) for integer n >= 0 and an array of x >= 0."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xv = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty_like(xv)
    cdef Py_ssize_t i, m = xv.shape[0]
    with nogil:
        for i in range(m):
            out[i] = _jn_one(n, xv[i])
    return out.reshape(np.shape(x))


cdef void _k01_scaled(double x, double *k0, double *k1) noexcept nogil:
    cdef double tmax = acosh(1.0 + 80.0 / x)
    cdef int nodes = <int>(tmax / 0.08) + 1
    cdef double h, t, e, a0 = 0.5, a1 = 0.5
    cdef int j
    if nodes < 400:
        nodes = 400
    h = tmax / nodes
    for j in range(1, nodes + 1):
        t = j * h
        e = exp(-x * (cosh(t) - 1.0))
        a0 += e
        a1 += e * cosh(t)
    k0[0] = a0 * h
    k1[0] = a1 * h


def log_ik(int nmax, x):
    """log I_n(x) and log K_n(x) for n = 0..nmax, shape (nmax + 1, len(x))."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t nx = xv.shape[0], i
    cdef cnp.ndarray[cnp.float64_t, ndim=2] log_i = np.empty((nmax + 1, nx))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] log_k = np.empty((nmax + 1, nx))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ratios = np.empty(max(nmax, 1))
    cdef double xi, r, tail, li, lk, q, k0s, k1s
    cdef int top, k
    for i in range(nx):
        xi = xv[i]
        if xi <= 0.0:
            for k in range(nmax + 1):
                log_i[k, i] = -np.inf if k > 0 else 0.0
                log_k[k, i] = np.inf
            continue
        top = nmax + 30 + <int>(10.0 * sqrt(xi))
        r = 0.0
        tail = 0.0
        for k in range(top, -1, -1):
            r = xi / (2.0 * (k + 1) + xi * r)
            tail = r * (1.0 + tail)
            if k < nmax:
                ratios[k] = r
        li = xi - log1p(2.0 * tail)
        log_i[0, i] = li
        for k in range(nmax):
            li = li + log(ratios[k])
            log_i[k + 1, i] = li
        _k01_scaled(xi, &k0s, &k1s)
        lk = log(k0s) - xi
        log_k[0, i] = lk
        q = k1s / k0s
        for k in range(nmax):
            lk = lk + log(q)
            log_k[k + 1, i] = lk
            q = 1.0 / q + 2.0 * (k + 1) / xi
    return log_i, log_k


cdef inline void _basis(double t, double h, double *b, double *db) noexcept nogil:
    # b[c*2 + d]: node c in {0, 1}, derivative order d in {0, 1}
    cdef double t2 = t * t, t3 = t2 * t
    b[0] = 2 * t3 - 3 * t2 + 1
    b[1] = (t3 - 2 * t2 + t) * h
    b[2] = -2 * t3 + 3 * t2
    b[3] = (t3 - t2) * h
    db[0] = (6 * t2 - 6 * t) / h
    db[1] = 3 * t2 - 4 * t + 1
    db[2] = (-6 * t2 + 6 * t) / h
    db[3] = 3 * t2 - 2 * t


def hermite3(data, origin, step, p1, p2, p3):
    """Tricubic Hermite interpolation on a uniform grid; see the numpy fallback."""
    cdef cnp.ndarray[cnp.float64_t, ndim=4] d = np.ascontiguousarray(data, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] q1 = np.ascontiguousarray(p1, dtype=np.float64).ravel()
    cdef cnp.ndarray[cnp.float64_t, ndim=1] q2 = np.ascontiguousarray(p2, dtype=np.float64).ravel()
    cdef cnp.ndarray[cnp.float64_t, ndim=1] q3 = np.ascontiguousarray(p3, dtype=np.float64).ravel()
    cdef Py_ssize_t m = q1.shape[0], i
    cdef cnp.ndarray[cnp.float64_t, ndim=1] val = np.empty(m)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] g1 = np.empty(m)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] g2 = np.empty(m)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] g3 = np.empty(m)
    cdef double o1 = origin[0], o2 = origin[1], o3 = origin[2]
    cdef double h1 = step[0], h2 = step[1], h3 = step[2]
    cdef Py_ssize_t n1 = d.shape[0], n2 = d.shape[1], n3 = d.shape[2]
    cdef double s1, s2, s3, t1, t2, t3, f, w1, w2, w3
    cdef double v, a1, a2, a3
    cdef Py_ssize_t i1, i2, i3
    cdef int c1, c2, c3, e1, e2, e3
    cdef double b1[4], db1[4], b2[4], db2[4], b3[4], db3[4]
    if q2.shape[0] != m or q3.shape[0] != m:
        raise ValueError("query arrays must have equal length")
    with nogil:
        for i in range(m):
            s1 = (q1[i] - o1) / h1
            s2 = (q2[i] - o2) / h2
            s3 = (q3[i] - o3) / h3
            i1 = <Py_ssize_t>floor(s1)
            i2 = <Py_ssize_t>floor(s2)
            i3 = <Py_ssize_t>floor(s3)
            i1 = 0 if i1 < 0 else (n1 - 2 if i1 > n1 - 2 else i1)
            i2 = 0 if i2 < 0 else (n2 - 2 if i2 > n2 - 2 else i2)
            i3 = 0 if i3 < 0 else (n3 - 2 if i3 > n3 - 2 else i3)
            _basis(s1 - i1, h1, b1, db1)
            _basis(s2 - i2, h2, b2, db2)
            _basis(s3 - i3, h3, b3, db3)
            v = 0.0
            a1 = 0.0
            a2 = 0.0
            a3 = 0.0
            for c1 in range(2):
                for c2 in range(2):
                    for c3 in range(2):
                        for e1 in range(2):
                            for e2 in range(2):
                                for e3 in range(2):
                                    f = d[i1 + c1, i2 + c2, i3 + c3, e1 + 2 * e2 + 4 * e3]
                                    w1 = b1[2 * c1 + e1]
                                    w2 = b2[2 * c2 + e2]
                                    w3 = b3[2 * c3 + e3]
                                    v += w1 * w2 * w3 * f
                                    a1 += db1[2 * c1 + e1] * w2 * w3 * f
                                    a2 += w1 * db2[2 * c2 + e2] * w3 * f
                                    a3 += w1 * w2 * db3[2 * c3 + e3] * f
            val[i] = v
            g1[i] = a1
            g2[i] = a2
            g3[i] = a3
    return val, g1, g2, g3
