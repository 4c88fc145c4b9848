"""Quadrature rules: Gauss-Legendre, Gauss-Jacobi, adaptive Gauss-Kronrod.

Gauss-Legendre nodes come from numpy; Gauss-Jacobi nodes are computed by
the Golub-Welsch eigenvalue method. The adaptive integrator bisects the
panel with the largest Kronrod-minus-Gauss error estimate.
"""
import heapq
import math
from functools import lru_cache

import numpy as np

from .errors import DomainError, QuadratureError
from .specfun import lgamma

__all__ = [
    "gauss_legendre", "gauss_jacobi", "gauss_jacobi_01", "composite_legendre",
    "quad_gk", "quad_algebraic",
]


@lru_cache(maxsize=64)
def _leggauss(n):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(n, a=-1.0, b=1.0):
    """n-point Gauss-Legendre nodes and weights on [a, b]."""
    x, w = _leggauss(int(n))
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def composite_legendre(edges, order):
    """Composite Gauss-Legendre rule over consecutive panels ``edges``."""
    edges = np.asarray(edges, dtype=np.float64)
    x, w = _leggauss(int(order))
    lo, hi = edges[:-1, None], edges[1:, None]
    half = 0.5 * (hi - lo)
    return (lo + half * (x + 1.0)).ravel(), (half * w).ravel()


@lru_cache(maxsize=64)
def _jacobi(n, a, b):
    if n < 1:
        raise DomainError("need at least one node")
    if a <= -1.0 or b <= -1.0:
        raise DomainError("Jacobi exponents must exceed -1")
    k = np.arange(n, dtype=np.float64)
    s = 2.0 * k + a + b
    with np.errstate(divide="ignore", invalid="ignore"):
        diag = (b * b - a * a) / (s * (s + 2.0))
    diag[0] = (b - a) / (a + b + 2.0)
    off = np.empty(max(n - 1, 0))
    if n > 1:
        off[0] = 4.0 * (1 + a) * (1 + b) / ((2 + a + b) ** 2 * (3 + a + b))
        kk = k[2:]
        ss = 2.0 * kk + a + b
        off[1:] = (4.0 * kk * (kk + a) * (kk + b) * (kk + a + b)
                   / (ss * ss * (ss + 1.0) * (ss - 1.0)))
    jac = np.diag(diag) + np.diag(np.sqrt(off), 1) + np.diag(np.sqrt(off), -1)
    x, v = np.linalg.eigh(jac)
    mu0 = math.exp((a + b + 1.0) * math.log(2.0) + lgamma(a + 1.0)
                   + lgamma(b + 1.0) - lgamma(a + b + 2.0))
    w = mu0 * v[0] ** 2
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_jacobi(n, a, b):
    """Gauss-Jacobi rule on [-1, 1] for the weight (1-x)^a (1+x)^b."""
    return _jacobi(int(n), float(a), float(b))


def gauss_jacobi_01(n, beta, scale=1.0):
    """Rule on [0, scale] for the weight t^beta (beta > -1)."""
    x, w = gauss_jacobi(n, 0.0, beta)
    t = 0.5 * (x + 1.0)
    return scale * t, w * 2.0 ** (-beta - 1.0) * scale ** (beta + 1.0)


_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0,
])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_WK15 = np.concatenate([_WGK[:-1], _WGK[::-1]])
_WG7 = np.zeros(15)
_WG7[1:7:2] = _WG[:3]
_WG7[7] = _WG[3]
_WG7[9:15:2] = _WG[2::-1]


def _gk_panels(f, lo, hi):
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    x = mid[:, None] + half[:, None] * _NODES[None, :]
    y = np.asarray(f(x.ravel()), dtype=np.float64).reshape(x.shape)
    k = half * (y @ _WK15)
    g = half * (y @ _WG7)
    return k, np.abs(k - g)


def quad_gk(f, a, b, epsabs=1e-14, epsrel=1e-12, limit=4000, breakpoints=None):
    """Adaptive 7/15-point Gauss-Kronrod quadrature of a vectorised f.

    Parameters
    ----------
    f : callable
        Maps an ndarray of abscissae to an ndarray of values.
    a, b : float
        Finite limits.
    breakpoints : sequence of float, optional
        Initial partition points inside (a, b).

    Returns
    -------
    value, abserr : float

    Raises
    ------
    QuadratureError
        When ``limit`` panels do not reach the tolerance.
    """
    edges = [a] + sorted(p for p in (breakpoints or ()) if a < p < b) + [b]
    lo = np.array(edges[:-1], dtype=np.float64)
    hi = np.array(edges[1:], dtype=np.float64)
    k, e = _gk_panels(f, lo, hi)
    heap = [(-ei, li, hii, ki) for ei, li, hii, ki in zip(e, lo, hi, k)]
    heapq.heapify(heap)
    total = float(np.sum(k))
    err = float(np.sum(e))
    while err > max(epsabs, epsrel * abs(total)):
        if len(heap) >= limit:
            raise QuadratureError(
                f"quad_gk: {len(heap)} panels, error {err:.3e} above tolerance")
        batch = []
        target = max(epsabs, epsrel * abs(total)) / max(len(heap), 1)
        while heap and len(batch) < 32:
            item = heapq.heappop(heap)
            if batch and -item[0] < target:
                heapq.heappush(heap, item)
                break
            batch.append(item)
        blo = np.array([it[1] for it in batch])
        bhi = np.array([it[2] for it in batch])
        bmid = 0.5 * (blo + bhi)
        if np.any((bmid <= blo) | (bmid >= bhi)):
            raise QuadratureError("quad_gk: panel width at machine resolution")
        nlo = np.concatenate([blo, bmid])
        nhi = np.concatenate([bmid, bhi])
        nk, ne = _gk_panels(f, nlo, nhi)
        for it in batch:
            total -= it[3]
            err -= -it[0]
        for ei, li, hii, ki in zip(ne, nlo, nhi, nk):
            heapq.heappush(heap, (-ei, li, hii, ki))
        total += float(np.sum(nk))
        err += float(np.sum(ne))
    total = math.fsum(it[3] for it in heap)
    err = math.fsum(-it[0] for it in heap)
    return total, err


def quad_algebraic(f, beta, upper, epsabs=1e-15, epsrel=1e-12, head=2.0 ** -40,
                   panel=2.0, jacobi_order=24, limit=4000):
    """Integral of t^beta f(t) over [0, upper] for beta > -1 and smooth f.

    A Gauss-Jacobi rule absorbs t^beta on [0, head]; adaptive Gauss-Kronrod
    handles [head, upper] starting from a geometric partition up to 1 and
    panels of width ``panel`` beyond.

    Returns
    -------
    value, abserr : float
    """
    if beta <= -1.0:
        raise DomainError("beta must exceed -1")
    head = min(head, 0.5 * upper)
    t, w = gauss_jacobi_01(jacobi_order, beta, head)
    v0 = float(np.dot(w, f(t)))
    bps = []
    p = head
    while p < min(1.0, upper):
        bps.append(p)
        p *= 2.0
    q = 1.0
    while q < upper:
        bps.append(q)
        q += panel
    v1, e1 = quad_gk(lambda s: s ** beta * f(s), head, upper, epsabs=epsabs,
                     epsrel=epsrel, limit=limit, breakpoints=bps)
    return v0 + v1, e1 + 1e-16 * abs(v0)
