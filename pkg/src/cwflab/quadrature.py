"""Vectorised adaptive Gauss-Legendre quadrature over consecutive segments.

Used for the radial integrals after the ``sin**2`` substitution has removed
the inverse-square-root turning-point singularities, so integrands reaching
this module are smooth.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import QuadratureError

_LOW, _HIGH = 10, 20


@lru_cache(maxsize=None)
def _rule(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def _gauss(func, a, b, n):
    x, w = _rule(n)
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    pts = mid[:, None] + half[:, None] * x[None, :]
    vals = np.asarray(func(pts), dtype=float)
    return half * (vals @ w)


def segment_integrals(func, edges, tol=1e-10, max_depth=40):
    """Integrate ``func`` over each interval ``[edges[i], edges[i+1]]``.

    Parameters
    ----------
    func : callable
        Vectorised integrand; receives an array of abscissae of any shape.
    edges : array_like
        Increasing breakpoints.
    tol : float
        Absolute error target for the *cumulative* sum over all segments.
    max_depth : int
        Maximum number of bisections of any one segment.

    Returns
    -------
    values, errors : ndarray
        Per-segment integrals and error estimates (``|G20 - G10|`` summed
        over accepted sub-segments).
    """
    edges = np.asarray(edges, dtype=float)
    n_seg = edges.size - 1
    if n_seg < 1:
        return np.zeros(0), np.zeros(0)
    seg_tol = tol / n_seg

    values = np.zeros(n_seg)
    errors = np.zeros(n_seg)
    owner = np.arange(n_seg)
    a, b = edges[:-1].copy(), edges[1:].copy()
    local_tol = np.full(n_seg, seg_tol)
    for _ in range(max_depth + 1):
        hi = _gauss(func, a, b, _HIGH)
        lo = _gauss(func, a, b, _LOW)
        err = np.abs(hi - lo)
        floor = 8.0 * np.finfo(float).eps * np.abs(hi)
        ok = err <= np.maximum(local_tol, floor)
        np.add.at(values, owner[ok], hi[ok])
        np.add.at(errors, owner[ok], err[ok])
        if ok.all():
            return values, errors
        bad = ~ok
        mid = 0.5 * (a[bad] + b[bad])
        a = np.concatenate([a[bad], mid])
        b = np.concatenate([mid, b[bad]])
        owner = np.concatenate([owner[bad], owner[bad]])
        local_tol = np.concatenate([local_tol[bad], local_tol[bad]]) * 0.5
    achieved = float(np.sum(err[~ok]))
    raise QuadratureError(achieved, tol)


def cumulative(func, edges, tol=1e-10, max_depth=40):
    """Running integral from ``edges[0]`` to each breakpoint (first entry 0)."""
    values, errors = segment_integrals(func, edges, tol=tol, max_depth=max_depth)
    out = np.concatenate([[0.0], np.cumsum(values)])
    return out, float(np.sum(errors))


def integrate(func, a, b, tol=1e-10, n_pieces=32, max_depth=40):
    """Definite integral over ``[a, b]`` split into ``n_pieces`` starting segments."""
    edges = np.linspace(a, b, n_pieces + 1)
    values, errors = segment_integrals(func, edges, tol=tol, max_depth=max_depth)
    return float(np.sum(values)), float(np.sum(errors))
