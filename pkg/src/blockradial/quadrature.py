"""Quadrature rules shared by the transform, kernel, and oscillatory modules."""

from __future__ import annotations

import math

import numpy as np
from scipy.special import roots_jacobi

__all__ = ["theta_rule", "gauss_legendre_panels", "gauss_legendre_edges",
           "jacobi_axis_rule"]

_GL_CACHE = {}


def _leggauss(order):
    if order not in _GL_CACHE:
        _GL_CACHE[order] = np.polynomial.legendre.leggauss(order)
    return _GL_CACHE[order]


def theta_rule(d, k, n):
    """Nodes and weights for block-sphere integrals.

    Returns (cos_t, sin_t, w) with

        integral_0^{pi/2} G(cos t, sin t) cos^(d-k-1) t sin^(k-1) t dt
            ~= sum_i w_i G(cos_i, sin_i).

    Gauss-Jacobi in u = cos^2 t, exact for polynomial G of high degree and
    correct for the endpoint powers even when a block has dimension 1.
    """
    a, b = d - k - 1, k - 1
    alpha, beta = 0.5 * (b - 1), 0.5 * (a - 1)
    x, w = roots_jacobi(n, alpha, beta)
    u = 0.5 * (x + 1.0)
    const = 2.0 ** (-0.5 * (a + b + 2))
    return np.sqrt(u), np.sqrt(1.0 - u), w * const


def gauss_legendre_panels(a, b, n_panels, order=6):
    """Composite Gauss-Legendre rule with uniform panels on [a, b]."""
    return gauss_legendre_edges(np.linspace(a, b, n_panels + 1), order)


def gauss_legendre_edges(edges, order=6):
    """Composite Gauss-Legendre rule with the given panel edges."""
    nodes, weights = _leggauss(order)
    edges = np.asarray(edges, dtype=float)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    x = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    w = (half[:, None] * weights[None, :]).ravel()
    return x, w


def jacobi_axis_rule(alpha, n_panels, order=6):
    """Rule for integral_{-1}^{1} F(s) (1-s^2)^alpha ds, alpha > -1.

    Each half is mapped by s = +-(1 - v^2), which turns the endpoint weight
    into v^(2*alpha+1) (smooth for the half-integer alphas of sphere
    reductions).  The panel touching the endpoint uses Gauss-Jacobi for the
    residual power; interior panels are Gauss-Legendre.  The returned
    weights include the (1-s^2)^alpha factor.
    """
    if alpha <= -1:
        raise ValueError("alpha must exceed -1")
    n_panels = max(int(n_panels), 2)
    pow_v = 2.0 * alpha + 1.0
    edges = np.linspace(0.0, 1.0, n_panels + 1)

    v_list, w_list = [], []
    # endpoint panel [0, v1] with weight v^pow_v
    v1 = edges[1]
    if abs(pow_v) < 1e-14:
        xj, wj = _leggauss(order)
        vj = 0.5 * v1 * (xj + 1.0)
        wj = wj * 0.5 * v1
    else:
        xj, wj = roots_jacobi(order, 0.0, pow_v)
        vj = 0.5 * v1 * (xj + 1.0)
        wj = wj * (0.5 * v1) ** (pow_v + 1.0)
    v_list.append(vj)
    w_list.append(wj)
    # interior panels, weight evaluated explicitly
    if n_panels > 1:
        vg, wg = gauss_legendre_panels(v1, 1.0, n_panels - 1, order)
        v_list.append(vg)
        w_list.append(wg * vg**pow_v)
    v = np.concatenate(v_list)
    w = np.concatenate(w_list) * (2.0 - v * v) ** alpha * 2.0

    s_pos = 1.0 - v * v
    s = np.concatenate([-s_pos, s_pos])
    ww = np.concatenate([w, w])
    return s, ww
