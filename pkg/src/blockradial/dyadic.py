"""Smooth radial cutoffs and partitions of unity.

All cutoffs are built from a single master mollifier step (the normalized
antiderivative of ``exp(-1/(1-t**2))``), so dyadic partitions telescope
exactly instead of relying on numerical cancellation.  Derivatives up to
order 8 are evaluated through an exact recurrence, not finite differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


__all__ = [
    "SmoothCutoff",
    "RadialCutoffFamily",
    "ZeroCutoffs",
    "make_bump",
    "make_step",
    "make_partition",
    "make_zero_cutoffs",
    "DeltaTooLargeError",
]

MAX_DERIVATIVE_ORDER = 8

# Points with 1 - v**2 below this are treated as exact zeros of the mollifier;
# the true values there are below exp(-1e8).
_EDGE_GUARD = 1e-8


class DeltaTooLargeError(ValueError):
    """Zero-localizing cutoffs violate a support condition."""


def _mollifier_derivatives(v, order):
    """Derivatives g, g', ..., g^(order) of g(v) = exp(-1/(1-v**2)).

    Uses g' = g * w' with w = -1/(1-v**2) and the Leibniz recurrence
    g^(m) = sum_i C(m-1, i) g^(i) w^(m-i); w^(n) is explicit via partial
    fractions.  Outside (-1, 1) all orders vanish identically.
    """
    v = np.asarray(v, dtype=float)
    inside = (1.0 - v * v) > _EDGE_GUARD
    vs = np.where(inside, v, 0.0)

    g = np.zeros((order + 1,) + vs.shape)
    g[0] = np.exp(-1.0 / (1.0 - vs * vs))
    if order >= 1:
        # w^(n) for n = 1..order
        w = np.zeros((order + 1,) + vs.shape)
        one_m = 1.0 - vs
        one_p = 1.0 + vs
        for n in range(1, order + 1):
            fact = math.factorial(n)
            w[n] = -0.5 * fact * (one_m ** -(n + 1) + (-1.0) ** n * one_p ** -(n + 1))
        for m in range(1, order + 1):
            acc = np.zeros_like(vs)
            for i in range(m):
                acc += math.comb(m - 1, i) * g[i] * w[m - i]
            g[m] = acc
    for m in range(order + 1):
        g[m] = np.where(inside, g[m], 0.0)
    return g


class _MasterStep:
    """Normalized antiderivative S of the mollifier on [-1, 1].

    S(-1) = 0, S(1) = 1, S is C-infinity on the line (constant outside).
    Values come from a dense linear-interpolation table (abs error < 5e-9,
    fast enough for quadrature hot paths); derivatives come from the exact
    mollifier recurrence.
    """

    def __init__(self, n_table=1 << 15, gl_order=12):
        nodes, gl_w = np.polynomial.legendre.leggauss(gl_order)
        u = np.linspace(-1.0, 1.0, n_table + 1)
        # per-cell Gauss-Legendre integrals of g, accumulated
        mid = 0.5 * (u[:-1] + u[1:])
        half = 0.5 * (u[1:] - u[:-1])
        pts = mid[:, None] + half[:, None] * nodes[None, :]
        g = _mollifier_derivatives(pts, 0)[0]
        cell = (g * gl_w[None, :]).sum(axis=1) * half
        cum = np.concatenate([[0.0], np.cumsum(cell)])
        self.mass = cum[-1]
        self._u = u
        self._table = cum / self.mass

    def value(self, u):
        u = np.asarray(u, dtype=float)
        return np.interp(u, self._u, self._table)

    def derivative(self, u, order):
        if order < 1:
            return self.value(u)
        g = _mollifier_derivatives(u, order - 1)
        return g[order - 1] / self.mass


_MASTER = None


def _master():
    global _MASTER
    if _MASTER is None:
        _MASTER = _MasterStep()
    return _MASTER


@dataclass(frozen=True)
class SmoothCutoff:
    """C-infinity cutoff equal to 1 on its plateau and 0 outside its support.

    ``rise`` and ``fall`` are the transition intervals (either may be None
    for one-sided steps).  The profile on each transition is the master
    mollifier step under an affine change of variables, so two cutoffs with
    matching transition intervals agree exactly.
    """

    rise: tuple | None = None
    fall: tuple | None = None

    def __post_init__(self):
        if self.rise is None and self.fall is None:
            raise ValueError("cutoff needs at least one transition")
        for tr in (self.rise, self.fall):
            if tr is not None and not tr[0] < tr[1]:
                raise ValueError(f"empty transition interval {tr}")
        if self.rise is not None and self.fall is not None:
            if self.rise[1] > self.fall[0]:
                raise ValueError("rise and fall transitions overlap")

    @property
    def support(self):
        lo = self.rise[0] if self.rise is not None else -math.inf
        hi = self.fall[1] if self.fall is not None else math.inf
        return (lo, hi)

    @property
    def plateau(self):
        lo = self.rise[1] if self.rise is not None else -math.inf
        hi = self.fall[0] if self.fall is not None else math.inf
        if lo > hi:
            return None
        return (lo, hi)

    def _map(self, t, interval):
        a, b = interval
        return (2.0 * t - a - b) / (b - a)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.ones_like(t)
        m = _master()
        if self.rise is not None:
            a, b = self.rise
            out = out * np.where(t <= a, 0.0, np.where(t >= b, 1.0, m.value(self._map(t, self.rise))))
        if self.fall is not None:
            a, b = self.fall
            out = out * np.where(t <= a, 1.0, np.where(t >= b, 0.0, 1.0 - m.value(self._map(t, self.fall))))
        return out if out.ndim else float(out)

    def derivative(self, t, order=1):
        """Exact derivative of the given order (1..8)."""
        if not 1 <= order <= MAX_DERIVATIVE_ORDER:
            raise ValueError(f"derivative order must be in 1..{MAX_DERIVATIVE_ORDER}")
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        m = _master()
        # transitions are disjoint, so at any point one factor is constant
        if self.rise is not None:
            a, b = self.rise
            scale = (2.0 / (b - a)) ** order
            inside = (t > a) & (t < b)
            d = m.derivative(self._map(np.where(inside, t, 0.5 * (a + b)), self.rise), order)
            out = out + np.where(inside, scale * d, 0.0)
        if self.fall is not None:
            a, b = self.fall
            scale = (2.0 / (b - a)) ** order
            inside = (t > a) & (t < b)
            d = m.derivative(self._map(np.where(inside, t, 0.5 * (a + b)), self.fall), order)
            out = out - np.where(inside, scale * d, 0.0)
        return out if out.ndim else float(out)


def make_bump(support, plateau) -> SmoothCutoff:
    """Smooth bump: 1 on ``plateau``, 0 outside ``support``.

    The plateau must sit strictly inside the support; otherwise the
    transition intervals would be empty.
    """
    (sa, sb), (pa, pb) = support, plateau
    if not (sa < pa <= pb < sb):
        raise ValueError(f"plateau {plateau} must lie strictly inside support {support}")
    return SmoothCutoff(rise=(sa, pa), fall=(pb, sb))


def make_step(transition) -> SmoothCutoff:
    """Monotone smooth step: 0 left of the transition, 1 right of it."""
    return SmoothCutoff(rise=tuple(transition))


@dataclass(frozen=True)
class RadialCutoffFamily:
    """Dyadic partition of unity chi0(z) + sum_j chi(2**-j z) = 1 on [0, inf).

    ``chi`` is supported in [1/2, 2]; the identity is exact by telescoping
    because chi(z) = H(2z) - H(z) for the common step H, and scalings by
    powers of two are exact in floating point.
    """

    chi0: SmoothCutoff
    chi: SmoothCutoff
    j_max: int

    def term(self, j, z):
        """chi0(z) for j = 0, else chi(2**-j z)."""
        if j == 0:
            return self.chi0(np.asarray(z, dtype=float))
        return self.chi(np.ldexp(np.asarray(z, dtype=float), -j))

    def partition_sum(self, z):
        z = np.asarray(z, dtype=float)
        total = self.chi0(z)
        for j in range(1, self.j_max + 1):
            total = total + self.term(j, z)
        return total


def make_partition(j_max: int) -> RadialCutoffFamily:
    """Dyadic family with terms j = 0..j_max; exact for z <= 2**j_max."""
    if j_max < 1:
        raise ValueError("j_max must be >= 1")
    step = (1.0, 2.0)
    chi0 = SmoothCutoff(fall=step)           # 1 - H
    chi = SmoothCutoff(rise=(0.5, 1.0), fall=step)  # H(2z) - H(z)
    return RadialCutoffFamily(chi0=chi0, chi=chi, j_max=j_max)


@dataclass(frozen=True)
class ZeroCutoffs:
    """Localizers chi_m around symbol zeros plus the complement 1 - sum chi_m."""

    localizers: list
    zeros: tuple
    delta: float

    def complement(self, r):
        r = np.asarray(r, dtype=float)
        out = np.ones_like(r)
        for chi in self.localizers:
            out = out - chi(r)
        return out if out.ndim else float(out)


def make_zero_cutoffs(symbol, delta=None, n_check=512) -> ZeroCutoffs:
    """Cutoffs chi_m with chi_m = 1 on |r - r_m| <= delta, supported in
    |r - r_m| <= 2*delta.

    ``symbol`` needs attributes ``zeros`` (sorted positive reals) and ``dP``
    (derivative evaluator).  Checks: supports pairwise disjoint, 0 excluded,
    and |P'| > 0 on each support (sampled at ``n_check`` points).
    """
    zeros = tuple(float(r) for r in symbol.zeros)
    if not zeros:
        return ZeroCutoffs(localizers=[], zeros=(), delta=0.0)
    if any(r <= 0 for r in zeros):
        raise ValueError("symbol zeros must be positive")
    gaps = [b - a for a, b in zip(zeros, zeros[1:])]
    if delta is None:
        delta = min([min(zeros)] + gaps) / 4.0
    delta = float(delta)
    if delta <= 0:
        raise ValueError("delta must be positive")

    if min(zeros) - 2 * delta <= 0:
        raise DeltaTooLargeError("support of a zero cutoff reaches 0")
    for g in gaps:
        if 4 * delta > g:
            raise DeltaTooLargeError(f"supports overlap: zero gap {g} < 4*delta")

    chis = []
    for rm in zeros:
        chi = make_bump((rm - 2 * delta, rm + 2 * delta), (rm - delta, rm + delta))
        rr = np.linspace(rm - 2 * delta, rm + 2 * delta, n_check)
        if np.min(np.abs(symbol.dP(rr))) <= 0.0:
            raise DeltaTooLargeError(f"P' vanishes on the support around r={rm}")
        chis.append(chi)
    return ZeroCutoffs(localizers=chis, zeros=zeros, delta=delta)
