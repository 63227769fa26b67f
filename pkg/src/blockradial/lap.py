"""Limiting absorption: resolvents of elliptic radial symbols at energy zero.

A symbol P is smooth on [0, inf), nonzero at the origin, with finitely many
simple positive zeros and power behavior r^s at infinity.  The outgoing
resolvent applied to f splits into a regular multiplier part plus, per
zero, a delta contribution and a principal-value contribution built from
extensions off spheres of nearby radii:

    u = F^-1(chi0 P^-1 fhat)
        + sum_m [ -i pi r_m^(d-1) P'(r_m)^-1 E(r_m) +
                  p.v. integral chi_m(r) r^(d-1) P(r)^-1 E(r) dr ],

where E(r) is the extension of fhat from the radius-r sphere.  Principal
values are evaluated by singularity subtraction with an even window, whose
symmetric part integrates to zero exactly.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .dyadic import SmoothCutoff, ZeroCutoffs, make_bump, make_zero_cutoffs
from .fitting import envelope_points, envelope_slope
from .profile import BlockRadialProfile, lebesgue_norm
from .quadrature import gauss_legendre_panels
from .specfun import sphere_kernel
from .transform import apply_multiplier, forward_transform
from .kernels import extend_at_radius, _spectrum_fn

__all__ = [
    "SymbolModel",
    "ResolventField",
    "ValidationReport",
    "SlopeReport",
    "symbol_from_preset",
    "symbol_from_polynomial",
    "validate_symbol",
    "pv_integral",
    "plemelj_limit",
    "phi_m_kernel",
    "regular_part",
    "eps_resolvent",
    "resolve",
    "check_phim_asymptotics",
    "BandLimitError",
]


class BandLimitError(ValueError):
    """Input spectrum reaches too close to the grid's frequency boundary."""


@dataclass(frozen=True)
class SymbolModel:
    """Elliptic radial symbol with simple positive zeros.

    ``P`` and ``dP`` are vectorized evaluators; ``zeros`` are sorted;
    ``order`` is the power s with P(r) ~ r^s at infinity; ``cutoffs``
    localize each zero with half-width ``delta`` plateaus.
    """

    P: object
    dP: object
    zeros: tuple
    order: float
    cutoffs: ZeroCutoffs
    name: str = "symbol"

    @property
    def delta(self):
        return self.cutoffs.delta

    def chi0(self, r):
        return self.cutoffs.complement(r)

    def chi_m(self, m):
        return self.cutoffs.localizers[m]


def _locate_zeros(P, r_max=64.0, n_scan=20000):
    r = np.linspace(1e-9, r_max, n_scan)
    v = np.asarray(P(r))
    zeros = []
    sign_change = np.nonzero(np.sign(v[:-1]) * np.sign(v[1:]) < 0)[0]
    for i in sign_change:
        zeros.append(brentq(lambda x: float(P(np.asarray(x))), r[i], r[i + 1],
                            xtol=1e-15, rtol=8.9e-16))
    return tuple(zeros)


def _finish_symbol(P, dP, order, name, delta=None, zeros=None):
    if zeros is None:
        zeros = _locate_zeros(P)
    if np.abs(np.asarray(P(np.asarray(0.0)))) == 0.0:
        raise ValueError("symbol must not vanish at the origin")

    class _Stub:
        pass

    stub = _Stub()
    stub.zeros = zeros
    stub.dP = dP
    cutoffs = make_zero_cutoffs(stub, delta)
    return SymbolModel(P=P, dP=dP, zeros=tuple(zeros), order=float(order),
                       cutoffs=cutoffs, name=name)


def symbol_from_preset(name, *, s=2.0, mu=1.0, lam=2.0, delta=None) -> SymbolModel:
    """Named symbols: 'helmholtz' (r^2 - 1), 'fractional' (r^s - 1),
    'relativistic' ((mu + r^2)^(s/2) - lam, lam > mu > 0), 'massive'
    (r^2 + 1, no zeros)."""
    if name == "helmholtz":
        return _finish_symbol(lambda r: r * r - 1.0, lambda r: 2.0 * r, 2.0,
                              name, delta, zeros=(1.0,))
    if name == "fractional":
        return _finish_symbol(lambda r: r**s - 1.0,
                              lambda r: s * r ** (s - 1.0), s, f"fractional s={s}",
                              delta, zeros=(1.0,))
    if name == "relativistic":
        if not lam > mu > 0:
            raise ValueError("need lam > mu > 0")
        rm = (lam ** (2.0 / s) - mu) ** 0.5
        return _finish_symbol(lambda r: (mu + r * r) ** (0.5 * s) - lam,
                              lambda r: s * r * (mu + r * r) ** (0.5 * s - 1.0),
                              s, f"relativistic mu={mu} lam={lam} s={s}", delta,
                              zeros=(rm,))
    if name == "massive":
        return _finish_symbol(lambda r: r * r + 1.0, lambda r: 2.0 * r, 2.0,
                              name, delta, zeros=())
    raise ValueError(f"unknown symbol preset {name!r}")


def symbol_from_polynomial(coeffs, delta=None) -> SymbolModel:
    """Symbol from polynomial coefficients in r (low to high order)."""
    poly = np.polynomial.Polynomial(coeffs)
    dpoly = poly.deriv()
    return _finish_symbol(lambda r: poly(r), lambda r: dpoly(r),
                          poly.degree(), f"poly{tuple(coeffs)}", delta)


@dataclass(frozen=True)
class ValidationReport:
    """Spot checks of the symbol hypotheses."""

    zeros: tuple
    dP_at_zeros: tuple
    decay_slopes: tuple       # fitted slopes of d^k/dr^k (r^s / P) on a log grid
    decay_order: int
    ok: bool
    messages: tuple


def validate_symbol(symbol: SymbolModel, d=4, r_range=(8.0, 1e3), n=400) -> ValidationReport:
    """Check zero simplicity and the large-r derivative decay of r^s / P.

    Derivatives of order up to floor(d/2)+1 are taken by finite differences
    on a log grid; the report lists fitted log-log slopes (the hypothesis
    asks for slopes <= -k plus a margin).
    """
    msgs = []
    ok = True
    dmags = tuple(float(abs(symbol.dP(np.asarray(rm)))) for rm in symbol.zeros)
    for rm, dm in zip(symbol.zeros, dmags):
        if dm <= 1e-8:
            ok = False
            msgs.append(f"zero at {rm} is not numerically simple (|P'|={dm:.2e})")
    k_max = int(math.floor(d / 2)) + 1
    r = np.exp(np.linspace(math.log(r_range[0]), math.log(r_range[1]), n))
    g = r ** symbol.order / np.asarray(symbol.P(r))
    slopes = []
    cur = g
    cur_r = r
    for k in range(1, k_max + 1):
        cur = np.diff(cur) / np.diff(cur_r)
        cur_r = 0.5 * (cur_r[:-1] + cur_r[1:])
        mag = np.abs(cur)
        keep = mag > 0
        slopes.append(float(np.polyfit(np.log(cur_r[keep]), np.log(mag[keep]), 1)[0]))
    return ValidationReport(zeros=symbol.zeros, dP_at_zeros=dmags,
                            decay_slopes=tuple(slopes), decay_order=k_max,
                            ok=ok, messages=tuple(msgs))


def _default_window_bump(width):
    return make_bump((-width, width), (-0.5 * width, 0.5 * width))


def pv_integral(g, r0, window, eta: SmoothCutoff = None, panels=None, order=10,
                oscillation=1.0):
    """Principal value of g(r)/(r - r0) over the window.

    Singularity subtraction: integrates (g(r) - g(r0) eta(r - r0))/(r - r0);
    the subtracted even-window part has vanishing principal value by
    oddness.  ``oscillation`` hints the integrand's frequency so the panel
    count can resolve it.
    """
    a, b = float(window[0]), float(window[1])
    if not a < r0 < b:
        raise ValueError("window must contain the singularity")
    half = min(r0 - a, b - r0)
    if eta is None:
        eta = _default_window_bump(0.9 * half)
    lo, hi = eta.support
    if lo < a - r0 - 1e-12 or hi > b - r0 + 1e-12:
        warnings.warn("window for the even bump exceeds the integration window",
                      UserWarning, stacklevel=2)
    if panels is None:
        panels = max(24, int(math.ceil(1.2 * (b - a) * max(oscillation, 1.0))))
    x, w = gauss_legendre_panels(a, b, panels, order)
    g0 = complex(np.asarray(g(np.asarray([r0])), dtype=complex)[0])
    gx = np.asarray(g(x), dtype=complex)
    dr = x - r0
    integrand = (gx - g0 * eta(dr)) / dr
    return complex(w @ integrand)


def plemelj_limit(symbol: SymbolModel, m, h, panels=None):
    """Distributional limit of the localized resolvent pairing:

        -i pi h(r_m) / P'(r_m) + p.v. integral chi_m h / P.

    ``h`` must be C^1 with compact support.  The principal value runs over
    the support of chi_m with the smooth extension of (r - r_m)/P(r).
    """
    rm = symbol.zeros[m]
    chi = symbol.chi_m(m)
    dprm = float(symbol.dP(np.asarray(rm)))

    def g(r):
        r = np.asarray(r, dtype=float)
        dr = r - rm
        pv = np.asarray(symbol.P(r), dtype=float)
        ratio = np.where(np.abs(dr) > 1e-10, dr / np.where(pv != 0, pv, 1.0),
                         1.0 / dprm)
        return chi(r) * np.asarray(h(r), dtype=complex) * ratio

    window = chi.support
    pv = pv_integral(g, rm, window, panels=panels)
    delta_term = -1j * math.pi * complex(np.asarray(h(np.asarray([rm])))[0]) / dprm
    return delta_term + pv


def phi_m_kernel(symbol: SymbolModel, m, z_abs, d=3, z_max=2000.0, panels=None):
    """Convolution kernel of the m-th singular part at distance |z|:

        -i pi r_m^(d-1) P'(r_m)^-1 J_d(r_m |z|)
        + p.v. integral chi_m(r) r^(d-1) P(r)^-1 J_d(r |z|) dr.
    """
    z_abs = float(z_abs)
    if z_abs <= 0:
        raise ValueError("need |z| > 0")
    if z_abs > z_max:
        raise ValueError(f"|z| = {z_abs} beyond the oscillation budget {z_max}")
    rm = symbol.zeros[m]
    chi = symbol.chi_m(m)
    dprm = float(symbol.dP(np.asarray(rm)))

    def g(r):
        r = np.asarray(r, dtype=float)
        dr = r - rm
        pv = np.asarray(symbol.P(r), dtype=float)
        ratio = np.where(np.abs(dr) > 1e-10, dr / np.where(pv != 0, pv, 1.0),
                         1.0 / dprm)
        return chi(r) * r ** (d - 1) * sphere_kernel(d, r * z_abs) * ratio

    pv = pv_integral(g, rm, chi.support, panels=panels, oscillation=z_abs)
    delta_term = -1j * math.pi * rm ** (d - 1) / dprm * sphere_kernel(d, rm * z_abs)
    return delta_term + pv


def regular_part(f: BlockRadialProfile, symbol: SymbolModel):
    """Multiplier chi0 / P: finite everywhere since chi0 vanishes near zeros."""

    def mult(r):
        return symbol.chi0(r) / np.asarray(symbol.P(r))

    return apply_multiplier(f, mult)


def check_band_limit(f: BlockRadialProfile, frac=0.8, tol=1e-8):
    """Fraction of spectral mass above frac * r_grid_max must be tiny."""
    f_hat = forward_transform(f)
    rr = np.hypot(f_hat.grid1[:, None], f_hat.grid2[None, :])
    w = f_hat.cell_measures()
    total = float(np.sum(w * np.abs(f_hat.values) ** 2))
    r_lim = frac * min(f_hat.grid1[-1], f_hat.grid2[-1])
    high = float(np.sum(w * np.abs(f_hat.values) ** 2 * (rr > r_lim)))
    return high / max(total, 1e-300)


@dataclass(frozen=True)
class ResolventField:
    """Outgoing resolvent applied to f, with its parts kept separately."""

    profile: BlockRadialProfile
    regular: BlockRadialProfile
    delta_parts: tuple
    pv_parts: tuple

    def recombination_error(self):
        acc = self.regular.values.copy()
        for p in self.delta_parts:
            acc = acc + p.values
        for p in self.pv_parts:
            acc = acc + p.values
        scale = max(np.max(np.abs(self.profile.values)), 1e-300)
        return float(np.max(np.abs(acc - self.profile.values)) / scale)


def resolve(f: BlockRadialProfile, symbol: SymbolModel, n_theta=128,
            pv_order=10, band_limit_tol=1e-8) -> ResolventField:
    """Outgoing-resolvent solution on f's grid, parts kept separately.

    The radial principal values integrate sphere extensions E(r) against
    chi_m r^(d-1) / P with the same singularity subtraction as the scalar
    path; panel density tracks the spatial grid extent.
    """
    mass = check_band_limit(f, tol=band_limit_tol)
    if mass > band_limit_tol:
        raise BandLimitError(
            f"spectral mass fraction {mass:.2e} above 0.8 r_max exceeds {band_limit_tol:.0e}")
    d = f.dims.d
    reg = regular_part(f, symbol)
    t_max = math.hypot(f.grid1[-1], f.grid2[-1])
    deltas = []
    pvs = []
    for m, rm in enumerate(symbol.zeros):
        chi = symbol.chi_m(m)
        dprm = float(symbol.dP(np.asarray(rm)))
        e_rm = extend_at_radius(f, rm, n_theta=n_theta)
        deltas.append(e_rm.with_values(
            (-1j * math.pi * rm ** (d - 1) / dprm) * e_rm.values))

        a, b = chi.support
        panels = max(24, int(math.ceil(1.2 * (b - a) * t_max)))
        x, w = gauss_legendre_panels(a, b, panels, pv_order)
        eta = _default_window_bump(0.9 * min(rm - a, b - rm))
        pv = np.asarray(symbol.P(x), dtype=float)
        dr = x - rm
        ratio = np.where(np.abs(dr) > 1e-10, dr / np.where(pv != 0, pv, 1.0),
                         1.0 / dprm)
        coeff = chi(x) * x ** (d - 1) * ratio  # g(r) / E-part, smooth
        sub = eta(dr)
        acc = np.zeros_like(f.values, dtype=complex)
        e_rm_vals = e_rm.values
        for xi in range(x.size):
            e_vals = extend_at_radius(f, x[xi], n_theta=n_theta).values if coeff[xi] != 0 else 0.0
            g_here = coeff[xi] * e_vals
            g_sub = (rm ** (d - 1) / dprm) * sub[xi] * e_rm_vals
            acc += (w[xi] / dr[xi]) * (g_here - g_sub)
        pvs.append(BlockRadialProfile(f.dims, f.grid1, f.grid2, acc, source=f))
    total = reg.values.copy()
    for p in deltas:
        total = total + p.values
    for p in pvs:
        total = total + p.values
    prof = BlockRadialProfile(f.dims, f.grid1, f.grid2, total, source=f)
    return ResolventField(profile=prof, regular=reg, delta_parts=tuple(deltas),
                          pv_parts=tuple(pvs))


def eps_resolvent(f: BlockRadialProfile, symbol: SymbolModel, eps,
                  freq_grid=None):
    """Regularized resolvent: multiplier 1/(P + i eps).

    Uses a frequency grid refined near the symbol zeros so the Lorentzian
    widths eps/|P'| stay resolved.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if freq_grid is None:
        freq_grid = adapted_frequency_grid(symbol, eps, r_max=min(
            f.grid1[-1], f.grid2[-1]) * 0.35 + 2.0)

    def mult(r):
        return 1.0 / (np.asarray(symbol.P(r), dtype=complex) + 1j * eps)

    return apply_multiplier(f, mult, freq_grid, freq_grid)


def adapted_frequency_grid(symbol: SymbolModel, eps, r_max=8.0, base_n=280):
    """Frequency grid with extra resolution in the zero windows."""
    pieces = [np.linspace(0.0, r_max, base_n)]
    for rm in symbol.zeros:
        dprm = abs(float(symbol.dP(np.asarray(rm))))
        width = max(eps / max(dprm, 1e-8), 1e-6)
        n_loc = 400
        pieces.append(np.linspace(max(rm - 60 * width, 0.0),
                                  min(rm + 60 * width, r_max), n_loc))
        pieces.append(np.linspace(max(rm - 4 * width, 0.0),
                                  min(rm + 4 * width, r_max), n_loc))
    g = np.unique(np.concatenate(pieces))
    return g


@dataclass(frozen=True)
class SlopeReport:
    """Decay and oscillation diagnostics of a singular-part kernel."""

    leading_slope: float
    residual_slope: float
    frequency: float
    z_range: tuple


def check_phim_asymptotics(symbol: SymbolModel, m, d=3, z_range=(20.0, 500.0),
                           n_z=600, L=1) -> SlopeReport:
    """Fit the kernel's oscillation envelope, its frequency, and the decay
    of the residual after removing the fitted leading oscillation."""
    z = np.exp(np.linspace(math.log(z_range[0]), math.log(z_range[1]), n_z))
    vals = np.array([phi_m_kernel(symbol, m, zz, d=d) for zz in z])
    slope = envelope_slope(z, np.abs(vals))
    # least-squares leading term: z^((1-d)/2) (a e^{i r_m z} + b e^{-i r_m z})
    rm = symbol.zeros[m]
    power = 0.5 * (1 - d)
    basis = np.stack([z**power * np.exp(1j * rm * z),
                      z**power * np.exp(-1j * rm * z)], axis=1)
    coef, *_ = np.linalg.lstsq(basis, vals, rcond=None)
    resid = vals - basis @ coef
    r_slope = envelope_slope(z, np.abs(resid))
    # oscillation frequency from zero crossings of the imaginary part
    im = np.imag(vals * z ** (-power))
    sign_flips = np.nonzero(np.sign(im[:-1]) * np.sign(im[1:]) < 0)[0]
    zc = z[sign_flips]
    freq = math.pi / float(np.mean(np.diff(zc))) if zc.size > 3 else math.nan
    return SlopeReport(leading_slope=slope, residual_slope=r_slope,
                       frequency=freq, z_range=tuple(z_range))
