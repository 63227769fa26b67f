"""The restriction-extension operator and its dyadic kernel pieces.

``extend`` composes sphere restriction with the block-reduced extension

    Tf(t1, t2) = integral_0^(pi/2) fhat(cos t, sin t) J_(d-k)(t1 cos t)
                 J_k(t2 sin t) cos^(d-k-1) t sin^(k-1) t dt,

with overall constant 1.  The dyadic pieces come from the far-field
oscillatory sum Phi_j localized to the annulus [2^(j-1), 2^(j+1)]; their
reduced kernels K_j are double Jacobi-weighted oscillatory integrals of the
same class as the certified envelope bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dyadic import SmoothCutoff, make_bump, make_partition
from .profile import BlockRadialProfile, Dimensions, lebesgue_norm, lorentz_norm, LorentzSpec
from .quadrature import gauss_legendre_panels, jacobi_axis_rule, theta_rule
from .specfun import SphereKernelParams, hankel_alphas, sphere_kernel, surface_measure
from .transform import forward_transform, inverse_transform, apply_multiplier

try:
    from numba import njit, prange
    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False

__all__ = [
    "DyadicPiece",
    "RatioReport",
    "ScalingReport",
    "default_tau",
    "extend",
    "extend_at_radius",
    "phi_j",
    "kernel_Kj",
    "apply_Tj",
    "apply_Tj_multiplier",
    "apply_T0",
    "check_Kj_bound",
    "check_Tj_scaling",
    "KernelBudgetError",
]

_TAU = None


def default_tau() -> SmoothCutoff:
    """The annulus multiplier: 1 on [3/4, 5/4], supported in [1/2, 3/2]."""
    global _TAU
    if _TAU is None:
        _TAU = make_bump((0.5, 1.5), (0.75, 1.25))
    return _TAU


class KernelBudgetError(RuntimeError):
    """Requested kernel quadrature exceeds the configured budget."""


@dataclass(frozen=True)
class DyadicPiece:
    """One dyadic localization of the far-field kernel sum.

    ``L`` must exceed (d-1)/2 so the remainder beyond the oscillatory sum
    is integrable.
    """

    dims: Dimensions
    j: int
    L: int
    cutoff: SmoothCutoff

    def __post_init__(self):
        if self.j < 1:
            raise ValueError("dyadic index j must be >= 1")
        if not self.L > 0.5 * (self.dims.d - 1):
            raise ValueError("need L > (d-1)/2 for the dyadic remainder split")

    @classmethod
    def make(cls, dims: Dimensions, j: int, L=None):
        if L is None:
            L = int(math.floor(0.5 * (dims.d - 1))) + 1
        return cls(dims=dims, j=j, L=L, cutoff=make_partition(1).chi)

    @property
    def params(self):
        return SphereKernelParams(self.dims.d, self.L)

    @property
    def alphas(self):
        return hankel_alphas(self.dims.d, self.L)

    @property
    def annulus(self):
        lo, hi = self.cutoff.support
        return (2.0**self.j * lo, 2.0**self.j * hi)


def phi_j(piece: DyadicPiece, rho):
    """Oscillatory annulus kernel: chi(2^-j rho) times the degree-L
    far-field sum; real-valued and zero outside [2^(j-1), 2^(j+1)]."""
    rho = np.asarray(rho, dtype=float)
    scalar = rho.ndim == 0
    rho = np.atleast_1d(rho)
    cut = piece.cutoff(np.ldexp(rho, -piece.j))
    out = np.zeros_like(rho)
    live = cut > 0.0
    if live.any():
        r = rho[live]
        alphas = piece.alphas
        acc = np.zeros_like(r)
        power = 0.5 * (1 - piece.dims.d)
        eir = np.exp(1j * r)
        for l in range(piece.L):
            acc += r ** (power - l) * 2.0 * np.real(alphas[l] * eir)
        out[live] = cut[live] * acc
    return float(out[0]) if scalar else out


def _spectrum_fn(f: BlockRadialProfile, r_cap):
    """Evaluator of f's Fourier transform at arbitrary frequency points.

    Prefers an attached analytic closure; otherwise computes the spectrum
    once on a fine grid covering [0, r_cap] and interpolates (cached).
    """
    if f.spectrum_hint is not None:
        return f.spectrum_hint
    r_cap = max(4.0, float(math.ceil(r_cap)))  # bucket so nearby radii share
    key = ("fine_spectrum", r_cap)
    if key not in f._cache:
        n = max(256, int(40 * r_cap))
        grid = np.linspace(0.0, 1.1 * r_cap, n)
        f_hat = forward_transform(f, grid, grid)
        f._cache[key] = f_hat
    f_hat = f._cache[key]
    return lambda r1, r2: f_hat.interp(r1, r2, order=5)


def extend_at_radius(f: BlockRadialProfile, r, out_grid1=None, out_grid2=None,
                     n_theta=128):
    """Extension from the sphere of radius r of f's Fourier transform."""
    r = float(r)
    if r <= 0:
        raise ValueError("radius must be positive")
    dims = f.dims
    g1 = f.grid1 if out_grid1 is None else np.asarray(out_grid1, dtype=float)
    g2 = f.grid2 if out_grid2 is None else np.asarray(out_grid2, dtype=float)
    cos_t, sin_t, w = theta_rule(dims.d, dims.k, n_theta)
    trace = np.asarray(_spectrum_fn(f, max(r, 1.0))(r * cos_t, r * sin_t),
                       dtype=complex).reshape(cos_t.shape)
    k1 = sphere_kernel(dims.dk, np.abs(np.outer(g1, r * cos_t)))
    k2 = sphere_kernel(dims.k, np.abs(np.outer(g2, r * sin_t)))
    vals = (k1 * (w * trace)[None, :]) @ k2.T
    return BlockRadialProfile(dims, g1, g2, vals, source=f)


def extend(f: BlockRadialProfile, out_grid1=None, out_grid2=None, n_theta=128):
    """Restriction-extension operator T applied to f (unit sphere)."""
    return extend_at_radius(f, 1.0, out_grid1, out_grid2, n_theta)


# ---------------------------------------------------------------------------
# reduced dyadic kernel K_j

KJ_PANEL_COEFF = 0.25
KJ_PANEL_ORDER = 12
KJ_MAX_AXIS_PANELS = 1024
KJ_NODE_BUDGET = 2 << 26

if _HAVE_NUMBA:

    @njit(parallel=True, fastmath=True, cache=True)
    def _kj_tensor_sum(s1, w1, s2, w2, t1, t2, rho1, rho2, scale_j, lo, inv_h,
                       table, alphas_re, alphas_im, power):
        """Sum of w1 w2 Phi_j(dist(s)) over the tensor rule;
        dist = sqrt(t^2 + rho^2 - 2 t1 rho1 s1 - 2 t2 rho2 s2)."""
        base0 = t1 * t1 + t2 * t2 + rho1 * rho1 + rho2 * rho2
        c1 = 2.0 * t1 * rho1
        c2 = 2.0 * t2 * rho2
        n_table = table.size - 1
        L = alphas_re.size
        acc_re = 0.0
        acc_im = 0.0
        for i in prange(s1.size):
            base = base0 - c1 * s1[i]
            row_re = 0.0
            for jj in range(s2.size):
                q = base - c2 * s2[jj]
                dist = math.sqrt(q) if q > 0.0 else 0.0
                idx = (dist * scale_j - lo) * inv_h
                if idx <= 0.0 or idx >= n_table:
                    continue
                i0 = int(idx)
                frac = idx - i0
                cut = table[i0] * (1.0 - frac) + table[i0 + 1] * frac
                if cut == 0.0:
                    continue
                cosd = math.cos(dist)
                sind = math.sin(dist)
                amp_re = 0.0
                p = dist**power
                for l in range(L):
                    amp_re += p * 2.0 * (alphas_re[l] * cosd - alphas_im[l] * sind)
                    p /= dist
                row_re += cut * w2[jj] * amp_re
            acc_re += w1[i] * row_re
        return acc_re, acc_im

    @njit(parallel=True, fastmath=True, cache=True)
    def _kj_batch(s1, w1, s2, w2, t1, t2, rho1s, rho2s, scale_j, lo, inv_h,
                  table, alphas_re, alphas_im, power):
        """kernel values at many (rho1, rho2) for one output point (t1, t2)."""
        n_table = table.size - 1
        L = alphas_re.size
        out = np.zeros(rho1s.size)
        for p_idx in prange(rho1s.size):
            rho1 = rho1s[p_idx]
            rho2 = rho2s[p_idx]
            base0 = t1 * t1 + t2 * t2 + rho1 * rho1 + rho2 * rho2
            c1 = 2.0 * t1 * rho1
            c2 = 2.0 * t2 * rho2
            acc = 0.0
            for i in range(s1.size):
                base = base0 - c1 * s1[i]
                row = 0.0
                for jj in range(s2.size):
                    q = base - c2 * s2[jj]
                    dist = math.sqrt(q) if q > 0.0 else 0.0
                    idx = (dist * scale_j - lo) * inv_h
                    if idx <= 0.0 or idx >= n_table:
                        continue
                    i0 = int(idx)
                    frac = idx - i0
                    cut = table[i0] * (1.0 - frac) + table[i0 + 1] * frac
                    if cut == 0.0:
                        continue
                    cosd = math.cos(dist)
                    sind = math.sin(dist)
                    amp = 0.0
                    pw = dist**power
                    for l in range(L):
                        amp += pw * 2.0 * (alphas_re[l] * cosd - alphas_im[l] * sind)
                        pw /= dist
                    row += cut * w2[jj] * amp
                acc += w1[i] * row
            out[p_idx] = acc
        return out


_KJ_TABLE_SIZE = 1 << 14
_kj_table_cache = {}


def _kj_cutoff_table(cutoff):
    key = id(cutoff)
    if key not in _kj_table_cache:
        lo, hi = cutoff.support
        xs = np.linspace(lo, hi, _KJ_TABLE_SIZE + 1)
        _kj_table_cache[key] = (lo, _KJ_TABLE_SIZE / (hi - lo), np.asarray(cutoff(xs)))
    return _kj_table_cache[key]


def _kj_axis_panels(lam_b):
    n = int(math.ceil(KJ_PANEL_COEFF * (1.0 + abs(lam_b))))
    return min(max(n, 6), KJ_MAX_AXIS_PANELS)


def kernel_Kj(piece: DyadicPiece, t1, t2, rho1, rho2, refine=1.0):
    """Reduced kernel of the dyadic piece at one parameter point.

    Double Jacobi-weighted quadrature with per-axis resolution tracking the
    oscillation 2^(1-j) rho_i t_i; requires both block dimensions >= 2.
    """
    dims = piece.dims
    if dims.dk < 2 or dims.k < 2:
        raise ValueError("reduced kernel needs both block dimensions >= 2")
    t1, t2, rho1, rho2 = (float(x) for x in (t1, t2, rho1, rho2))
    lo, hi = piece.annulus
    dmin = math.hypot(t1 - rho1, t2 - rho2)
    dmax = math.hypot(t1 + rho1, t2 + rho2)
    if dmin > hi or dmax < lo:
        return 0.0
    alpha1 = 0.5 * (dims.dk - 3)
    alpha2 = 0.5 * (dims.k - 3)
    lam_b1 = 2.0 ** (1 - piece.j) * rho1 * t1
    lam_b2 = 2.0 ** (1 - piece.j) * rho2 * t2
    n1 = _kj_axis_panels(refine * lam_b1)
    n2 = _kj_axis_panels(refine * lam_b2)
    if (n1 * n2) * KJ_PANEL_ORDER**2 > KJ_NODE_BUDGET:
        raise KernelBudgetError(f"kernel quadrature would need {n1*12}x{n2*12} nodes")
    s1, w1 = jacobi_axis_rule(alpha1, n1, KJ_PANEL_ORDER)
    s2, w2 = jacobi_axis_rule(alpha2, n2, KJ_PANEL_ORDER)
    const = surface_measure(dims.dk - 1) * surface_measure(dims.k - 1)
    power = 0.5 * (1 - dims.d)
    alphas = piece.alphas
    if _HAVE_NUMBA:
        tlo, tinv, ttab = _kj_cutoff_table(piece.cutoff)
        acc_re, _ = _kj_tensor_sum(s1, w1, s2, w2, t1, t2, rho1, rho2,
                                   2.0 ** (-piece.j), tlo, tinv, ttab,
                                   np.ascontiguousarray(alphas.real),
                                   np.ascontiguousarray(alphas.imag), power)
        return const * acc_re
    q = (t1 * t1 + t2 * t2 + rho1 * rho1 + rho2 * rho2
         - 2.0 * t1 * rho1 * s1[:, None] - 2.0 * t2 * rho2 * s2[None, :])
    dist = np.sqrt(np.clip(q, 0.0, None))
    return const * float(w1 @ phi_j(piece, dist) @ w2)


def check_Kj_bound(dims: Dimensions, j_list=(1, 2, 3, 4, 5, 6), n_points=1000,
                   seed=0, L=None):
    """Sweep the pointwise kernel bound.

    Samples parameter points near each dyadic annulus, evaluates |K_j|
    against 2^(j(1-d)/2) min(1, (2^-j rho1 t1)^(-(d-k-1)/2))
    min(1, (2^-j rho2 t2)^(-(k-1)/2)), fits the constant on j <= 2 and
    reports the worst exceedance over the whole sweep.
    """
    rng = np.random.default_rng(seed)
    per_j = max(1, int(n_points) // len(j_list))
    rows = []
    for j in j_list:
        piece = DyadicPiece.make(dims, j, L)
        lo, hi = piece.annulus
        for _ in range(per_j):
            rho1, rho2 = rng.uniform(0.2, 2.2, size=2)
            radius = rng.uniform(max(0.0, lo - 2.5), hi + 2.5)
            phi = rng.uniform(0.0, 0.5 * math.pi)
            t1, t2 = radius * math.cos(phi), radius * math.sin(phi)
            val = kernel_Kj(piece, t1, t2, rho1, rho2)
            a = 2.0 ** (-j) * rho1 * t1
            b = 2.0 ** (-j) * rho2 * t2
            rhs = 2.0 ** (j * 0.5 * (1 - dims.d))
            rhs *= min(1.0, a ** (-0.5 * (dims.dk - 1))) if a > 0 else 1.0
            rhs *= min(1.0, b ** (-0.5 * (dims.k - 1))) if b > 0 else 1.0
            rows.append((j, t1, t2, rho1, rho2, abs(val), rhs, abs(val) / rhs))
    fit = [r[7] for r in rows if r[0] <= 2]
    c_fit = max(fit) if fit else 0.0
    exceedance = max(r[7] for r in rows) / c_fit if c_fit > 0 else 1.0
    return RatioReport(dims=dims, rows=tuple(rows), c_fit=c_fit, exceedance=exceedance)


@dataclass(frozen=True)
class RatioReport:
    """Pointwise-bound sweep: fitted low-j constant and worst exceedance."""

    dims: Dimensions
    rows: tuple
    c_fit: float
    exceedance: float

    def as_csv_rows(self):
        out = [["j", "t1", "t2", "rho1", "rho2", "abs_K", "bound", "ratio"]]
        out.extend(list(r) for r in self.rows)
        return out


# ---------------------------------------------------------------------------
# the operators T_j

def apply_Tj_multiplier(f: BlockRadialProfile, piece: DyadicPiece,
                        out_grid1=None, out_grid2=None, freq_grid=None,
                        tau: SmoothCutoff = None):
    """T_j f through the Fourier side: multiplier (2 pi)^(d/2) phihat_j tau.

    ``phihat_j`` is the radial transform of the annulus kernel, computed by
    composite quadrature resolving the 2^(j+1)-scale oscillation and then
    interpolated onto the multiplier grid.
    """
    tau = tau or default_tau()
    d = f.dims.d
    lo, hi = piece.annulus
    if freq_grid is None:
        t_lo, t_hi = tau.support
        freq_grid = np.concatenate([
            np.linspace(0.0, t_lo, 32, endpoint=False),
            np.linspace(t_lo, t_hi, max(96, int((t_hi - t_lo) * hi * 2.2))),
            np.linspace(t_hi + 1e-3, max(4.0, t_hi + 1.0), 24),
        ])
    else:
        freq_grid = np.asarray(freq_grid, dtype=float)
    rho, w = gauss_legendre_panels(lo, hi, max(24, int(0.45 * (1.0 + freq_grid[-1]) * (hi - lo))), 10)
    pj = phi_j(piece, rho)
    kern = sphere_kernel(d, np.abs(np.outer(freq_grid, rho)))
    phihat = kern @ (w * pj * rho ** (d - 1))

    def mult(r):
        return (2.0 * math.pi) ** (0.5 * d) * np.interp(r, freq_grid, phihat) * tau(r)

    g1 = f.grid1 if out_grid1 is None else np.asarray(out_grid1, dtype=float)
    g2 = f.grid2 if out_grid2 is None else np.asarray(out_grid2, dtype=float)
    f_hat = forward_transform(f, freq_grid, freq_grid)
    rr = np.hypot(f_hat.grid1[:, None], f_hat.grid2[None, :])
    return inverse_transform(f_hat.with_values(f_hat.values * mult(rr)), g1, g2)


def apply_Tj(f: BlockRadialProfile, piece: DyadicPiece, out_grid1, out_grid2,
             tau: SmoothCutoff = None, inner_cap=None, inner_panels=None,
             node_budget=4 << 30):
    """T_j f through the reduced kernel: weighted quadrature of K_j against
    the profile of tau(|D|) f at every output node.

    Expensive by construction; refuses configurations whose total kernel
    node count exceeds ``node_budget``.  The inner radial integral runs on a
    composite Gauss-Legendre grid truncated where tau(|D|) f is negligible.
    """
    dims = f.dims
    if dims.dk < 2 or dims.k < 2:
        raise ValueError("kernel route needs both block dimensions >= 2")
    tau = tau or default_tau()
    g1 = np.asarray(out_grid1, dtype=float)
    g2 = np.asarray(out_grid2, dtype=float)
    ftau = apply_multiplier(f, tau)

    # inner quadrature grid, truncated at the effective support of tau f
    av = np.abs(ftau.values)
    tol = 1e-10 * av.max()
    r1_eff = ftau.grid1[min(int(np.max(np.nonzero(av.max(axis=1) > tol)[0], initial=0)) + 2,
                            ftau.grid1.size - 1)]
    r2_eff = ftau.grid2[min(int(np.max(np.nonzero(av.max(axis=0) > tol)[0], initial=0)) + 2,
                            ftau.grid2.size - 1)]
    if inner_cap is not None:
        r1_eff, r2_eff = min(r1_eff, inner_cap), min(r2_eff, inner_cap)
    np1 = inner_panels or max(12, int(0.7 * r1_eff))
    np2 = inner_panels or max(12, int(0.7 * r2_eff))
    x1, w1 = gauss_legendre_panels(0.0, r1_eff, np1, 6)
    x2, w2 = gauss_legendre_panels(0.0, r2_eff, np2, 6)
    a, b = dims.weight_exponents
    fv = ftau.interp(x1, x2, order=5, grid=True)
    fw = fv * np.outer(w1 * x1**a, w2 * x2**b)

    lo, hi = piece.annulus
    out = np.zeros((g1.size, g2.size), dtype=complex)
    # cost estimate for the budget guard
    est = 0.0
    t_norm = np.hypot(g1[:, None], g2[None, :])
    rho_norm_max = math.hypot(r1_eff, r2_eff)
    live_t = (t_norm > lo - rho_norm_max) & (t_norm < hi + rho_norm_max)
    lam_b_max = 2.0 ** (1 - piece.j) * max(r1_eff * g1[-1], r2_eff * g2[-1])
    est = live_t.sum() * x1.size * x2.size
    est *= (KJ_PANEL_ORDER * _kj_axis_panels(lam_b_max)) ** 2 / max(1, x1.size * x2.size)
    # refine the estimate per node below; the guard uses the coarse bound
    if est > node_budget:
        raise KernelBudgetError(
            f"estimated {est:.3g} kernel nodes exceeds budget {node_budget:.3g}")

    rho_flat1 = np.repeat(x1, x2.size)
    rho_flat2 = np.tile(x2, x1.size)
    fw_flat = fw.ravel()
    const = surface_measure(dims.dk - 1) * surface_measure(dims.k - 1)
    power = 0.5 * (1 - dims.d)
    alphas = piece.alphas
    a_re = np.ascontiguousarray(alphas.real)
    a_im = np.ascontiguousarray(alphas.imag)
    tlo, tinv, ttab = _kj_cutoff_table(piece.cutoff)
    scale_j = 2.0 ** (-piece.j)
    alpha1 = 0.5 * (dims.dk - 3)
    alpha2 = 0.5 * (dims.k - 3)
    for i in range(g1.size):
        for jj in range(g2.size):
            if not live_t[i, jj]:
                continue
            t1, t2 = g1[i], g2[jj]
            dmin = np.hypot(t1 - rho_flat1, t2 - rho_flat2)
            dmax = np.hypot(t1 + rho_flat1, t2 + rho_flat2)
            mask = (dmin <= hi) & (dmax >= lo) & (np.abs(fw_flat) > 0)
            if not mask.any():
                continue
            r1m, r2m, fwm = rho_flat1[mask], rho_flat2[mask], fw_flat[mask]
            lam_b = 2.0 ** (1 - piece.j) * np.maximum(r1m * t1, r2m * t2)
            # bucket by oscillation strength so each batch shares one rule
            buckets = np.ceil(np.log2(lam_b + 2.0)).astype(int)
            acc = 0.0 + 0.0j
            for bval in np.unique(buckets):
                sel = buckets == bval
                lb = float(lam_b[sel].max())
                n1 = _kj_axis_panels(2.0 ** (1 - piece.j) * (r1m[sel] * t1).max()
                                     if t1 > 0 else 1.0)
                n2 = _kj_axis_panels(2.0 ** (1 - piece.j) * (r2m[sel] * t2).max()
                                     if t2 > 0 else 1.0)
                s1, w1 = jacobi_axis_rule(alpha1, n1, KJ_PANEL_ORDER)
                s2, w2 = jacobi_axis_rule(alpha2, n2, KJ_PANEL_ORDER)
                if _HAVE_NUMBA:
                    kv = _kj_batch(s1, w1, s2, w2, t1, t2,
                                   np.ascontiguousarray(r1m[sel]),
                                   np.ascontiguousarray(r2m[sel]),
                                   scale_j, tlo, tinv, ttab, a_re, a_im, power)
                else:
                    kv = np.array([kernel_Kj(piece, t1, t2, r1, r2)
                                   for r1, r2 in zip(r1m[sel], r2m[sel])]) / const
                acc += const * (kv @ fwm[sel])
            out[i, jj] = acc
    return BlockRadialProfile(dims, g1, g2, out, source=f)


def apply_T0(f: BlockRadialProfile, dims=None, j_max=6, out_grid1=None,
             out_grid2=None, tau: SmoothCutoff = None, L=None):
    """Near-field remainder: extend(f) minus the multiplier-route dyadic sum.

    The near part has no closed kernel formula of its own; it is defined by
    the splitting, so it is computed as the difference on the grid.
    """
    dims = dims or f.dims
    g1 = f.grid1 if out_grid1 is None else np.asarray(out_grid1, dtype=float)
    g2 = f.grid2 if out_grid2 is None else np.asarray(out_grid2, dtype=float)
    total = extend(f, g1, g2)
    acc = total.values.copy()
    for j in range(1, j_max + 1):
        piece = DyadicPiece.make(dims, j, L)
        acc = acc - apply_Tj_multiplier(f, piece, g1, g2, tau=tau).values
    return BlockRadialProfile(dims, g1, g2, acc, source=f)


@dataclass(frozen=True)
class ScalingReport:
    """Per-j norm ratios for the dyadic operators on a profile family."""

    dims: Dimensions
    j_list: tuple
    l2_ratios: np.ndarray      # (n_profiles, n_j)
    lorentz_ratios: np.ndarray
    p_st: float
    p_endpoint: float

    def uniformity(self):
        """Worst max/min ratio spread across j, per norm."""
        def spread(m):
            lo = np.min(m, axis=1)
            hi = np.max(m, axis=1)
            ok = lo > 0
            return float(np.max(hi[ok] / lo[ok])) if ok.any() else math.inf
        return spread(self.l2_ratios), spread(self.lorentz_ratios)

    def as_csv_rows(self):
        out = [["profile", "j", "l2_ratio", "lorentz_ratio"]]
        for p in range(self.l2_ratios.shape[0]):
            for jj, j in enumerate(self.j_list):
                out.append([p, j, self.l2_ratios[p, jj], self.lorentz_ratios[p, jj]])
        return out


def check_Tj_scaling(family, dims: Dimensions, j_list=(1, 2, 3, 4, 5, 6),
                     spatial_grid=None, tau: SmoothCutoff = None, L=None):
    """Norm-scaling ratios of the dyadic pieces on sphere-adapted profiles.

    For each profile: ||T_j f||_2 / (2^(j/2) ||f||_pST) and the weak-Lorentz
    variant ||T_j f||_(p',inf) / (2^(j((1+d)/2 - d/p)) ||f||_(p,1)) at the
    endpoint p = 2m/(m+1).  The spatial grid must cover the j_max annulus.
    """
    tau = tau or default_tau()
    if spatial_grid is None:
        r_need = 2.0 ** (max(j_list) + 1) * 1.2 + 20.0
        spatial_grid = np.linspace(0.0, r_need, int(r_need * 4.8))
    p_st = dims.p_stein_tomas
    m = dims.m
    p_end = 2.0 * m / (m + 1)
    kappa = 0.5 * (1 + dims.d) - dims.d / p_end
    l2 = np.zeros((len(family), len(j_list)))
    lor = np.zeros_like(l2)
    for fi, f in enumerate(family):
        n_st = lebesgue_norm(f, p_st)
        n_p1 = lorentz_norm(f, LorentzSpec.strong(p_end))
        for ji, j in enumerate(j_list):
            piece = DyadicPiece.make(dims, j, L)
            tjf = apply_Tj_multiplier(f, piece, spatial_grid, spatial_grid, tau=tau)
            l2[fi, ji] = lebesgue_norm(tjf, 2) / (2.0 ** (0.5 * j) * n_st)
            q_weak = LorentzSpec.weak(p_end / (p_end - 1.0))
            lor[fi, ji] = lorentz_norm(tjf, q_weak) / (2.0 ** (kappa * j) * n_p1)
    return ScalingReport(dims=dims, j_list=tuple(j_list), l2_ratios=l2,
                         lorentz_ratios=lor, p_st=p_st, p_endpoint=p_end)
