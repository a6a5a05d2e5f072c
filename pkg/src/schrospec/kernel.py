"""Rescaled kernel F(y), its derivative eigenfunctions, and WKBJ constants.

F is the inverse Fourier transform of exp(-i|w|^{2m}).  Two routes are
available.  The default damped route works on large boxes: the symbol is
not integrable, so it is damped by exp(-(eps |w/kappa|^2)^q) and the damped
transforms are Richardson-extrapolated to eps -> 0 (in powers of eps^q).
kappa is the larger of the biggest frequency that is stationary for some
|y| <= L and a saddle-scale floor, so the same eps ladder works for every
(m, L, derivative order).

The contour route rotates the frequency variable to w = exp(-i pi/4m) r,
where the symbol becomes exp(-|r|^{2m}) and plain trapezoid quadrature is
spectrally accurate.  The rotation costs a factor exp(sin(pi/4m) |y| r), so
it is meant for moderate boxes, where it keeps high derivatives accurate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .grids import CGrid, synthesize_uniform
from .polyalg import MultiIndex, SpectralParams, mi_factorial, multi_index

DEFAULT_EPS = (0.25, 0.18, 0.125)
DAMPING_POWER = 6
TAIL = 1e-14
MAX_MODES = 2**22
MAX_MODES_2D = 3000


class GridTooSmallError(RuntimeError):
    """The frequency box cannot reach the damped-symbol tail threshold."""


class NonConvergenceError(RuntimeError):
    """The eps-extrapolation did not settle to the requested tolerance."""


@dataclass(frozen=True)
class WkbjParams:
    alpha: float
    z_m: float
    roots: tuple[complex, ...]

    @property
    def imaginary_root(self) -> complex:
        return min(self.roots, key=lambda a: abs(a - 1j * self.z_m))


def wkbj_params(m: int) -> WkbjParams:
    """Oscillation constants a_k of F(y) ~ exp(a |y|^alpha).

    The roots solve (alpha a)^{2m-1} = (-1)^{m+1} i / 2m, all on |a| = z_m.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    alpha = 2 * m / (2 * m - 1)
    k = 2 * m - 1
    rhs = (-1) ** (m + 1) * 1j / (2 * m)
    r = abs(rhs) ** (1 / k)
    base = np.angle(rhs) / k
    roots = [r * np.exp(1j * (base + 2 * np.pi * j / k)) / alpha for j in range(k)]
    roots.sort(key=lambda a: np.angle(a))
    z_m = (2 * m) ** (-1 / k) / alpha
    return WkbjParams(alpha, z_m, tuple(complex(a) for a in roots))


def kernel_exact_m1(y, N: int | None = None) -> np.ndarray | complex:
    """(4 pi i)^{-N/2} exp(i|y|^2/4) on the principal branch.

    ``y`` is a point (length N) or an array of points with coordinates on the
    last axis; pass ``N`` explicitly for scalar or 1D-abscissa input.
    """
    y = np.asarray(y, dtype=float)
    if N is None:
        N = 1 if y.ndim == 0 else y.shape[-1]
        r2 = y**2 if y.ndim == 0 else np.sum(y**2, axis=-1)
    elif N == 1:
        r2 = y**2
    else:
        r2 = np.sum(y**2, axis=-1)
    pref = (4 * np.pi) ** (-N / 2) * np.exp(-1j * np.pi * N / 4)
    out = pref * np.exp(1j * r2 / 4)
    return complex(out) if np.ndim(out) == 0 else out


def reference_frequency(m: int, extent: float, order: int = 0) -> float:
    """Frequency scale below which the damping must be flat.

    The larger of the biggest stationary frequency for |y| <= extent and the
    saddle scale of |w|^{order + q} exp(-i|w|^{2m}); the latter matters
    because the extrapolation terms carry q extra derivatives.
    """
    stationary = (extent / (2 * m)) ** (1 / (2 * m - 1))
    saddle = 2.0 * ((order + DAMPING_POWER) / (2 * m)) ** (1 / (2 * m))
    return max(stationary, saddle)


def _frequency_box(m: int, extent: float, eps: float, kappa: float, order: int) -> tuple[float, float]:
    """Cutoff frequency and period for one damped transform.

    The cutoff is found by doubling until the damped symbol (times the
    derivative weight |w|^order) is below TAIL.  The period must hold both
    the output box and the region reached by the fastest surviving wave.
    """
    w = kappa
    for _ in range(60):
        val = math.exp(-((eps * (w / kappa) ** 2) ** DAMPING_POWER)) * max(w, 1.0) ** order
        if val < TAIL:
            break
        w *= 2
    else:
        raise GridTooSmallError("damped symbol never dropped below the tail threshold")
    # refine the cutoff by bisection between w/2 and w
    lo, hi = w / 2, w
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        if math.exp(-((eps * (mid / kappa) ** 2) ** DAMPING_POWER)) * max(mid, 1.0) ** order < TAIL:
            hi = mid
        else:
            lo = mid
    wmax = hi
    reach = 2 * m * wmax ** (2 * m - 1)
    period = 2.5 * (reach + extent)
    return wmax, period


def _damped_transform(sp: SpectralParams, beta: MultiIndex, grid: CGrid, eps: float, kappa: float) -> np.ndarray:
    N = sp.N
    extent = math.hypot(*grid.origin)
    wmax, period = _frequency_box(sp.m, extent, eps, kappa, sum(beta))
    h = grid.spacing[0]
    if any(abs(hk - h) > 1e-12 * h for hk in grid.spacing):
        raise ValueError("kernel grids need equal spacing on every axis")
    # whole number of output cells per period keeps every phase exact
    period = math.ceil(period / h) * h
    dw = 2 * np.pi / period
    K = 2 * int(math.ceil(wmax / dw)) + 1
    limit = MAX_MODES if N == 1 else MAX_MODES_2D
    if K > limit:
        raise GridTooSmallError(
            f"frequency grid needs {K} modes per axis (limit {limit}); reduce the extent or enlarge eps"
        )
    w1 = (np.arange(K) - K // 2) * dw  # symmetric about 0
    ws = np.meshgrid(*([w1] * N), indexing="ij")
    w2 = sum(w**2 for w in ws)
    symbol = np.exp(-1j * w2**sp.m - (eps * w2 / kappa**2) ** DAMPING_POWER)
    for k, b in enumerate(beta):
        if b:
            symbol = symbol * (1j * ws[k]) ** b
    edge = np.abs(symbol[(0,) * N]) if N else 0.0
    if edge > 1e-10 * max(np.abs(symbol).max(), 1e-300):
        raise GridTooSmallError(f"damped symbol is {edge:.2e} at the frequency boundary")
    out = symbol * (dw / (2 * np.pi)) ** N
    for axis in range(N):
        out = synthesize_uniform(out, w1[0], dw, grid.origin[axis], grid.spacing[axis], grid.shape[axis], axis=axis)
    return out


CONTOUR_MAX_GROWTH = 1e6


def contour_growth(m: int, extent: float) -> float:
    """Largest amplification exp(s Y r - r^{2m}) met by the contour route."""
    s = math.sin(math.pi / (4 * m))
    r = (s * extent / (2 * m)) ** (1 / (2 * m - 1))
    return math.exp(s * extent * r - r ** (2 * m))


def _contour_transform(sp: SpectralParams, beta: MultiIndex, grid: CGrid) -> np.ndarray:
    """D^beta F on the grid from the rotated-contour integral."""
    m, N = sp.m, sp.N
    theta = np.exp(-1j * np.pi / (4 * m))
    s = math.sin(math.pi / (4 * m))
    Y = max(max(abs(o), abs(o + h * (n - 1))) for o, h, n in zip(grid.origin, grid.spacing, grid.shape))
    Y = math.hypot(*([Y] * N))
    order_ = sum(beta)
    # radial cutoff: r^order exp(s Y r - r^{2m}) below 1e-18 of its peak
    r = np.linspace(0.0, 64.0, 20001)
    logg = order_ * np.log(np.maximum(r, 1e-300)) + s * Y * r - r ** (2 * m)
    peak = logg.max()
    R = float(r[np.nonzero(logg > peak - 42.0)[0][-1]]) + 0.5
    # trapezoid on an analytic integrand: step set by the oscillation rate
    dr = min(0.05, math.pi / (4 * (Y * max(math.cos(math.pi / (4 * m)), s) + R ** (2 * m - 1) + 1)))
    nr = 2 * int(math.ceil(R / dr)) + 1
    rr = (np.arange(nr) - nr // 2) * dr
    rs = np.meshgrid(*([rr] * N), indexing="ij")
    radial = np.exp(-sum(x**2 for x in rs) ** m)
    mats = []
    for k in range(N):
        y = grid.axes()[k]
        E = np.exp(1j * theta * np.outer(y, rr)) * (1j * theta * rr) ** beta[k]
        mats.append(E)
    out = radial.astype(complex)
    for k in range(N):
        out = np.moveaxis(np.tensordot(mats[k], out, axes=([1], [k])), 0, k)
    return out * (theta * dr / (2 * np.pi)) ** N


def richardson(values: Sequence[np.ndarray], eps: Sequence[float], power: int) -> tuple[np.ndarray, np.ndarray]:
    """Neville extrapolation to eps -> 0 in the variable eps**power.

    Returns the extrapolated value and the one-level-lower estimate.
    """
    x = np.asarray(eps, dtype=float) ** power
    table = [np.asarray(v, dtype=complex).copy() for v in values]
    for k in range(1, len(table)):
        for i in range(len(table) - 1, k - 1, -1):
            table[i] = table[i] + (table[i] - table[i - 1]) * x[i] / (x[i - k] - x[i])
    return table[-1], table[-2]


def _check_eps(eps_list):
    eps = [float(e) for e in eps_list]
    if len(eps) < 2 or any(e <= 0 for e in eps) or any(a <= b for a, b in zip(eps, eps[1:])):
        raise ValueError("eps_list must be strictly decreasing positive values, at least two")
    return eps


def kernel_derivative(
    beta: Sequence[int],
    sp: SpectralParams,
    shape,
    extent,
    eps_list: Sequence[float] = DEFAULT_EPS,
    tol: float = 1e-6,
    method: str = "damped",
) -> CGrid:
    """psi_beta = (-1)^{|beta|} D^beta F / sqrt(beta!) on the centered grid.

    Computed from the symbol (i w)^beta exp(-i|w|^{2m}).  ``method`` is
    ``"damped"`` (damped extrapolation), ``"contour"`` (rotated contour, for
    boxes where ``contour_growth`` is at most CONTOUR_MAX_GROWTH) or
    ``"auto"`` (contour when allowed, damped otherwise).
    """
    beta = multi_index(beta, sp.N)
    eps = _check_eps(eps_list)
    grid = CGrid.centered(np.broadcast_to(shape, (sp.N,)), extent)
    sign = (-1) ** sum(beta)
    norm = math.sqrt(mi_factorial(beta))
    if method not in ("damped", "contour", "auto"):
        raise ValueError(f"unknown method {method!r}")
    growth = contour_growth(sp.m, math.hypot(*[abs(o) for o in grid.origin]))
    if method == "contour" and growth > CONTOUR_MAX_GROWTH:
        raise GridTooSmallError(f"contour route amplifies by {growth:.1e}; use a smaller box or the damped route")
    if method == "contour" or (method == "auto" and growth <= CONTOUR_MAX_GROWTH):
        return grid.like(sign * _contour_transform(sp, beta, grid) / norm)
    kappa = reference_frequency(sp.m, math.hypot(*grid.origin), sum(beta))
    vals = [_damped_transform(sp, beta, grid, e, kappa) for e in eps]
    best, prev = richardson(vals, eps, DAMPING_POWER)
    scale = max(np.abs(best).max(), 1e-300)
    change = np.abs(best - prev).max() / scale
    if change > tol:
        raise NonConvergenceError(f"extrapolation changed by {change:.2e} relative (tolerance {tol:.1e})")
    return grid.like(sign * best / norm)


def compute_kernel(sp: SpectralParams, shape, extent, eps_list: Sequence[float] = DEFAULT_EPS, tol: float = 1e-6, method: str = "damped") -> CGrid:
    """F(y) on the centered grid [-L, L)^N."""
    return kernel_derivative((0,) * sp.N, sp, shape, extent, eps_list, tol, method)


def gaussian_mass(sp: SpectralParams, weights: Sequence[float] = (0.08, 0.04, 0.02, 0.01), shape=None, extent: float | None = None) -> tuple[complex, list[complex]]:
    """int F(y) exp(-w|y|^2) dy for each w, extrapolated to w -> 0.

    The kernel grid comes from ``compute_kernel``; the Gaussian weight
    makes the quadrature absolutely convergent.
    """
    w_min = min(weights)
    if extent is None:
        extent = math.sqrt(40.0 / w_min)
    if shape is None:
        shape = 2 ** 12 if sp.N == 1 else 256
    F = compute_kernel(sp, shape, extent)
    r2 = F.radius() ** 2
    vals = [F.integrate(F.data * np.exp(-w * r2)) for w in weights]
    # the moments of a Gaussian in w only produce powers of w^m
    best, _ = richardson([np.array(v) for v in vals], list(weights), sp.m)
    return complex(best), vals


def modulus_profile(g: CGrid, bins: int = 64) -> np.ndarray:
    """Radial table (r, mean |g|, std |g|) over equal-width radius bins."""
    r = g.radius().ravel()
    a = np.abs(g.data).ravel()
    edges = np.linspace(0.0, r.max() * (1 + 1e-12), bins + 1)
    idx = np.clip(np.digitize(r, edges) - 1, 0, bins - 1)
    rows = []
    for b in range(bins):
        sel = idx == b
        if not np.any(sel):
            continue
        rows.append((0.5 * (edges[b] + edges[b + 1]), a[sel].mean(), a[sel].std()))
    return np.array(rows)


def fit_phase_law(g: CGrid, y_range: tuple[float, float], exponent: float) -> tuple[float, float]:
    """Fit unwrapped arg g(y) ~ z y^exponent + c on y in y_range (N=1).

    Returns (z, residual rms).
    """
    if g.ndim != 1:
        raise ValueError("phase fitting uses a 1D grid")
    y = g.axes()[0]
    sel = (y >= y_range[0]) & (y <= y_range[1])
    phase = np.unwrap(np.angle(g.data[sel]))
    A = np.column_stack([y[sel] ** exponent, np.ones(sel.sum())])
    coef, *_ = np.linalg.lstsq(A, phase, rcond=None)
    resid = phase - A @ coef
    return float(coef[0]), float(np.sqrt(np.mean(resid**2)))


def fit_envelope_exponent(g: CGrid, y_range: tuple[float, float]) -> float:
    """Slope of log|g| against log y on y_range (N=1)."""
    y = g.axes()[0]
    sel = (y >= y_range[0]) & (y <= y_range[1])
    slope, _ = np.polyfit(np.log(y[sel]), np.log(np.abs(g.data[sel])), 1)
    return float(slope)
