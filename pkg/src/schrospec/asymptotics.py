"""Large-time and blow-up classification of linear solutions, nodal diagnostics,
and the reduced centre-subspace ODE.

Global decay: the first order l carrying a nonzero moment fixes the decay
rate t^{-(N+l)/2m} and the rescaled profile sum_{|beta|=l} M_beta psi_beta.
Blow-up: the first order l carrying a nonzero adjoint moment fixes the
vanishing rate (T-t)^{l/2m} and the polynomial profile sum M*_beta psi*_beta.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .evolution import CoeffSeq, expansion_coeffs, propagate, raw_moments, rescale_backward
from .grids import CGrid, resample_uniform
from .kernel import kernel_derivative
from .polyalg import MultiIndex, Poly, SpectralParams, eval_poly, hermite_star, mi_factorial, multi_indices, multi_indices_upto, order


class AllOrdersVanishError(ValueError):
    """No expansion order up to the cut carries a nonzero coefficient."""


class NonMonotoneWarning(UserWarning):
    """Decay snapshots are not monotone; the power-law fit is suspect."""


class StepUnderflowError(RuntimeError):
    """The ODE integrator could not continue."""


# -- global decay ----------------------------------------------------------


@dataclass
class GlobalClass:
    l: int
    phi_l: CoeffSeq
    predicted_exponent: float


def _first_order(coeffs: CoeffSeq, L: int, cut: float) -> int:
    for l in range(L + 1):
        if coeffs.order_max(l) > cut:
            return l
    raise AllOrdersVanishError("numerically-zero input or L too small: every order up to L vanishes")


def classify_global(u0: CGrid, sp: SpectralParams, L: int = 12, threshold_rel: float = 1e-8) -> GlobalClass:
    """Minimal order l with a moment above threshold_rel * ||u0||."""
    coeffs = expansion_coeffs(u0, L, sp)
    l = _first_order(coeffs, L, threshold_rel * u0.l2_norm())
    return GlobalClass(l, coeffs.slice(l), (sp.N + l) / (2 * sp.m))


def fit_decay_exponent(snaps: Sequence[tuple[float, float]]) -> float:
    """Least-squares slope of log(sup-norm) against log t."""
    if len(snaps) < 5:
        raise ValueError("need at least 5 snapshots")
    t = np.array([s[0] for s in snaps], dtype=float)
    v = np.array([s[1] for s in snaps], dtype=float)
    order_ = np.argsort(t)
    t, v = t[order_], v[order_]
    if np.any(np.diff(v) > 0):
        warnings.warn("sup-norm snapshots are not monotonically decreasing", NonMonotoneWarning, stacklevel=2)
    slope, _ = np.polyfit(np.log(t), np.log(v), 1)
    return float(slope)


def _window_grid(window: float, n: int, N: int) -> CGrid:
    return CGrid.centered((n,) * N, window)


def decay_snapshots(u0: CGrid, sp: SpectralParams, times: Sequence[float], window: float = 2.0, n: int = 64) -> list[tuple[float, float]]:
    """(t, sup over |y| <= window of |u(y t^{1/2m}, t)|) for each t."""
    tgt = _window_grid(window, n, sp.N)
    out = []
    for t in times:
        u = propagate(u0, t, sp)
        vals = resample_uniform(u, tgt.origin, tgt.spacing, tgt.shape, scale=t ** (1 / (2 * sp.m)))
        inside = tgt.radius() <= window
        out.append((float(t), float(np.abs(vals[inside]).max())))
    return out


def global_profile(phi_l: CoeffSeq, psi_grids: Mapping[MultiIndex, CGrid]) -> CGrid:
    """sum over the order-l slice of M_beta psi_beta."""
    items = list(phi_l)
    template = psi_grids[items[0][0]]
    total = np.zeros(template.shape, dtype=complex)
    for beta, c in items:
        total += c * psi_grids[beta].data
    return template.like(total)


def profile_distances(u0: CGrid, sp: SpectralParams, l: int, times: Sequence[float], window: float = 2.0, n: int = 64) -> list[float]:
    """sup_{|y|<=window} |t^{(N+l)/2m} u(y t^{1/2m}, t) - phi_l(y)| along ``times``.

    phi_l uses the raw moments of order l, which coincide with the leading
    expansion coefficients once all lower orders vanish.
    """
    tgt = _window_grid(window, n, sp.N)
    moments = raw_moments(u0, l).slice(l)
    psi = {b: kernel_derivative(b, sp, tgt.shape, window, method="contour") for b, _ in moments}
    phi = global_profile(moments, psi).data
    inside = tgt.radius() <= window
    out = []
    for t in times:
        u = propagate(u0, t, sp)
        w = resample_uniform(u, tgt.origin, tgt.spacing, tgt.shape, scale=t ** (1 / (2 * sp.m)))
        w = w * t ** ((sp.N + l) / (2 * sp.m))
        out.append(float(np.abs(w - phi)[inside].max()))
    return out


# -- blow-up ---------------------------------------------------------------


@dataclass
class BlowupClass:
    l: int
    poly_combo: Poly
    window: float
    coeffs: CoeffSeq = field(default_factory=CoeffSeq)
    residuals: list[float] = field(default_factory=list)


def blowup_moments_spectral(u0: CGrid, T: float, sp: SpectralParams, L: int) -> CoeffSeq:
    """M*_beta = D^beta u(0, T) / sqrt(beta!) by spectral differentiation of the FFT solution.

    The periodic box must hold the dispersion up to time T (see
    ``propagation_box``); otherwise the k-space phase aliases.
    """
    if T <= 0:
        raise ValueError("T must be positive")
    ks = np.meshgrid(*u0.wavenumbers(), indexing="ij")
    k2 = sum(k**2 for k in ks)
    uhat = np.exp(-1j * T * k2**sp.m) * np.fft.fftn(u0.data)
    # evaluation at x = 0: the grid point 0 sits at offset -origin from index 0
    phase = np.exp(-1j * sum(k * o for k, o in zip(ks, u0.origin)))
    base = uhat * phase / u0.data.size
    out = {}
    for beta in multi_indices_upto(L, sp.N):
        mult = np.ones(u0.shape, dtype=complex)
        for k, b in zip(ks, beta):
            if b:
                mult = mult * (1j * k) ** b
        out[beta] = complex(np.sum(mult * base)) / math.sqrt(mi_factorial(beta))
    return CoeffSeq(out, L)


def blowup_psi_grid(u0: CGrid, beta: Sequence[int], T: float, sp: SpectralParams, method: str = "auto") -> CGrid:
    """psi_beta sampled at z / T^{1/2m} for the nodes z of the centered grid ``u0``."""
    s = T ** (1 / (2 * sp.m))
    extent = [n * h / 2 for n, h in zip(u0.shape, u0.spacing)]
    return kernel_derivative(beta, sp, u0.shape, np.array(extent) / s, method=method)


def blowup_moments_kernel(u0: CGrid, T: float, sp: SpectralParams, L: int, psi_grids: Mapping[MultiIndex, CGrid] | None = None) -> CoeffSeq:
    """M*_beta = T^{-(N+|beta|)/2m} int psi_beta(z / T^{1/2m}) u0(z) dz (unconjugated).

    ``psi_grids`` must come from ``blowup_psi_grid``; for T = 1 this is the
    plain pairing int u0 psi_beta.
    """
    s = T ** (1 / (2 * sp.m))
    out = {}
    for beta in multi_indices_upto(L, sp.N):
        psi = psi_grids[beta] if psi_grids is not None else blowup_psi_grid(u0, beta, T, sp)
        if psi.shape != u0.shape or not np.allclose(np.array(psi.spacing) * s, u0.spacing, rtol=1e-10):
            raise ValueError("psi grid does not match the data grid scaled by T^{1/2m}")
        out[beta] = u0.integrate(u0.data * psi.data) * s ** (-(sp.N + order(beta)))
    return CoeffSeq(out, L)


def _combo(coeffs: CoeffSeq, l: int, sp: SpectralParams) -> Poly:
    """sum_{|beta|=l} M*_beta psi*_beta as one exact-core polynomial (floats folded in)."""
    total = None
    for beta in multi_indices(l, sp.N):
        c = coeffs[beta]
        p = hermite_star(beta, sp)
        scaled = {g: complex(v) * c * math.sqrt(p.norm_factor_sq) for g, v in p.terms.items()}
        total = scaled if total is None else {g: total.get(g, 0) + scaled.get(g, 0) for g in set(total) | set(scaled)}
    return Poly(sp.N, total)


def classify_blowup(
    u0: CGrid,
    T: float,
    sp: SpectralParams,
    L: int = 6,
    psi_grids: Mapping[MultiIndex, CGrid] | None = None,
    threshold_rel: float = 1e-8,
    window: float = 2.0,
    taus: Sequence[float] = (1.0, 2.0, 3.0, 4.0),
) -> BlowupClass:
    """Minimal order of the adjoint moments and the matching polynomial profile.

    Moments come from the kernel pairing when ``psi_grids`` is given and
    from spectral differentiation of the solution at (0, T) otherwise.  The
    profile is validated against the backward-rescaled solution at ``taus``;
    the residual at tau is sup_{|y|<=window} |e^{l tau/2m} w - combo|.
    """
    if psi_grids is not None:
        coeffs = blowup_moments_kernel(u0, T, sp, L, psi_grids)
    else:
        coeffs = blowup_moments_spectral(u0, T, sp, L)
    l = _first_order(coeffs, L, threshold_rel * u0.l2_norm())
    combo = _combo(coeffs, l, sp)
    res = blowup_profile_residuals(u0, T, sp, l, combo, window, taus)
    return BlowupClass(l, combo, window, coeffs, res)


def blowup_profile_residuals(u0: CGrid, T: float, sp: SpectralParams, l: int, combo: Poly, window: float, taus: Sequence[float], n: int = 64) -> list[float]:
    tgt = _window_grid(window, n, sp.N)
    pts = tgt.points() if sp.N > 1 else tgt.axes()[0]
    phi = eval_poly(combo, pts)
    inside = tgt.radius() <= window
    out = []
    for tau in taus:
        t = T - math.exp(-tau)
        u = propagate(u0, t, sp, monitor=False)
        w = rescale_backward(u, t, T, sp, tgt).grid.data
        out.append(float(np.abs(math.exp(l * tau / (2 * sp.m)) * w - phi)[inside].max()))
    return out


def sign_change_zeros(x: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Zeros of a sampled real function by linear interpolation between sign changes."""
    f = np.asarray(f, dtype=float)
    s = np.sign(f)
    exact = x[s == 0]
    idx = np.nonzero(s[:-1] * s[1:] < 0)[0]
    roots = x[idx] - f[idx] * (x[idx + 1] - x[idx]) / (f[idx + 1] - f[idx])
    return np.sort(np.concatenate([exact, roots]))


def track_nodal_point(u0: CGrid, T: float, sp: SpectralParams, times: Sequence[float], near: float = 0.0, window: float = 3.0, n: int = 4097) -> list[tuple[float, float]]:
    """(T - t, x) for the zero of Re u(., t) closest to ``near`` * (T-t)^{1/2m} (N=1).

    The search runs on the backward-rescaled window |y| <= window and is
    refined by a secant step on the band-limited interpolant.
    """
    if sp.N != 1:
        raise ValueError("nodal tracking is one-dimensional")
    tgt = CGrid.centered(n, window)
    y = tgt.axes()[0]
    out = []
    for t in times:
        u = propagate(u0, t, sp, monitor=False)
        w = rescale_backward(u, t, T, sp, tgt).grid.data
        zeros = sign_change_zeros(y, w.real)
        if zeros.size == 0:
            raise ValueError(f"Re w has no zero on |y| <= {window} at t = {t}")
        yz = zeros[np.argmin(np.abs(zeros - near))]
        out.append((T - t, float(yz * (T - t) ** (1 / (2 * sp.m)))))
    return out


def fit_nodal_exponent(track: Sequence[tuple[float, float]]) -> float:
    """Slope of log|x| against log(T - t)."""
    s = np.array([p[0] for p in track])
    x = np.abs(np.array([p[1] for p in track]))
    slope, _ = np.polyfit(np.log(s), np.log(x), 1)
    return float(slope)


@dataclass
class NodalMatch:
    coeffs: CoeffSeq
    residual: float
    zeros: np.ndarray
    model_zeros: np.ndarray
    matched: bool
    empty: bool


def nodal_match(w: CGrid, sp: SpectralParams, L: int, window: float | None = None, bound: float = 1e-2) -> NodalMatch:
    """Fit w on |y| <= window by sum_{|beta|<=L} c_beta psi*_beta (complex least squares).

    ``residual`` is the relative L2 misfit of the field; the zero sets of
    Re w and of the fitted combination are reported along grid lines
    (N=1: the real line).  A residual above ``bound`` means no Hermite match.
    """
    if window is None:
        window = 0.5 * min(n * h for n, h in zip(w.shape, w.spacing))
    inside = (w.radius() <= window).ravel()
    pts = w.points().reshape(-1, sp.N)[inside]
    pv = pts if sp.N > 1 else pts[:, 0]
    betas = multi_indices_upto(L, sp.N)
    A = np.column_stack([eval_poly(hermite_star(b, sp), pv) for b in betas])
    rhs = w.data.ravel()[inside]
    scale = np.linalg.norm(A, axis=0)
    coef, *_ = np.linalg.lstsq(A / scale, rhs, rcond=None)
    coef = coef / scale
    fit = A @ coef
    norm = np.linalg.norm(rhs)
    residual = float(np.linalg.norm(rhs - fit) / norm) if norm > 0 else 0.0
    zeros = model_zeros = np.array([])
    if sp.N == 1:
        x = pv
        zeros = sign_change_zeros(x, rhs.real)
        model_zeros = sign_change_zeros(x, fit.real)
    return NodalMatch(CoeffSeq(dict(zip(betas, coef)), L), residual, zeros, model_zeros, residual <= bound, sp.N == 1 and zeros.size == 0)


# -- centre-subspace ODE -----------------------------------------------------


def critical_exponent(l: int, sp: SpectralParams) -> float:
    if l < 0:
        raise ValueError("l must be non-negative")
    return 1 + 2 * sp.m / (sp.N + l)


def centre_coupling_m1(N: int) -> float:
    """c_0 = b_1^{2/N} with b_1 = (4 pi)^{-N/2}, i.e. 1/(4 pi)."""
    b1 = (4 * math.pi) ** (-N / 2)
    return b1 ** (2 / N)


@dataclass(frozen=True)
class CentreState:
    a: complex
    p_crit: float
    c: complex
    l: int

    @classmethod
    def critical(cls, a: complex, c: complex, l: int, sp: SpectralParams) -> CentreState:
        return cls(complex(a), critical_exponent(l, sp), complex(c), l)


@dataclass
class CentreTrajectory:
    tau: np.ndarray
    a: np.ndarray

    @property
    def modulus(self) -> np.ndarray:
        return np.abs(self.a)


def integrate_centre_ode(state0: CentreState, tau_span: tuple[float, float] = (0.0, 100.0), rtol: float = 1e-13, atol: float = 1e-15, n_out: int = 2001) -> CentreTrajectory:
    """da/dtau = i c |a|^{p-1} a by DOP853 on (Re a, Im a)."""
    if state0.a == 0:
        raise ValueError("a(0) must be nonzero")
    c, p = state0.c, state0.p_crit

    def rhs(_, v):
        a = v[0] + 1j * v[1]
        da = 1j * c * abs(a) ** (p - 1) * a
        return [da.real, da.imag]

    t_eval = np.linspace(*tau_span, n_out)
    sol = solve_ivp(rhs, tau_span, [state0.a.real, state0.a.imag], method="DOP853", rtol=rtol, atol=atol, t_eval=t_eval)
    if sol.status != 0:
        raise StepUnderflowError(sol.message)
    return CentreTrajectory(sol.t, sol.y[0] + 1j * sol.y[1])


def fit_modulus_exponent(traj: CentreTrajectory, window: tuple[float, float]) -> float:
    sel = (traj.tau >= window[0]) & (traj.tau <= window[1])
    slope, _ = np.polyfit(np.log(traj.tau[sel]), np.log(traj.modulus[sel]), 1)
    return float(slope)
