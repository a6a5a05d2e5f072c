"""Characteristic-vertex regularity tools for backward parabolae R(t) = sqrt(-t) phi(tau).

Contents: the stationary boundary-layer profile, the heat-equation integral
test over phi, the leading-order vertex ODE for the first Fourier mode with
its exact quadrature solution, the toy log-modulus integral, a windowed
verdict rule, the half-line eigenvalue experiment, and the L2 energy
bracket for u_t = -i u_xxxx.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sps
import scipy.sparse.linalg as spla
from scipy.integrate import quad, simpson, solve_ivp
from scipy.interpolate import CubicSpline

GAMMA_HAT = (1 - 1j) / (4 * math.sqrt(2 * math.pi))
PHASE_STEP = 0.1
TAU0 = math.e


class PhaseResolutionError(RuntimeError):
    """The phase phi^2/4 turns too fast for the step budget."""


class StepUnderflowError(RuntimeError):
    """The ODE integrator could not continue."""


class EigenSolverError(RuntimeError):
    """Shift-invert iteration did not converge."""


# -- phi families ------------------------------------------------------------


class Family(str, Enum):
    CONSTANT = "constant_l"
    POWER = "power"
    SQRTLOG = "petrovskii_sqrtlog"
    EPS = "petrovskii_eps"
    TABLE = "custom_table"


@dataclass(frozen=True)
class PhiSpec:
    """Boundary growth function phi(tau); ``params`` depend on the family.

    constant_l: (l,); power: (a,); petrovskii_sqrtlog: (); petrovskii_eps:
    (eps,); custom_table: flattened (tau, phi) pairs.
    """

    family: Family
    params: tuple[float, ...] = ()

    def __post_init__(self):
        fam = Family(self.family)
        object.__setattr__(self, "family", fam)
        p = tuple(float(x) for x in self.params)
        object.__setattr__(self, "params", p)
        need = {Family.CONSTANT: 1, Family.POWER: 1, Family.SQRTLOG: 0, Family.EPS: 1}
        if fam in need and len(p) != need[fam]:
            raise ValueError(f"{fam.value} takes {need[fam]} parameter(s)")
        if fam in (Family.CONSTANT, Family.POWER, Family.EPS) and p[0] <= 0:
            raise ValueError("parameter must be positive")
        if fam is Family.TABLE:
            if len(p) < 8 or len(p) % 2:
                raise ValueError("custom_table needs at least 4 (tau, phi) pairs")
            tau = np.array(p[0::2])
            if np.any(np.diff(tau) <= 0):
                raise ValueError("custom_table tau values must increase")

    @classmethod
    def from_csv(cls, path: str | Path) -> PhiSpec:
        rows = []
        with Path(path).open() as fh:
            for row in csv.reader(fh):
                if not row or row[0].strip().startswith("#"):
                    continue
                try:
                    rows.append((float(row[0]), float(row[1])))
                except ValueError:
                    continue  # header line
        return cls(Family.TABLE, tuple(v for r in rows for v in r))

    def _spline(self) -> CubicSpline:
        p = np.array(self.params)
        return CubicSpline(p[0::2], p[1::2])

    def __call__(self, tau):
        tau = np.asarray(tau, dtype=float)
        f = self.family
        if f is Family.CONSTANT:
            return np.full_like(tau, self.params[0])
        if f is Family.POWER:
            return tau ** self.params[0]
        if f is Family.SQRTLOG:
            return 2 * np.sqrt(np.log(tau))
        if f is Family.EPS:
            return 2 * (1 + self.params[0]) * np.sqrt(np.log(tau))
        return self._spline()(tau)

    def derivative(self, tau):
        tau = np.asarray(tau, dtype=float)
        f = self.family
        if f is Family.CONSTANT:
            return np.zeros_like(tau)
        if f is Family.POWER:
            a = self.params[0]
            return a * tau ** (a - 1)
        if f in (Family.SQRTLOG, Family.EPS):
            k = 1.0 if f is Family.SQRTLOG else 1 + self.params[0]
            return k / (tau * np.sqrt(np.log(tau)))
        return self._spline()(tau, 1)

    def second_derivative(self, tau):
        tau = np.asarray(tau, dtype=float)
        f = self.family
        if f is Family.CONSTANT:
            return np.zeros_like(tau)
        if f is Family.POWER:
            a = self.params[0]
            return a * (a - 1) * tau ** (a - 2)
        if f in (Family.SQRTLOG, Family.EPS):
            k = 1.0 if f is Family.SQRTLOG else 1 + self.params[0]
            lg = np.log(tau)
            return -k * (lg + 0.5) / (tau**2 * lg**1.5)
        return self._spline()(tau, 2)

    def phase_rate(self, tau):
        """d/dtau of phi^2/4."""
        return 0.5 * self(tau) * self.derivative(tau)

    def slow_growth(self, tau_max: float = 1e8, n: int = 64) -> dict[str, bool]:
        """Numerical trend checks for phi' -> 0, phi'/phi -> 0 and (phi/phi')' -> inf.

        Each check compares the tail of a geometric tau sample to its start;
        the last one asks for a monotone increase by at least half.
        """
        tau = np.geomspace(10 * TAU0, tau_max, n)
        phi, dphi = self(tau), self.derivative(tau)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = dphi / phi
            inv = np.where(dphi != 0, phi / dphi, np.inf)
        if np.all(np.isinf(inv)):
            growing = True
        else:
            # (phi/phi')' = 1 - phi phi'' / phi'^2
            d_inv = 1 - phi * self.second_derivative(tau) / dphi**2
            growing = bool(np.all(np.diff(d_inv) > 0) and d_inv[-1] > 1.5 * d_inv[0])
        return {
            "dphi_to_zero": bool(abs(dphi[-1]) < 1e-2 * max(abs(dphi[0]), 1e-300) or abs(dphi[-1]) < 1e-6),
            "log_derivative_to_zero": bool(abs(ratio[-1]) < 1e-2 * max(abs(ratio[0]), 1e-300) or abs(ratio[-1]) < 1e-6),
            "inverse_log_derivative_growing": growing,
        }


# -- boundary layer ----------------------------------------------------------


def bl_profile(xi):
    """g0(xi) = (1 - exp(i xi / 2)) / 2, the stationary boundary-layer profile."""
    xi = np.asarray(xi, dtype=float)
    if np.any(xi < 0):
        raise ValueError("xi must be non-negative")
    out = 0.5 * (1 - np.exp(0.5j * xi))
    return complex(out) if out.ndim == 0 else out


def bl_operator(g: Callable, xi, h: float = 1e-3):
    """i g'' + g'/2 by fourth-order central differences."""
    xi = np.asarray(xi, dtype=float)
    g1 = (-g(xi + 2 * h) + 8 * g(xi + h) - 8 * g(xi - h) + g(xi - 2 * h)) / (12 * h)
    g2 = (-g(xi + 2 * h) + 16 * g(xi + h) - 30 * g(xi) + 16 * g(xi - h) - g(xi - 2 * h)) / (12 * h**2)
    return 1j * g2 + 0.5 * g1


def bl_operator_exact(xi):
    """i g0'' + g0'/2 with the derivatives of g0 written out."""
    e = np.exp(0.5j * np.asarray(xi, dtype=float))
    g1 = -0.25j * e
    g2 = 0.125 * e
    return 1j * g2 + 0.5 * g1


# -- heat-equation integral test ----------------------------------------------


class Divergence(str, Enum):
    DIVERGENT = "divergent"
    CONVERGENT = "convergent"
    INCONCLUSIVE = "inconclusive"


@dataclass
class IntegralTest:
    value: float
    partials: tuple[float, float, float]
    ratio: float
    assessment: Divergence

    @property
    def verdict(self) -> str:
        """Regular iff the integral diverges."""
        return {Divergence.DIVERGENT: "regular", Divergence.CONVERGENT: "irregular"}.get(self.assessment, "inconclusive")


def _petrovskii_piece(phi: PhiSpec, a: float, b: float) -> float:
    # integrate in u = ln tau so logarithmic families are smooth
    def f(u):
        t = math.exp(u)
        p = float(phi(t))
        return p * math.exp(-p * p / 4) * t

    val, _ = quad(f, math.log(a), math.log(b), limit=400, epsabs=0.0, epsrel=1e-12)
    return val


def petrovskii_integral(phi: PhiSpec, tau_max: float = 1e6, converge_below: float = 0.9) -> IntegralTest:
    """int_e^tau_max phi e^{-phi^2/4} with a dyadic divergence assessment.

    With partial integrals I1, I2, I3 at tau_max/4, tau_max/2, tau_max the
    increment ratio r = (I3 - I2)/(I2 - I1) is about 1 or larger for
    logarithmic or faster growth and settles below 1 for a convergent tail.
    r >= 1 is divergent, r <= ``converge_below`` (or vanishing increments)
    is convergent, anything else inconclusive.
    """
    if tau_max <= 4 * TAU0:
        raise ValueError("tau_max must exceed 4e")
    q = tau_max / 4
    I1 = _petrovskii_piece(phi, TAU0, q)
    d2 = _petrovskii_piece(phi, q, 2 * q)
    d3 = _petrovskii_piece(phi, 2 * q, 4 * q)
    I2, I3 = I1 + d2, I1 + d2 + d3
    scale = max(abs(I3), 1e-300)
    if abs(d3) <= 1e-14 * scale:
        ratio = 0.0
    elif abs(d2) <= 1e-300:
        ratio = math.inf
    else:
        ratio = d3 / d2
    if ratio >= 1.0:
        a = Divergence.DIVERGENT
    elif ratio <= converge_below:
        a = Divergence.CONVERGENT
    else:
        a = Divergence.INCONCLUSIVE
    return IntegralTest(I3, (I1, I2, I3), ratio, a)


# -- oscillatory quadrature ----------------------------------------------------


def phase_panels(phi: PhiSpec, tau_span: tuple[float, float], step: float = PHASE_STEP, max_panels: int = 20_000_000) -> np.ndarray:
    """Panel edges with phase increment (phi^2/4) at most ``step`` per panel.

    Panels are also capped at a relative width of 1/64 so slowly varying
    amplitudes stay resolved.
    """
    a, b = tau_span
    edges = [a]
    t = a
    # march in vectorized chunks: local width from the phase rate at t
    while t < b:
        rate = abs(float(phi.phase_rate(t)))
        width = min(step / rate if rate > 0 else math.inf, max(t, 1.0) / 64, b - t)
        # look ahead so a rising rate cannot overshoot the budget
        rate2 = abs(float(phi.phase_rate(min(t + width, b))))
        if rate2 > 0:
            width = min(width, step / rate2)
        t = t + width
        edges.append(t)
        if len(edges) > max_panels:
            raise PhaseResolutionError(f"more than {max_panels} panels needed to resolve the phase")
    edges[-1] = b
    return np.array(edges)


_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)


def oscillatory_integral(phi: PhiSpec, tau_span: tuple[float, float], weight: Callable | None = None, step: float = PHASE_STEP) -> tuple[np.ndarray, np.ndarray]:
    """Cumulative int phi(s) e^{i phi(s)^2/4} ds over phase-resolved panels.

    Returns (panel edges, cumulative integral at each edge).  An extra
    real ``weight`` multiplies the integrand when given.
    """
    edges = phase_panels(phi, tau_span, step)
    lo, hi = edges[:-1], edges[1:]
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    s = mid[:, None] + half[:, None] * _GL_X[None, :]
    p = phi(s)
    f = p * np.exp(0.25j * p * p)
    if weight is not None:
        f = f * weight(s)
    panel = (f * _GL_W[None, :]).sum(axis=1) * half
    return edges, np.concatenate([[0.0], np.cumsum(panel)])


def toy_logmod(phi: PhiSpec, tau: float, tau0: float = TAU0) -> float:
    """(1/(4 sqrt(2 pi))) int_{tau0}^{tau} phi cos(phi^2/4) ds."""
    if tau < tau0:
        raise ValueError("tau must be at least tau0")
    if tau == tau0:
        return 0.0
    _, cum = oscillatory_integral(phi, (tau0, tau))
    return float(cum[-1].real) / (4 * math.sqrt(2 * math.pi))


# -- vertex ODE ----------------------------------------------------------------


class Verdict(str, Enum):
    REGULAR = "regular"
    IRREGULAR = "irregular"
    INCONCLUSIVE = "inconclusive"


@dataclass
class VertexTrajectory:
    taus: np.ndarray
    b0: np.ndarray
    d0: np.ndarray
    verdict: Verdict = Verdict.INCONCLUSIVE

    @property
    def modulus(self) -> np.ndarray:
        return np.hypot(self.b0, self.d0)


def vertex_rhs(phi: PhiSpec):
    k = 1 / (4 * math.sqrt(2 * math.pi))

    def rhs(tau, v):
        b, d = v
        p = float(phi(tau))
        c, s = math.cos(p * p / 4), math.sin(p * p / 4)
        return [k * p * ((b + d) * c + (b - d) * s), k * p * ((-b + d) * c + (b + d) * s)]

    return rhs


def integrate_vertex_ode(
    phi: PhiSpec,
    tau_span: tuple[float, float],
    a0_init: complex,
    rtol: float = 1e-10,
    atol: float = 1e-300,
    n_out: int = 1000,
    max_steps: int = 5_000_000,
) -> VertexTrajectory:
    """DOP853 on (b0, d0) with every step inside a phase-resolved panel.

    Steps are capped so the phase phi^2/4 advances at most 0.1 rad each.
    The system is linear, so a0 never vanishes and the error control is
    effectively relative (tiny ``atol``); |a0| may swing over hundreds of
    decades.
    """
    a0_init = complex(a0_init)
    if a0_init == 0:
        raise ValueError("a0_init must be nonzero")
    edges = phase_panels(phi, tau_span, max_panels=max_steps)
    rhs = vertex_rhs(phi)
    out_t = np.linspace(*tau_span, n_out)
    vals = np.empty((2, n_out))
    vals[:, 0] = a0_init.real, a0_init.imag
    state = vals[:, 0].copy()
    # chunks of panels share one max step, which limits solver restarts
    chunk = max(1, (len(edges) - 1) // 200)
    for i in range(0, len(edges) - 1, chunk):
        j = min(i + chunk, len(edges) - 1)
        lo, hi = edges[i], edges[j]
        width = float(np.diff(edges[i : j + 1]).min())
        idx = np.nonzero((out_t > lo) & (out_t <= hi))[0]
        t_eval = np.unique(np.concatenate([out_t[idx], [hi]]))
        sol = solve_ivp(rhs, (lo, hi), state, method="DOP853", rtol=rtol, atol=atol, max_step=width, first_step=0.1 * width, t_eval=t_eval)
        if sol.status != 0:
            raise StepUnderflowError(sol.message)
        if idx.size:
            vals[:, idx] = sol.y[:, : idx.size]
        state = sol.y[:, -1]
    traj = VertexTrajectory(out_t, vals[0], vals[1])
    traj.verdict = verdict(traj) if n_out >= 100 else Verdict.INCONCLUSIVE
    return traj


def vertex_exact(phi: PhiSpec, tau_span: tuple[float, float], a0_init: complex, taus: Sequence[float] | None = None) -> tuple[np.ndarray, np.ndarray]:
    """a0(tau) = a0 exp(gamma_hat int phi e^{i phi^2/4}) from the phase-resolved quadrature.

    Requested ``taus`` get the cumulative integral up to the enclosing panel
    edge plus a Gauss-Legendre rule on the remaining partial panel.
    """
    edges, cum = oscillatory_integral(phi, tau_span)
    if taus is None:
        return edges, complex(a0_init) * np.exp(GAMMA_HAT * cum)
    taus = np.asarray(taus, dtype=float)
    if np.any(taus < edges[0]) or np.any(taus > edges[-1]):
        raise ValueError("taus must lie inside tau_span")
    j = np.clip(np.searchsorted(edges, taus, side="right") - 1, 0, len(edges) - 1)
    lo = edges[j]
    mid, half = 0.5 * (lo + taus), 0.5 * (taus - lo)
    s = mid[:, None] + half[:, None] * _GL_X[None, :]
    p = phi(s)
    part = (p * np.exp(0.25j * p * p) * _GL_W[None, :]).sum(axis=1) * half
    return taus, complex(a0_init) * np.exp(GAMMA_HAT * (cum[j] + part))


def verdict(traj: VertexTrajectory, window_frac: float = 0.25, tol: float = 1e-3, windows: int = 4, slack: float = 1e-2) -> Verdict:
    """Windowed trend rule on max(|b0|, |d0|).

    The final ``window_frac`` of the span is split into ``windows`` pieces.
    Regular: the final-window maximum is below tol * initial and the piece
    maxima decrease.  Irregular: every piece maximum is at least 0.1 *
    initial and they do not decrease beyond a relative ``slack``.
    """
    if len(traj.taus) < 100:
        raise ValueError("verdict needs at least 100 trajectory points")
    amp = np.maximum(np.abs(traj.b0), np.abs(traj.d0))
    init = amp[0]
    n = len(amp)
    tail = amp[int(round((1 - window_frac) * n)) :]
    pieces = np.array_split(tail, windows)
    maxima = np.array([p.max() for p in pieces])
    if maxima[-1] < tol * init and np.all(np.diff(maxima) <= 0):
        return Verdict.REGULAR
    if np.all(maxima >= 0.1 * init) and np.all(np.diff(maxima) >= -slack * maxima[:-1]):
        return Verdict.IRREGULAR
    return Verdict.INCONCLUSIVE


# -- half-line eigenproblem ----------------------------------------------------


@dataclass
class HalfLineEigen:
    eigenvalue: complex
    y: np.ndarray
    vector: np.ndarray
    experimental: bool = True


def halfline_eigenpair(l: float, n: int = 4000, L_left: float = 30.0, shift: complex = 0.0) -> HalfLineEigen:
    """Eigenvalue of smallest |lambda - shift| of B* = i d^2/dy^2 - (y/2) d/dy on (-L_left, l).

    Second-order finite differences, zero Dirichlet data at both ends,
    shift-invert Arnoldi.  The eigenvector is scaled to equal 1 at y = 0
    (or at the node nearest to it).

    With zero Dirichlet data on a bounded interval the gauge
    psi = exp(-i y^2/8) w maps the operator to i w'' + (1/4 + i y^2/16) w,
    so every eigenvalue has real part exactly 1/4 and only the imaginary
    part carries information about l and L_left.
    """
    if l <= 0:
        raise ValueError("l must be positive")
    y_all = np.linspace(-L_left, l, n + 2)
    h = y_all[1] - y_all[0]
    y = y_all[1:-1]
    main = np.full(n, -2j / h**2)
    upper = 1j / h**2 - y[:-1] / (4 * h)
    lower = 1j / h**2 + y[1:] / (4 * h)
    A = sps.diags([lower, main, upper], [-1, 0, 1], format="csc")
    try:
        vals, vecs = spla.eigs(A, k=1, sigma=shift, which="LM", tol=1e-12, maxiter=10000)
    except (spla.ArpackNoConvergence, RuntimeError) as exc:
        raise EigenSolverError(str(exc)) from exc
    v = vecs[:, 0]
    j0 = int(np.argmin(np.abs(y)))
    v = v / v[j0]
    return HalfLineEigen(complex(vals[0]), y, v)


def halfline_first_eigenvalue(l: float, n: int = 4000, L_left: float = 30.0) -> complex:
    return halfline_eigenpair(l, n, L_left).eigenvalue


# -- L2 bracket for the fourth-order equation -------------------------------------


@dataclass(frozen=True)
class BoundaryValues:
    """u and its first three x-derivatives at one lateral boundary point."""

    u: complex
    ux: complex
    uxx: complex
    uxxx: complex


def energy_bracket_4th(left: BoundaryValues, right: BoundaryValues, R_rate: float = 0.0) -> float:
    """d/dt int_{-R}^{R} |u|^2 for u_t = -i u_xxxx in terms of boundary data.

    i([conj(u_xxx) u - u_xxx conj(u)] + [u_xx conj(u_x) - conj(u_xx) u_x]) from
    -R to R, plus R'(|u(R)|^2 + |u(-R)|^2) from the moving ends.
    """

    def point(b: BoundaryValues) -> float:
        val = 1j * ((np.conj(b.uxxx) * b.u - b.uxxx * np.conj(b.u)) + (b.uxx * np.conj(b.ux) - np.conj(b.uxx) * b.ux))
        return float(val.real)

    moving = R_rate * (abs(right.u) ** 2 + abs(left.u) ** 2)
    return point(right) - point(left) + moving


def l2_identity_check_4th(
    u_prev: np.ndarray,
    x_prev: np.ndarray,
    u_next: np.ndarray,
    x_next: np.ndarray,
    dt: float,
    left: BoundaryValues,
    right: BoundaryValues,
    R_rate: float = 0.0,
) -> float:
    """|central difference of int |u|^2 - boundary bracket| at the midpoint time.

    The snapshots sit dt/2 before and after the midpoint on their own
    uniform grids spanning [-R, R]; the boundary data belong to the midpoint.
    """
    m_prev = simpson(np.abs(u_prev) ** 2, x=x_prev)
    m_next = simpson(np.abs(u_next) ** 2, x=x_next)
    return abs((m_next - m_prev) / dt - energy_bracket_4th(left, right, R_rate))
