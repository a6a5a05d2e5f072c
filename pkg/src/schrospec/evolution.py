"""Linear evolution u_t = -i(-Delta)^m u, moments, and eigenfunction expansions.

Two rescaled frames are supported.  The forward frame uses
w(y, tau) = (1+t)^{N/2m} u(y (1+t)^{1/2m}, t) with tau = ln(1+t); there
w = sum_beta exp(-|beta| tau/2m) c_beta psi_beta with c_beta = <u0, psi*_beta>.
The backward frame uses w(y, tau) = u(y (T-t)^{1/2m}, t) with tau = -ln(T-t);
there w = sum_beta exp(-|beta| tau/2m) M*_beta psi*_beta.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Sequence

import numpy as np

from .grids import CGrid, euler_grid, neg_laplacian_pow_grid, resample_uniform, spectral_derivative
from .polyalg import (
    MultiIndex,
    Poly,
    SpectralParams,
    eval_poly,
    hermite_star,
    mi_factorial,
    multi_index,
    multi_indices_upto,
    neg_laplacian_pow,
    order,
)


class WrapAroundWarning(UserWarning):
    """Mass near the periodic boundary; the free-space emulation is suspect."""


class DivergenceWarning(UserWarning):
    """A weighted integrand is not negligible at the box edge."""


SUPPORT_TOL = 1e-12


@dataclass
class CoeffSeq:
    """Finite map multiindex -> complex coefficient, truncated at order_cut."""

    entries: dict[MultiIndex, complex] = field(default_factory=dict)
    order_cut: int = 0

    def __post_init__(self):
        self.entries = {multi_index(b): complex(v) for b, v in self.entries.items()}
        if self.entries:
            top = max(order(b) for b in self.entries)
            if top > self.order_cut:
                raise ValueError(f"entry of order {top} exceeds order_cut {self.order_cut}")

    def __getitem__(self, beta) -> complex:
        return self.entries.get(tuple(beta), 0j)

    def __iter__(self):
        return iter(self.entries.items())

    def __len__(self) -> int:
        return len(self.entries)

    def slice(self, l: int) -> CoeffSeq:
        return CoeffSeq({b: v for b, v in self.entries.items() if order(b) == l}, self.order_cut)

    def order_max(self, l: int) -> float:
        vals = [abs(v) for b, v in self.entries.items() if order(b) == l]
        return max(vals, default=0.0)

    def l2_norm(self) -> float:
        return math.sqrt(sum(abs(v) ** 2 for v in self.entries.values()))

    def to_json_dict(self) -> list[dict]:
        return [{"beta": list(b), "re": v.real, "im": v.imag} for b, v in self.entries.items()]

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @classmethod
    def from_json(cls, text: str, order_cut: int | None = None) -> CoeffSeq:
        rows = json.loads(text)
        entries = {tuple(r["beta"]): complex(r["re"], r["im"]) for r in rows}
        cut = order_cut if order_cut is not None else max((sum(b) for b in entries), default=0)
        return cls(entries, cut)


class Frame(str, Enum):
    PHYSICAL = "physical"
    FORWARD = "forward_rescaled"
    BACKWARD = "backward_rescaled"


@dataclass(frozen=True)
class EvolutionState:
    grid: CGrid
    time: float
    frame: Frame
    sp: SpectralParams


# -- initial data ----------------------------------------------------------


def initial_data(name: str, grid: CGrid, **params) -> CGrid:
    """Built-in families: ``gaussian``, ``hermite_gaussian`` (power k), ``bump``."""
    mesh = grid.mesh()
    r2 = sum(c**2 for c in mesh)
    if name == "gaussian":
        data = np.exp(-r2)
    elif name == "hermite_gaussian":
        k = int(params.get("k", 1))
        data = mesh[0] ** k * np.exp(-r2)
    elif name == "bump":
        radius = float(params.get("radius", 1.0))
        s = r2 / radius**2
        with np.errstate(divide="ignore", over="ignore"):
            data = np.where(s < 1, np.exp(-1.0 / np.where(s < 1, 1 - s, 1.0)), 0.0)
    else:
        raise ValueError(f"unknown initial-data family {name!r}")
    return grid.like(data.astype(complex))


# -- propagation -------------------------------------------------------------


def _edge_fraction(g: CGrid, frac: float = 0.05) -> float:
    total = np.sum(np.abs(g.data) ** 2)
    if total == 0:
        return 0.0
    mask = np.zeros(g.shape, dtype=bool)
    for k, n in enumerate(g.shape):
        w = max(1, int(round(frac * n)))
        idx = [slice(None)] * g.ndim
        idx[k] = slice(0, w)
        mask[tuple(idx)] = True
        idx[k] = slice(n - w, n)
        mask[tuple(idx)] = True
    return float(np.sum(np.abs(g.data[mask]) ** 2) / total)


def propagation_box(omega_max: float, t_max: float, support: float, sp: SpectralParams, h_factor: float = 0.8) -> tuple[int, float]:
    """Power-of-two size and half-width of a periodic box emulating free space.

    ``omega_max`` is the frequency beyond which the data spectrum is
    negligible; waves travel at most 2m omega_max^{2m-1} t_max, and the grid
    must resolve omega_max.
    """
    reach = 2 * sp.m * omega_max ** (2 * sp.m - 1) * t_max
    extent = 1.25 * (reach + support) + support
    h = h_factor * np.pi / omega_max
    n = 2 ** int(math.ceil(math.log2(2 * extent / h)))
    return n, extent


def spectral_cutoff(u0: CGrid, rel: float = 1e-15) -> float:
    """Largest |k| at which |FT u0| exceeds ``rel`` times its maximum."""
    spec = np.abs(np.fft.fftn(u0.data))
    k = np.sqrt(sum(x**2 for x in np.meshgrid(*u0.wavenumbers(), indexing="ij")))
    keep = spec > rel * spec.max()
    return float(k[keep].max()) if np.any(keep) else 0.0


def propagate(u0: CGrid, t: float, sp: SpectralParams, monitor: bool = True) -> CGrid:
    """exp(-i t (-Delta)^m) u0 by the Fourier multiplier on the periodic box."""
    if u0.ndim != sp.N:
        raise ValueError("grid dimension does not match N")
    if t == 0:
        return u0.like(u0.data.astype(complex, copy=True))
    ks = u0.wavenumbers()
    k2 = sum(k**2 for k in np.meshgrid(*ks, indexing="ij"))
    out = u0.like(np.fft.ifftn(np.exp(-1j * t * k2**sp.m) * np.fft.fftn(u0.data)))
    if monitor:
        edge = _edge_fraction(out)
        if edge > 1e-8:
            warnings.warn(f"{edge:.2e} of the mass lies within 5% of the box edge", WrapAroundWarning, stacklevel=2)
    return out


# -- moments and coefficients ----------------------------------------------


def _monomial(g: CGrid, beta: MultiIndex) -> np.ndarray:
    out = np.ones(g.shape)
    for c, b in zip(g.mesh(), beta):
        if b:
            out = out * c**b
    return out


def moment(u0: CGrid, beta: Sequence[int]) -> complex:
    """(1/sqrt(beta!)) int z^beta u0(z) dz."""
    beta = multi_index(beta, u0.ndim)
    return u0.integrate(_monomial(u0, beta) * u0.data) / math.sqrt(mi_factorial(beta))


def dual_coefficient(u0: CGrid, beta: Sequence[int], sp: SpectralParams) -> complex:
    """Unconjugated pairing int u0 psi*_beta, assembled from raw moments."""
    beta = multi_index(beta, sp.N)
    p = hermite_star(beta, sp)
    total = 0j
    for gamma, c in p.terms.items():
        total += complex(c) * moment(u0, gamma) * math.sqrt(mi_factorial(gamma))
    return total * math.sqrt(p.norm_factor_sq)


def _same_grid(a: CGrid, b: CGrid) -> bool:
    return (
        a.shape == b.shape
        and np.allclose(a.spacing, b.spacing, rtol=1e-12)
        and np.allclose(a.origin, b.origin, rtol=1e-12, atol=1e-12)
    )


def adjoint_moment(u0: CGrid, beta: Sequence[int], psi_beta: CGrid) -> complex:
    """int u0(z) psi_beta(z) dz without conjugation."""
    multi_index(beta, u0.ndim)
    if not _same_grid(u0, psi_beta):
        raise ValueError("grid mismatch between data and psi_beta")
    return u0.integrate(u0.data * psi_beta.data)


def expansion_coeffs(u0: CGrid, L: int, sp: SpectralParams) -> CoeffSeq:
    """Forward-frame coefficients <u0, psi*_beta> for |beta| <= L."""
    return CoeffSeq({b: dual_coefficient(u0, b, sp) for b in multi_indices_upto(L, sp.N)}, L)


def raw_moments(u0: CGrid, L: int) -> CoeffSeq:
    return CoeffSeq({b: moment(u0, b) for b in multi_indices_upto(L, u0.ndim)}, L)


# -- reconstructions ---------------------------------------------------------


def reconstruct_forward(coeffs: CoeffSeq, psi_grids: Mapping[MultiIndex, CGrid], tau: float, sp: SpectralParams) -> tuple[CGrid, float]:
    """sum exp(-|beta| tau/2m) c_beta psi_beta on the psi grids.

    Also returns a tail estimate: the sup of the top retained order times the
    geometric factor q/(1-q), with q the observed order-to-order ratio.
    """
    if tau < 0:
        raise ValueError("tau must be non-negative")
    missing = [b for b in multi_indices_upto(coeffs.order_cut, sp.N) if b not in psi_grids]
    if missing:
        raise ValueError(f"psi_grids lacks {missing[:3]}...")
    template = next(iter(psi_grids.values()))
    total = np.zeros(template.shape, dtype=complex)
    per_order = np.zeros(coeffs.order_cut + 1)
    for beta in multi_indices_upto(coeffs.order_cut, sp.N):
        term = math.exp(-order(beta) * tau / (2 * sp.m)) * coeffs[beta] * psi_grids[beta].data
        total += term
        per_order[order(beta)] = max(per_order[order(beta)], np.abs(term).max())
    tail = 0.0
    if coeffs.order_cut >= 1 and per_order[-2] > 0:
        q = min(per_order[-1] / per_order[-2], 0.99)
        tail = per_order[-1] * q / (1 - q)
    return template.like(total), float(tail)


def reconstruct_adjoint(coeffs: CoeffSeq, sp: SpectralParams, grid: CGrid, tau: float) -> CGrid:
    """sum exp(-|beta| tau/2m) M*_beta psi*_beta evaluated on ``grid``."""
    if tau < 0:
        raise ValueError("tau must be non-negative")
    pts = grid.points()
    total = np.zeros(grid.shape, dtype=complex)
    for beta, c in coeffs:
        if c == 0:
            continue
        total += math.exp(-order(beta) * tau / (2 * sp.m)) * c * eval_poly(hermite_star(beta, sp), pts if sp.N > 1 else pts[..., 0])
    return grid.like(total)


# -- rescalings --------------------------------------------------------------


def _target(u: CGrid, target: CGrid | None) -> CGrid:
    return u if target is None else target


def rescale_forward(u: CGrid, t: float, sp: SpectralParams, target: CGrid | None = None, shift: float = 1.0) -> EvolutionState:
    """w(y) = s^{N/2m} u(y s^{1/2m}) with s = shift + t on the target grid; tau = ln s.

    ``shift=1`` pairs with ``expansion_coeffs``; ``shift=0`` (t > 0) pairs
    with ``raw_moments``.
    """
    if shift not in (0.0, 1.0):
        raise ValueError("shift must be 0 or 1")
    if t < 0 or (shift == 0 and t <= 0):
        raise ValueError("forward rescaling needs shift + t > 0 and t >= 0")
    s = shift + t
    tgt = _target(u, target)
    scale = s ** (1 / (2 * sp.m))
    data = resample_uniform(u, tgt.origin, tgt.spacing, tgt.shape, scale=scale) * s ** (sp.N / (2 * sp.m))
    return EvolutionState(tgt.like(data), math.log(s), Frame.FORWARD, sp)


def rescale_backward(u: CGrid, t: float, T: float, sp: SpectralParams, target: CGrid | None = None) -> EvolutionState:
    """w(y) = u(y (T-t)^{1/2m}) on the target grid; tau = -ln(T-t)."""
    if not t < T:
        raise ValueError("backward rescaling needs t < T")
    tgt = _target(u, target)
    scale = (T - t) ** (1 / (2 * sp.m))
    data = resample_uniform(u, tgt.origin, tgt.spacing, tgt.shape, scale=scale)
    return EvolutionState(tgt.like(data), -math.log(T - t), Frame.BACKWARD, sp)


# -- weighted norms ----------------------------------------------------------


def rho(r: np.ndarray, sp: SpectralParams) -> np.ndarray:
    return np.exp(-(r**sp.alpha))


def weighted_norm(u: CGrid, sp: SpectralParams, which: str = "rho") -> float:
    """Norm in L2 with weight rho = exp(-|y|^alpha), its inverse, or the rho-Sobolev norm.

    ``sobolev_rho`` sums |D^gamma u|^2 over |gamma| <= 2m (spectral derivatives).
    """
    r = u.radius()
    if which == "rho":
        dens = rho(r, sp) * np.abs(u.data) ** 2
    elif which == "rho_star":
        dens = np.exp(r**sp.alpha) * np.abs(u.data) ** 2
        edge = _edge_fraction(u.like(np.sqrt(dens)), 0.02)
        if edge > 1e-10:
            warnings.warn("rho_star integrand does not vanish at the box edge", DivergenceWarning, stacklevel=2)
    elif which == "sobolev_rho":
        dens = np.zeros(u.shape)
        for gamma in multi_indices_upto(2 * sp.m, u.ndim):
            dens = dens + np.abs(spectral_derivative(u.data, u.spacing, gamma)) ** 2
        dens = rho(r, sp) * dens
    else:
        raise ValueError(f"unknown norm {which!r}")
    return float(np.sqrt(np.sum(dens) * u.cell_volume))


def hardy_sides(r: np.ndarray, w: np.ndarray, sp: SpectralParams) -> tuple[float, float, float]:
    """Both sides of int r^{N+1}|w|^2 e^{-r^a} <= C int r^{N-1}|w^{(2m-1)}|^2 e^{-r^a}.

    ``w`` is a radial profile sampled on the uniform grid ``r`` and vanishing
    near both ends.  Returns (lhs, rhs_without_constant, constant).
    """
    h = r[1] - r[0]
    d = spectral_derivative(w, (h,), (2 * sp.m - 1,))
    weight = np.exp(-(r**sp.alpha))
    lhs = float(np.sum(r ** (sp.N + 1) * np.abs(w) ** 2 * weight) * h)
    rhs = float(np.sum(r ** (sp.N - 1) * np.abs(d) ** 2 * weight) * h)
    gamma = 1 / (2 * sp.m - 1)
    return lhs, rhs, gamma ** (1 - 2 * sp.m)


# -- exact polynomial evolution ---------------------------------------------


def propagate_polynomial(p: Poly, t: float, sp: SpectralParams, points) -> np.ndarray:
    """exp(-i t (-Delta)^m) p at ``points``; the exponential series is finite."""
    out = 0
    term = p
    j = 0
    weight = 1.0 + 0j
    while not term.is_zero():
        out = out + weight * eval_poly(term, points)
        j += 1
        term = neg_laplacian_pow(term, sp.m)
        weight = weight * (-1j * t) / j
    return np.asarray(out)


def backward_semigroup_poly(p: Poly, tau: float, sp: SpectralParams, points) -> np.ndarray:
    """exp(B* tau) applied to a polynomial, evaluated at ``points``.

    Realized as u(y e^{-tau/2m}, t) with u the exact evolution of p and
    t = 1 - e^{-tau}.
    """
    t = 1.0 - math.exp(-tau)
    return propagate_polynomial(p, t, sp, np.asarray(points) * math.exp(-tau / (2 * sp.m)))


def project_hermite(values: np.ndarray, points, sp: SpectralParams, max_order: int) -> CoeffSeq:
    """Least-squares coefficients of ``values`` on {psi*_gamma : |gamma| <= max_order}."""
    betas = multi_indices_upto(max_order, sp.N)
    A = np.column_stack([np.ravel(eval_poly(hermite_star(b, sp), points)) for b in betas])
    coef, *_ = np.linalg.lstsq(A, np.ravel(values), rcond=None)
    return CoeffSeq(dict(zip(betas, coef)), max_order)


def apply_bstar_grid(g: CGrid, sp: SpectralParams) -> np.ndarray:
    """Discrete B* = -i(-Delta)^m - (1/2m) y.grad with spectral derivatives."""
    return -1j * neg_laplacian_pow_grid(g.data, g.spacing, sp.m) - euler_grid(g.data, g.spacing, g.origin) / (2 * sp.m)


def apply_b_grid(g: CGrid, sp: SpectralParams, centered_euler: bool = False) -> np.ndarray:
    """Discrete B = -i(-Delta)^m + (1/2m) y.grad + N/2m.

    ``centered_euler`` switches the y.grad part to second-order centered
    differences; the default is spectral.
    """
    lap = neg_laplacian_pow_grid(g.data, g.spacing, sp.m)
    if centered_euler:
        eul = np.zeros(g.shape, dtype=complex)
        for k, c in enumerate(g.mesh()):
            eul += c * np.gradient(g.data, g.spacing[k], axis=k)
    else:
        eul = euler_grid(g.data, g.spacing, g.origin)
    return -1j * lap + eul / (2 * sp.m) + sp.N / (2 * sp.m) * g.data
