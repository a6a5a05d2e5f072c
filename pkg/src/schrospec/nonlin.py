"""Self-similar eigenpairs of the quasilinear equation u_t = -i(-Delta)^m(|u|^n u).

Pairs (alpha, f) with u = (+-t)^{-alpha} f(y), y = x/(+-t)^beta and
beta = (1 - alpha n)/2m solve

    -i(-Delta)^m(|f|^n f) + s beta y.grad f + s alpha f = 0,   s = +-1,

with s = +1 for global (plus) and s = -1 for blow-up (minus) pairs.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from .grids import CGrid, euler_grid, neg_laplacian_pow_grid, smooth_window
from .polyalg import SpectralParams

AMPLITUDE_FLOOR = 1e-300
NEAR_ZERO = 1e-10


class NonSmoothWarning(UserWarning):
    """|f|^n f is only finitely smooth near zeros of f when n < 1."""


class Sign(str, Enum):
    PLUS = "plus"
    MINUS = "minus"

    @property
    def value_sign(self) -> int:
        return 1 if self is Sign.PLUS else -1


@dataclass(frozen=True)
class NLEigenpair:
    """Nonlinear eigenvalue alpha, exponent n and the profile f.

    ``profile`` is a callable of the stacked coordinates (shape ``(..., N)``)
    or a sampled CGrid.  ``tag`` names closed-form profiles.
    """

    alpha: float
    n: float
    sp: SpectralParams
    sign: Sign
    profile: Callable[[np.ndarray], np.ndarray] | CGrid
    tag: str = ""

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("n must be non-negative")
        object.__setattr__(self, "sign", Sign(self.sign))

    @property
    def beta_exp(self) -> float:
        return (1 - self.alpha * self.n) / (2 * self.sp.m)

    def sample(self, grid: CGrid) -> np.ndarray:
        if isinstance(self.profile, CGrid):
            if self.profile.shape != grid.shape or not np.allclose(self.profile.spacing, grid.spacing):
                raise ValueError("sampled profile does not match the grid")
            return self.profile.data
        return np.asarray(self.profile(grid.points()), dtype=complex) * np.ones(grid.shape)


def nonlinear_flux(f: np.ndarray, n: float) -> np.ndarray:
    """|f|^n f with |f| clamped away from zero."""
    mod = np.maximum(np.abs(f), AMPLITUDE_FLOOR)
    return mod**n * f


def nlep_residual(pair: NLEigenpair, grid: CGrid, taper: tuple[float, float] | bool | None = None) -> tuple[CGrid, float]:
    """Residual field of the eigenvalue equation and its sup over |y| <= extent/2.

    The profile is multiplied by a C-infinity plateau (``taper`` = inner,
    outer radius; default 0.6 and 0.9 of the half width) so that spectral
    differentiation applies to non-decaying profiles.  ``taper=False``
    skips it, which is the default for constant profiles.  Both (-Delta)^m
    and y.grad are spectral.
    """
    f = pair.sample(grid)
    n = pair.n
    if n < 1 and np.any(np.abs(f) < NEAR_ZERO):
        warnings.warn("profile has near-zeros where |f|^n f is not smooth", NonSmoothWarning, stacklevel=2)
    half = min(o + h * s for o, h, s in zip(grid.origin, grid.spacing, grid.shape))
    half = min(half, min(-o for o in grid.origin))
    if taper is None:
        taper = pair.tag != "constant"
    inner, outer = taper if isinstance(taper, tuple) else (0.6 * half, 0.9 * half)
    r = grid.radius()
    ft = f * smooth_window(r, inner, outer) if taper is not False else f
    flux = nonlinear_flux(ft, n)
    s = pair.sign.value_sign
    res = -1j * neg_laplacian_pow_grid(flux, grid.spacing, pair.sp.m)
    res = res + s * pair.beta_exp * euler_grid(ft, grid.spacing, grid.origin) + s * pair.alpha * ft
    inside = r <= inner if isinstance(taper, tuple) else r <= 0.5 * half
    sup = float(np.max(np.abs(res[inside]))) if np.any(inside) else 0.0
    return grid.like(res), sup


def explicit_pair_plus(n: float, N: int, m: int = 1) -> NLEigenpair:
    """alpha = N/(2 + N n), f = (2/(2 + N n))^{1/n} exp(i|y|^2/4); m = 1 only."""
    if m != 1:
        raise NotImplementedError("the explicit global pair exists for m = 1 only")
    if n <= 0:
        raise ValueError("n must be positive")
    alpha = N / (2 + N * n)
    amp = plus_amplitude(n, N)

    def profile(pts):
        return amp * np.exp(0.25j * np.sum(pts**2, axis=-1))

    return NLEigenpair(alpha, n, SpectralParams(1, N), Sign.PLUS, profile, "gaussian_phase")


def plus_amplitude(n: float, N: int) -> float:
    """(2/(2 + N n))^{1/n}, computed through log1p for small n."""
    return math.exp(-math.log1p(N * n / 2) / n)


def explicit_pair_minus(m: int = 1, N: int = 1, n: float = 1.0) -> NLEigenpair:
    """alpha = 0, f = 1: valid for every m, N and n."""

    def profile(pts):
        return np.ones(pts.shape[:-1], dtype=complex)

    return NLEigenpair(0.0, n, SpectralParams(m, N), Sign.MINUS, profile, "constant")


@dataclass(frozen=True)
class GrowthExponents:
    delta_wkbj: float
    blowup_growth: float
    minimal_growth: float
    ordering_ok: bool


def growth_exponents(n: float, sp: SpectralParams, alpha: float, alpha_exp: float | None = None) -> GrowthExponents:
    """Exponents of the growing bundles at infinity.

    delta solves delta n + (2m-1)(alpha_exp - 1) = 1; with the WKBJ value
    alpha_exp = 2m/(2m-1) it is zero.  The blow-up bundle grows like
    |y|^{2m/n}, the slower one like |y|^{2m|alpha|/(1+|alpha|n)}.
    """
    if n <= 0:
        raise ZeroDivisionError("n must be positive")
    m = sp.m
    a_exp = sp.alpha if alpha_exp is None else alpha_exp
    delta = (1 - (2 * m - 1) * (a_exp - 1)) / n
    if alpha_exp is None:
        delta = 0.0
    fast = 2 * m / n
    slow = 2 * m * abs(alpha) / (1 + abs(alpha) * n)
    return GrowthExponents(delta, fast, slow, slow < fast)


@dataclass(frozen=True)
class BranchingCheck:
    analytic_slope: float
    linear_anchor: float
    numeric_slope: float
    numeric_anchor: float

    @property
    def slope_rel_error(self) -> float:
        return abs(self.numeric_slope - self.analytic_slope) / abs(self.analytic_slope)

    @property
    def anchor_rel_error(self) -> float:
        return abs(self.numeric_anchor - self.linear_anchor) / abs(self.linear_anchor)


def branching_slope_check(N: int, n_values: tuple[float, float] = (1e-3, 1e-4)) -> BranchingCheck:
    """Slope of n -> alpha(n) at n = 0 for the explicit global family.

    The anchor is the linear value N/2.  The numerical slope uses the
    difference quotients s(n) = (alpha(n) - N/2)/n at the two given n and
    removes their O(n) error by Richardson extrapolation.
    """
    anchor = N / 2
    s = [(explicit_pair_plus(n, N).alpha - anchor) / n for n in n_values]
    n1, n2 = n_values
    slope = (n1 * s[1] - n2 * s[0]) / (n1 - n2)
    # anchor from a linear fit through the two alpha values
    a1, a2 = (explicit_pair_plus(n, N).alpha for n in n_values)
    numeric_anchor = a2 - n2 * (a1 - a2) / (n1 - n2)
    return BranchingCheck(-N * N / 4, anchor, slope, numeric_anchor)
