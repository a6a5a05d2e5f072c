"""Coefficient sequences {a_beta} and the diagonal operator B on them.

On finite-support sequences B acts as a_beta -> lambda_beta a_beta with
lambda_beta = -|beta|/2m, which makes norms, resolvents and sector bounds
explicit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .evolution import CoeffSeq
from .polyalg import SpectralParams, multi_index, order

EIGEN_GUARD = 1e-9


class EigenvalueHitError(ValueError):
    """lambda lies within EIGEN_GUARD of a point of the spectrum."""


@dataclass
class SeqVec:
    """Finitely supported coefficient sequence tied to (m, N)."""

    entries: dict = field(default_factory=dict)
    sp: SpectralParams = field(default_factory=lambda: SpectralParams(1, 1))

    def __post_init__(self):
        clean = {}
        for b, v in self.entries.items():
            b = multi_index(b)
            if len(b) != self.sp.N:
                raise ValueError(f"multiindex {b} does not have length N={self.sp.N}")
            clean[b] = complex(v)
        self.entries = clean

    def __getitem__(self, beta) -> complex:
        return self.entries.get(tuple(beta), 0j)

    def eigenvalues(self) -> dict:
        return {b: -order(b) / (2 * self.sp.m) for b in self.entries}

    def to_coeffseq(self) -> CoeffSeq:
        return CoeffSeq(dict(self.entries), max((order(b) for b in self.entries), default=0))

    def to_json(self) -> str:
        return self.to_coeffseq().to_json()

    @classmethod
    def from_json(cls, text: str, sp: SpectralParams) -> SeqVec:
        return cls(CoeffSeq.from_json(text).entries, sp)


def inner(v: SeqVec, w: SeqVec) -> complex:
    """(v, w)_0 = sum a_beta conj(b_beta)."""
    return complex(sum(a * np.conj(w[b]) for b, a in v.entries.items()))


def l2_norm(v: SeqVec) -> float:
    return math.sqrt(sum(abs(a) ** 2 for a in v.entries.values()))


def h2m_norm(v: SeqVec) -> float:
    """sqrt(sum (1 + lambda_beta^2) |a_beta|^2)."""
    m = v.sp.m
    return math.sqrt(sum((1 + (order(b) / (2 * m)) ** 2) * abs(a) ** 2 for b, a in v.entries.items()))


def apply_diag_b(v: SeqVec) -> SeqVec:
    m = v.sp.m
    return SeqVec({b: -order(b) / (2 * m) * a for b, a in v.entries.items()}, v.sp)


def in_sector(lam: complex, theta: float) -> bool:
    """lam != 0 and |arg lam| < pi/2 + theta."""
    return lam != 0 and abs(np.angle(lam)) < math.pi / 2 + theta


def sector_constant(theta: float) -> float:
    """C with |lambda_beta - lam|^{-1} <= C/|lam| on the sector of half-angle pi/2 + theta.

    The distance from the sector to the negative half-axis is |lam| cos(theta),
    so C = 1/cos(theta); it equals 1/sin(theta) at theta = pi/4.
    """
    return 1.0 / math.cos(theta)


@dataclass(frozen=True)
class ResolventResult:
    vec: SeqVec
    norm: float
    bound: float | None
    bound_ok: bool | None


def resolvent_apply(v: SeqVec, lam: complex, theta: float | None = None) -> ResolventResult:
    """b_beta = a_beta/(lambda_beta - lam), with the sector bound when theta is given."""
    m = v.sp.m
    out = {}
    for b, a in v.entries.items():
        d = -order(b) / (2 * m) - lam
        if abs(d) < EIGEN_GUARD:
            raise EigenvalueHitError(f"lambda = {lam} is an eigenvalue (|beta| = {order(b)})")
        out[b] = a / d
    w = SeqVec(out, v.sp)
    nrm = l2_norm(w)
    bound = ok = None
    if theta is not None and in_sector(lam, theta):
        bound = sector_constant(theta) * l2_norm(v) / abs(lam)
        ok = nrm <= bound * (1 + 1e-12)
    return ResolventResult(w, nrm, bound, ok)


def resolvent_tail(v: SeqVec, lam: complex, K: int) -> float:
    """l2 norm of (B - lam)^{-1} v restricted to |beta| >= K."""
    w = resolvent_apply(v, lam).vec
    return math.sqrt(sum(abs(a) ** 2 for b, a in w.entries.items() if order(b) >= K))


def tail_bound(K: int, sp: SpectralParams) -> float:
    """2m/K, valid for unit-norm v and lam with Re lam >= 0."""
    return 2 * sp.m / K


def admissible_growth(rate_exponent: float, sp: SpectralParams) -> bool:
    """True when coefficients growing like l^rate keep the series in the closure space.

    The threshold 2(2 - a)/a with a = 2m/(2m-1) simplifies to 2(m-1)/m.
    """
    return rate_exponent < 2 * (sp.m - 1) / sp.m


def mode_norm_estimate(l: int, sp: SpectralParams) -> float:
    """Leading-order size of the weighted L2 norm squared of psi_beta, |beta| = l.

    l^{-l(2-a)/a} [e^{2m-1} / (2m (m e)^{(2m-1)/m})]^{l/(2m-1)}, a = 2m/(2m-1);
    for m = 1 this is 2^{-l}.
    """
    if l < 2:
        raise ValueError("the estimate is asymptotic in l >= 2")
    m = sp.m
    a = sp.alpha
    log_base = (2 * m - 1) - math.log(2 * m) - (2 * m - 1) / m * (math.log(m) + 1)
    return math.exp(-l * (2 - a) / a * math.log(l) + l / (2 * m - 1) * log_base)
