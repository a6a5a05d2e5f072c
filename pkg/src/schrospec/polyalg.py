"""Exact complex-rational polynomial algebra for the Hermite-type eigenfunctions.

Polynomials in y_1..y_N carry coefficients in Q[i].  The irrational
normalization 1/sqrt(beta!) is never multiplied in; it is kept as the exact
rational ``norm_factor_sq`` so every operation stays exact.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

MultiIndex = tuple[int, ...]


def multi_index(entries: Iterable[int], dim: int | None = None) -> MultiIndex:
    """Validate and return a multiindex as a tuple of non-negative ints."""
    beta = tuple(int(b) for b in entries)
    if not beta:
        raise ValueError("multiindex must have at least one entry")
    if any(b < 0 for b in beta):
        raise ValueError(f"multiindex entries must be non-negative: {beta}")
    if dim is not None and len(beta) != dim:
        raise ValueError(f"multiindex {beta} has length {len(beta)}, expected {dim}")
    return beta


def order(beta: MultiIndex) -> int:
    return sum(beta)


def mi_factorial(beta: MultiIndex) -> int:
    return math.prod(math.factorial(b) for b in beta)


def multi_indices(total: int, dim: int) -> list[MultiIndex]:
    """All multiindices of length ``dim`` with order exactly ``total``, in lex order."""
    out = []
    for combo in combinations_with_replacement(range(dim), total):
        beta = [0] * dim
        for k in combo:
            beta[k] += 1
        out.append(tuple(beta))
    return sorted(out, reverse=True)


def multi_indices_upto(max_order: int, dim: int) -> list[MultiIndex]:
    return [b for l in range(max_order + 1) for b in multi_indices(l, dim)]


def eigenspace_dim(l: int, N: int) -> int:
    """Number of multiindices of length N with order l."""
    if l < 0 or N < 1:
        raise ValueError("need l >= 0 and N >= 1")
    return math.comb(l + N - 1, N - 1)


def _grlex_key(beta: MultiIndex) -> tuple:
    return (sum(beta), beta)


@dataclass(frozen=True)
class CRat:
    """Exact Gaussian rational re + i*im."""

    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "re", Fraction(self.re))
        object.__setattr__(self, "im", Fraction(self.im))

    @classmethod
    def coerce(cls, x) -> CRat:
        if isinstance(x, CRat):
            return x
        if isinstance(x, complex):
            return cls(Fraction(x.real), Fraction(x.imag))
        return cls(Fraction(x), Fraction(0))

    def __add__(self, other) -> CRat:
        o = CRat.coerce(other)
        return CRat(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other) -> CRat:
        o = CRat.coerce(other)
        return CRat(self.re - o.re, self.im - o.im)

    def __rsub__(self, other) -> CRat:
        return CRat.coerce(other) - self

    def __mul__(self, other) -> CRat:
        o = CRat.coerce(other)
        return CRat(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __neg__(self) -> CRat:
        return CRat(-self.re, -self.im)

    def __truediv__(self, other) -> CRat:
        o = CRat.coerce(other)
        den = o.re * o.re + o.im * o.im
        if den == 0:
            raise ZeroDivisionError("division by zero CRat")
        return CRat((self.re * o.re + self.im * o.im) / den, (self.im * o.re - self.re * o.im) / den)

    def __bool__(self) -> bool:
        return bool(self.re) or bool(self.im)

    def __eq__(self, other) -> bool:
        try:
            o = CRat.coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self) -> int:
        return hash((self.re, self.im))

    def conjugate(self) -> CRat:
        return CRat(self.re, -self.im)

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))

    def __repr__(self) -> str:
        return f"CRat({self.re}, {self.im})"


I = CRat(0, 1)
ZERO = CRat(0, 0)
ONE = CRat(1, 0)


@dataclass(frozen=True)
class SpectralParams:
    """Half-order m and dimension N of the operator pair."""

    m: int
    N: int

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise ValueError(f"m must be a positive integer, got {self.m}")
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N}")

    @property
    def alpha(self) -> float:
        return 2 * self.m / (2 * self.m - 1)

    @property
    def beta_exponent(self) -> Fraction:
        return Fraction(1, 2 * self.m)

    def eigenvalue(self, beta: MultiIndex | int) -> Fraction:
        """lambda_beta = -|beta|/2m, the point spectrum shared by B and B*."""
        l = beta if isinstance(beta, int) else order(beta)
        return Fraction(-l, 2 * self.m)


@dataclass(frozen=True)
class Poly:
    """Multivariate polynomial with exact Q[i] coefficients.

    The represented function is ``sqrt(norm_factor_sq) * sum(c * y**beta)``.
    Zero coefficients are never stored.
    """

    dim: int
    terms: Mapping[MultiIndex, CRat] = field(default_factory=dict)
    norm_factor_sq: Fraction = Fraction(1)

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        clean = {}
        for beta, c in self.terms.items():
            beta = multi_index(beta, self.dim)
            c = CRat.coerce(c)
            if c:
                clean[beta] = clean.get(beta, ZERO) + c
        clean = {b: c for b, c in clean.items() if c}
        object.__setattr__(self, "terms", dict(sorted(clean.items(), key=lambda kv: _grlex_key(kv[0]), reverse=True)))
        object.__setattr__(self, "norm_factor_sq", Fraction(self.norm_factor_sq))

    @classmethod
    def monomial(cls, beta: Sequence[int], coeff=1) -> Poly:
        beta = multi_index(beta)
        return cls(len(beta), {beta: CRat.coerce(coeff)})

    @classmethod
    def constant(cls, dim: int, c=1) -> Poly:
        return cls(dim, {(0,) * dim: CRat.coerce(c)})

    @classmethod
    def zero(cls, dim: int) -> Poly:
        return cls(dim, {})

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def degree(self) -> int:
        if not self.terms:
            return -1
        return max(sum(b) for b in self.terms)

    def leading(self) -> tuple[MultiIndex, CRat]:
        beta = max(self.terms, key=_grlex_key)
        return beta, self.terms[beta]

    def core(self) -> Poly:
        """Same polynomial with the normalization dropped."""
        return Poly(self.dim, self.terms)

    def __add__(self, other: Poly) -> Poly:
        if self.dim != other.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")
        # a zero summand adopts the other's normalization
        if not other.terms:
            return self
        if not self.terms:
            return other
        if self.norm_factor_sq != other.norm_factor_sq:
            raise ValueError("cannot add polynomials with different normalization factors")
        out = dict(self.terms)
        for b, c in other.terms.items():
            out[b] = out.get(b, ZERO) + c
        return Poly(self.dim, out, self.norm_factor_sq)

    def __neg__(self) -> Poly:
        return Poly(self.dim, {b: -c for b, c in self.terms.items()}, self.norm_factor_sq)

    def __sub__(self, other: Poly) -> Poly:
        return self + (-other)

    def scale(self, s) -> Poly:
        s = CRat.coerce(s)
        return Poly(self.dim, {b: c * s for b, c in self.terms.items()}, self.norm_factor_sq)

    def __mul__(self, other) -> Poly:
        if not isinstance(other, Poly):
            return self.scale(other)
        if self.dim != other.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")
        out: dict[MultiIndex, CRat] = {}
        for b1, c1 in self.terms.items():
            for b2, c2 in other.terms.items():
                b = tuple(x + y for x, y in zip(b1, b2))
                out[b] = out.get(b, ZERO) + c1 * c2
        return Poly(self.dim, out, self.norm_factor_sq * other.norm_factor_sq)

    __rmul__ = scale

    def __eq__(self, other) -> bool:
        if not isinstance(other, Poly):
            return NotImplemented
        return (
            self.dim == other.dim
            and self.norm_factor_sq == other.norm_factor_sq
            and dict(self.terms) == dict(other.terms)
        )

    def __hash__(self) -> int:
        return hash((self.dim, self.norm_factor_sq, tuple(self.terms.items())))

    def derivative(self, axis: int, times: int = 1) -> Poly:
        out = {}
        for b, c in self.terms.items():
            k = b[axis]
            if k < times:
                continue
            nb = list(b)
            nb[axis] = k - times
            out[tuple(nb)] = c * math.perm(k, times)
        return Poly(self.dim, out, self.norm_factor_sq)

    def __iter__(self) -> Iterator[tuple[MultiIndex, CRat]]:
        return iter(self.terms.items())

    def __repr__(self) -> str:
        if not self.terms:
            return f"Poly(dim={self.dim}, 0)"
        parts = []
        for b, c in self.terms.items():
            mono = "*".join(f"y{k + 1}^{e}" if e > 1 else f"y{k + 1}" for k, e in enumerate(b) if e) or "1"
            sign = "-" if c.im < 0 else "+"
            parts.append(f"({c.re}{sign}{abs(c.im)}i)*{mono}")
        nf = "" if self.norm_factor_sq == 1 else f", norm_sq={self.norm_factor_sq}"
        return f"Poly(dim={self.dim}, {' + '.join(parts)}{nf})"

    def to_json_dict(self) -> dict:
        return {
            "dim": self.dim,
            "terms": [{"beta": list(b), "re": _frac_str(c.re), "im": _frac_str(c.im)} for b, c in self.terms.items()],
            "norm_factor_sq": _frac_str(self.norm_factor_sq),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @classmethod
    def from_json_dict(cls, d: Mapping) -> Poly:
        terms = {tuple(t["beta"]): CRat(Fraction(t["re"]), Fraction(t["im"])) for t in d["terms"]}
        return cls(int(d["dim"]), terms, Fraction(d.get("norm_factor_sq", "1/1")))

    @classmethod
    def from_json(cls, s: str) -> Poly:
        return cls.from_json_dict(json.loads(s))


def _frac_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def neg_laplacian_pow(p: Poly, m: int) -> Poly:
    """(-Delta)^m p by m repeated applications of -sum d^2/dy_i^2."""
    if m < 0:
        raise ValueError("m must be >= 0")
    for _ in range(m):
        acc = Poly(p.dim, {}, p.norm_factor_sq)
        for axis in range(p.dim):
            acc = acc + p.derivative(axis, 2)
        p = -acc
    return p


def euler_term(p: Poly) -> Poly:
    """sum_i y_i dp/dy_i, i.e. each monomial scaled by its degree."""
    return Poly(p.dim, {b: c * sum(b) for b, c in p.terms.items()}, p.norm_factor_sq)


def _check_dim(p: Poly, sp: SpectralParams):
    if p.dim != sp.N:
        raise ValueError(f"polynomial dimension {p.dim} does not match N={sp.N}")


def apply_bstar(p: Poly, sp: SpectralParams) -> Poly:
    """-i (-Delta)^m p - (1/2m) y.grad p."""
    _check_dim(p, sp)
    return neg_laplacian_pow(p, sp.m).scale(-I) - euler_term(p).scale(Fraction(1, 2 * sp.m))


def apply_b(p: Poly, sp: SpectralParams) -> Poly:
    """-i (-Delta)^m p + (1/2m) y.grad p + (N/2m) p."""
    _check_dim(p, sp)
    return (
        neg_laplacian_pow(p, sp.m).scale(-I)
        + euler_term(p).scale(Fraction(1, 2 * sp.m))
        + p.scale(Fraction(sp.N, 2 * sp.m))
    )


def _exp_series(beta: MultiIndex, m: int, unit: CRat) -> Poly:
    """sum_j (1/j!) (unit * (-Delta)^m)^j y^beta; the sum is finite."""
    term = Poly.monomial(beta)
    total = term
    for j in range(1, order(beta) // (2 * m) + 1):
        term = neg_laplacian_pow(term, m).scale(unit / j)
        total = total + term
    return total


def hermite_star(beta: Sequence[int], sp: SpectralParams) -> Poly:
    """Generalized Hermite polynomial: eigenfunction of B* with eigenvalue -|beta|/2m.

    The core is y^beta + sum_j (1/j!) (i(-Delta)^m)^j y^beta with norm 1/beta!.
    """
    beta = multi_index(beta, sp.N)
    core = _exp_series(beta, sp.m, I)
    return Poly(sp.N, core.terms, Fraction(1, mi_factorial(beta)))


def hermite_plus(beta: Sequence[int], sp: SpectralParams) -> Poly:
    """Polynomial eigenfunction of B with eigenvalue (N+|beta|)/2m.

    Same recursion as ``hermite_star`` with -i replacing i.
    """
    beta = multi_index(beta, sp.N)
    core = _exp_series(beta, sp.m, -I)
    p = Poly(sp.N, core.terms, Fraction(1, mi_factorial(beta)))
    lam = Fraction(sp.N + order(beta), 2 * sp.m)
    if not (apply_b(p, sp) - p.scale(lam)).is_zero():
        raise ArithmeticError(f"hermite_plus{beta} failed its eigen-relation")
    return p


def verify_eigenpair(beta: Sequence[int], sp: SpectralParams) -> Poly:
    """Exact residual B* psi*_beta - lambda_beta psi*_beta (should be zero)."""
    p = hermite_star(beta, sp)
    return apply_bstar(p, sp) - p.scale(sp.eigenvalue(tuple(beta)))


def poly_coefficients(p: Poly, include_norm: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Exponent matrix (terms x N) and complex coefficient vector."""
    if not p.terms:
        return np.zeros((0, p.dim), dtype=int), np.zeros(0, dtype=complex)
    exps = np.array(list(p.terms.keys()), dtype=int)
    scale = math.sqrt(p.norm_factor_sq) if include_norm else 1.0
    coeffs = np.array([complex(c) for c in p.terms.values()]) * scale
    return exps, coeffs


def eval_poly(p: Poly, y) -> complex | np.ndarray:
    """Evaluate at a point or an array of points.

    For N=1, ``y`` may be a scalar or an array of abscissae.  For N>1 the last
    axis holds the coordinates.  Coefficients go to double only here.
    """
    y = np.asarray(y, dtype=float)
    if p.dim == 1:
        pts = y[..., None]
        scalar = y.ndim == 0 or y.shape == (1,)
    else:
        if y.shape[-1] != p.dim:
            raise ValueError(f"points have {y.shape[-1]} coordinates, polynomial has dim {p.dim}")
        pts = y
        scalar = y.ndim == 1
    result = _horner(p.terms, pts, p.dim) * math.sqrt(p.norm_factor_sq)
    return complex(result.reshape(-1)[0]) if scalar else result


def _horner(terms: Mapping[MultiIndex, CRat], pts: np.ndarray, dim: int) -> np.ndarray:
    # Group by all but the last exponent and run Horner on the last variable.
    out = np.zeros(pts.shape[:-1], dtype=complex)
    if not terms:
        return out
    groups: dict[MultiIndex, dict[int, complex]] = {}
    for b, c in terms.items():
        groups.setdefault(b[:-1], {})[b[-1]] = complex(c)
    last = pts[..., dim - 1]
    for head, row in groups.items():
        acc = np.zeros_like(out)
        for k in range(max(row), -1, -1):
            acc = acc * last + row.get(k, 0.0)
        for axis, e in enumerate(head):
            if e:
                acc = acc * pts[..., axis] ** e
        out += acc
    return out
