"""Independent reference values: mpmath series and contour integrals, classic recursions."""

from __future__ import annotations

import math

import mpmath as mp
import numpy as np


def psi_series(n: int, m: int, y: float, dps: int = 60) -> complex:
    """(-1)^n D^n F(y)/sqrt(n!) for N = 1 from the Taylor series of F.

    F(y) = sum_k (-1)^k y^{2k}/(2k)! Gamma((2k+1)/2m)/(2m pi) e^{-i pi (2k+1)/4m}.
    """
    with mp.workdps(dps):
        y = mp.mpf(y)
        tot = mp.mpc(0)
        k = 0
        while True:
            j = 2 * k
            if j >= n:
                c = (-1) ** k * mp.gamma(mp.mpf(j + 1) / (2 * m)) / (2 * m * mp.pi) * mp.expjpi(-mp.mpf(j + 1) / (4 * m))
                term = c / mp.factorial(j - n) * y ** (j - n)
                tot += term
                if k > 10 and abs(term) < mp.mpf(10) ** (-dps + 5) * (abs(tot) + 1e-30):
                    break
            k += 1
        return complex((-1) ** n * tot / mp.sqrt(mp.factorial(n)))


def psi_contour(n: int, m: int, y: float, dps: int = 40) -> complex:
    """Same quantity by quadrature along the rotated ray omega = e^{-i pi/4m} r."""
    with mp.workdps(dps):
        th = mp.exp(-1j * mp.pi / (4 * m))

        def f(r):
            return th * mp.exp(-(r ** (2 * m))) * ((1j * r * th) ** n * mp.exp(1j * r * th * y) + (-1j * r * th) ** n * mp.exp(-1j * r * th * y))

        R = (60 + n) ** (1 / (2 * m)) * 1.5
        v = mp.quad(f, mp.linspace(0, R, 40)) / (2 * mp.pi)
        return complex((-1) ** n * v / mp.sqrt(mp.factorial(n)))


def psi_m1_closed(n: int, y: np.ndarray) -> np.ndarray:
    """m = 1, N = 1: (-1)^n p_n(y) F(y)/sqrt(n!) with p_{k+1} = p_k' + (i y/2) p_k, p_0 = 1."""
    y = np.asarray(y, dtype=float)
    coeffs = np.array([1.0 + 0j])  # ascending powers
    for _ in range(n):
        der = coeffs[1:] * np.arange(1, len(coeffs))
        shifted = np.concatenate([[0.0], coeffs]) * 0.5j
        new = shifted.copy()
        new[: len(der)] += der
        coeffs = new
    p = np.polynomial.polynomial.polyval(y, coeffs)
    F = np.exp(0.25j * y**2) / np.sqrt(4j * np.pi)
    return (-1) ** n * p * F / math.sqrt(math.factorial(n))


def hermite_he(n: int, x):
    """Probabilists' Hermite He_n by the three-term recursion."""
    a, b = np.ones_like(np.asarray(x, dtype=complex)), np.asarray(x, dtype=complex)
    if n == 0:
        return a
    for k in range(1, n):
        a, b = b, x * b - k * a
    return b
