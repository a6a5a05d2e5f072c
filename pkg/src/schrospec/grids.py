"""Uniform complex grids, their file formats, and shared spectral helpers."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np


class ResamplingError(ValueError):
    """Requested points fall outside the sampled box."""


@dataclass(frozen=True, eq=False)
class CGrid:
    """Complex samples on a uniform grid.

    ``data`` has shape ``shape``; axis k holds points ``origin[k] + j*spacing[k]``.
    """

    data: np.ndarray
    spacing: tuple[float, ...]
    origin: tuple[float, ...]

    def __post_init__(self):
        data = np.asarray(self.data, dtype=complex)
        spacing = tuple(float(h) for h in np.atleast_1d(self.spacing))
        origin = tuple(float(o) for o in np.atleast_1d(self.origin))
        if data.ndim != len(spacing) or data.ndim != len(origin):
            raise ValueError("spacing/origin length must match data dimension")
        if any(h <= 0 for h in spacing):
            raise ValueError("spacing must be positive")
        if any(n < 2 for n in data.shape):
            raise ValueError("every axis needs at least 2 points")
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "spacing", spacing)
        object.__setattr__(self, "origin", origin)

    @classmethod
    def centered(cls, shape: int | Sequence[int], extent: float | Sequence[float], data=None) -> CGrid:
        """Grid on [-L, L) per axis with spacing 2L/n; index n//2 sits at y = 0."""
        shape = tuple(np.atleast_1d(shape).astype(int))
        ext = np.broadcast_to(np.asarray(extent, dtype=float), (len(shape),))
        spacing = tuple(2 * L / n for L, n in zip(ext, shape))
        origin = tuple(-(n // 2) * h for n, h in zip(shape, spacing))
        if data is None:
            data = np.zeros(shape, dtype=complex)
        return cls(np.asarray(data, dtype=complex).reshape(shape), spacing, origin)

    def like(self, data) -> CGrid:
        return CGrid(np.asarray(data).reshape(self.shape), self.spacing, self.origin)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def cell_volume(self) -> float:
        return math.prod(self.spacing)

    def axes(self) -> list[np.ndarray]:
        return [o + h * np.arange(n) for o, h, n in zip(self.origin, self.spacing, self.shape)]

    def mesh(self) -> list[np.ndarray]:
        return np.meshgrid(*self.axes(), indexing="ij")

    def points(self) -> np.ndarray:
        """Coordinates stacked on a trailing axis, shape ``shape + (N,)``."""
        return np.stack(self.mesh(), axis=-1)

    def radius(self) -> np.ndarray:
        return np.sqrt(sum(c**2 for c in self.mesh()))

    def integrate(self, values=None) -> complex:
        """Tensor trapezoid rule (plain sum for data vanishing at the edges)."""
        v = self.data if values is None else values
        return complex(np.sum(v) * self.cell_volume)

    def l2_norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.data) ** 2) * self.cell_volume))

    def wavenumbers(self) -> list[np.ndarray]:
        return [2 * np.pi * np.fft.fftfreq(n, d=h) for n, h in zip(self.shape, self.spacing)]

    def contains(self, pts) -> bool:
        pts = np.asarray(pts, dtype=float).reshape(-1, self.ndim)
        for k, ax in enumerate(self.axes()):
            lo, hi = ax[0], ax[-1] + self.spacing[k]
            if np.any(pts[:, k] < lo - 1e-12) or np.any(pts[:, k] > hi + 1e-12):
                return False
        return True

    # -- serialization -------------------------------------------------

    def header(self, dtype: str = "complex128") -> dict:
        return {"shape": list(self.shape), "spacing": list(self.spacing), "origin": list(self.origin), "dtype": dtype}

    def save(self, path: str | Path, dtype: str = "complex128") -> Path:
        """Flat little-endian binary at ``path`` plus ``path + '.json'`` header."""
        if dtype not in ("complex64", "complex128"):
            raise ValueError("dtype must be complex64 or complex128")
        path = Path(path)
        arr = self.data.astype(np.dtype(dtype).newbyteorder("<"))
        path.write_bytes(arr.tobytes(order="C"))
        Path(str(path) + ".json").write_text(json.dumps(self.header(dtype), indent=2))
        return path

    @classmethod
    def load(cls, path: str | Path) -> CGrid:
        path = Path(path)
        head = json.loads(Path(str(path) + ".json").read_text())
        dt = np.dtype(head["dtype"]).newbyteorder("<")
        data = np.frombuffer(path.read_bytes(), dtype=dt).astype(complex)
        return cls(data.reshape(head["shape"]), tuple(head["spacing"]), tuple(head["origin"]))

    def to_csv(self, path: str | Path, axis: int = 0) -> Path:
        """1D slice (through the centre for N > 1) as rows y, Re, Im, |.|."""
        path = Path(path)
        idx = [n // 2 for n in self.shape]
        idx[axis] = slice(None)
        line = self.data[tuple(idx)]
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["y", "re", "im", "abs"])
            for y, v in zip(self.axes()[axis], line):
                w.writerow([f"{y:.12g}", f"{v.real:.12g}", f"{v.imag:.12g}", f"{abs(v):.12g}"])
        return path


def _unit_phase(num, M: int) -> np.ndarray:
    """exp(2 pi i num / M), reducing integer numerators mod M first."""
    num = np.asarray(num)
    if np.issubdtype(num.dtype, np.integer):
        return np.exp(2j * np.pi * (num % M) / M)
    return np.exp(2j * np.pi * np.mod(num, M) / M)


def _is_int(x: float) -> bool:
    return abs(x - round(x)) < 1e-9 * max(1.0, abs(x))


def root_of_unity_dft(coeffs: np.ndarray, a: float, b: float, M: int, n: int, axis: int = -1) -> np.ndarray:
    """X_j = sum_k c_k exp(2 pi i (k + a)(j + b) / M) for j = 0..n-1 along ``axis``.

    Bluestein's chirp trick with chirp phases reduced modulo M in integer
    arithmetic, so long transforms keep full precision.  When ``a`` and ``b``
    are integers every phase is exact.
    """
    c = np.moveaxis(np.asarray(coeffs, dtype=complex), axis, -1)
    K = c.shape[-1]
    kmax = max(K, n)
    k = np.arange(kmax, dtype=np.int64)
    chirp = np.exp(1j * np.pi * ((k * k) % (2 * M)) / M)
    if _is_int(a) and _is_int(b):
        a, b = int(round(a)), int(round(b))
        pre = _unit_phase(np.arange(K, dtype=np.int64) * b, M)
        post = _unit_phase(np.arange(n, dtype=np.int64) * a + a * b, M)
    else:
        pre = _unit_phase(np.arange(K) * b, M)
        post = _unit_phase(np.arange(n) * a + a * b, M)
    x = c * (pre * chirp[:K])
    d = np.arange(-(K - 1), n, dtype=np.int64)
    kernel = np.exp(-1j * np.pi * ((d * d) % (2 * M)) / M)
    size = int(2 ** np.ceil(np.log2(K + n - 1)))
    conv = np.fft.ifft(np.fft.fft(x, size, axis=-1) * np.fft.fft(kernel, size), axis=-1)
    out = conv[..., K - 1 : K - 1 + n] * (chirp[:n] * post)
    return np.moveaxis(out, -1, axis)


def synthesize_uniform(coeffs: np.ndarray, omega0: float, domega: float, y0: float, h: float, n: int, axis: int = -1) -> np.ndarray:
    """Evaluate sum_k c_k exp(i (omega0 + k domega) y_j) at y_j = y0 + j h along ``axis``.

    ``domega * h`` must equal 2 pi / M for an integer M (the period is a whole
    number of output cells); the sum is then a root-of-unity DFT.
    """
    M = 2 * np.pi / (domega * h)
    if not _is_int(M):
        raise ValueError("the period must be an integer multiple of the output spacing")
    return root_of_unity_dft(coeffs, omega0 / domega, y0 / h, int(round(M)), n, axis)


def resample_uniform(g: CGrid, origin: Sequence[float], spacing: Sequence[float], shape: Sequence[int], scale: float = 1.0) -> np.ndarray:
    """Band-limited (trigonometric) interpolation of ``g`` at ``scale * x``.

    Target nodes are x_j = origin + j*spacing per axis; the interpolant is the
    periodic trigonometric polynomial through the samples of ``g``.
    """
    origin = np.broadcast_to(np.asarray(origin, dtype=float), (g.ndim,))
    spacing = np.broadcast_to(np.asarray(spacing, dtype=float), (g.ndim,))
    shape = tuple(np.broadcast_to(np.asarray(shape, dtype=int), (g.ndim,)))
    for k, ax in enumerate(g.axes()):
        lo = scale * origin[k]
        hi = scale * (origin[k] + spacing[k] * (shape[k] - 1))
        if min(lo, hi) < ax[0] - 1e-9 or max(lo, hi) > ax[-1] + g.spacing[k] + 1e-9:
            raise ResamplingError(
                f"axis {k}: target range [{min(lo, hi):.6g}, {max(lo, hi):.6g}] leaves the grid [{ax[0]:.6g}, {ax[-1]:.6g}]"
            )
    out = g.data
    for k in range(g.ndim):
        n = g.shape[k]
        spec = np.fft.fftshift(np.fft.fft(out, axis=k), axes=k) / n
        period = n * g.spacing[k]
        step = scale * spacing[k]
        # exp(i w_q x) with w_q = 2 pi q / period, x = x0 + j*step
        M = period / step
        x0 = scale * origin[k] - g.origin[k]
        q0 = -(n // 2)
        if _is_int(M):
            out = root_of_unity_dft(spec, q0, x0 / step, int(round(M)), shape[k], axis=k)
        else:
            xs = (x0 + step * np.arange(shape[k])) / period
            out = np.moveaxis(_blocked_dft(np.moveaxis(spec, k, -1), q0, xs), -1, k)
    return out


def _blocked_dft(c: np.ndarray, q0: int, xs: np.ndarray, block: int = 1024) -> np.ndarray:
    """sum_q c[..., q] exp(2 pi i (q + q0) x_j) for arbitrary x_j (periods).

    Indices are split as q = a*block + b so one phase table in b is shared
    by every block and the work is a single matrix product.
    """
    n = c.shape[-1]
    nb = -(-n // block)
    pad = np.zeros(c.shape[:-1] + (nb * block,), dtype=complex)
    pad[..., :n] = c
    pad = pad.reshape(c.shape[:-1] + (nb, block))
    inner = np.exp(2j * np.pi * np.mod(np.outer(np.arange(block), xs), 1.0))
    partial = pad @ inner  # (..., nb, J)
    outer = np.exp(2j * np.pi * np.mod(np.outer(np.arange(nb) * block + q0, xs), 1.0))
    return np.sum(partial * outer, axis=-2)


def resample_points(g: CGrid, pts) -> np.ndarray:
    """Trigonometric interpolation of ``g`` at scattered points (last axis N)."""
    pts = np.asarray(pts, dtype=float)
    if g.ndim == 1 and (pts.ndim == 0 or pts.shape[-1] != 1):
        pts = pts[..., None]
    flat = pts.reshape(-1, g.ndim)
    if not g.contains(flat):
        raise ResamplingError("points fall outside the grid")
    spec = np.fft.fftn(g.data) / g.data.size
    ks = g.wavenumbers()
    out = np.empty(len(flat), dtype=complex)
    for i, x in enumerate(flat):
        phase = np.ones((), dtype=complex)
        for k in range(g.ndim):
            shp = [1] * g.ndim
            shp[k] = -1
            phase = phase * np.exp(1j * ks[k] * (x[k] - g.origin[k])).reshape(shp)
        out[i] = np.sum(spec * phase)
    return out.reshape(pts.shape[:-1])


def spectral_derivative(data: np.ndarray, spacing: Sequence[float], orders: Sequence[int]) -> np.ndarray:
    """Mixed partial derivative D^orders of periodic samples via FFT."""
    data = np.asarray(data, dtype=complex)
    spec = np.fft.fftn(data)
    for k, (n, h, p) in enumerate(zip(data.shape, spacing, orders)):
        if p == 0:
            continue
        kk = 2 * np.pi * np.fft.fftfreq(n, d=h)
        factor = (1j * kk) ** p
        if n % 2 == 0 and p % 2 == 1:
            factor[n // 2] = 0.0
        shp = [1] * data.ndim
        shp[k] = -1
        spec = spec * factor.reshape(shp)
    return np.fft.ifftn(spec)


def neg_laplacian_pow_grid(data: np.ndarray, spacing: Sequence[float], m: int) -> np.ndarray:
    """(-Delta)^m of periodic samples via the symbol |k|^{2m}."""
    data = np.asarray(data, dtype=complex)
    ks = [2 * np.pi * np.fft.fftfreq(n, d=h) for n, h in zip(data.shape, spacing)]
    k2 = sum(k**2 for k in np.meshgrid(*ks, indexing="ij"))
    return np.fft.ifftn(np.fft.fftn(data) * k2**m)


def euler_grid(data: np.ndarray, spacing: Sequence[float], origin: Sequence[float]) -> np.ndarray:
    """y . grad of periodic samples with spectral first derivatives."""
    axes = [o + h * np.arange(n) for o, h, n in zip(origin, spacing, np.shape(data))]
    mesh = np.meshgrid(*axes, indexing="ij")
    out = np.zeros(np.shape(data), dtype=complex)
    for k in range(len(axes)):
        orders = [0] * len(axes)
        orders[k] = 1
        out += mesh[k] * spectral_derivative(data, spacing, orders)
    return out


def smooth_window(x: np.ndarray, inner: float, outer: float) -> np.ndarray:
    """C-infinity plateau: 1 for |x| <= inner, 0 for |x| >= outer."""
    t = np.clip((np.abs(x) - inner) / (outer - inner), 0.0, 1.0)

    def bump(s):
        with np.errstate(divide="ignore", over="ignore"):
            return np.where(s > 0, np.exp(-1.0 / np.where(s > 0, s, 1.0)), 0.0)

    a, b = bump(1 - t), bump(t)
    return a / (a + b)
