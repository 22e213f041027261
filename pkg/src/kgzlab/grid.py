"""Periodic 1-D grid with Fourier differentiation, quadrature and norms.

The real line is truncated to the box ``[-L/2, L/2)`` with periodic
boundary conditions. Fields are plain NumPy arrays of length ``N``
sampled at the grid nodes; complex arrays hold ``u`` and ``v``, real
arrays hold ``n``, ``nu`` and ``m``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from .errors import GridError, MeanNotZero

#: relative tolerance on the mean of a field passed to the inverse Laplacian
TOL_MEAN = 1e-10


@dataclass(frozen=True)
class Grid1D:
    """Uniform periodic grid on ``[-length/2, length/2)`` with ``points`` nodes."""

    length: float
    points: int

    def __post_init__(self):
        if not np.isfinite(self.length) or self.length <= 0:
            raise GridError(f"box length must be positive, got {self.length}")
        if int(self.points) != self.points or self.points < 16 or self.points % 2:
            raise GridError(f"number of points must be even and >= 16, got {self.points}")
        object.__setattr__(self, "length", float(self.length))
        object.__setattr__(self, "points", int(self.points))

    @property
    def h(self) -> float:
        return self.length / self.points

    @cached_property
    def x(self) -> np.ndarray:
        x = -0.5 * self.length + self.h * np.arange(self.points)
        x.setflags(write=False)
        return x

    @cached_property
    def k(self) -> np.ndarray:
        """Angular wavenumbers in FFT order."""
        k = 2 * np.pi * np.fft.fftfreq(self.points, d=self.h)
        k.setflags(write=False)
        return k

    @cached_property
    def k_odd(self) -> np.ndarray:
        """Wavenumbers with the Nyquist mode zeroed (odd-order derivatives)."""
        k = np.array(self.k)
        k[self.points // 2] = 0.0
        k.setflags(write=False)
        return k

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """Two-thirds rule mask in FFT order (True = retained mode)."""
        j = np.abs(np.fft.fftfreq(self.points) * self.points)
        mask = j <= self.points / 3.0
        mask.setflags(write=False)
        return mask

    @property
    def k_max(self) -> float:
        return np.pi / self.h

    def wrap(self, x):
        """Map coordinates into the fundamental cell ``[-L/2, L/2)``."""
        L = self.length
        return (np.asarray(x) + 0.5 * L) % L - 0.5 * L


def make_grid(L: float, N: int) -> Grid1D:
    return Grid1D(L, N)


def _symbol(grid: Grid1D, order: int) -> np.ndarray:
    k = grid.k_odd if order % 2 else grid.k
    return (1j * k) ** order


def derivative(grid: Grid1D, f, order: int = 1) -> np.ndarray:
    """Spectral derivative of ``f`` of the given order.

    Real input gives real output; for odd orders the Nyquist mode is
    dropped so that this holds exactly.
    """
    if order < 1:
        raise ValueError("derivative order must be >= 1")
    f = np.asarray(f)
    sym = _symbol(grid, order)
    if np.isrealobj(f):
        nh = grid.points // 2 + 1
        return np.fft.irfft(sym[:nh] * np.fft.rfft(f), n=grid.points)
    return np.fft.ifft(sym * np.fft.fft(f))


def mean(grid: Grid1D, f) -> float:
    return float(np.mean(np.real(f)))


def inverse_neg_laplacian(grid: Grid1D, f, tol: float = TOL_MEAN) -> np.ndarray:
    """Zero-mean solution ``g`` of ``-g'' = f`` on the torus.

    Raises :class:`MeanNotZero` when ``|mean(f)| > tol * ||f||``.
    """
    f = np.asarray(f, dtype=float)
    mu = mean(grid, f)
    scale = float(np.max(np.abs(f))) if f.size else 0.0
    # compare on the rescaled field so tiny inputs do not underflow
    if scale > 0 and abs(mu / scale) > tol * norm(grid, f / scale):
        raise MeanNotZero(f"field mean {mu:.3e} exceeds tolerance for the inverse Laplacian")
    fh = np.fft.rfft(f)
    k = grid.k[: grid.points // 2 + 1]
    gh = np.zeros_like(fh)
    gh[1:] = fh[1:] / k[1:] ** 2
    return np.fft.irfft(gh, n=grid.points)


def antiderivative(grid: Grid1D, f, tol: float = TOL_MEAN) -> np.ndarray:
    """Zero-mean ``F`` with ``F' = f`` (the Ḣ⁻¹ potential of ``f``)."""
    return -derivative(grid, inverse_neg_laplacian(grid, f, tol), 1)


def shift(grid: Grid1D, f, y: float) -> np.ndarray:
    """Periodic spectral translate ``f(x - y)``."""
    f = np.asarray(f)
    if y == 0:
        return np.array(f)
    if np.isrealobj(f):
        nh = grid.points // 2 + 1
        ph = np.exp(-1j * grid.k[:nh] * y)
        ph[-1] = np.cos(grid.k[nh - 1] * y)
        return np.fft.irfft(ph * np.fft.rfft(f), n=grid.points)
    return np.fft.ifft(np.exp(-1j * grid.k * y) * np.fft.fft(f))


def integrate(grid: Grid1D, f) -> float:
    return grid.h * float(np.sum(np.real(f)))


def inner(grid: Grid1D, f, g) -> float:
    """Real inner product ``Re ∫ f conj(g) dx`` summed over all components."""
    f = np.asarray(f)
    g = np.asarray(g)
    if f.shape[-1] != grid.points or g.shape[-1] != grid.points:
        raise ValueError("field length does not match the grid")
    return grid.h * float(np.sum(np.real(f * np.conj(g))))


def norm(grid: Grid1D, f) -> float:
    return np.sqrt(max(inner(grid, f, f), 0.0))


def h1_norm(grid: Grid1D, f) -> float:
    return np.sqrt(inner(grid, f, f) + inner(grid, derivative(grid, f), derivative(grid, f)))


def hminus1_norm(grid: Grid1D, f) -> float:
    """``||∂ₓ⁻¹ f||`` for a zero-mean ``f``."""
    return norm(grid, antiderivative(grid, f))


def x_norm(grid: Grid1D, xi) -> float:
    """Energy-space norm on H¹ × L² × L² × Ḣ⁻¹ of a 4-tuple."""
    f, g, h, k = xi
    return np.sqrt(h1_norm(grid, f) ** 2 + norm(grid, g) ** 2 + norm(grid, h) ** 2
                   + hminus1_norm(grid, np.real(k)) ** 2)


@lru_cache(maxsize=16)
def differentiation_matrix(grid: Grid1D, order: int) -> np.ndarray:
    """Dense real matrix of the spectral derivative of the given order."""
    sym = _symbol(grid, order)
    eye = np.eye(grid.points)
    D = np.real(np.fft.ifft(sym[:, None] * np.fft.fft(eye, axis=0), axis=0))
    if order % 2 == 0:
        D = 0.5 * (D + D.T)
    else:
        D = 0.5 * (D - D.T)
    D.setflags(write=False)
    return D


@lru_cache(maxsize=16)
def inverse_neg_laplacian_matrix(grid: Grid1D) -> np.ndarray:
    """Dense matrix of ``(-Δ)⁻¹`` with the zero mode mapped to zero."""
    N = grid.points
    sym = np.zeros(N)
    sym[1:] = 1.0 / grid.k[1:] ** 2
    G = np.real(np.fft.ifft(sym[:, None] * np.fft.fft(np.eye(N), axis=0), axis=0))
    G = 0.5 * (G + G.T)
    G.setflags(write=False)
    return G
