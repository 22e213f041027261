"""Ground state, standing-wave family and its tangent vectors.

Profiles solve ``-φ'' + (1 - ω²) φ - φ³ = 0`` on the periodic grid. Each
profile is seeded with the closed form ``√2 κ sech(κ x)``, ``κ = √(1-ω²)``,
and polished by Newton's method restricted to even functions (which
removes the translation kernel of the linearization).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from . import grid as g
from .errors import FrequencyOutOfRange, NoConvergence
from .state import KGZState

NEWTON_TOL = 1e-12
NEWTON_MAXITER = 50


def check_frequency(omega: float) -> float:
    omega = float(omega)
    if not np.isfinite(omega) or abs(omega) >= 1.0:
        raise FrequencyOutOfRange(f"|omega| must be < 1, got {omega}")
    return omega


def sech_profile(x, omega: float) -> np.ndarray:
    """Closed-form profile on the real line."""
    kappa = np.sqrt(1.0 - omega * omega)
    return np.sqrt(2.0) * kappa / np.cosh(kappa * np.asarray(x))


def ode_residual(grid: g.Grid1D, phi, omega: float) -> np.ndarray:
    return -g.derivative(grid, phi, 2) + (1.0 - omega * omega) * phi - phi ** 3


@lru_cache(maxsize=8)
def _even_indices(grid: g.Grid1D):
    N = grid.points
    idx = np.concatenate([np.arange(N // 2, N), [0]])
    mirror = (N - idx) % N
    return idx, mirror


def _reduce_even(grid, A):
    """Restrict a matrix acting on full vectors to even vectors."""
    idx, mirror = _even_indices(grid)
    rows = A[idx]
    Ar = rows[:, idx] + rows[:, mirror]
    self_mirror = idx == mirror
    Ar[:, self_mirror] -= rows[:, idx[self_mirror]]
    return Ar


def _expand_even(grid, red):
    idx, mirror = _even_indices(grid)
    full = np.empty(grid.points, dtype=red.dtype)
    full[idx] = red
    full[mirror] = red
    return full


def _residual_tol(grid):
    # FFT round-off in φ'' grows like eps·k_max²
    return max(NEWTON_TOL, 64 * np.finfo(float).eps * grid.k_max ** 2)


@lru_cache(maxsize=128)
def _profile(grid: g.Grid1D, omega: float):
    kappa2 = 1.0 - omega * omega
    D2 = g.differentiation_matrix(grid, 2)
    idx, _ = _even_indices(grid)
    phi = sech_profile(grid.x, omega)
    # symmetrize the seed exactly about x = 0
    phi = _expand_even(grid, phi[idx])
    tol = _residual_tol(grid)
    for it in range(NEWTON_MAXITER + 1):
        r = ode_residual(grid, phi, omega)
        rn = g.norm(grid, r)
        if rn <= tol * g.norm(grid, phi):
            break
        if it == NEWTON_MAXITER:
            raise NoConvergence(f"profile Newton did not converge for omega={omega} "
                                f"(residual {rn:.2e})")
        J = -D2 + np.diag(kappa2 - 3.0 * phi ** 2)
        delta = np.linalg.solve(_reduce_even(grid, J), r[idx])
        phi = phi - _expand_even(grid, delta)
    Lplus = -D2 + np.diag(kappa2 - 3.0 * phi ** 2)
    dphi_domega = _expand_even(grid, np.linalg.solve(_reduce_even(grid, Lplus), (2.0 * omega * phi)[idx]))
    phi.setflags(write=False)
    dphi_domega.setflags(write=False)
    return phi, dphi_domega


def profile(grid: g.Grid1D, omega: float) -> np.ndarray:
    """Newton-certified profile ``φ_ω`` on the grid."""
    return _profile(grid, check_frequency(omega))[0]


def profile_domega(grid: g.Grid1D, omega: float) -> np.ndarray:
    """``∂_ω φ_ω`` as the even solution of ``L₊ f = 2ω φ_ω``."""
    return _profile(grid, check_frequency(omega))[1]


def ground_state(grid: g.Grid1D) -> np.ndarray:
    """The positive even solution ``φ_0`` of ``-φ'' + φ - φ³ = 0``."""
    return profile(grid, 0.0)


def domega_phi_analytic(grid: g.Grid1D, omega: float) -> np.ndarray:
    """``∂_ω φ_ω`` from the rescaling ``φ_ω(x) = κ φ_0(κ x)`` on the real line.

    Exact on ℝ; on the torus it differs from :func:`profile_domega` by the
    soliton tail at the box edge.
    """
    omega = check_frequency(omega)
    kappa = np.sqrt(1.0 - omega * omega)
    z = kappa * grid.x
    p0 = np.sqrt(2.0) / np.cosh(z)
    dp0 = -p0 * np.tanh(z)
    return -(omega / kappa) * (p0 + z * dp0)


@dataclass(frozen=True, eq=False)
class SolitonFamily:
    """Standing wave ``Φ_ω`` and the vectors built from it."""

    omega: float
    grid: g.Grid1D
    phi: np.ndarray
    dphi: np.ndarray
    domega_phi: np.ndarray

    def _state(self, u, v=None, n=None):
        zero = np.zeros(self.grid.points)
        return KGZState(self.grid, u, zero if v is None else v, zero if n is None else n, zero)

    @cached_property
    def Phi(self) -> KGZState:
        w, p = self.omega, self.phi
        return self._state(p, 1j * w * p, -p ** 2)

    @cached_property
    def Upsilon(self) -> KGZState:
        w, p = self.omega, self.phi
        return self._state(1j * p, -w * p)

    @cached_property
    def dxPhi(self) -> KGZState:
        w, p, dp = self.omega, self.phi, self.dphi
        return self._state(dp, 1j * w * dp, -2 * p * dp)

    @cached_property
    def Psi(self) -> KGZState:
        return self._state(2 * self.omega * self.phi)

    @cached_property
    def F(self) -> KGZState:
        w, p, f = self.omega, self.phi, self.domega_phi
        return self._state(f, 1j * w * f, -2 * p * f)

    @property
    def mass(self) -> float:
        """``||φ_ω||²``."""
        return g.inner(self.grid, self.phi, self.phi)


def family(grid: g.Grid1D, omega: float) -> SolitonFamily:
    omega = check_frequency(omega)
    phi, dw = _profile(grid, omega)
    return SolitonFamily(omega, grid, phi, g.derivative(grid, phi, 1), dw)


def translate_rotate(s: KGZState, theta: float, y: float) -> KGZState:
    """``T(θ) s(· - y)``: phase on ``u, v`` and periodic shift of all fields."""
    gr = s.grid
    ph = np.exp(1j * theta)
    return KGZState(gr, ph * g.shift(gr, s.u, y), ph * g.shift(gr, s.v, y),
                    g.shift(gr, s.n, y), g.shift(gr, s.m, y))


def modulated_soliton(grid: g.Grid1D, omega: float, theta: float, y: float,
                      lam: float = 1.0) -> KGZState:
    """``T(θ) Φ_{λω}(· - y)``."""
    return translate_rotate(family(grid, lam * omega).Phi, theta, y)


def wronskian(grid: g.Grid1D, f, h) -> np.ndarray:
    """Pointwise ``f h' - f' h``."""
    return f * g.derivative(grid, h) - g.derivative(grid, f) * h
