"""The KGZ field tuple ``(u, v, n, nu)`` together with its potential ``m``."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import grid as g
from .errors import GridMismatch, MeanNotZero


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class KGZState:
    """Fields ``u`` (complex), ``v = u_t`` (complex), ``n`` (real) and ``m`` (real).

    ``m`` is the potential with ``m_xx = nu = n_t``. It is built as
    ``-(-Δ)⁻¹ nu`` (zero mean) when a state is created from ``nu``; under
    time evolution it also carries a spatially constant part, which does
    not affect ``nu`` or ``m_x`` but enters ``∫ n m dx``.
    """

    grid: g.Grid1D
    u: np.ndarray
    v: np.ndarray
    n: np.ndarray
    m: np.ndarray

    def __post_init__(self):
        N = self.grid.points
        for name, dtype in (("u", complex), ("v", complex), ("n", float), ("m", float)):
            val = getattr(self, name)
            if np.iscomplexobj(val) and dtype is float:
                val = np.real(val)
            arr = _frozen(val, dtype)
            if arr.shape != (N,):
                raise ValueError(f"field {name} has shape {arr.shape}, expected ({N},)")
            object.__setattr__(self, name, arr)

    @classmethod
    def from_components(cls, grid, u, v=None, n=None, nu=None, tol=g.TOL_MEAN):
        """Build a state from ``(u, v, n, nu)``; missing components are zero."""
        zeros = np.zeros(grid.points)
        v = zeros if v is None else v
        n = zeros if n is None else n
        if nu is None:
            m = zeros
        else:
            m = -g.inverse_neg_laplacian(grid, np.real(nu), tol=tol)
        return cls(grid, u, v, n, m)

    @classmethod
    def zeros(cls, grid):
        return cls.from_components(grid, np.zeros(grid.points))

    @property
    def nu(self) -> np.ndarray:
        return g.derivative(self.grid, self.m, 2)

    @property
    def m_x(self) -> np.ndarray:
        return g.derivative(self.grid, self.m, 1)

    def components(self):
        """The 4-tuple ``(u, v, n, nu)``."""
        return self.u, self.v, self.n, self.nu

    def _check(self, other):
        if not isinstance(other, KGZState):
            return NotImplemented
        if other.grid != self.grid:
            raise GridMismatch("states live on different grids")
        return None

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return KGZState(self.grid, self.u + other.u, self.v + other.v,
                        self.n + other.n, self.m + other.m)

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return KGZState(self.grid, self.u - other.u, self.v - other.v,
                        self.n - other.n, self.m - other.m)

    def __mul__(self, c):
        c = float(c)
        return KGZState(self.grid, c * self.u, c * self.v, c * self.n, c * self.m)

    __rmul__ = __mul__

    def __neg__(self):
        return -1.0 * self

    def check_zero_mean_nu(self, tol=g.TOL_MEAN):
        nu = self.nu
        if abs(g.mean(self.grid, nu)) > tol * max(g.norm(self.grid, nu), np.finfo(float).tiny):
            raise MeanNotZero("mean of n_t is not zero")

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.u)) and np.all(np.isfinite(self.v))
                    and np.all(np.isfinite(self.n)) and np.all(np.isfinite(self.m)))


def inner_states(a: KGZState, b: KGZState) -> float:
    """Componentwise ``⟨a, b⟩`` over ``(u, v, n, nu)``."""
    if a.grid != b.grid:
        raise GridMismatch("states live on different grids")
    gr = a.grid
    return (g.inner(gr, a.u, b.u) + g.inner(gr, a.v, b.v) + g.inner(gr, a.n, b.n)
            + g.inner(gr, a.nu, b.nu))


def x_norm_state(s: KGZState) -> float:
    """X-norm of a state; the Ḣ⁻¹ part of ``nu`` is ``||m_x||``."""
    gr = s.grid
    return np.sqrt(g.h1_norm(gr, s.u) ** 2 + g.norm(gr, s.v) ** 2 + g.norm(gr, s.n) ** 2
                   + g.norm(gr, s.m_x) ** 2)
