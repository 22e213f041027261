"""Linearized operators around the standing wave and their spectra.

The Hessian ``S''_ω(Φ_ω)`` acts on tangent 4-tuples ``(f, g, h, k)`` with
``f, g`` complex and ``h, k`` real. It is assembled densely in the real
variables ``z = (Re f, Im f, Re g, Im g, h, k)`` so that
``⟨S'' ξ, ξ⟩ = h · zᵀ A z``. Spectra are computed relative to the X-norm
Gram matrix ``G`` (generalized problem ``A z = λ G z``); by Sylvester's law
of inertia this leaves the negative count and the kernel unchanged, and
the eigenvalues become Rayleigh quotients in the energy norm.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.linalg as sla

from . import grid as g
from . import soliton as sol
from .errors import EigensolveFailure, FrequencyOutOfRange
from .state import KGZState

SYMMETRY_TOL = 1e-12
KERNEL_REL_TOL = 1e-6


def delta_floor(c0: float = 1.0) -> float:
    """``min(1/2, 1/(2 c0²))``."""
    return min(0.5, 0.5 / (c0 * c0))


def assemble_Lpm(omega: float, grid: g.Grid1D):
    """Dense ``L₊ = -∂² + (1-ω²) - 3φ²`` and ``L₋ = -∂² + (1-ω²) - φ²``."""
    omega = sol.check_frequency(omega)
    phi = sol.profile(grid, omega)
    D2 = g.differentiation_matrix(grid, 2)
    base = -D2 + (1.0 - omega * omega) * np.eye(grid.points)
    return base - np.diag(3.0 * phi ** 2), base - np.diag(phi ** 2)


def state_to_real(s: KGZState) -> np.ndarray:
    """``(Re u, Im u, Re v, Im v, n, nu)`` stacked into one vector."""
    return np.concatenate([s.u.real, s.u.imag, s.v.real, s.v.imag, s.n, s.nu])


def real_to_tuple(z: np.ndarray, N: int):
    a, b, c, d, h, k = np.split(np.asarray(z), 6)
    return a + 1j * b, c + 1j * d, h, k


def tuple_norm(grid: g.Grid1D, xi) -> float:
    """Componentwise L² norm of a 4-tuple."""
    return np.sqrt(sum(g.inner(grid, c, c) for c in xi))


@dataclass(frozen=True, eq=False)
class RealBlockOperator:
    """Dense symmetric ``6N × 6N`` Hessian with its X-norm Gram matrix."""

    omega: float
    c0: float
    grid: g.Grid1D
    matrix: np.ndarray = field(repr=False)
    gram: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def apply_real(self, z):
        return self.matrix @ z

    def apply(self, s: KGZState):
        """``S'' s`` as a 4-tuple ``(complex, complex, real, real)``."""
        return real_to_tuple(self.matrix @ state_to_real(s), self.grid.points)

    def quadratic_form(self, s: KGZState) -> float:
        z = state_to_real(s)
        return self.grid.h * float(z @ self.matrix @ z)

    def bilinear(self, a: KGZState, b: KGZState) -> float:
        return self.grid.h * float(state_to_real(b) @ self.matrix @ state_to_real(a))


def _gram(grid: g.Grid1D) -> np.ndarray:
    N = grid.points
    I = np.eye(N)
    H1 = I - g.differentiation_matrix(grid, 2)
    return sla.block_diag(H1, H1, I, I, I, g.inverse_neg_laplacian_matrix(grid))


def assemble_hessian(omega: float, c0: float, grid: g.Grid1D) -> RealBlockOperator:
    omega = sol.check_frequency(omega)
    N = grid.points
    phi = sol.profile(grid, omega)
    I = np.eye(N)
    Z = np.zeros((N, N))
    P = np.diag(phi)
    Lf = -g.differentiation_matrix(grid, 2) + I - np.diag(phi ** 2)
    w = omega * I
    Ginv = g.inverse_neg_laplacian_matrix(grid) / (2.0 * c0 * c0)
    A = np.block([
        [Lf, Z, Z, -w, P, Z],
        [Z, Lf, w, Z, Z, Z],
        [Z, w, I, Z, Z, Z],
        [-w, Z, Z, I, Z, Z],
        [P, Z, Z, Z, 0.5 * I, Z],
        [Z, Z, Z, Z, Z, Ginv],
    ])
    asym = np.max(np.abs(A - A.T))
    if asym > SYMMETRY_TOL * max(1.0, np.max(np.abs(A))):
        raise AssertionError(f"assembled Hessian is not symmetric ({asym:.2e})")
    return RealBlockOperator(omega, float(c0), grid, A, _gram(grid))


@dataclass(frozen=True)
class SpectrumReport:
    omega: float
    c0: float
    count: int
    eigenvalues: tuple
    n_negative: int
    negative_eigenvalues: tuple
    kernel_dimension: int
    kernel_tol: float
    smallest_positive: float
    coercivity_min: float
    delta_floor: float

    def as_dict(self):
        return asdict(self)


def _split5(op: RealBlockOperator):
    n5 = 5 * op.grid.points
    return op.matrix[:n5, :n5], op.gram[:n5, :n5]


def _k_block_value(op: RealBlockOperator) -> float:
    # the k block is (1/2c0²)(-Δ)⁻¹ against Gram (-Δ)⁻¹ on zero-mean k
    return 0.5 / (op.c0 * op.c0)


def lowest_eigenpairs(op: RealBlockOperator, count: int):
    """Lowest generalized eigenpairs of the ``(f, g, h)`` block."""
    A5, G5 = _split5(op)
    count = min(count, A5.shape[0])
    try:
        vals, vecs = sla.eigh(A5, G5, subset_by_index=[0, count - 1])
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise EigensolveFailure(str(exc)) from exc
    if not np.all(np.isfinite(vals)):
        raise EigensolveFailure("non-finite eigenvalues")
    return vals, vecs


def spectrum(op: RealBlockOperator, count: int = 8, coercivity: bool = True) -> SpectrumReport:
    """Lowest ``count`` eigenvalues of ``S''`` relative to the X-norm.

    The Ḣ⁻¹ block decouples with the single eigenvalue ``1/(2 c0²)``
    (multiplicity ``N - 1``, the zero mode is excluded) and is merged in.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    vals5, _ = lowest_eigenpairs(op, count)
    kval = _k_block_value(op)
    vals = np.sort(np.concatenate([vals5, np.full(min(count, op.grid.points - 1), kval)]))[:count]
    tol = KERNEL_REL_TOL * float(np.max(np.abs(vals)))
    neg = vals[vals < -tol]
    ker = vals[np.abs(vals) <= tol]
    pos = vals[vals > tol]
    coerc = float("nan")
    if coercivity and op.omega != 0.0:
        coerc = _coercivity(op)
    return SpectrumReport(
        omega=op.omega, c0=op.c0, count=count,
        eigenvalues=tuple(float(v) for v in vals),
        n_negative=int(neg.size), negative_eigenvalues=tuple(float(v) for v in neg),
        kernel_dimension=int(ker.size), kernel_tol=tol,
        smallest_positive=float(pos[0]) if pos.size else float("nan"),
        coercivity_min=coerc, delta_floor=delta_floor(op.c0),
    )


def constraint_vectors(fam: sol.SolitonFamily) -> np.ndarray:
    """Columns ``Υ_ω, ∂ₓΦ_ω, Ψ_ω`` in the real representation (first 5N rows)."""
    n5 = 5 * fam.grid.points
    return np.column_stack([state_to_real(v)[:n5] for v in (fam.Upsilon, fam.dxPhi, fam.Psi)])


def constrained_basis(fam: sol.SolitonFamily) -> np.ndarray:
    """Orthonormal basis of the L²-orthogonal complement of the constraints."""
    return sla.null_space(constraint_vectors(fam).T)


def _coercivity(op: RealBlockOperator) -> float:
    fam = sol.family(op.grid, op.omega)
    A5, G5 = _split5(op)
    W = constrained_basis(fam)
    try:
        lo = sla.eigh(W.T @ A5 @ W, W.T @ G5 @ W, eigvals_only=True, subset_by_index=[0, 0])[0]
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise EigensolveFailure(str(exc)) from exc
    return float(min(lo, _k_block_value(op)))


def coercivity_check(omega: float, c0: float, grid: g.Grid1D) -> float:
    """Minimum of ``⟨S''ξ, ξ⟩ / ||ξ||²_X`` over ``ξ ⊥ Υ_ω, ∂ₓΦ_ω, Ψ_ω``."""
    omega = sol.check_frequency(omega)
    if omega == 0.0:
        raise FrequencyOutOfRange("coercivity requires omega != 0")
    return _coercivity(assemble_hessian(omega, c0, grid))


def relative_residual(grid: g.Grid1D, out, ref_norm: float) -> float:
    return tuple_norm(grid, out) / ref_norm
