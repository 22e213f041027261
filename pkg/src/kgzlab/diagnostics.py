"""Cutoff, virial functionals, modulation fit and orbit distance.

Inner products of 4-tuples are componentwise over ``(u, v, n, nu)``; all
tangent vectors of the soliton family have ``nu = 0``, so their pairings
only involve the first three components.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from . import grid as g
from . import soliton as sol
from .errors import CutoffTooLarge, NoConvergence, WindowTooShort
from .functionals import charge, energy, momentum
from .state import KGZState, x_norm_state

FIT_TOL_REL = 1e-11
FIT_MAXITER = 50
FIT_MAX_HALVINGS = 12
# admissible frequency scale; outside it the Ψ tangent degenerates
FIT_LAMBDA_RANGE = (0.05, 20.0)


# ----------------------------------------------------------------- cutoff

def _chi(s):
    """Quintic smoothstep falling from 1 at ``s = 1`` to 0 at ``s = 2``."""
    t = np.clip(s - 1.0, 0.0, 1.0)
    return 1.0 - t ** 3 * (10.0 - 15.0 * t + 6.0 * t * t)


def _dchi(s):
    t = np.clip(s - 1.0, 0.0, 1.0)
    return -30.0 * t * t * (1.0 - t) ** 2


def cutoff_values(x, R: float):
    """``φ_R(x) = x χ(|x|/R)`` and its derivative ``χ(s) + s χ'(s)``."""
    x = np.asarray(x, dtype=float)
    s = np.abs(x) / R
    return x * _chi(s), _chi(s) + s * _dchi(s)


@dataclass(frozen=True, eq=False)
class CutoffProfile:
    R: float
    grid: g.Grid1D
    phi: np.ndarray = field(repr=False)
    dphi: np.ndarray = field(repr=False)

    def at(self, y: float = 0.0):
        """``φ_R(x - y)`` and ``φ_R'(x - y)`` on the periodic grid."""
        if y == 0.0:
            return self.phi, self.dphi
        return cutoff_values(self.grid.wrap(self.grid.x - y), self.R)


def cutoff(R: float, grid: g.Grid1D) -> CutoffProfile:
    if not R > 0:
        raise ValueError("cutoff radius must be positive")
    if 2.0 * R >= 0.5 * grid.length:
        raise CutoffTooLarge(f"2R = {2 * R} must be smaller than L/2 = {grid.length / 2}")
    phi, dphi = cutoff_values(grid.x, R)
    phi.setflags(write=False)
    dphi.setflags(write=False)
    return CutoffProfile(float(R), grid, phi, dphi)


# ----------------------------------------------------------------- virial

def virial_I(s: KGZState, y: float, cut: CutoffProfile, c0: float = 1.0) -> float:
    """``Re∫u v̄ + 2Re∫φ_R(x-y) u_x v̄ + c0⁻² ∫φ_R(x-y) n m_x``."""
    gr = s.grid
    phi, _ = cut.at(y)
    ux = g.derivative(gr, s.u)
    return (g.inner(gr, s.u, s.v) + 2.0 * g.inner(gr, phi * ux, s.v)
            + g.integrate(gr, phi * s.n * s.m_x) / (c0 * c0))


def virial_I_tilde(s: KGZState, y: float, cut: CutoffProfile, c0: float = 1.0) -> float:
    """``I + Re∫u v̄ - c0⁻² ∫ n m``; requires ``∫ nu = 0``."""
    s.check_zero_mean_nu()
    gr = s.grid
    return (virial_I(s, y, cut, c0) + g.inner(gr, s.u, s.v)
            - g.integrate(gr, s.n * s.m) / (c0 * c0))


def virial_rhs(s: KGZState, y: float, ydot: float, cut: CutoffProfile, omega: float,
               c0: float, E0: float, Q0: float, P0: float) -> float:
    """Exact ``dĨ/dt`` expressed through the state and the conserved values.

    The term ``(2 - 4ω²)||u||²`` vanishes at ``ω² = 1/2``.
    """
    gr = s.grid
    _, dphi = cut.at(y)
    w = 1.0 - dphi
    ux = g.derivative(gr, s.u)
    mx = s.m_x
    ic2 = 1.0 / (c0 * c0)
    mom_density = 2.0 * np.real(ux * np.conj(s.v)) + ic2 * s.n * mx
    local = (np.abs(s.v) ** 2 + np.abs(ux) ** 2 - np.abs(s.u) ** 2
             + 0.5 * ic2 * mx ** 2 + 0.5 * s.n ** 2)
    r = s.v - 1j * omega * s.u
    return (-ydot * P0 + ydot * g.integrate(gr, w * mom_density) + g.integrate(gr, w * local)
            - 6.0 * E0 + 8.0 * omega * Q0 + 4.0 * g.inner(gr, r, r)
            + (2.0 - 4.0 * omega * omega) * g.inner(gr, s.u, s.u) + 2.0 * ic2 * g.inner(gr, mx, mx))


def _fd4(values, h):
    """Fourth-order centered first derivative at the interior points."""
    f = np.asarray(values, dtype=float)
    return (-f[4:] + 8.0 * f[3:-1] - 8.0 * f[1:-3] + f[:-4]) / (12.0 * h)


def _uniform_step(times):
    t = np.asarray(times, dtype=float)
    h = np.diff(t)
    if not np.allclose(h, h[0], rtol=1e-9, atol=1e-12):
        raise ValueError("samples must be uniformly spaced in time")
    return float(h[0])


@dataclass(frozen=True)
class VirialCheck:
    times: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    residual: float


def virial_rhs_check(times, states, cut: CutoffProfile, omega: float, c0: float = 1.0,
                     ys=None) -> VirialCheck:
    """Compare finite-difference ``dĨ/dt`` with :func:`virial_rhs` over a window.

    ``ys`` is the translation parameter per sample (zero when omitted);
    ``ẏ`` is differentiated with the same stencil.
    """
    times = np.asarray(times, dtype=float)
    if len(times) < 5 or len(states) != len(times):
        raise WindowTooShort("need at least 5 uniformly spaced samples")
    h = _uniform_step(times)
    ys = np.zeros_like(times) if ys is None else np.asarray(ys, dtype=float)
    s0 = states[0]
    E0, Q0, P0 = energy(s0, c0), charge(s0), momentum(s0, c0)
    Itil = np.array([virial_I_tilde(s, y, cut, c0) for s, y in zip(states, ys)])
    lhs = _fd4(Itil, h)
    ydot = _fd4(ys, h)
    rhs = np.array([virial_rhs(s, y, yd, cut, omega, c0, E0, Q0, P0)
                    for s, y, yd in zip(states[2:-2], ys[2:-2], ydot)])
    return VirialCheck(times[2:-2], lhs, rhs, float(np.max(np.abs(lhs - rhs))))


# ------------------------------------------------------- modulation fit

def _inner3(gr, a, b):
    return sum(g.inner(gr, x, z) for x, z in zip(a, b))


def _parts(s):
    return (s.u, s.v, s.n)


def _tangents(fam):
    return [_parts(fam.Upsilon), _parts(fam.dxPhi), _parts(fam.Psi)]


def _tangents_domega(fam):
    gr = fam.grid
    w, p, dp, f = fam.omega, fam.phi, fam.dphi, fam.domega_phi
    df = g.derivative(gr, f)
    zero = np.zeros(gr.points)
    return [(1j * f, -p - w * f, zero),
            (df, 1j * (dp + w * df), -2.0 * (f * dp + p * df)),
            (2.0 * (p + w * f), zero, zero)]


def fit_tolerance(grid: g.Grid1D, omega: float) -> float:
    return FIT_TOL_REL * x_norm_state(sol.family(grid, omega).Phi) ** 2


def _pull_back(s, theta, y):
    # T(-θ) s(· + y): the state seen from the soliton frame
    return sol.translate_rotate(s, -theta, -y)


def _residual(s, omega, p):
    theta, y, lam = p
    fam = sol.family(s.grid, lam * omega)
    st = _pull_back(s, theta, y)
    Phi = fam.Phi
    xi = (st.u - Phi.u, st.v - Phi.v, st.n - Phi.n)
    return fam, st, xi, np.array([_inner3(s.grid, xi, V) for V in _tangents(fam)])


def _jacobian(s, omega, p, fam, st, xi):
    gr = s.grid
    Vs = _tangents(fam)
    dVs = _tangents_domega(fam)
    d_theta = (-1j * st.u, -1j * st.v, np.zeros(gr.points))
    d_y = (g.derivative(gr, st.u), g.derivative(gr, st.v), g.derivative(gr, st.n))
    F = _parts(fam.F)
    J = np.empty((3, 3))
    for i, (V, dV) in enumerate(zip(Vs, dVs)):
        J[i, 0] = _inner3(gr, d_theta, V)
        J[i, 1] = _inner3(gr, d_y, V)
        J[i, 2] = omega * (_inner3(gr, xi, dV) - _inner3(gr, F, V))
    return J


def _fd_jacobian(s, omega, p, F0, eps=1e-6):
    J = np.empty((3, 3))
    for j in range(3):
        q = np.array(p, dtype=float)
        q[j] += eps
        J[:, j] = (_residual(s, omega, q)[3] - F0) / eps
    return J


def wrap_phase(theta: float) -> float:
    """Map to ``(-π, π]``."""
    t = -((-theta + np.pi) % (2 * np.pi) - np.pi)
    return float(t)


@dataclass(frozen=True, eq=False)
class ModulationFit:
    theta: float
    y: float
    lam: float
    xi: KGZState = field(repr=False)
    ortho_defects: tuple
    xnorm_xi: float
    mod_bound: float
    iterations: int
    jacobian: np.ndarray = field(repr=False)

    def as_dict(self):
        return {"theta": self.theta, "y": self.y, "lambda": self.lam,
                "ortho_defects": list(self.ortho_defects), "xnorm_xi": self.xnorm_xi,
                "mod_bound": self.mod_bound, "iterations": self.iterations}


def modulation_fit(s: KGZState, omega: float, guess=None,
                   tol: float | None = None) -> ModulationFit:
    """Newton solve of the three orthogonality conditions for ``(θ, y, λ)``.

    Without a ``guess`` the iteration starts from the orbit-distance
    minimizer ``(θ*, y*)`` and ``λ = 1``.
    The Jacobian is analytic (with a finite-difference fallback when it is
    singular); steps are halved while the residual grows. Failure to
    converge in :data:`FIT_MAXITER` iterations raises :class:`NoConvergence`.
    """
    omega = sol.check_frequency(omega)
    if omega == 0.0:
        raise ValueError("the frequency scaling is degenerate at omega = 0")
    gr = s.grid
    tol = fit_tolerance(gr, omega) if tol is None else tol
    if guess is None:
        od = orbit_distance(s, omega)
        guess = (od.theta, od.y, 1.0)
    p = np.array(guess, dtype=float)
    fam, st, xi, F = _residual(s, omega, p)
    for it in range(FIT_MAXITER + 1):
        fn = np.linalg.norm(F)
        J = _jacobian(s, omega, p, fam, st, xi)
        if fn < tol:
            break
        if it == FIT_MAXITER:
            raise NoConvergence(f"modulation fit did not converge (|F| = {fn:.2e})")
        try:
            delta = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            delta = np.linalg.lstsq(_fd_jacobian(s, omega, p, F), -F, rcond=None)[0]
        step = 1.0
        for _ in range(FIT_MAX_HALVINGS):
            q = p + step * delta
            if abs(q[2] * omega) < 1.0 and FIT_LAMBDA_RANGE[0] < q[2] < FIT_LAMBDA_RANGE[1]:
                try:
                    trial = _residual(s, omega, q)
                except NoConvergence:
                    trial = None
                if trial is not None and np.linalg.norm(trial[3]) < fn:
                    break
            step *= 0.5
        else:
            raise NoConvergence("modulation fit line search failed")
        p = q
        fam, st, xi, F = trial
    theta, y, lam = p
    y = float(gr.wrap(y))
    xi_lab = s - sol.modulated_soliton(gr, omega, theta, y, lam)
    xn = x_norm_state(xi_lab)
    tnorm = max(np.sqrt(_inner3(gr, V, V)) for V in _tangents(fam))
    bound = float(np.linalg.norm(np.linalg.inv(J), 2) * tnorm * xn)
    return ModulationFit(wrap_phase(theta), y, float(lam), xi_lab, tuple(float(f) for f in F),
                         xn, bound, it, J)


def jacobian_at_orbit(grid: g.Grid1D, omega: float) -> np.ndarray:
    """``∂F/∂(θ, y, λ)`` at ``(0, 0, 1)`` and ``s = Φ_ω``."""
    fam = sol.family(grid, omega)
    fam_, st, xi, _ = _residual(fam.Phi, omega, np.array([0.0, 0.0, 1.0]))
    return _jacobian(fam.Phi, omega, None, fam_, st, xi)


def jacobian_closed_form(grid: g.Grid1D, omega: float):
    """Diagonal entries ``a₁₁, a₂₂, a₃₃`` from their integral formulas."""
    fam = sol.family(grid, omega)
    p, dp = fam.phi, fam.dphi
    mass = fam.mass
    a11 = -(1.0 + omega ** 2) * mass
    a22 = (1.0 + omega ** 2) * g.inner(grid, dp, dp) + g.inner(grid, 2 * p * dp, 2 * p * dp)
    a33 = omega ** 3 / (1.0 - omega ** 2) * mass
    return a11, a22, a33


def rotation_residual_defect(s: KGZState, fit: ModulationFit, omega: float) -> float:
    """``||u_t - iωu||² - [(λ-1)²ω²||φ_ω||² + ||η - iωξ₁||²]``."""
    gr = s.grid
    r = s.v - 1j * omega * s.u
    xr = fit.xi.v - 1j * omega * fit.xi.u
    mass = sol.family(gr, omega).mass
    return (g.inner(gr, r, r)
            - ((fit.lam - 1.0) ** 2 * omega ** 2 * mass + g.inner(gr, xr, xr)))


def velocity_estimates(times, thetas, ys, lams, omega: float):
    """``(θ̇ - λω, ẏ, λ̇)`` by centered differences; ``θ`` is unwrapped first."""
    times = np.asarray(times, dtype=float)
    if len(times) < 5:
        raise WindowTooShort("need at least 5 fits")
    h = _uniform_step(times)
    th = np.unwrap(np.asarray(thetas, dtype=float))
    lam = np.asarray(lams, dtype=float)
    return (np.gradient(th, h) - lam * omega, np.gradient(np.asarray(ys, dtype=float), h),
            np.gradient(lam, h))


# -------------------------------------------------------- orbit distance

@dataclass(frozen=True)
class OrbitDistance:
    distance: float
    theta: float
    y: float


class _Correlator:
    """``c(y)`` and ``r(y)`` as trigonometric sums, with ``y``-derivatives."""

    def __init__(self, s: KGZState, fam: sol.SolitonFamily):
        gr = s.grid
        N = gr.points
        k = gr.k
        rev = (-np.arange(N)) % N
        U = np.fft.fft(s.u)
        Ux = 1j * gr.k_odd * U
        V = np.fft.fft(s.v)
        Nn = np.fft.fft(s.n)
        ph = np.fft.fft(fam.phi)
        dph = 1j * gr.k_odd * ph
        ph2 = np.fft.fft(fam.phi ** 2)
        self.c_hat = (ph * U[rev] + dph * Ux[rev] - 1j * fam.omega * ph * V[rev]) * (gr.h / N)
        self.r_hat = -ph2 * Nn[rev] * (gr.h / N)
        self.k = k
        self.grid = gr

    def on_grid(self):
        c = np.fft.fft(self.c_hat)
        r = np.real(np.fft.fft(self.r_hat))
        return c, r

    def eval(self, y):
        e = np.exp(-1j * self.k * y)
        c = np.sum(self.c_hat * e)
        dc = np.sum(-1j * self.k * self.c_hat * e)
        r = np.real(np.sum(self.r_hat * e))
        dr = np.real(np.sum(-1j * self.k * self.r_hat * e))
        return c, dc, r, dr

    def objective(self, y):
        c, _, r, _ = self.eval(y)
        return abs(c) + r

    def slope(self, y):
        c, dc, _, dr = self.eval(y)
        return np.real(np.conj(c) * dc) / max(abs(c), 1e-300) + dr


def orbit_distance(s: KGZState, omega: float) -> OrbitDistance:
    """``min over (θ, y) of ||s - T(θ)Φ_ω(· - y)||_X``.

    The X-inner product with the shifted, rotated soliton is
    ``Re[e^{-iθ} c(y)] + r(y)``; the best ``θ`` is ``arg c(y)``. ``y`` is
    scanned on the grid by FFT correlation and refined by a root solve of
    the derivative. The distance itself is evaluated directly.
    """
    gr = s.grid
    fam = sol.family(gr, omega)
    cor = _Correlator(s, fam)
    c, r = cor.on_grid()
    J = np.abs(c) + r
    m = int(np.argmax(J))
    y0 = m * gr.h
    a, b = y0 - gr.h, y0 + gr.h
    sa, sb = cor.slope(a), cor.slope(b)
    if np.sign(sa) != np.sign(sb) and sa > 0:
        y = brentq(cor.slope, a, b, xtol=1e-14, rtol=4 * np.finfo(float).eps)
    else:
        y = minimize_scalar(lambda z: -cor.objective(z), bounds=(a, b), method="bounded",
                            options={"xatol": 1e-12}).x
    theta = float(np.angle(cor.eval(y)[0]))
    y = float(gr.wrap(y))
    d = x_norm_state(s - sol.translate_rotate(fam.Phi, theta, y))
    return OrbitDistance(float(d), theta, y)


# ------------------------------------------------------ trajectory monitor

class SolitonMonitor:
    """Evolution observer filling orbit, modulation and virial record fields.

    ``y`` inside ``Ĩ`` is the modulation translation, or the orbit-distance
    argmin when the fit fails. Returns ``True`` (stop) once the orbit
    distance exceeds ``exit_distance``.
    """

    def __init__(self, omega: float, cut: CutoffProfile, c0: float = 1.0,
                 exit_distance: float | None = None, fit: bool = True):
        self.omega = omega
        self.cut = cut
        self.c0 = c0
        self.exit_distance = exit_distance
        self.fit = fit
        self.fits = []
        self._last = (0.0, 0.0, 1.0)

    def __call__(self, rec, s):
        od = orbit_distance(s, self.omega)
        rec.orbit_distance = od.distance
        y = od.y
        fitted = None
        if self.fit:
            try:
                fitted = modulation_fit(s, self.omega, (od.theta, od.y, self._last[2]))
            except NoConvergence:
                fitted = None
        self.fits.append(fitted)
        if fitted is not None:
            self._last = (fitted.theta, fitted.y, fitted.lam)
            rec.theta, rec.y, rec.lam = fitted.theta, fitted.y, fitted.lam
            rec.xnorm_xi = fitted.xnorm_xi
            y = fitted.y
        rec.I_virial = virial_I(s, y, self.cut, self.c0)
        rec.I_tilde = virial_I_tilde(s, y, self.cut, self.c0)
        return self.exit_distance is not None and od.distance > self.exit_distance
