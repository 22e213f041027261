import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kgzlab import diagnostics as dg
from kgzlab import grid as g
from kgzlab import soliton as sol
from kgzlab.errors import CutoffTooLarge, MeanNotZero, NoConvergence, WindowTooShort
from kgzlab.evolve import EvolveConfig, evolve
from kgzlab.state import KGZState, x_norm_state

from conftest import OMEGA_C, band_limited


@pytest.fixture(scope="module")
def cut60(grid60):
    return dg.cutoff(10.0, grid60)


class TestCutoff:
    def test_inner_region(self):
        R = 10.0
        phi, dphi = dg.cutoff_values(np.array([0.0, R / 2, -R / 2, R]), R)
        np.testing.assert_allclose(phi, [0.0, R / 2, -R / 2, R], atol=1e-15)
        np.testing.assert_allclose(dphi, 1.0)

    def test_outer_region(self):
        R = 10.0
        phi, dphi = dg.cutoff_values(np.array([2 * R, -2 * R, 3 * R]), R)
        assert not np.any(phi)
        assert not np.any(dphi)

    def test_derivative_bound_and_smoothness(self):
        R = 10.0
        x = np.linspace(-30, 30, 200001)
        phi, dphi = dg.cutoff_values(x, R)
        assert np.max(np.abs(dphi)) <= 4
        np.testing.assert_allclose(np.gradient(phi, x), dphi, atol=1e-6)
        # continuous second derivative: no jump in the discrete slope of dphi
        d2 = np.gradient(dphi, x)
        assert np.max(np.abs(np.diff(d2))) < 1e-3

    def test_odd(self):
        x = np.linspace(0, 25, 101)
        p1, _ = dg.cutoff_values(x, 10.0)
        p2, _ = dg.cutoff_values(-x, 10.0)
        np.testing.assert_allclose(p1, -p2)

    def test_too_large(self, grid60):
        with pytest.raises(CutoffTooLarge):
            dg.cutoff(15.0, grid60)
        with pytest.raises(ValueError):
            dg.cutoff(-1.0, grid60)

    def test_shifted(self, grid60, cut60):
        y = 40 * grid60.h
        phi, _ = cut60.at(y)
        np.testing.assert_allclose(phi, np.roll(cut60.phi, 40), atol=1e-12)


class TestVirial:
    @pytest.mark.parametrize("y", [0.0, 2.3])
    def test_standing_wave(self, grid60, cut60, y):
        P = sol.family(grid60, 0.6).Phi
        assert abs(dg.virial_I(P, y, cut60)) < 1e-12
        assert abs(dg.virial_I_tilde(P, y, cut60)) < 1e-12

    def test_zero(self, grid60, cut60):
        z = KGZState.zeros(grid60)
        assert dg.virial_I(z, 0.0, cut60) == 0
        assert dg.virial_I_tilde(z, 0.0, cut60) == 0

    def test_real_pair(self, grid60, cut60):
        p = sol.profile(grid60, 0.4)
        z = np.zeros(grid60.points)
        s = KGZState(grid60, p.astype(complex), p.astype(complex), z, z)
        expect = g.inner(grid60, p, p) + 2 * grid60.h * np.sum(cut60.phi * p * g.derivative(grid60, p))
        assert dg.virial_I(s, 0.0, cut60) == pytest.approx(expect, rel=1e-12)
        # φ_R = x on the bulk, so the second term is -||φ||² up to the tail
        assert dg.virial_I(s, 0.0, cut60) == pytest.approx(0.0, abs=1e-6)

    def test_I_tilde_recomputed(self, grid60, cut60):
        rng = np.random.default_rng(3)
        s = KGZState.from_components(
            grid60, band_limited(grid60, rng, 6, True), band_limited(grid60, rng, 6, True),
            band_limited(grid60, rng, 6), band_limited(grid60, rng, 6, zero_mean=True))
        c0, y = 1.7, 1.1
        phi, _ = cut60.at(y)
        h = grid60.h
        ux = g.derivative(grid60, s.u)
        I = (h * np.sum(np.real(s.u * np.conj(s.v))) + 2 * h * np.sum(np.real(phi * ux * np.conj(s.v)))
             + h * np.sum(phi * s.n * s.m_x) / c0 ** 2)
        It = I + h * np.sum(np.real(s.u * np.conj(s.v))) - h * np.sum(s.n * s.m) / c0 ** 2
        assert dg.virial_I(s, y, cut60, c0) == pytest.approx(I, rel=1e-12)
        assert dg.virial_I_tilde(s, y, cut60, c0) == pytest.approx(It, rel=1e-12)

    def test_rhs_check_standing_wave(self, grid60, cut60):
        traj = evolve(sol.family(grid60, OMEGA_C).Phi, EvolveConfig(dt=0.01, T=0.5, record_every=5),
                      keep_states=True)
        chk = dg.virial_rhs_check(traj.times, traj.states, cut60, OMEGA_C)
        assert chk.residual < 1e-6
        assert np.max(np.abs(chk.rhs)) < 1e-6

    def test_rhs_check_with_moving_translation(self, grid60, cut60):
        # data carrying momentum, with an arbitrary smooth y(t)
        w = 0.5
        fam = sol.family(grid60, w)
        k = 0.3
        u = fam.phi * np.exp(1j * k * grid60.x)
        s0 = KGZState.from_components(grid60, u, 1j * w * u, -fam.phi ** 2)
        traj = evolve(s0, EvolveConfig(dt=0.005, T=1.0, record_every=10), keep_states=True)
        ys = 0.4 * np.sin(traj.times)
        chk = dg.virial_rhs_check(traj.times, traj.states, cut60, w, ys=ys)
        assert chk.residual < 1e-4

    def test_window_too_short(self, grid60, cut60):
        P = sol.family(grid60, 0.5).Phi
        with pytest.raises(WindowTooShort):
            dg.virial_rhs_check([0, 1, 2, 3], [P] * 4, cut60, 0.5)

    def test_nonuniform_window(self, grid60, cut60):
        P = sol.family(grid60, 0.5).Phi
        with pytest.raises(ValueError):
            dg.virial_rhs_check([0, 1, 2, 3, 5], [P] * 5, cut60, 0.5)


class TestOrbitDistance:
    def test_on_orbit(self, grid60):
        od = dg.orbit_distance(sol.family(grid60, 0.5).Phi, 0.5)
        assert od.distance < 1e-10

    def test_synthesised(self, grid60):
        s = sol.translate_rotate(sol.family(grid60, 0.5).Phi, 1.0, 3.0)
        od = dg.orbit_distance(s, 0.5)
        assert od.distance < 1e-9
        assert od.theta == pytest.approx(1.0, abs=1e-8)
        assert od.y == pytest.approx(3.0, abs=1e-8)

    def test_scaled_wave(self, grid60):
        a, w = 0.01, 0.9
        P = sol.family(grid60, w).Phi
        od = dg.orbit_distance((1 + a) * P, w)
        direct = x_norm_state(a * P)
        assert od.distance <= direct + 1e-12
        assert abs(od.distance - direct) < 1e-6

    @settings(max_examples=10, deadline=None)
    @given(theta=st.floats(-3, 3), y=st.floats(-20, 20))
    def test_symmetry_invariance(self, theta, y):
        grid = g.make_grid(60.0, 512)
        rng = np.random.default_rng(11)
        s = 1.05 * sol.family(grid, 0.6).Phi + KGZState.from_components(
            grid, 0.02 * band_limited(grid, rng, 5, True), 0.02 * band_limited(grid, rng, 5, True))
        d0 = dg.orbit_distance(s, 0.6).distance
        d1 = dg.orbit_distance(sol.translate_rotate(s, theta, y), 0.6).distance
        assert abs(d0 - d1) < 1e-9


class TestModulationFit:
    def test_synthesis(self, grid60):
        w, th, y, lam = 0.6, 0.3, 1.5, 1.02
        s = sol.modulated_soliton(grid60, w, th, y, lam)
        fit = dg.modulation_fit(s, w)
        assert fit.theta == pytest.approx(th, abs=1e-8)
        assert fit.y == pytest.approx(y, abs=1e-8)
        assert fit.lam == pytest.approx(lam, abs=1e-8)
        assert fit.xnorm_xi < 1e-8

    def test_on_orbit(self, grid60):
        fit = dg.modulation_fit(sol.family(grid60, 0.5).Phi, 0.5)
        assert (abs(fit.theta), abs(fit.y), abs(fit.lam - 1)) < (1e-12, 1e-12, 1e-12)
        assert fit.xnorm_xi < 1e-10

    @pytest.mark.parametrize("th,y,lam", [(0.0, 0.0, 0.98), (2.0, 1.5, 1.02), (0.3, 0.0, 1.1),
                                          (-2.5, -4.0, 0.9)])
    def test_lattice(self, grid60, th, y, lam):
        s = sol.modulated_soliton(grid60, OMEGA_C, th, y, lam)
        fit = dg.modulation_fit(s, OMEGA_C)
        assert abs(fit.theta - th) < 1e-8
        assert abs(fit.y - y) < 1e-8
        assert abs(fit.lam - lam) < 1e-8

    def test_orthogonality_and_reconstruction(self, grid60):
        s = 1.01 * sol.family(grid60, 0.5).Phi
        fit = dg.modulation_fit(s, 0.5)
        assert max(abs(d) for d in fit.ortho_defects) < dg.fit_tolerance(grid60, 0.5)
        back = sol.modulated_soliton(grid60, 0.5, fit.theta, fit.y, fit.lam) + fit.xi
        np.testing.assert_allclose(back.u, s.u, atol=1e-14)
        np.testing.assert_allclose(back.n, s.n, atol=1e-14)

    def test_xi_scaling_slope(self, grid60):
        a = np.array([1e-2, 1e-3, 1e-4])
        xi2 = [dg.modulation_fit((1 + x) * sol.family(grid60, OMEGA_C).Phi, OMEGA_C).xnorm_xi ** 2
               for x in a]
        slope = np.polyfit(np.log(a), np.log(xi2), 1)[0]
        assert 1.9 <= slope <= 2.1

    def test_zero_frequency(self, grid60):
        with pytest.raises(ValueError):
            dg.modulation_fit(sol.family(grid60, 0.0).Phi, 0.0)

    def test_far_from_orbit(self, grid60):
        z = np.zeros(grid60.points)
        s = KGZState(grid60, 0.01 * np.exp(1j * grid60.x), z.astype(complex), z, z)
        with pytest.raises(NoConvergence):
            dg.modulation_fit(s, 0.5)

    def test_jacobian_at_orbit(self, grid60):
        for w in (0.3, OMEGA_C, 0.9):
            J = dg.jacobian_at_orbit(grid60, w)
            a11, a22, a33 = dg.jacobian_closed_form(grid60, w)
            scale = np.max(np.abs(J))
            assert J[0, 0] == pytest.approx(a11, rel=1e-9)
            assert J[1, 1] == pytest.approx(a22, rel=1e-9)
            # closed form is the whole-line value; the torus differs by the tail
            assert J[2, 2] == pytest.approx(a33, rel=1e-7)
            # the even/odd split decouples y from θ and λ
            for i, j in ((0, 1), (1, 0), (1, 2), (2, 1)):
                assert abs(J[i, j]) < 1e-12 * scale

    def test_degeneracy_flag(self, grid60):
        from kgzlab.functionals import identity_report
        _, _, a33 = dg.jacobian_closed_form(grid60, OMEGA_C)
        mass = sol.family(grid60, OMEGA_C).mass
        assert a33 == pytest.approx(OMEGA_C ** 3 / 0.5 * mass)
        assert a33 > 0.5
        assert abs(identity_report(OMEGA_C, grid60).dq_domega_closed) < 1e-14

    def test_rotation_residual_expansion(self, grid60):
        ratios = []
        for a in (1e-2, 1e-3, 1e-4):
            s = (1 + a) * sol.family(grid60, OMEGA_C).Phi
            fit = dg.modulation_fit(s, OMEGA_C)
            l = abs(fit.lam - 1)
            ratios.append(abs(dg.rotation_residual_defect(s, fit, OMEGA_C))
                          / (a * l + l ** 3 + l * fit.xnorm_xi ** 2))
        assert max(ratios) < 10

    def test_as_dict(self, grid60):
        d = dg.modulation_fit(sol.family(grid60, 0.5).Phi, 0.5).as_dict()
        assert set(d) == {"theta", "y", "lambda", "ortho_defects", "xnorm_xi", "mod_bound",
                          "iterations"}


class TestVelocity:
    def test_standing_wave(self, grid60):
        w = 0.6
        traj = evolve(sol.family(grid60, w).Phi, EvolveConfig(dt=0.01, T=2.0, record_every=20),
                      keep_states=True)
        fits = [dg.modulation_fit(s, w) for s in traj.states]
        mod = dg.velocity_estimates(traj.times, [f.theta for f in fits], [f.y for f in fits],
                                    [f.lam for f in fits], w)
        for m in mod:
            assert np.max(np.abs(m)) < 1e-6

    def test_unwrap(self):
        t = np.linspace(0, 2, 21)
        theta = [dg.wrap_phase(4.0 * x) for x in t]
        d_theta, _, _ = dg.velocity_estimates(t, theta, np.zeros(21), np.ones(21), 0.0)
        np.testing.assert_allclose(d_theta, 4.0, atol=1e-9)

    def test_wrap_phase(self):
        assert dg.wrap_phase(math.pi) == pytest.approx(math.pi)
        assert dg.wrap_phase(-math.pi) == pytest.approx(math.pi)
        assert dg.wrap_phase(2 * math.pi + 0.1) == pytest.approx(0.1)

    def test_short_window(self):
        with pytest.raises(WindowTooShort):
            dg.velocity_estimates([0, 1, 2], [0] * 3, [0] * 3, [1] * 3, 0.5)

    def test_bounded_by_residual(self, grid60):
        w = OMEGA_C
        traj = evolve(1.01 * sol.family(grid60, w).Phi, EvolveConfig(dt=0.01, T=6.0, record_every=10),
                      keep_states=True)
        fits = [dg.modulation_fit(s, w) for s in traj.states]
        mod = dg.velocity_estimates(traj.times, [f.theta for f in fits], [f.y for f in fits],
                                    [f.lam for f in fits], w)
        total = np.abs(mod[0]) + np.abs(mod[1]) + np.abs(mod[2])
        xn = np.array([f.xnorm_xi for f in fits])
        assert np.max(total / xn) < 10


def test_monitor_fills_record(grid60, cut60):
    w = 0.5
    mon = dg.SolitonMonitor(w, cut60, exit_distance=1e-3)
    traj = evolve(1.01 * sol.family(grid60, w).Phi, EvolveConfig(dt=0.01, T=0.2, record_every=10),
                  observers=(mon,))
    rec = traj.records[-1]
    assert rec.orbit_distance > 1e-3
    assert traj.stopped
    assert np.isfinite([rec.theta, rec.y, rec.lam, rec.xnorm_xi, rec.I_virial, rec.I_tilde]).all()
    assert len(mon.fits) == len(traj.records)


def test_I_tilde_requires_zero_mean(grid60, cut60):
    with pytest.raises(MeanNotZero):
        KGZState.from_components(grid60, np.zeros(grid60.points, complex),
                                 nu=np.ones(grid60.points))
