import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kgzlab import grid as g
from kgzlab.errors import GridError, MeanNotZero

from conftest import band_limited


def sech_phi0(x):
    return math.sqrt(2) / np.cosh(x)


class TestMakeGrid:
    def test_nodes_two_pi(self):
        gr = g.make_grid(2 * np.pi, 16)
        np.testing.assert_allclose(gr.x, -np.pi + np.arange(16) * np.pi / 8, atol=1e-15)

    def test_spacing(self):
        assert g.make_grid(60, 1024).h == 60 / 1024

    @pytest.mark.parametrize("L,N", [(-1, 16), (0, 16), (10, 15), (10, 8), (10, 17)])
    def test_rejects(self, L, N):
        with pytest.raises(GridError):
            g.make_grid(L, N)

    def test_quadrature_of_one_is_length(self):
        gr = g.make_grid(7.3, 64)
        assert g.integrate(gr, np.ones(64)) == pytest.approx(7.3, rel=1e-15)

    def test_counts_and_readonly(self):
        gr = g.make_grid(10, 32)
        assert gr.x.size == gr.k.size == 32
        with pytest.raises(ValueError):
            gr.x[0] = 1.0

    def test_hashable_and_equal(self):
        assert g.make_grid(10, 32) == g.make_grid(10.0, 32)
        assert len({g.make_grid(10, 32), g.make_grid(10, 32)}) == 1


class TestDerivative:
    def test_sine_mode(self):
        gr = g.make_grid(60, 1024)
        k = 2 * np.pi / gr.length
        d = g.derivative(gr, np.sin(k * gr.x))
        np.testing.assert_allclose(d, k * np.cos(k * gr.x), atol=1e-13)

    @pytest.mark.parametrize("order", [1, 2, 3])
    def test_constant(self, order):
        gr = g.make_grid(10, 32)
        np.testing.assert_allclose(g.derivative(gr, np.full(32, 3.0), order), 0, atol=1e-13)

    def test_ground_state_second_derivative(self, grid60):
        phi = sech_phi0(grid60.x)
        assert np.max(np.abs(g.derivative(grid60, phi, 2) - (phi - phi ** 3))) < 1e-10

    def test_real_odd_order_stays_real(self):
        gr = g.make_grid(10, 32)
        f = np.random.default_rng(0).normal(size=32)
        assert np.isrealobj(g.derivative(gr, f, 1))

    def test_complex_input(self):
        gr = g.make_grid(10, 64)
        k = 2 * np.pi * 3 / gr.length
        f = np.exp(1j * k * gr.x)
        np.testing.assert_allclose(g.derivative(gr, f, 2), -k * k * f, atol=1e-11)

    def test_order_zero_rejected(self):
        gr = g.make_grid(10, 32)
        with pytest.raises(ValueError):
            g.derivative(gr, np.zeros(32), 0)

    def test_matrix_matches_fft(self, small_grid):
        f = band_limited(small_grid, np.random.default_rng(1))
        for order in (1, 2):
            D = g.differentiation_matrix(small_grid, order)
            np.testing.assert_allclose(D @ f, g.derivative(small_grid, f, order), atol=1e-11)


class TestInverseLaplacian:
    def test_single_mode(self):
        gr = g.make_grid(60, 256)
        k = 2 * np.pi / gr.length
        np.testing.assert_allclose(g.inverse_neg_laplacian(gr, np.cos(k * gr.x)),
                                   np.cos(k * gr.x) / k ** 2, atol=1e-10)

    def test_zero(self):
        gr = g.make_grid(10, 32)
        np.testing.assert_array_equal(g.inverse_neg_laplacian(gr, np.zeros(32)), 0)

    def test_round_trip_on_soliton_density(self, grid60):
        from kgzlab import soliton as sol
        f = g.derivative(grid60, sol.profile(grid60, 0.3) ** 2, 2)
        back = -g.derivative(grid60, g.inverse_neg_laplacian(grid60, f), 2)
        assert np.max(np.abs(back - f)) < 1e-10 * np.max(np.abs(f))

    def test_mean_not_zero(self):
        gr = g.make_grid(10, 32)
        with pytest.raises(MeanNotZero):
            g.inverse_neg_laplacian(gr, np.ones(32))

    def test_result_has_zero_mean(self):
        gr = g.make_grid(10, 32)
        f = band_limited(gr, np.random.default_rng(2), 6, zero_mean=True)
        assert abs(g.mean(gr, g.inverse_neg_laplacian(gr, f))) < 1e-14

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 2 ** 31 - 1), L=st.floats(5, 100))
    def test_round_trip_property(self, seed, L):
        gr = g.make_grid(L, 64)
        f = band_limited(gr, np.random.default_rng(seed), 10, zero_mean=True)
        back = -g.derivative(gr, g.inverse_neg_laplacian(gr, f), 2)
        assert g.norm(gr, back - f) <= 1e-10 * g.norm(gr, f)


class TestInner:
    def test_one_one(self):
        gr = g.make_grid(60, 64)
        assert g.inner(gr, np.ones(64), np.ones(64)) == pytest.approx(60, rel=1e-14)

    def test_imaginary_pairing_vanishes(self, grid60):
        p = sech_phi0(grid60.x)
        assert g.inner(grid60, 1j * p, p) == 0.0

    def test_ground_state_mass(self, grid60):
        p = sech_phi0(grid60.x)
        assert abs(g.inner(grid60, p, p) - 4) < 1e-10

    def test_length_mismatch(self):
        gr = g.make_grid(10, 32)
        with pytest.raises(ValueError):
            g.inner(gr, np.ones(16), np.ones(16))

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 2 ** 31 - 1))
    def test_parseval(self, seed):
        gr = g.make_grid(12.0, 64)
        f = np.random.default_rng(seed).normal(size=64) + 1j * np.random.default_rng(seed + 1).normal(size=64)
        spectral = gr.h / gr.points * np.sum(np.abs(np.fft.fft(f)) ** 2)
        assert g.inner(gr, f, f) == pytest.approx(spectral, rel=1e-12)


class TestXNorm:
    def test_zero(self):
        gr = g.make_grid(10, 32)
        z = np.zeros(32)
        assert g.x_norm(gr, (z, z, z, z)) == 0

    def test_ground_state(self, grid60):
        p = sech_phi0(grid60.x)
        z = np.zeros_like(p)
        assert abs(g.x_norm(grid60, (p, z, z, z)) - math.sqrt(4 + 4 / 3)) < 1e-8

    def test_single_mode_hminus1(self):
        gr = g.make_grid(60, 256)
        z = np.zeros(256)
        k = 2 * np.pi / gr.length
        expected = math.sqrt(gr.length / 2) / k
        assert g.x_norm(gr, (z, z, z, np.sin(k * gr.x))) == pytest.approx(expected, rel=1e-12)

    def test_fourth_component_mean(self):
        gr = g.make_grid(10, 32)
        z = np.zeros(32)
        with pytest.raises(MeanNotZero):
            g.x_norm(gr, (z, z, z, np.ones(32)))

    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(0, 2 ** 31 - 1), c=st.floats(-5, 5))
    def test_norm_axioms(self, seed, c):
        gr = g.make_grid(20.0, 64)
        rng = np.random.default_rng(seed)

        def tup():
            return (band_limited(gr, rng, 8, True), band_limited(gr, rng, 8, True),
                    band_limited(gr, rng, 8), band_limited(gr, rng, 8, zero_mean=True))
        a, b = tup(), tup()
        na, nb = g.x_norm(gr, a), g.x_norm(gr, b)
        nab = g.x_norm(gr, tuple(x + y for x, y in zip(a, b)))
        assert nab <= na + nb + 1e-12
        assert g.x_norm(gr, tuple(c * x for x in a)) == pytest.approx(abs(c) * na, rel=1e-12, abs=1e-14)


class TestShift:
    def test_full_period(self, grid60):
        p = sech_phi0(grid60.x)
        np.testing.assert_allclose(g.shift(grid60, p, grid60.length), p, atol=1e-13)

    def test_grid_shift_is_roll(self):
        gr = g.make_grid(10, 32)
        f = band_limited(gr, np.random.default_rng(3), 8)
        np.testing.assert_allclose(g.shift(gr, f, 3 * gr.h), np.roll(f, 3), atol=1e-13)

    def test_wrap(self):
        gr = g.make_grid(10, 32)
        assert gr.wrap(6.0) == pytest.approx(-4.0)
        assert gr.wrap(-5.0) == pytest.approx(-5.0)
