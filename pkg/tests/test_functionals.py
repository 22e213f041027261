import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kgzlab import functionals as fn
from kgzlab import grid as g
from kgzlab import soliton as sol
from kgzlab.state import KGZState

from conftest import OMEGA_C, band_limited

LATTICE = [0.0, 0.3, -0.3, OMEGA_C, -OMEGA_C, 0.9, -0.9]


@pytest.fixture(scope="module")
def phi0_sq(grid60):
    p = sol.ground_state(grid60)
    return g.inner(grid60, p, p)


def test_zero_state(grid60):
    z = KGZState.zeros(grid60)
    assert fn.energy(z) == 0
    assert fn.charge(z) == 0
    assert fn.momentum(z) == 0


def test_energy_at_critical(grid60):
    E = fn.energy(sol.family(grid60, OMEGA_C).Phi)
    assert abs(E - 4 * OMEGA_C * 2 / 3) < 1e-8


def test_energy_ground_state(grid60):
    assert abs(fn.energy(sol.family(grid60, 0.0).Phi) - 4 / 3) < 1e-8


def test_charge_at_critical(grid60):
    assert abs(fn.charge(sol.family(grid60, OMEGA_C).Phi) - 2) < 1e-8


def test_charge_ground_state(grid60):
    assert fn.charge(sol.family(grid60, 0.0).Phi) == 0


def test_charge_scaled(grid60):
    a, w = 0.01, 0.5
    fam = sol.family(grid60, w)
    q = fn.charge((1 + a) * fam.Phi)
    exact = (1 + a) ** 2 * w * math.sqrt(1 - w * w) * 4
    assert abs(q - exact) < 1e-8
    # the linearization misses only the a² term
    lin = w * fam.mass + 2 * a * w * fam.mass
    assert abs(q - lin - a * a * w * fam.mass) < 1e-9


@pytest.mark.parametrize("a", [0.0, 0.01, 0.3])
def test_momentum_vanishes(grid60, a):
    assert abs(fn.momentum((1 + a) * sol.family(grid60, 0.6).Phi)) < 1e-10


def test_momentum_single_mode(grid60):
    L = grid60.length
    u = np.exp(1j * 2 * np.pi * grid60.x / L)
    z = np.zeros(grid60.points)
    # v = u: v conj(u_x) is purely imaginary
    assert abs(fn.momentum(KGZState(grid60, u, u, z, z))) < 1e-12
    assert fn.momentum(KGZState(grid60, u, -1j * u, z, z)) == pytest.approx(-4 * np.pi, rel=1e-12)


def test_momentum_wave_part(grid60):
    # n = cos(kx), m = sin(kx): ∫ n m_x / c0² = k L / 2 / c0²
    L, c0 = grid60.length, 2.0
    k = 2 * np.pi / L
    z = np.zeros(grid60.points, dtype=complex)
    s = KGZState(grid60, z, z, np.cos(k * grid60.x), np.sin(k * grid60.x))
    assert fn.momentum(s, c0) == pytest.approx(k * L / 2 / c0 ** 2, rel=1e-12)


def test_energy_wave_part(grid60):
    L, c0 = grid60.length, 3.0
    k = 2 * np.pi / L
    z = np.zeros(grid60.points, dtype=complex)
    s = KGZState(grid60, z, z, np.cos(k * grid60.x), np.sin(k * grid60.x))
    expect = 0.25 * L / 2 + k * k * L / 2 / (4 * c0 ** 2)
    assert fn.energy(s, c0) == pytest.approx(expect, rel=1e-12)


def test_action_definition(grid60):
    P = sol.family(grid60, 0.4).Phi
    assert fn.action(P, 0.4) == fn.energy(P) - 0.4 * fn.charge(P)


@pytest.mark.parametrize("theta", [0.7, 2.0, -3.0])
def test_action_phase_invariance(grid60, theta):
    w, lam = 0.6, 1.02
    P = sol.family(grid60, w).Phi
    R = sol.translate_rotate(P, theta, 0.0)
    assert abs(fn.action(R, lam * w) - fn.action(P, lam * w)) < 1e-10


def test_action_gap_slope(grid60):
    w, lam = OMEGA_C, 1.05
    fam = sol.family(grid60, w)
    P = fam.Phi
    gaps = []
    for a in (1e-3, 1e-4):
        gaps.append((fn.action((1 + a) * P, lam * w) - fn.action(P, lam * w)) / a)
    lead = -2 * (lam - 1) * w * w * fam.mass
    # gap/a = lead + O(a): error shrinks tenfold with a
    err = [abs(x - lead) for x in gaps]
    assert err[1] < 0.2 * err[0]
    assert err[1] < 1e-3


@settings(max_examples=25, deadline=None)
@given(theta=st.floats(-10, 10), y=st.floats(-20, 20), seed=st.integers(0, 2 ** 16))
def test_charge_symmetry_invariance(theta, y, seed):
    gr = g.make_grid(20.0, 64)
    rng = np.random.default_rng(seed)
    s = KGZState(gr, band_limited(gr, rng, 8, True), band_limited(gr, rng, 8, True),
                 band_limited(gr, rng, 8), band_limited(gr, rng, 8))
    q = fn.charge(s)
    r = sol.translate_rotate(s, theta, y)
    assert abs(fn.charge(r) - q) < 1e-11 * max(1, abs(q))
    assert abs(fn.energy(r) - fn.energy(s)) < 1e-10 * max(1, abs(fn.energy(s)))


class TestIdentityReport:
    def test_critical_threeE(self, grid60):
        rep = fn.identity_report(OMEGA_C, grid60)
        assert rep.threeE_closed == pytest.approx(0, abs=1e-15)
        assert abs(rep.threeE_minus_4wQ) < 1e-8

    def test_critical_dq(self, grid60):
        rep = fn.identity_report(OMEGA_C, grid60)
        assert rep.dq_domega_closed == pytest.approx(0, abs=1e-14)
        assert abs(rep.dq_domega_fd) < 1e-6

    def test_dq_at_03(self, grid60):
        rep = fn.identity_report(0.3, grid60)
        assert rep.dq_domega_closed == pytest.approx(0.82 / math.sqrt(0.91) * 4, rel=1e-9)
        assert abs(rep.dq_domega_closed - 3.43837) < 1e-5
        assert abs(rep.dq_domega_fd - rep.dq_domega_closed) < 1e-5

    @pytest.mark.parametrize("omega", LATTICE)
    def test_lattice(self, grid60, omega):
        rep = fn.identity_report(omega, grid60)
        assert rep.max_identity_defect < 1e-7
        assert rep.dq_defect < 1e-5
        assert rep.passed()

    @pytest.mark.parametrize("omega", [0.1, 0.3, 0.6, 0.7, 0.72, 0.8, 0.95])
    def test_sign_dichotomy(self, grid60, omega):
        rep = fn.identity_report(omega, grid60)
        assert (rep.dq_domega_closed > 0) == (omega ** 2 < 0.5)
        assert (rep.dq_domega_fd > 0) == (omega ** 2 < 0.5)

    def test_as_dict(self, grid60):
        d = fn.identity_report(0.3, grid60).as_dict()
        assert d["omega"] == 0.3
        assert all(d[k] >= 0 for k in d if k.endswith("_defect"))
