import math

import numpy as np
import pytest

from fdbouss import spectral as sp
from fdbouss.integrators import NumericalBlowupError, rk4_stable
from fdbouss.model1d import (Boussinesq1D, IntegratorConfig, State1D, Whitham1D, check_stability,
                             evolve, gaussian, integrate, max_frequency, plane_wave,
                             plane_wave_period, step)


def random_state(grid, seed, amp=0.2):
    rng = np.random.default_rng(seed)
    n = grid.n[0]
    m = np.arange(1, n // 3)
    def field():
        c = np.zeros(n // 2 + 1, complex)
        c[m] = m**-2.0 * np.exp(2j * math.pi * rng.random(m.size))
        f = sp.inverse(grid, c)
        return amp * f / np.abs(f).max()
    return State1D(field(), field())


@pytest.fixture
def grid():
    return sp.GridSpec.create(128)


class TestRhs:
    def test_rest_state_is_fixed(self, grid):
        z = np.zeros(128)
        d_eta, d_u = Boussinesq1D(grid).rhs(State1D(z, z))
        assert not d_eta.any() and not d_u.any()

    def test_reformulation_matches_direct(self, grid):
        model = Boussinesq1D(grid, beta=0.7)
        for seed in range(5):
            st = random_state(grid, seed)
            a = np.concatenate(model.rhs(st))
            b = np.concatenate(model.rhs_direct(st))
            assert np.max(np.abs(a - b)) <= 1e-12 * np.max(np.abs(b))

    def test_linear_plane_wave_derivative(self, grid):
        model = Boussinesq1D(grid, linear_only=True)
        st = plane_wave(grid, 3, 1e-2)
        k, K = 3.0, float(sp.sym_K(3.0))
        omega = k * math.sqrt(K)
        (x,) = grid.coordinates()
        d_eta, _ = model.rhs(st)
        assert np.allclose(d_eta, 1e-2 * omega * np.sin(3 * x), atol=1e-14)

    def test_nonfinite_raises(self, grid):
        z = np.zeros(128)
        z[3] = np.nan
        with pytest.raises(NumericalBlowupError):
            Boussinesq1D(grid).rhs(State1D(z, z))

    def test_hamiltonian_rate_vanishes(self, grid):
        model = Boussinesq1D(grid)
        for seed in range(3):
            st = random_state(grid, seed)
            assert abs(model.hamiltonian_rate(st)) <= 1e-11 * model.hamiltonian(st)


class TestIntegration:
    def test_plane_wave_period(self, grid):
        model = Boussinesq1D(grid, linear_only=True)
        st = plane_wave(grid, 4, 1e-3)
        T = plane_wave_period(grid, 4)
        w, t = integrate(model, model.to_spectral(st), 0.0, T / 50, 50)
        assert t == pytest.approx(T)
        assert np.allclose(model.to_physical(w).eta, st.eta, atol=1e-15)

    def test_rk4_agrees_with_ifrk4(self, grid):
        model = Boussinesq1D(grid)
        st = model.band_limit(gaussian(grid, 0.1, 0.4, 0.1))
        a = evolve(model, st, IntegratorConfig(1e-3, 0.05))
        b = evolve(model, st, IntegratorConfig(1e-3, 0.05, scheme="RK4"))
        assert np.max(np.abs(a.eta - b.eta)) < 1e-9

    def test_rk4_guard(self, grid):
        omega = max_frequency(grid, 1.0)
        assert not rk4_stable(3.0 / omega, omega)
        with pytest.raises(ValueError, match="RK4 unstable"):
            check_stability(grid, IntegratorConfig(0.1, 1.0, scheme="RK4"), 1.0)

    def test_step_advances_time(self, grid):
        model = Boussinesq1D(grid)
        st = gaussian(grid, 0.1, 0.4)
        assert step(model, st, IntegratorConfig(0.01, 0.05)).t == pytest.approx(0.01)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            IntegratorConfig(-1, 1)
        with pytest.raises(ValueError):
            IntegratorConfig(0.1, 1, scheme="Euler")
        cfg = IntegratorConfig(0.3, 1.0)
        assert cfg.n_steps == 4 and cfg.step_size == pytest.approx(0.25)

    def test_invariants_exact_in_mean(self, grid):
        model = Boussinesq1D(grid)
        st = model.band_limit(gaussian(grid, 0.2, 0.4, 0.1))
        out = evolve(model, st, IntegratorConfig(2e-3, 0.2))
        assert model.mass(out) == pytest.approx(model.mass(st), abs=1e-15)
        assert model.momentum(out) == pytest.approx(model.momentum(st), abs=1e-15)
        assert model.hamiltonian(out) == pytest.approx(model.hamiltonian(st), rel=1e-10)


class TestWhitham:
    def test_linear_translation(self):
        g = sp.GridSpec.create(64)
        (x,) = g.coordinates()
        model = Whitham1D(g, beta=1.0, linear_only=True)
        u0 = np.cos(2 * x)
        c = float(sp.sym_W(2.0))
        w, _ = integrate(model, model.to_spectral(u0), 0.0, 0.01, 100)
        assert np.allclose(model.to_physical(w), np.cos(2 * (x - c * 1.0)), atol=1e-13)

    def test_l2_conserved(self):
        g = sp.GridSpec.create(128)
        (x,) = g.coordinates()
        model = Whitham1D(g)
        u0 = sp.inverse(g, sp.forward(g, 0.2 * np.exp(-((x - math.pi) ** 2))) * sp.dealias_mask(g))
        w, _ = integrate(model, model.to_spectral(u0), 0.0, 1e-3, 300)
        u = model.to_physical(w)
        assert np.sum(u * u) == pytest.approx(np.sum(u0 * u0), rel=1e-10)

    def test_rhs_of_rest(self):
        g = sp.GridSpec.create(32)
        assert not Whitham1D(g).rhs(np.zeros(32)).any()
