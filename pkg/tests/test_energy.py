import math

import numpy as np
import pytest

from fdbouss import energy as en
from fdbouss import spectral as sp
from fdbouss.integrators import NumericalBlowupError
from fdbouss.model1d import State1D
from fdbouss.model2d import State2D


@pytest.fixture
def grid():
    return sp.GridSpec.create(64)


class TestModifiedEnergy:
    def test_rest_is_zero(self, grid):
        z = np.zeros(64)
        r = en.modified_energy_1d(grid, State1D(z, z), 2.6)
        assert r.E_s == 0 and r.lower == 0 and r.upper == 0 and r.sandwich_ok

    def test_constant_depth(self, grid):
        # eta = c, u = 0: E = 1/2 c^2 |Omega|
        c = 0.3
        r = en.modified_energy_1d(grid, State1D(np.full(64, c), np.zeros(64)), 2.6)
        assert r.E_s == pytest.approx(0.5 * c**2 * 2 * math.pi)

    def test_cubic_term_single_mode(self, grid):
        (x,) = grid.coordinates()
        eta = np.full(64, 0.1)
        u = 0.2 * np.cos(2 * x)
        r = en.modified_energy_1d(grid, State1D(eta, u), 2.6)
        # 1/2 int eta (J^s u)^2 = 1/2 * 0.1 * 0.04 * 5^2.6 * pi
        assert r.cubic == pytest.approx(0.5 * 0.1 * 0.04 * 5**2.6 * math.pi, rel=1e-12)
        assert r.naive == pytest.approx(r.E_s - r.cubic)

    def test_requires_s(self, grid):
        z = np.zeros(64)
        with pytest.raises(ValueError):
            en.modified_energy_1d(grid, State1D(z, z), 2.0)
        g2 = sp.GridSpec.create((16, 16))
        z2 = np.zeros((16, 16))
        with pytest.raises(ValueError):
            en.modified_energy_2d(g2, State2D(z2, z2, z2), 3.0)

    def test_2d_sandwich(self):
        g2 = sp.GridSpec.create((16, 16))
        x1, x2 = g2.coordinates()
        st = State2D(0.2 * np.sin(x1), 0.1 * np.cos(x2), 0.1 * np.sin(x1 + x2))
        assert en.modified_energy_2d(g2, st, 3.2).sandwich_ok

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_nonfinite_raises(self, grid):
        eta = np.zeros(64)
        eta[0] = np.inf
        with pytest.raises(NumericalBlowupError):
            en.modified_energy_1d(grid, State1D(eta, np.zeros(64)), 2.6)

    def test_coercivity_constant(self):
        assert en.coercivity_constant(0.9) == pytest.approx(1 - 2**-0.5)
        assert en.coercivity_constant(0.1) == 0.1


class TestDifference:
    def test_identical_states(self, grid):
        (x,) = grid.coordinates()
        s = State1D(0.1 * np.cos(x), 0.1 * np.sin(x))
        d = en.difference_energy(grid, s, s)
        assert d.value == 0 and d.eta_H1 == 0

    def test_single_mode_value(self, grid):
        (x,) = grid.coordinates()
        z = np.zeros(64)
        s1 = State1D(z, z)
        s2 = State1D(z, 0.01 * np.cos(3 * x))
        d = en.difference_energy(grid, s1, s2)
        # 2E = ||du||^2 + ||D^{1/2} du_x||^2 = pi 1e-4 (1 + 27)
        assert d.value == pytest.approx(0.5 * math.pi * 1e-4 * 28, rel=1e-12)
        assert d.lower <= d.value <= d.upper

    def test_grid_mismatch(self, grid):
        a = State1D(np.zeros(64), np.zeros(64))
        b = State1D(np.zeros(32), np.zeros(32))
        with pytest.raises(ValueError):
            en.difference_energy(grid, a, b)


class TestExistenceTime:
    def test_values(self):
        est = en.existence_time(1.0, 0.5, 0.8, C1=1.0, C2=10.0)
        assert est.T1 == pytest.approx(math.log(1 + 1 / 2.25))
        assert est.T2 == pytest.approx(0.8 / (10 * 2 * 0.5))
        assert est.T0 == min(est.T1, est.T2)

    def test_zero_velocity(self):
        est = en.existence_time(1.0, 0.0, 0.5)
        assert math.isinf(est.T2) and est.T0 == est.T1

    def test_rejects(self):
        for args in ((1, 1, 1.0), (1, 1, 0.0), (-1, 1, 0.5)):
            with pytest.raises(ValueError):
                en.existence_time(*args)

    def test_monotone_in_data(self):
        a = en.existence_time(1.0, 1.0, 0.5)
        b = en.existence_time(2.0, 2.0, 0.5)
        assert b.T1 < a.T1 and b.T2 < a.T2


class TestMonitors:
    def test_derivative_needs_three_points(self):
        with pytest.raises(en.InsufficientDataError):
            en.time_derivative([0, 1], [0, 1])

    def test_derivative_exact_for_quadratic(self):
        t = np.linspace(0, 1, 11)
        assert np.allclose(en.time_derivative(t, t**2), 2 * t)

    def test_growth_ratio_zero_series(self):
        assert not en.growth_ratio([0, 1, 2], [0, 0, 0]).any()

    def test_growth_ratio_exponential(self):
        t = np.linspace(0, 1, 2001)
        E = 0.01 * np.exp(t)
        r = en.growth_ratio(t, E)
        assert np.allclose(r, 1 / (1 + E), rtol=1e-5)

    def test_monitor_fills_ratio(self, grid):
        (x,) = grid.coordinates()
        reps = [en.modified_energy_1d(grid, State1D(a * np.cos(x), a * np.sin(x), t), 2.6)
                for t, a in ((0, 0.1), (0.1, 0.11), (0.2, 0.12))]
        mon = en.energy_inequality_monitor(reps)
        assert all(math.isfinite(r.ratio) for r in reps)
        assert mon.sup_ratio == max(r.ratio for r in reps)

    def test_noncavitation(self):
        v = en.noncavitation_monitor([0, 1, 2, 3], [0.8, 0.6, 0.3, 0.2], 0.8, horizon=1.5)
        assert v.passed and v.min_depth == 0.6
        v = en.noncavitation_monitor([0, 1, 2, 3], [0.8, 0.6, 0.3, 0.2], 0.8)
        assert not v.passed and v.first_violation == 2.0
        assert "first at t = 2" in v.describe()
