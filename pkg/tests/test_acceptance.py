"""Acceptance criteria; each test reports one PASS/FAIL line in the terminal summary."""

import math
import subprocess
import sys

import numpy as np
import pytest

from fdbouss import energy as en
from fdbouss import experiments as ex
from fdbouss import inequalities as iq
from fdbouss import spectral as sp
from fdbouss.model1d import Boussinesq1D, State1D
from fdbouss.model2d import Boussinesq2D, State2D, project_curl_free

pytestmark = pytest.mark.acceptance


def _random_1d(grid, rng, amp):
    n = grid.n[0]
    m = np.arange(1, n // 3)
    c = np.zeros(n // 2 + 1, complex)
    c[m] = m ** -rng.uniform(1.0, 3.0) * np.exp(2j * math.pi * rng.random(m.size))
    f = sp.inverse(grid, c)
    return amp * f / np.abs(f).max()


def _random_2d(grid, rng, amp):
    fh = sp.forward(grid, rng.standard_normal(grid.shape))
    fh *= sp.dealias_mask(grid) * (1 + grid.lattice.kmod**2) ** -rng.uniform(0.5, 1.5)
    f = sp.inverse(grid, fh)
    return amp * f / np.abs(f).max()


@pytest.mark.criterion("1. linear plane-wave period return")
def test_plane_wave_return(criterion):
    err, elapsed = ex.plane_wave_return(n=256, mode=4, beta=1.0)
    criterion["detail"] = f"rel L2 error {err:.2e}, {elapsed:.2f} s"
    assert err <= 1e-8
    assert elapsed <= 5.0


@pytest.mark.criterion("2. temporal order 4 and spectral convergence")
def test_convergence(criterion):
    _, orders = ex.temporal_order(n=128)
    space = ex.spatial_convergence(ns=(64, 128, 192, 256), n_ref=512)
    criterion["detail"] = (f"orders {', '.join(f'{o:.3f}' for o in orders)}; "
                           f"error N=128 {space[128]:.1e}")
    assert all(abs(o - 4.0) <= 0.2 for o in orders)
    assert all(space[n] < 1e-10 for n in space if n >= 128)


@pytest.mark.criterion("3. conservation of mass, momentum, Hamiltonian")
def test_conservation(criterion):
    rep = ex.conservation_drift(n=256, amplitude=0.1, t_end=1.0)
    criterion["detail"] = f"drifts {rep.mass:.1e}, {rep.momentum:.1e}, {rep.hamiltonian:.1e}"
    assert max(rep.mass, rep.momentum, rep.hamiltonian) <= 1e-8


@pytest.mark.criterion("4. reformulated vs direct right-hand side")
def test_reformulation(criterion):
    rng = np.random.default_rng(2024)
    worst = 0.0
    for n in (128, 256):
        g1 = sp.GridSpec.create(n)
        m1 = Boussinesq1D(g1)
        g2 = sp.GridSpec.create((n, n))
        m2 = Boussinesq2D(g2)
        for _ in range(20):
            st = State1D(_random_1d(g1, rng, 0.3), _random_1d(g1, rng, 0.3))
            a, b = np.concatenate(m1.rhs(st)), np.concatenate(m1.rhs_direct(st))
            worst = max(worst, np.abs(a - b).max() / np.abs(b).max())
            u1, u2 = project_curl_free(g2, _random_2d(g2, rng, 0.3), _random_2d(g2, rng, 0.3))
            st2 = State2D(_random_2d(g2, rng, 0.3), u1, u2)
            a = np.concatenate(m2.rhs(st2))
            b = np.concatenate(m2.rhs_direct(st2))
            worst = max(worst, np.abs(a - b).max() / np.abs(b).max())
    criterion["detail"] = f"max relative difference {worst:.1e}"
    assert worst <= 1e-10


@pytest.mark.criterion("5. coercivity sandwich")
def test_sandwich(criterion):
    rng = np.random.default_rng(7)
    grid = sp.GridSpec.create(256)
    violations = 0
    for i in range(100):
        # depths down to 0.05 exercise the h0-limited branch of c0
        eta = _random_1d(grid, rng, rng.uniform(0.05, 0.95))
        u = _random_1d(grid, rng, rng.uniform(0.01, 1.0))
        st = State1D(eta, u)
        assert st.min_depth > 0
        rep = en.modified_energy_1d(grid, st, 2.6)
        violations += not rep.sandwich_ok
    criterion["detail"] = f"{violations} violations in 100 states"
    assert violations == 0


@pytest.mark.criterion("6. energy-inequality ratio stable; naive ratio larger")
def test_energy_monitor(criterion):
    studies = [ex.energy_study(name) for name in ex.STANDARD_RUNS]
    spreads = [s.spread for s in studies]
    criterion["detail"] = "; ".join(
        f"{s.name}: sup {s.sup_ratio[512]:.3g} naive {s.sup_ratio_naive[512]:.3g}" for s in studies)
    for s in studies:
        assert all(math.isfinite(v) for v in s.sup_ratio.values())
        assert s.sandwich_violations == 0
    assert max(spreads) <= 2.0
    assert any(s.naive_exceeds for s in studies)


@pytest.mark.criterion("7. non-cavitation up to T2")
def test_noncavitation(criterion):
    study = ex.noncavitation_study(depth=0.2, C2=10.0)
    criterion["detail"] = study.verdict.describe()
    assert study.h0 == pytest.approx(0.8, abs=1e-3)
    assert study.verdict.horizon == study.estimate.T2
    assert study.verdict.passed


@pytest.mark.criterion("8. difference energy: delta^2 scaling and Gronwall bound")
def test_gronwall(criterion):
    rates = {}
    for n in (128, 256, 512):
        grid = sp.GridSpec.create(n)
        scaled = []
        for delta in (1e-3, 1e-4):
            a, b = ex.perturbed_pair(grid, delta)
            rep = ex.gronwall_experiment(grid, a, b)
            assert rep.bound_holds
            scaled.append(rep.E0 / delta**2)
            rates.setdefault(n, rep.rate)
        assert abs(scaled[0] / scaled[1] - 1) <= 0.01
    spread = max(rates.values()) / min(rates.values())
    criterion["detail"] = f"rate {rates[512]:.4g}, refinement spread {spread:.4f}"
    assert spread <= 2.0


@pytest.mark.criterion("9. 2D curl preservation")
def test_curl(criterion):
    worst, _ = ex.curl_run_2d(n=128, steps=1000)
    criterion["detail"] = f"max relative curl {worst:.1e}"
    assert worst <= 1e-8


@pytest.mark.criterion("10. inequality lab")
def test_inequality_lab(criterion):
    reports = iq.run_lab(trials=200, ns=(128, 256, 512), seed=0)
    spreads = {k: r.refinement_spread for k, r in reports.items()}
    criterion["detail"] = (f"max spread {max(spreads.values()):.3f}; "
                           f"r_BR {reports['bessel_riesz'].max_ratio:.4f}")
    assert max(spreads.values()) <= 2.0
    assert reports["bessel_riesz"].violations == 0
    assert reports["bessel_riesz"].max_ratio <= 0.5 + 1e-10
    assert reports["multiplier_M"].violations == 0


@pytest.mark.criterion("11. continuity of the flow map")
def test_continuity(criterion):
    dist = ex.continuity_of_flow(eps_levels=(0.2, 0.1, 0.05))
    criterion["detail"] = "distances " + ", ".join(f"{d:.3e}" for d in dist)
    assert all(b < a for a, b in zip(dist, dist[1:]))


@pytest.mark.criterion("12. byte-identical reruns")
def test_determinism(criterion, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("initial.family = random\ngrid.n = 128\ninitial.band = 12\n"
                   "initial.amplitude = 0.1\ninitial.u_amplitude = 0.05\n"
                   "integrator.t_end = 0.2\ndiagnostics.output_stride = 20\nseed = 11\n")
    for out in ("a", "b"):
        subprocess.run([sys.executable, "-m", "fdbouss.cli", "simulate", str(cfg),
                        "--out", str(tmp_path / out)], check=True, capture_output=True)
    files = ["series.csv", "metadata.json"] + [f"snapshots/{p.name}" for p in
                                               sorted((tmp_path / "a" / "snapshots").iterdir())]
    same = all((tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes() for f in files)
    criterion["detail"] = f"{len(files)} files compared"
    assert same and len(files) > 3
