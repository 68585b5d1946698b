"""Numerical studies built on the 1D/2D solvers and the energy diagnostics."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import energy as en
from . import spectral as sp
from .model1d import Boussinesq1D, State1D, gaussian, integrate, plane_wave, plane_wave_period
from .model2d import Boussinesq2D, State2D, curl_norm, gaussian_2d, velocity_norm


def sample_run(model: Boussinesq1D, state: State1D, dt: float, t_end: float,
               stride: int = 1, scheme: str = "IFRK4") -> list[State1D]:
    """States at t = 0 and every ``stride`` steps (plus the final one)."""
    n_steps = max(1, int(math.ceil(t_end / dt - 1e-9)))
    h = t_end / n_steps
    out = []
    integrate(model, model.to_spectral(state), state.t, h, n_steps, scheme,
              callback=lambda i, t, w: out.append(model.to_physical(w, t)), stride=stride)
    return out


def energy_series(grid: sp.GridSpec, states: list[State1D], s: float) -> list[en.EnergyReport]:
    return [en.modified_energy_1d(grid, st, s) for st in states]


# ------------------------------------------------------------ plane wave

def plane_wave_return(n: int = 256, mode: int = 4, beta: float = 1.0, steps: int = 200,
                      eps: float = 1e-3, scheme: str = "IFRK4") -> tuple[float, float]:
    """Relative L2 error after one linear period, and the wall time."""
    grid = sp.GridSpec.create(n)
    model = Boussinesq1D(grid, beta, linear_only=True)
    s0 = plane_wave(grid, mode, eps, beta)
    T = plane_wave_period(grid, mode, beta)
    start = time.perf_counter()
    w, _ = integrate(model, model.to_spectral(s0), 0.0, T / steps, steps, scheme)
    elapsed = time.perf_counter() - start
    s1 = model.to_physical(w, T)
    err = math.sqrt(float(np.sum((s1.eta - s0.eta) ** 2 + (s1.u - s0.u) ** 2))
                    / float(np.sum(s0.eta**2 + s0.u**2)))
    return err, elapsed


# ------------------------------------------------------------ convergence

def default_smooth_state(grid: sp.GridSpec, amplitude: float = 0.3) -> State1D:
    L = grid.period[0]
    return gaussian(grid, amplitude, L / 16, amplitude)


def temporal_order(n: int = 128, t_end: float = 0.5, dts=(0.01, 0.005, 0.0025, 0.00125, 0.000625),
                   beta: float = 1.0, amplitude: float = 0.3, scheme: str = "IFRK4"):
    """Successive-difference errors ``||w_dt - w_{dt/2}||`` and observed orders."""
    grid = sp.GridSpec.create(n)
    model = Boussinesq1D(grid, beta)
    s0 = model.band_limit(default_smooth_state(grid, amplitude))
    finals = []
    for dt in dts:
        w, _ = integrate(model, model.to_spectral(s0), 0.0, t_end / round(t_end / dt),
                         round(t_end / dt), scheme)
        finals.append(w)
    errors = [math.sqrt(sp.sobolev_norm_hat(grid, a[0] - b[0], 0) ** 2
                        + sp.sobolev_norm_hat(grid, a[1] - b[1], 0) ** 2)
              for a, b in zip(finals, finals[1:])]
    orders = [math.log2(e1 / e2) for e1, e2 in zip(errors, errors[1:])]
    return errors, orders


def _restrict(w_fine: np.ndarray, n_coarse: int) -> np.ndarray:
    """Keep the spectral coefficients representable on a coarser 1D grid."""
    return w_fine[..., : n_coarse // 2 + 1]


def spatial_convergence(ns=(32, 48, 64, 96, 128, 192, 256), n_ref: int = 512, t_end: float = 0.5,
                        dt: float = 1e-3, beta: float = 1.0, amplitude: float = 0.1):
    """Relative L2 distance to a reference run at ``n_ref``, per grid size.

    The distance is measured in coefficient space on the coarse lattice plus
    the reference energy outside it, i.e. the full L2 distance between the
    two trigonometric interpolants.
    """
    L = 2 * math.pi
    results = {}
    n_steps = round(t_end / dt)

    def run(n):
        grid = sp.GridSpec.create(n, L)
        model = Boussinesq1D(grid, beta)
        s0 = model.band_limit(gaussian(grid, amplitude, L / 16, amplitude))
        w, _ = integrate(model, model.to_spectral(s0), 0.0, t_end / n_steps, n_steps)
        return w

    ref = run(n_ref)
    ref_norm = math.sqrt(sum(float(np.sum(np.abs(ref[i]) ** 2 * _weights(n_ref))) for i in range(2)))
    for n in ns:
        w = run(n)
        rc = _restrict(ref, n).copy()
        # the Nyquist coefficient is masked on both grids, so no halving is needed
        diff = sum(float(np.sum(np.abs(w[i] - rc[i]) ** 2 * _weights(n))) for i in range(2))
        tail = sum(float(np.sum(np.abs(ref[i, n // 2 + 1:]) ** 2 * 2.0)) for i in range(2))
        results[n] = math.sqrt(diff + tail) / ref_norm
    return results


def _weights(n: int) -> np.ndarray:
    w = np.full(n // 2 + 1, 2.0)
    w[0] = w[-1] = 1.0
    return w


# ------------------------------------------------------------ conservation

@dataclass
class ConservationReport:
    mass: float
    momentum: float
    hamiltonian: float
    initial: tuple[float, float, float]


def conservation_drift(n: int = 256, amplitude: float = 0.1, t_end: float = 1.0, dt: float = 1e-3,
                       beta: float = 1.0) -> ConservationReport:
    """Relative drift of mass, momentum and Hamiltonian over a run."""
    grid = sp.GridSpec.create(n)
    model = Boussinesq1D(grid, beta)
    L = grid.period[0]
    s0 = model.band_limit(gaussian(grid, amplitude, L / 16, amplitude))
    states = sample_run(model, s0, dt, t_end, stride=max(1, round(t_end / dt) // 10))
    q0 = (model.mass(s0), model.momentum(s0), model.hamiltonian(s0))
    drift = [0.0, 0.0, 0.0]
    for st in states:
        q = (model.mass(st), model.momentum(st), model.hamiltonian(st))
        drift = [max(d, abs(a - b) / abs(b)) for d, a, b in zip(drift, q, q0)]
    return ConservationReport(*drift, initial=q0)


# ------------------------------------------------------------ energy studies

#: (eta amplitude, u amplitude) of Gaussian data with width L/16
STANDARD_RUNS = {
    "hump": (0.1, 0.0),
    "right-going": (0.2, 0.2),
    "depression": (-0.2, 0.1),
}


@dataclass
class EnergyStudy:
    name: str
    sup_ratio: dict[int, float] = field(default_factory=dict)
    sup_ratio_naive: dict[int, float] = field(default_factory=dict)
    sandwich_violations: int = 0

    @property
    def spread(self) -> float:
        v = list(self.sup_ratio.values())
        return max(v) / min(v)

    @property
    def naive_exceeds(self) -> bool:
        return any(self.sup_ratio_naive[n] > self.sup_ratio[n] for n in self.sup_ratio)


def energy_study(name: str, ns=(128, 256, 512), s: float = 2.6, t_end: float = 1.0,
                 dt: float = 1e-3, stride: int = 10, beta: float = 1.0) -> EnergyStudy:
    a, b = STANDARD_RUNS[name]
    study = EnergyStudy(name)
    for n in ns:
        grid = sp.GridSpec.create(n)
        model = Boussinesq1D(grid, beta)
        s0 = model.band_limit(gaussian(grid, a, grid.period[0] / 16, b))
        reports = energy_series(grid, sample_run(model, s0, dt, t_end, stride), s)
        mon = en.energy_inequality_monitor(reports)
        study.sup_ratio[n] = mon.sup_ratio
        study.sup_ratio_naive[n] = mon.sup_ratio_naive
        study.sandwich_violations += sum(not r.sandwich_ok for r in reports)
    return study


# ------------------------------------------------------------ Gronwall

@dataclass
class GronwallReport:
    t: np.ndarray = field(repr=False)
    E: np.ndarray = field(repr=False)
    ratio: np.ndarray = field(repr=False)
    max_ratio: float
    rate: float
    bound_holds: bool
    E0: float


def difference_series(grid, states1, states2):
    return [en.difference_energy(grid, a, b) for a, b in zip(states1, states2)]


def gronwall_experiment(grid: sp.GridSpec, data1: State1D, data2: State1D, dt: float = 1e-3,
                        t_end: float = 1.0, stride: int = 10, s: float = 2.6,
                        beta: float = 1.0) -> GronwallReport:
    """Evolve two solutions and measure the difference-energy growth constant.

    ``ratio(t) = |E'(t)| / ((1 + sum of H^s norms)^2 (||de||_{H^1}^2 + ||du||_{H^{3/2}}^2))``;
    its maximum is the empirical constant. Combined with the coercivity
    bound this gives the Gronwall rate ``max_ratio * max (1 + sum)^2 * 2 / c0``
    and the check ``E(t) <= E(0) exp(rate t)``.
    """
    if not s > 2.5:
        raise ValueError("the difference estimate needs s > 5/2")
    for d in (data1, data2):
        if d.min_depth <= 0:
            raise ValueError("initial data must be non-cavitating")
    model = Boussinesq1D(grid, beta)
    run1 = sample_run(model, data1, dt, t_end, stride)
    run2 = sample_run(model, data2, dt, t_end, stride)
    t = np.array([st.t for st in run1])
    diffs = difference_series(grid, run1, run2)
    E = np.array([d.value for d in diffs])
    if E[0] == 0.0:
        zeros = np.zeros_like(E)
        return GronwallReport(t, E, zeros, 0.0, 0.0, bool(np.all(E == 0.0)), 0.0)
    size = np.array([1.0 + sum(sp.sobolev_norm(grid, f, s) for f in (a.eta, b.eta, a.u, b.u))
                     for a, b in zip(run1, run2)]) ** 2
    quad = np.array([d.eta_H1**2 + d.u_H32**2 for d in diffs])
    ratio = np.abs(en.time_derivative(t, E)) / (size * quad)
    c0 = min(en.coercivity_constant(st.min_depth) for st in run1)
    max_ratio = float(ratio.max())
    rate = max_ratio * float(size.max()) * 2.0 / c0
    holds = bool(np.all(E <= E[0] * np.exp(rate * t) * (1 + 1e-12)))
    return GronwallReport(t, E, ratio, max_ratio, rate, holds, float(E[0]))


def perturbed_pair(grid: sp.GridSpec, delta: float, amplitude: float = 0.2):
    """Base Gaussian data and a copy shifted by ``delta`` times a fixed smooth bump."""
    L = grid.period[0]
    (x,) = grid.coordinates()
    base = gaussian(grid, amplitude, L / 16, amplitude)
    bump = np.exp(-((x - 0.4 * L) ** 2) / (L / 12) ** 2)
    other = State1D(base.eta + delta * bump, base.u - 0.5 * delta * bump, 0.0)
    return base, other


# ------------------------------------------------------------ non-cavitation

@dataclass
class CavitationStudy:
    verdict: en.CavitationVerdict
    estimate: en.ExistenceEstimate
    h0: float


def noncavitation_study(n: int = 256, depth: float = 0.2, u_amplitude: float = 0.01, s: float = 2.6,
                        C1: float = 1.0, C2: float = 10.0, dt: float = 1e-3, beta: float = 1.0,
                        stride: int = 5) -> CavitationStudy:
    """Gaussian depression with ``min(1 + eta0) = 1 - depth``, run up to ``T2``."""
    grid = sp.GridSpec.create(n)
    model = Boussinesq1D(grid, beta)
    s0 = model.band_limit(gaussian(grid, -depth, grid.period[0] / 16, u_amplitude))
    h0 = s0.min_depth
    est = en.existence_time(sp.sobolev_norm(grid, s0.eta, s), sp.sobolev_norm(grid, s0.u, s + 0.5),
                            h0, C1, C2)
    states = sample_run(model, s0, dt, est.T2, stride)
    verdict = en.noncavitation_monitor([st.t for st in states], [st.min_depth for st in states],
                                       h0, horizon=est.T2)
    return CavitationStudy(verdict, est, h0)


# ------------------------------------------------------------ continuity of flow

def rough_profile(grid: sp.GridSpec, decay: float = 3.2, seed: int = 7, amplitude: float = 0.1,
                  band: int | None = None):
    """Random-phase profile with ``|m|^{-decay}`` spectrum, scaled to ``max|f| = amplitude``.

    Modes ``1 <= m <= band`` are populated; the default is the dealiased band.
    """
    n = grid.n[0]
    rng = np.random.Generator(np.random.PCG64(seed))
    top = int(math.ceil(n / 3)) - 1 if band is None else band
    m = np.arange(1, top + 1)
    coef = np.zeros(n // 2 + 1, dtype=complex)
    coef[m] = m.astype(float) ** -decay * np.exp(1j * rng.uniform(0, 2 * math.pi, m.size))
    f = sp.inverse(grid, coef)
    return amplitude * f / np.max(np.abs(f))


def mollify(grid: sp.GridSpec, f: np.ndarray, eps: float) -> np.ndarray:
    return sp.inverse(grid, np.exp(-(eps * grid.lattice.kmod) ** 2) * sp.forward(grid, f))


def continuity_of_flow(n: int = 256, eps_levels=(0.2, 0.1, 0.05), t_end: float = 0.5,
                       dt: float = 1e-3, beta: float = 1.0) -> list[float]:
    """``H^1 x H^{3/2}`` distance at ``t_end`` between mollified and unmollified solutions."""
    grid = sp.GridSpec.create(n)
    model = Boussinesq1D(grid, beta)
    eta0 = rough_profile(grid)
    u0 = rough_profile(grid, seed=11, amplitude=0.05)
    n_steps = round(t_end / dt)

    def solve(eta, u):
        w, _ = integrate(model, model.to_spectral(State1D(eta, u)), 0.0, t_end / n_steps, n_steps)
        return w

    ref = solve(eta0, u0)
    out = []
    for eps in eps_levels:
        w = solve(mollify(grid, eta0, eps), mollify(grid, u0, eps))
        out.append(math.hypot(sp.sobolev_norm_hat(grid, w[0] - ref[0], 1.0),
                              sp.sobolev_norm_hat(grid, w[1] - ref[1], 1.5)))
    return out


# ------------------------------------------------------------ 2D

def curl_run_2d(n: int = 128, steps: int = 1000, dt: float = 2e-3, beta: float = 1.0,
                amplitude: float = 0.2, u_amplitude: float = 0.1) -> tuple[float, State2D]:
    """Max over the run of ``||curl u||_{L^2} / ||u||_{H^1}``."""
    from .model2d import step_2d

    grid = sp.GridSpec.create((n, n))
    model = Boussinesq2D(grid, beta)
    st = model.band_limit(gaussian_2d(grid, amplitude, grid.period[0] / 10, u_amplitude))
    worst = 0.0
    for i in range(steps):
        st = step_2d(model, st, dt)
        if (i + 1) % 100 == 0 or i + 1 == steps:
            worst = max(worst, curl_norm(grid, st.u1, st.u2) / velocity_norm(grid, st.u1, st.u2, 1.0))
    return worst, st
