"""Modified energies, coercivity bounds and run monitors.

For a state ``(eta, u)`` and regularity ``s`` the modified energy is

    E_s = 1/2 ||eta||_{H^s}^2 + 1/2 ||u||_{H^{s+1/2}}^2 + 1/2 int eta (J^s u)^2,

bracketed under ``h0t - 1 <= eta <= h1`` by

    1/2 (||eta||^2 + c0 ||u||^2) <= E_s <= 1/2 (||eta||^2 + (1 + h1) ||u||^2),
    c0 = min(h0t, 1 - 2^{-1/2}).

Here ``h0t`` is the measured ``min(1 + eta)`` and ``h1`` the measured
``max(eta, 0)`` of the state being evaluated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import spectral as sp
from .integrators import NumericalBlowupError
from .model1d import State1D
from .model2d import State2D

#: inf over |k| >= 1 of 1 - (1 + k^2)^{-1/2}
C0_TILDE = 1.0 - 2.0**-0.5


class InsufficientDataError(ValueError):
    pass


@dataclass
class EnergyReport:
    t: float
    E_s: float
    Hs_eta: float
    Hs12_u: float
    cubic: float
    lower: float
    upper: float
    min_depth: float
    ratio: float = float("nan")

    @property
    def naive(self) -> float:
        """Energy without the cubic correction."""
        return self.E_s - self.cubic

    @property
    def sandwich_ok(self) -> bool:
        return self.lower <= self.E_s <= self.upper


def coercivity_constant(h0_tilde: float) -> float:
    return min(h0_tilde, C0_TILDE)


def _report(t, eta_norm, u_norm, cubic, eta_min, eta_max) -> EnergyReport:
    E = 0.5 * eta_norm**2 + 0.5 * u_norm**2 + cubic
    h0t = 1.0 + eta_min
    h1 = max(eta_max, 0.0)
    c0 = coercivity_constant(h0t)
    lower = 0.5 * (eta_norm**2 + c0 * u_norm**2)
    upper = 0.5 * (eta_norm**2 + (1.0 + h1) * u_norm**2)
    for v in (E, eta_norm, u_norm, cubic):
        if not math.isfinite(v):
            raise NumericalBlowupError(t, "non-finite energy")
    return EnergyReport(t, E, eta_norm, u_norm, cubic, lower, upper, h0t)


def modified_energy_1d(grid: sp.GridSpec, state: State1D, s: float) -> EnergyReport:
    if not s > 2:
        raise ValueError(f"modified energy needs s > 2, got {s}")
    eh, uh = sp.forward(grid, state.eta), sp.forward(grid, state.u)
    Js_u = sp.inverse(grid, sp.sym_bessel(grid.lattice.kmod, s) * uh)
    cubic = 0.5 * sp.integrate(grid, state.eta * Js_u**2)
    return _report(state.t, sp.sobolev_norm_hat(grid, eh, s), sp.sobolev_norm_hat(grid, uh, s + 0.5),
                   cubic, float(state.eta.min()), float(state.eta.max()))


def modified_energy_2d(grid: sp.GridSpec, state: State2D, s: float) -> EnergyReport:
    if not s > 3:
        raise ValueError(f"2D modified energy needs s > 3, got {s}")
    Js = sp.sym_bessel(grid.lattice.kmod, s)
    eh = sp.forward(grid, state.eta)
    u1h, u2h = sp.forward(grid, state.u1), sp.forward(grid, state.u2)
    J1, J2 = sp.inverse(grid, Js * u1h), sp.inverse(grid, Js * u2h)
    cubic = 0.5 * sp.integrate(grid, state.eta * (J1**2 + J2**2))
    u_norm = math.hypot(sp.sobolev_norm_hat(grid, u1h, s + 0.5), sp.sobolev_norm_hat(grid, u2h, s + 0.5))
    return _report(state.t, sp.sobolev_norm_hat(grid, eh, s), u_norm, cubic,
                   float(state.eta.min()), float(state.eta.max()))


# ------------------------------------------------------------ differences

@dataclass
class DifferenceEnergy:
    value: float
    lower: float
    upper: float
    eta_H1: float
    u_H32: float


def difference_energy(grid: sp.GridSpec, s1: State1D, s2: State1D) -> DifferenceEnergy:
    """Energy of ``(eta1 - eta2, u1 - u2)`` weighted by ``eta1``.

    2E = ||de||^2 + ||de_x||^2 + ||du||^2 + ||D^{1/2} du_x||^2 + int eta1 (du_x)^2
    """
    if s1.eta.shape != s2.eta.shape or s1.eta.shape != grid.shape:
        raise ValueError("states live on different grids")
    lat = grid.lattice
    de = sp.forward(grid, s1.eta - s2.eta)
    du = sp.forward(grid, s1.u - s2.u)
    k = lat.kmod
    eta_part = sp.seminorm_hat(grid, de, np.sqrt(1.0 + k**2)) ** 2
    u_part = sp.seminorm_hat(grid, du, np.sqrt(1.0 + k**3)) ** 2
    du_x = sp.inverse(grid, 1j * lat.kodd[0] * du)
    cubic = sp.integrate(grid, s1.eta * du_x**2)
    value = 0.5 * (eta_part + u_part + cubic)
    eta_H1 = sp.sobolev_norm_hat(grid, de, 1.0)
    u_H32 = sp.sobolev_norm_hat(grid, du, 1.5)
    c0 = coercivity_constant(1.0 + float(s1.eta.min()))
    h1 = max(float(s1.eta.max()), 0.0)
    return DifferenceEnergy(value, 0.5 * (eta_H1**2 + c0 * u_H32**2),
                            0.5 * (eta_H1**2 + (1.0 + h1) * u_H32**2), eta_H1, u_H32)


# ------------------------------------------------------------ existence time

@dataclass(frozen=True)
class ExistenceEstimate:
    T1: float
    T2: float
    T0: float
    C1: float
    C2: float
    h0: float


def existence_time(eta_norm: float, u_norm: float, h0: float,
                   C1: float = 1.0, C2: float = 10.0) -> ExistenceEstimate:
    """A-priori existence times from the data norms.

    ``eta_norm`` is ``||eta0||_{H^s}``, ``u_norm`` is ``||u0||_{H^{s+1/2}}``.
    ``T2`` is ``inf`` for ``u0 = 0``.
    """
    if not 0.0 < h0 < 1.0:
        raise ValueError(f"h0 must lie in (0, 1), got {h0}")
    if eta_norm < 0 or u_norm < 0 or C1 <= 0 or C2 <= 0:
        raise ValueError("norms must be non-negative and constants positive")
    data_sq = eta_norm**2 + u_norm**2
    T1 = math.log1p(1.0 / (1.0 + C1 * data_sq)) / C1
    T2 = math.inf if u_norm == 0 else h0 / (C2 * (1.0 + eta_norm) * u_norm)
    return ExistenceEstimate(T1, T2, min(T1, T2), C1, C2, h0)


# ----------------------------------------------------------------- monitors

def time_derivative(t: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Second-order finite differences; one-sided second-order at the ends."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(t) < 3:
        raise InsufficientDataError("need at least 3 samples to differentiate a series")
    return np.gradient(y, t, edge_order=2)


def growth_ratio(t, E) -> np.ndarray:
    """``|dE/dt| / (E + E^2)`` with 0/0 read as 0."""
    E = np.asarray(E, dtype=float)
    dE = np.abs(time_derivative(t, E))
    den = E + E**2
    out = np.zeros_like(E)
    pos = den > 0
    out[pos] = dE[pos] / den[pos]
    return out


@dataclass
class EnergyMonitorReport:
    sup_ratio: float
    sup_ratio_naive: float
    ratios: np.ndarray = field(repr=False)
    ratios_naive: np.ndarray = field(repr=False)


def energy_inequality_monitor(reports: list[EnergyReport]) -> EnergyMonitorReport:
    """Fill ``ratio`` on each report and return the sup for the modified and naive energies."""
    t = np.array([r.t for r in reports])
    E = np.array([r.E_s for r in reports])
    naive = np.array([r.naive for r in reports])
    ratios = growth_ratio(t, E)
    ratios_naive = growth_ratio(t, naive)
    for r, q in zip(reports, ratios):
        r.ratio = float(q)
    return EnergyMonitorReport(float(ratios.max()), float(ratios_naive.max()), ratios, ratios_naive)


@dataclass(frozen=True)
class CavitationVerdict:
    passed: bool
    floor: float
    horizon: float
    first_violation: float | None
    min_depth: float

    def describe(self) -> str:
        if self.passed:
            return f"pass: min(1+eta) = {self.min_depth:.6g} >= {self.floor:.6g} up to t = {self.horizon:.6g}"
        return f"fail: min(1+eta) < {self.floor:.6g} first at t = {self.first_violation:.17g}"


def noncavitation_monitor(times, min_depths, h0: float, horizon: float = math.inf) -> CavitationVerdict:
    """Check ``min(1 + eta(t)) >= h0 / 2`` for all recorded ``t <= horizon``."""
    times = np.asarray(times, dtype=float)
    depths = np.asarray(min_depths, dtype=float)
    floor = 0.5 * h0
    inside = times <= horizon
    bad = np.flatnonzero(inside & ~(depths >= floor))
    lowest = float(depths[inside].min()) if inside.any() else math.nan
    if bad.size:
        return CavitationVerdict(False, floor, horizon, float(times[bad[0]]), lowest)
    return CavitationVerdict(True, floor, horizon, None, lowest)
