"""One-dimensional full-dispersion Boussinesq system and Whitham equation.

The Boussinesq system is integrated in its reformulated form

    eta_t = -M(D)(1 - beta d_x^2) u + H u - beta H d_x^2 u - d_x(eta u)
    u_t   = -d_x eta - u u_x

where ``M(k) = i(tanh k - sgn k)`` and ``H`` is the Hilbert transform. The
linear part equals ``-K(D) d_x u`` with ``K(k) = tanh|k|/|k| (1 + beta k^2)``;
``rhs_direct`` evaluates that form and serves as an independent check.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import spectral as sp
from .integrators import NumericalBlowupError, advance, rk4_stable


@dataclass(frozen=True)
class State1D:
    eta: np.ndarray
    u: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        if self.eta.shape != self.u.shape:
            raise ValueError("eta and u must live on the same grid")

    @property
    def min_depth(self) -> float:
        return float(np.min(1.0 + self.eta))


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float
    t_end: float
    scheme: str = "IFRK4"
    dealias: str = "two-thirds"
    output_stride: int = 1

    def __post_init__(self):
        if not self.dt > 0 or not self.t_end > 0:
            raise ValueError("dt and t_end must be positive")
        if self.scheme not in ("IFRK4", "RK4"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.dealias not in ("two-thirds", "none"):
            raise ValueError(f"unknown dealias rule {self.dealias!r}")
        if self.output_stride < 1:
            raise ValueError("output_stride must be a positive integer")

    @property
    def n_steps(self) -> int:
        # a final partial step is avoided by shrinking dt slightly
        return max(1, int(np.ceil(self.t_end / self.dt - 1e-9)))

    @property
    def step_size(self) -> float:
        return self.t_end / self.n_steps


def max_frequency(grid: sp.GridSpec, beta: float) -> float:
    """Largest linear frequency ``|k| sqrt(K(|k|))`` on the grid."""
    kmax = float(np.max(grid.lattice.kmod))
    return kmax * float(np.sqrt(sp.sym_K(kmax, beta)))


def check_stability(grid: sp.GridSpec, cfg: IntegratorConfig, beta: float) -> None:
    if cfg.scheme == "RK4" and not rk4_stable(cfg.step_size, max_frequency(grid, beta)):
        omega = max_frequency(grid, beta)
        raise ValueError(
            f"RK4 unstable: dt*omega_max = {cfg.step_size * omega:.3f} > 2.8 "
            f"(omega_max = {omega:.4g}); reduce dt or use IFRK4")


class Boussinesq1D:
    """Spectral operators for the 1D system on a fixed grid.

    The state vector is ``w = [eta_hat, u_hat]`` on the real-FFT half lattice.
    """

    def __init__(self, grid: sp.GridSpec, beta: float = 1.0, dealias: bool = True,
                 linear_only: bool = False):
        if grid.dim != 1:
            raise ValueError("Boussinesq1D needs a 1D grid")
        if not beta > 0:
            raise ValueError("beta must be positive")
        self.grid = grid
        self.beta = beta
        self.linear_only = linear_only
        lat = grid.lattice
        k = lat.k[0]
        self.ik = 1j * lat.kodd[0]
        self.K = sp.sym_K(k, beta)
        self.M = sp.sym_M(lat.kodd[0])
        self.H = -1j * np.sign(lat.kodd[0])
        self.mask = sp.dealias_mask(grid) if dealias else None
        self.omega = np.abs(lat.kodd[0]) * np.sqrt(self.K)
        self._cache: dict[float, tuple] = {}

    # -- transforms -------------------------------------------------------
    def to_spectral(self, state: State1D) -> np.ndarray:
        return sp.forward(self.grid, np.stack([state.eta, state.u]))

    def to_physical(self, w: np.ndarray, t: float = 0.0) -> State1D:
        g = self.grid
        return State1D(sp.inverse(g, w[0]), sp.inverse(g, w[1]), t)

    def band_limit(self, state: State1D) -> State1D:
        """Project onto the dealiased band (no-op without dealiasing)."""
        if self.mask is None:
            return state
        return self.to_physical(self.to_spectral(state) * self.mask, state.t)

    def product(self, ah: np.ndarray, bh: np.ndarray) -> np.ndarray:
        g = self.grid
        ah = sp.project_band(ah, self.mask)
        bh = sp.project_band(bh, self.mask)
        return sp.project_band(sp.forward(g, sp.inverse(g, ah) * sp.inverse(g, bh)), self.mask)

    # -- right-hand sides --------------------------------------------------
    def linear(self, w: np.ndarray) -> np.ndarray:
        eh, uh = w
        return np.stack([-self.K * self.ik * uh, -self.ik * eh])

    def nonlinear(self, w: np.ndarray) -> np.ndarray:
        if self.linear_only:
            return np.zeros_like(w)
        eh, uh = w
        # u u_x written as (u^2/2)_x keeps the discrete mean of u exactly fixed
        return np.stack([-self.ik * self.product(eh, uh),
                         -0.5 * self.ik * self.product(uh, uh)])

    def rhs_hat(self, w: np.ndarray) -> np.ndarray:
        """Reformulated right-hand side, term by term."""
        eh, uh = w
        k2 = -(self.ik**2).real  # k^2 with Nyquist removed
        one_minus_dxx = 1.0 + self.beta * k2
        d_eta = (-self.M * one_minus_dxx * uh
                 + self.H * uh
                 - self.beta * self.H * (-k2) * uh)
        d_u = -self.ik * eh
        nl = self.nonlinear(w)
        return np.stack([d_eta + nl[0], d_u + nl[1]])

    def rhs_direct_hat(self, w: np.ndarray) -> np.ndarray:
        """Unreformulated form ``-K(D) u_x - (eta u)_x``; the cross-check path."""
        return self.linear(w) + self.nonlinear(w)

    def rhs(self, state: State1D) -> tuple[np.ndarray, np.ndarray]:
        if not (np.all(np.isfinite(state.eta)) and np.all(np.isfinite(state.u))):
            raise NumericalBlowupError(state.t)
        d = self.rhs_hat(self.to_spectral(state))
        return sp.inverse(self.grid, d[0]), sp.inverse(self.grid, d[1])

    def rhs_direct(self, state: State1D) -> tuple[np.ndarray, np.ndarray]:
        d = self.rhs_direct_hat(self.to_spectral(state))
        return sp.inverse(self.grid, d[0]), sp.inverse(self.grid, d[1])

    # -- linear propagator -------------------------------------------------
    def propagate(self, w: np.ndarray, h: float) -> np.ndarray:
        """``exp(hA)`` with ``A = [[0, -ik K], [-ik, 0]]`` per mode, in closed form."""
        c, sKik, sik = self._coeffs(h)
        eh, uh = w
        return np.stack([c * eh - sKik * uh, c * uh - sik * eh])

    def _coeffs(self, h: float):
        cached = self._cache.get(h)
        if cached is None:
            c = np.cos(self.omega * h)
            with np.errstate(invalid="ignore", divide="ignore"):
                s = np.where(self.omega > 0, np.sin(self.omega * h) / self.omega, h)
            cached = (c, s * self.K * self.ik, s * self.ik)
            if len(self._cache) > 8:
                self._cache.clear()
            self._cache[h] = cached
        return cached

    # -- conserved quantities ----------------------------------------------
    def mass(self, state: State1D) -> float:
        return sp.integrate(self.grid, state.eta)

    def momentum(self, state: State1D) -> float:
        return sp.integrate(self.grid, state.u)

    def hamiltonian(self, state: State1D) -> float:
        """``1/2 int(u K(D)u + eta^2 + eta u^2)``."""
        g = self.grid
        uh = sp.forward(g, state.u)
        quad = g.measure * float(np.sum(g.lattice.weight * self.K * np.abs(uh) ** 2))
        rest = sp.integrate(g, state.eta**2 + state.eta * state.u**2)
        return 0.5 * (quad + rest)

    def hamiltonian_rate(self, state: State1D) -> float:
        """``dH/dt`` by the chain rule along :meth:`rhs`."""
        d_eta, d_u = self.rhs(state)
        g = self.grid
        dH_du = sp.inverse(g, self.K * sp.forward(g, state.u)) + state.eta * state.u
        dH_deta = state.eta + 0.5 * state.u**2
        return sp.integrate(g, dH_du * d_u + dH_deta * d_eta)


class Whitham1D:
    """``u_t + W(D) u_x + u u_x = 0`` with ``W = sqrt(K)``; state ``w = [u_hat]``."""

    def __init__(self, grid: sp.GridSpec, beta: float = 1.0, dealias: bool = True,
                 linear_only: bool = False):
        if not beta >= 0:
            raise ValueError("beta must be non-negative")
        self.grid = grid
        self.beta = beta
        self.linear_only = linear_only
        lat = grid.lattice
        self.ik = 1j * lat.kodd[0]
        self.W = sp.sym_W(lat.k[0], beta)
        self.mask = sp.dealias_mask(grid) if dealias else None

    def to_spectral(self, u: np.ndarray) -> np.ndarray:
        return sp.forward(self.grid, u)[None, :]

    def to_physical(self, w: np.ndarray) -> np.ndarray:
        return sp.inverse(self.grid, w[0])

    def linear(self, w):
        return -self.W * self.ik * w

    def nonlinear(self, w):
        if self.linear_only:
            return np.zeros_like(w)
        g = self.grid
        uh = sp.project_band(w[0], self.mask)
        u = sp.inverse(g, uh)
        sq = sp.project_band(sp.forward(g, u * u), self.mask)
        return (-0.5 * self.ik * sq)[None, :]

    def propagate(self, w, h):
        return np.exp(-self.W * self.ik * h) * w

    def rhs(self, u: np.ndarray) -> np.ndarray:
        if not np.all(np.isfinite(u)):
            raise NumericalBlowupError(float("nan"))
        w = self.to_spectral(u)
        return self.to_physical(self.linear(w) + self.nonlinear(w))


def whitham_rhs(grid: sp.GridSpec, u: np.ndarray, beta: float = 1.0,
                dealias: bool = True) -> np.ndarray:
    return Whitham1D(grid, beta, dealias).rhs(u)


def rhs_1d(grid: sp.GridSpec, state: State1D, beta: float = 1.0,
           dealias: bool = True) -> tuple[np.ndarray, np.ndarray]:
    return Boussinesq1D(grid, beta, dealias).rhs(state)


def step(model: Boussinesq1D, state: State1D, cfg: IntegratorConfig) -> State1D:
    """One step of size ``cfg.step_size``."""
    h = cfg.step_size
    w = advance(model, model.to_spectral(state), h, cfg.scheme)
    if not np.all(np.isfinite(w)):
        raise NumericalBlowupError(state.t + h)
    return model.to_physical(w, state.t + h)


def integrate(model, w0: np.ndarray, t0: float, dt: float, n_steps: int,
              scheme: str = "IFRK4", callback=None, stride: int = 1) -> tuple[np.ndarray, float]:
    """Advance a spectral state ``n_steps`` times; ``callback(step, t, w)`` every ``stride``."""
    w, t = w0, t0
    if callback is not None:
        callback(0, t, w)
    for i in range(1, n_steps + 1):
        w = advance(model, w, dt, scheme)
        t = t0 + i * dt
        if not np.all(np.isfinite(w)):
            raise NumericalBlowupError(t)
        if callback is not None and (i % stride == 0 or i == n_steps):
            callback(i, t, w)
    return w, t


def evolve(model: Boussinesq1D, state: State1D, cfg: IntegratorConfig) -> State1D:
    check_stability(model.grid, cfg, model.beta)
    w, t = integrate(model, model.to_spectral(state), state.t, cfg.step_size,
                     cfg.n_steps, cfg.scheme)
    return model.to_physical(w, t)


# ---------------------------------------------------------------- initial data

def gaussian(grid: sp.GridSpec, amplitude: float, width: float,
             u_amplitude: float = 0.0) -> State1D:
    """``eta = a exp(-(x - L/2)^2 / sigma^2)``, ``u = b exp(...)``."""
    (x,) = grid.coordinates()
    L = grid.period[0]
    bump = np.exp(-((x - L / 2) ** 2) / width**2)
    return State1D(amplitude * bump, u_amplitude * bump, 0.0)


def plane_wave(grid: sp.GridSpec, mode: int, eps: float, beta: float = 1.0,
               t: float = 0.0) -> State1D:
    """Right-going linear wave ``eta = eps cos(kx - wt)``, ``u = eps/sqrt(K) cos(kx - wt)``."""
    (x,) = grid.coordinates()
    k = 2 * np.pi * mode / grid.period[0]
    K = float(sp.sym_K(k, beta))
    omega = k * np.sqrt(K)
    phase = k * x - omega * t
    return State1D(eps * np.cos(phase), eps / np.sqrt(K) * np.cos(phase), t)


def plane_wave_period(grid: sp.GridSpec, mode: int, beta: float = 1.0) -> float:
    k = 2 * np.pi * mode / grid.period[0]
    return 2 * np.pi / (k * float(np.sqrt(sp.sym_K(k, beta))))


def with_time(state: State1D, t: float) -> State1D:
    return replace(state, t=t)
