"""Two-dimensional system with curl-free velocity.

Reformulated surface equation (``Mt(k) = tanh|k| - 1``, Riesz transforms
``R_j``):

    eta_t = (Mt(D) + 1)(1 - beta Lap)(R_1 u_1 + R_2 u_2) - div(eta u)

evaluated through the split ``Mt (1 - beta Lap) R.u + R.u - beta D^1 div u``,
which uses ``R_j Lap = D^1 d_j``. The velocity equations carry the gradient
of ``eta``:

    u_j,t = -d_j eta - 1/2 d_j |u|^2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import spectral as sp
from .integrators import NumericalBlowupError, advance


@dataclass(frozen=True)
class State2D:
    eta: np.ndarray
    u1: np.ndarray
    u2: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        if not (self.eta.shape == self.u1.shape == self.u2.shape):
            raise ValueError("eta, u1, u2 must live on the same grid")

    @property
    def min_depth(self) -> float:
        return float(np.min(1.0 + self.eta))


def _helmholtz_grad(lat: sp.Lattice, u1h, u2h):
    k1, k2 = lat.kodd
    kk = k1**2 + k2**2
    safe = np.where(kk > 0, kk, 1.0)
    proj = (k1 * u1h + k2 * u2h) / safe
    # modes with kodd = 0 (mean, Nyquist corner) pass through unchanged
    keep = kk == 0
    return np.where(keep, u1h, k1 * proj), np.where(keep, u2h, k2 * proj)


def project_curl_free(grid: sp.GridSpec, u1: np.ndarray, u2: np.ndarray):
    """Gradient part of the Helmholtz decomposition; the mean passes through."""
    a, b = _helmholtz_grad(grid.lattice, sp.forward(grid, u1), sp.forward(grid, u2))
    return sp.inverse(grid, a), sp.inverse(grid, b)


def curl(grid: sp.GridSpec, u1: np.ndarray, u2: np.ndarray) -> np.ndarray:
    k1, k2 = grid.lattice.kodd
    return sp.inverse(grid, 1j * k1 * sp.forward(grid, u2) - 1j * k2 * sp.forward(grid, u1))


def curl_norm(grid: sp.GridSpec, u1: np.ndarray, u2: np.ndarray) -> float:
    return sp.sobolev_norm(grid, curl(grid, u1, u2), 0.0)


def velocity_norm(grid: sp.GridSpec, u1, u2, s: float) -> float:
    return float(np.hypot(sp.sobolev_norm(grid, u1, s), sp.sobolev_norm(grid, u2, s)))


class Boussinesq2D:
    """Spectral operators for the 2D system; state ``w = [eta_hat, u1_hat, u2_hat]``."""

    def __init__(self, grid: sp.GridSpec, beta: float = 1.0, dealias: bool = True,
                 linear_only: bool = False):
        if grid.dim != 2:
            raise ValueError("Boussinesq2D needs a 2D grid")
        if not beta > 0:
            raise ValueError("beta must be positive")
        self.grid = grid
        self.beta = beta
        self.linear_only = linear_only
        lat = grid.lattice
        self.lat = lat
        self.ik1 = 1j * lat.kodd[0]
        self.ik2 = 1j * lat.kodd[1]
        self.kmod = lat.kmod
        self.K = sp.sym_K(lat.kmod, beta)
        self.Mt = sp.sym_Mtilde(lat.kmod)
        safe = np.where(lat.kmod > 0, lat.kmod, 1.0)
        self.R1 = np.where(lat.kmod > 0, -self.ik1 / safe, 0.0)
        self.R2 = np.where(lat.kmod > 0, -self.ik2 / safe, 0.0)
        self.kodd2 = lat.kodd[0] ** 2 + lat.kodd[1] ** 2
        self.omega = np.sqrt(self.kodd2 * self.K)
        self.inv_kodd2 = np.where(self.kodd2 > 0, 1.0, 0.0) / np.where(self.kodd2 > 0, self.kodd2, 1.0)
        self.mask = sp.dealias_mask(grid) if dealias else None
        self._cache: dict[float, tuple] = {}

    def to_spectral(self, state: State2D) -> np.ndarray:
        return sp.forward(self.grid, np.stack([state.eta, state.u1, state.u2]))

    def to_physical(self, w: np.ndarray, t: float = 0.0) -> State2D:
        g = self.grid
        return State2D(sp.inverse(g, w[0]), sp.inverse(g, w[1]), sp.inverse(g, w[2]), t)

    def band_limit(self, state: State2D) -> State2D:
        if self.mask is None:
            return state
        return self.to_physical(self.to_spectral(state) * self.mask, state.t)

    def project(self, w: np.ndarray) -> np.ndarray:
        a, b = _helmholtz_grad(self.lat, w[1], w[2])
        return np.stack([w[0], a, b])

    def _physical(self, fh):
        return sp.inverse(self.grid, sp.project_band(fh, self.mask))

    def _hat(self, f):
        return sp.project_band(sp.forward(self.grid, f), self.mask)

    def linear(self, w: np.ndarray) -> np.ndarray:
        eh, u1h, u2h = w
        div = self.ik1 * u1h + self.ik2 * u2h
        return np.stack([-self.K * div, -self.ik1 * eh, -self.ik2 * eh])

    def nonlinear(self, w: np.ndarray) -> np.ndarray:
        if self.linear_only:
            return np.zeros_like(w)
        eta, u1, u2 = self._physical(w)
        flux1, flux2, q = self._hat(np.stack([eta * u1, eta * u2, 0.5 * (u1 * u1 + u2 * u2)]))
        return np.stack([-(self.ik1 * flux1 + self.ik2 * flux2), -self.ik1 * q, -self.ik2 * q])

    def rhs_hat(self, w: np.ndarray) -> np.ndarray:
        """Right-hand side through the Riesz/``Mt`` split."""
        eh, u1h, u2h = w
        riesz = self.R1 * u1h + self.R2 * u2h
        div = self.ik1 * u1h + self.ik2 * u2h
        lap = self.kmod**2
        d_eta = (self.Mt * (1.0 + self.beta * lap) * riesz
                 + riesz
                 - self.beta * self.kmod * div)
        nl = self.nonlinear(w)
        return np.stack([d_eta + nl[0], -self.ik1 * eh + nl[1], -self.ik2 * eh + nl[2]])

    def rhs_direct_hat(self, w: np.ndarray) -> np.ndarray:
        """``-K(D) div u - div(eta u)``; the cross-check path."""
        return self.linear(w) + self.nonlinear(w)

    def rhs(self, state: State2D):
        if not all(np.all(np.isfinite(f)) for f in (state.eta, state.u1, state.u2)):
            raise NumericalBlowupError(state.t)
        d = self.rhs_hat(self.to_spectral(state))
        return tuple(sp.inverse(self.grid, x) for x in d)

    def rhs_direct(self, state: State2D):
        d = self.rhs_direct_hat(self.to_spectral(state))
        return tuple(sp.inverse(self.grid, x) for x in d)

    def propagate(self, w: np.ndarray, h: float) -> np.ndarray:
        """Exact linear flow: the (eta, div u) block rotates at ``|k| sqrt(K)``,
        the solenoidal part of ``u`` is frozen."""
        c, s_grad, sK, cm1_inv = self._coeffs(h)
        eh, u1h, u2h = w
        d0 = self.ik1 * u1h + self.ik2 * u2h
        # gradient part of u follows its divergence: u_grad = -ik d / |k|^2
        corr = cm1_inv * d0 + s_grad * eh
        return np.stack([c * eh - sK * d0, u1h - self.ik1 * corr, u2h - self.ik2 * corr])

    def _coeffs(self, h: float):
        cached = self._cache.get(h)
        if cached is None:
            c = np.cos(self.omega * h)
            with np.errstate(invalid="ignore", divide="ignore"):
                s = np.where(self.omega > 0, np.sin(self.omega * h) / self.omega, h)
            cached = (c, s * (self.kodd2 > 0), s * self.K, (c - 1.0) * self.inv_kodd2)
            if len(self._cache) > 8:
                self._cache.clear()
            self._cache[h] = cached
        return cached

    def mass(self, state: State2D) -> float:
        return sp.integrate(self.grid, state.eta)

    def hamiltonian(self, state: State2D) -> float:
        """``1/2 int(u.K(D)u + eta^2 + eta |u|^2)``."""
        g = self.grid
        wgt = g.lattice.weight * self.K
        quad = g.measure * float(sum(np.sum(wgt * np.abs(sp.forward(g, f)) ** 2)
                                     for f in (state.u1, state.u2)))
        rest = sp.integrate(g, state.eta**2 + state.eta * (state.u1**2 + state.u2**2))
        return 0.5 * (quad + rest)


def rhs_2d(grid: sp.GridSpec, state: State2D, beta: float = 1.0, dealias: bool = True):
    return Boussinesq2D(grid, beta, dealias).rhs(state)


def step_2d(model: Boussinesq2D, state: State2D, dt: float, scheme: str = "IFRK4") -> State2D:
    """One step followed by re-projection onto curl-free velocities."""
    w = model.project(advance(model, model.to_spectral(state), dt, scheme))
    if not np.all(np.isfinite(w)):
        raise NumericalBlowupError(state.t + dt)
    return model.to_physical(w, state.t + dt)


def gaussian_2d(grid: sp.GridSpec, amplitude: float, width: float,
                u_amplitude: float = 0.0) -> State2D:
    """Gaussian hump with curl-free velocity ``u = b grad(bump) * width``."""
    x1, x2 = grid.coordinates()
    L1, L2 = grid.period
    r2 = (x1 - L1 / 2) ** 2 + (x2 - L2 / 2) ** 2
    bump = np.exp(-r2 / width**2)
    # gradient of the bump, scaled so that max|u| ~ u_amplitude
    g1 = -2 * (x1 - L1 / 2) / width * bump
    g2 = -2 * (x2 - L2 / 2) / width * bump
    return State2D(amplitude * bump, u_amplitude * g1, u_amplitude * g2, 0.0)


def plane_wave_2d(grid: sp.GridSpec, mode: int, eps: float, beta: float = 1.0,
                  t: float = 0.0) -> State2D:
    """Linear plane wave travelling along ``x1``."""
    x1, _ = grid.coordinates()
    k = 2 * np.pi * mode / grid.period[0]
    K = float(sp.sym_K(k, beta))
    phase = k * x1 - k * np.sqrt(K) * t
    return State2D(eps * np.cos(phase), eps / np.sqrt(K) * np.cos(phase),
                   np.zeros_like(x1), t)
