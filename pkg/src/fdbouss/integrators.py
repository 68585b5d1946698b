"""Time steppers acting on stacked spectral state vectors.

A model exposes three maps on its spectral state ``w``:

* ``propagate(w, h)`` -- exact linear flow ``exp(h A) w``;
* ``linear(w)`` -- ``A w``;
* ``nonlinear(w)`` -- the remaining (dealiased) terms.

``ifrk4_step`` is the integrating-factor (Lawson) RK4 scheme: classical RK4
on ``v = exp(-tA) w``, rewritten so that only forward propagators appear.
"""

from __future__ import annotations

import numpy as np

SCHEMES = ("IFRK4", "RK4")


class NumericalBlowupError(FloatingPointError):
    """Non-finite values or runaway norms during a run."""

    def __init__(self, t: float, reason: str = "non-finite state"):
        super().__init__(f"numerical blow-up at t={t:.17g}: {reason}")
        self.t = t
        self.reason = reason


def ifrk4_step(model, w: np.ndarray, h: float) -> np.ndarray:
    half = 0.5 * h
    n0 = model.nonlinear(w)
    w_half = model.propagate(w, half)
    a = w_half + half * model.propagate(n0, half)
    n1 = model.nonlinear(a)
    b = w_half + half * n1
    n2 = model.nonlinear(b)
    c = model.propagate(w, h) + h * model.propagate(n2, half)
    n3 = model.nonlinear(c)
    return model.propagate(w + (h / 6.0) * n0, h) + (h / 6.0) * (
        model.propagate(2.0 * (n1 + n2), half) + n3)


def rk4_step(model, w: np.ndarray, h: float) -> np.ndarray:
    def f(v):
        return model.linear(v) + model.nonlinear(v)

    k1 = f(w)
    k2 = f(w + 0.5 * h * k1)
    k3 = f(w + 0.5 * h * k2)
    k4 = f(w + h * k3)
    return w + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def advance(model, w: np.ndarray, h: float, scheme: str = "IFRK4") -> np.ndarray:
    if scheme == "IFRK4":
        return ifrk4_step(model, w, h)
    if scheme == "RK4":
        return rk4_step(model, w, h)
    raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")


def rk4_stable(dt: float, omega_max: float) -> bool:
    """Stability guard for explicit RK4 on a purely oscillatory linear part."""
    return dt * omega_max <= 2.8
