"""Periodic grids, Fourier transforms and Fourier-multiplier operators.

Normalization convention used throughout the package: the forward
transform carries a factor ``1/n`` per axis, so ``fhat[0]`` is the mean of
the field, and every norm carries the measure of the domain (``L`` in 1D,
``L1*L2`` in 2D). With this choice the discrete norms converge to the
continuum ones as the resolution grows, e.g.

    ||f||_{H^s}^2 = |Omega| * sum_k (1 + |k|^2)^s |fhat(k)|^2.

Symbol conventions: ``sgn(0) = 0`` (so ``M(0) = 0``), ``K(0) = 1`` by
continuity, Riesz symbols vanish at ``k = 0``, and odd (imaginary) symbols
are set to zero on the Nyquist frequency of the axis they act on so that
real fields stay real.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

#: imaginary residue allowed after a multiplier round trip, relative to max|f|
ROUNDTRIP_TOL = 1e-12


class SymbolParityError(ValueError):
    """A multiplier produced a complex field from a real one."""


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid on ``[0, L1) x ... x [0, Ld)``."""

    n: tuple[int, ...]
    period: tuple[float, ...]

    def __post_init__(self):
        if len(self.n) not in (1, 2) or len(self.n) != len(self.period):
            raise ValueError("grid must be 1D or 2D with one period per axis")
        for n in self.n:
            if n < 8 or n % 2:
                raise ValueError(f"points per axis must be even and >= 8, got {n}")
        for L in self.period:
            if not L > 0:
                raise ValueError(f"period must be positive, got {L}")

    @classmethod
    def create(cls, n: int | Sequence[int], period: float | Sequence[float] = 2 * np.pi,
               dim: int | None = None) -> "GridSpec":
        if dim is None:
            dim = len(n) if isinstance(n, (tuple, list)) else 1
        ns = tuple(int(v) for v in n) if isinstance(n, (tuple, list)) else (int(n),) * dim
        Ls = (tuple(float(v) for v in period) if isinstance(period, (tuple, list))
              else (float(period),) * dim)
        return cls(ns, Ls)

    @property
    def dim(self) -> int:
        return len(self.n)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.n

    @property
    def size(self) -> int:
        return math.prod(self.n)

    @property
    def measure(self) -> float:
        return math.prod(self.period)

    @property
    def cell(self) -> float:
        return self.measure / self.size

    def axis_wavenumbers(self, axis: int) -> np.ndarray:
        """Full symmetric layout ``2*pi*m/L``, m = 0, 1, ..., n/2-1, -n/2, ..., -1."""
        n, L = self.n[axis], self.period[axis]
        return 2 * np.pi * np.fft.fftfreq(n, d=L / n)

    def coordinates(self) -> tuple[np.ndarray, ...]:
        axes = [np.arange(n) * (L / n) for n, L in zip(self.n, self.period)]
        return tuple(np.meshgrid(*axes, indexing="ij"))

    @cached_property
    def lattice(self) -> "Lattice":
        """Wavenumbers on the real-FFT half lattice (last axis non-negative)."""
        return Lattice.build(self, half=True)

    @cached_property
    def full_lattice(self) -> "Lattice":
        return Lattice.build(self, half=False)


@dataclass(frozen=True)
class Lattice:
    """Broadcastable wavenumber arrays on a (half or full) spectral lattice.

    ``k`` holds the true wavenumbers per axis; ``kodd`` is the same with the
    Nyquist entry of that axis zeroed and must be used in odd symbols.
    """

    k: tuple[np.ndarray, ...]
    kodd: tuple[np.ndarray, ...]
    kmod: np.ndarray
    weight: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, grid: GridSpec, half: bool) -> "Lattice":
        k1d, kodd1d = [], []
        for axis in range(grid.dim):
            n, L = grid.n[axis], grid.period[axis]
            if half and axis == grid.dim - 1:
                k = 2 * np.pi * np.fft.rfftfreq(n, d=L / n)
                nyq = -1
            else:
                k = grid.axis_wavenumbers(axis)
                nyq = n // 2
            ko = k.copy()
            ko[nyq] = 0.0
            k1d.append(k)
            kodd1d.append(ko)
        k = tuple(np.meshgrid(*k1d, indexing="ij", sparse=True))
        kodd = tuple(np.meshgrid(*kodd1d, indexing="ij", sparse=True))
        kmod = np.sqrt(sum(kk**2 for kk in k))
        shape = kmod.shape
        if half:
            # half-spectrum columns other than 0 and Nyquist stand for two modes
            w = np.full(shape[-1], 2.0)
            w[0] = 1.0
            if grid.n[-1] % 2 == 0:
                w[-1] = 1.0
            weight = np.broadcast_to(w, shape)
        else:
            weight = np.ones(shape)
        return cls(k, kodd, kmod, weight)


# ---------------------------------------------------------------- transforms

def _axes(grid: GridSpec) -> tuple[int, ...]:
    # trailing axes, so stacks of fields transform in one call
    return tuple(range(-grid.dim, 0))


def forward(grid: GridSpec, f: np.ndarray) -> np.ndarray:
    """Real-to-half-spectrum transform with ``1/n`` per axis."""
    return np.fft.rfftn(f, s=grid.shape, axes=_axes(grid)) / grid.size


def inverse(grid: GridSpec, fh: np.ndarray) -> np.ndarray:
    return np.fft.irfftn(fh * grid.size, s=grid.shape, axes=_axes(grid))


def forward_full(grid: GridSpec, f: np.ndarray) -> np.ndarray:
    return np.fft.fftn(f, s=grid.shape, axes=_axes(grid)) / grid.size


def inverse_full(grid: GridSpec, fh: np.ndarray) -> np.ndarray:
    return np.fft.ifftn(fh * grid.size, s=grid.shape, axes=_axes(grid))


# ------------------------------------------------------------------- symbols

def sym_K(kmod, beta: float = 1.0):
    """``tanh|k|/|k| * (1 + beta k^2)`` with value 1 at the origin."""
    kmod = np.abs(np.asarray(kmod, dtype=float))
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(kmod > 0, np.tanh(kmod) / np.where(kmod > 0, kmod, 1.0), 1.0)
    return ratio * (1.0 + beta * kmod**2)


def sym_W(kmod, beta: float = 1.0):
    return np.sqrt(sym_K(kmod, beta))


def _tanh_minus_one(kmod):
    # tanh(x) - 1 without cancellation for large x
    e = np.exp(-2.0 * kmod)
    return -2.0 * e / (1.0 + e)


def sym_M(k):
    """``i (tanh k - sgn k)``, zero at ``k = 0``."""
    k = np.asarray(k, dtype=float)
    return 1j * np.sign(k) * _tanh_minus_one(np.abs(k)) * (k != 0)


def sym_Mtilde(kmod):
    """``tanh|k| - 1`` for the 2D reformulation."""
    return _tanh_minus_one(np.abs(np.asarray(kmod, dtype=float)))


def sym_bessel(kmod, s: float):
    return (1.0 + np.asarray(kmod, dtype=float) ** 2) ** (s / 2.0)


def sym_riesz_potential(kmod, alpha: float):
    """``|k|^alpha``; the zero mode is annihilated for every alpha."""
    kmod = np.asarray(kmod, dtype=float)
    safe = np.where(kmod > 0, kmod, 1.0)
    return np.where(kmod > 0, safe**alpha, 0.0)


def bessel_riesz_sup(kmax: float) -> float:
    """max over 0 <= |k| <= kmax of |k|((1+k^2)^{1/2} - |k|); tends to 1/2."""
    # the function is increasing, so the max sits at kmax
    return kmax / (math.sqrt(1.0 + kmax**2) + kmax)


@dataclass(frozen=True)
class MultiplierSymbol:
    """A Fourier multiplier ``name`` with symbol ``fn(lattice) -> array``."""

    name: str
    fn: Callable[[Lattice], np.ndarray]
    parity: str = "even-real"  # or "odd-imaginary", "general"

    def __call__(self, lattice: Lattice) -> np.ndarray:
        return self.fn(lattice)


def identity() -> MultiplierSymbol:
    return MultiplierSymbol("I", lambda lat: np.ones_like(lat.kmod))


def bessel(s: float) -> MultiplierSymbol:
    return MultiplierSymbol(f"J^{s:g}", lambda lat: sym_bessel(lat.kmod, s))


def riesz_potential(alpha: float) -> MultiplierSymbol:
    return MultiplierSymbol(f"D^{alpha:g}", lambda lat: sym_riesz_potential(lat.kmod, alpha))


def derivative(axis: int = 0) -> MultiplierSymbol:
    return MultiplierSymbol(f"d{axis}", lambda lat: 1j * lat.kodd[axis], "odd-imaginary")


def hilbert() -> MultiplierSymbol:
    return MultiplierSymbol("H", lambda lat: -1j * np.sign(lat.kodd[0]), "odd-imaginary")


def riesz_transform(axis: int) -> MultiplierSymbol:
    def fn(lat):
        safe = np.where(lat.kmod > 0, lat.kmod, 1.0)
        return np.where(lat.kmod > 0, -1j * lat.kodd[axis] / safe, 0.0)
    return MultiplierSymbol(f"R{axis + 1}", fn, "odd-imaginary")


def dispersion_K(beta: float = 1.0) -> MultiplierSymbol:
    return MultiplierSymbol("K", lambda lat: sym_K(lat.kmod, beta))


def whitham_W(beta: float = 1.0) -> MultiplierSymbol:
    return MultiplierSymbol("W", lambda lat: sym_W(lat.kmod, beta))


def multiplier_M() -> MultiplierSymbol:
    return MultiplierSymbol("M", lambda lat: sym_M(lat.kodd[0]), "odd-imaginary")


def multiplier_Mtilde() -> MultiplierSymbol:
    return MultiplierSymbol("Mtilde", lambda lat: sym_Mtilde(lat.kmod))


def compose(*symbols: MultiplierSymbol) -> MultiplierSymbol:
    """Product of symbols, i.e. the composition of the operators."""
    def fn(lat):
        out = np.ones_like(lat.kmod, dtype=complex)
        for sym in symbols:
            out = out * sym(lat)
        return out
    n_odd = sum(s.parity == "odd-imaginary" for s in symbols)
    general = any(s.parity == "general" for s in symbols)
    parity = "general" if general else ("odd-imaginary" if n_odd % 2 else "even-real")
    return MultiplierSymbol("*".join(s.name for s in symbols), fn, parity)


def apply_multiplier(sym: MultiplierSymbol, grid: GridSpec, f: np.ndarray) -> np.ndarray:
    """Apply ``sym(D)`` to the real field ``f``.

    Works on the full lattice so that a symbol that breaks conjugate symmetry
    is detected instead of being silently projected away.
    """
    fh = forward_full(grid, f)
    g = inverse_full(grid, sym(grid.full_lattice) * fh)
    scale = max(float(np.max(np.abs(f))), float(np.max(np.abs(g.real))))
    residue = float(np.max(np.abs(g.imag)))
    if residue > ROUNDTRIP_TOL * scale:
        raise SymbolParityError(f"{sym.name}: imaginary residue {residue:.3e}")
    return g.real


# --------------------------------------------------------------------- norms

def sobolev_norm_hat(grid: GridSpec, fh: np.ndarray, s: float) -> float:
    lat = grid.lattice
    total = np.sum(lat.weight * (1.0 + lat.kmod**2) ** s * np.abs(fh) ** 2)
    return math.sqrt(grid.measure * float(total))


def sobolev_norm(grid: GridSpec, f: np.ndarray, s: float) -> float:
    """``||J^s f||_{L^2}`` evaluated exactly in symbol space."""
    return sobolev_norm_hat(grid, forward(grid, f), s)


def seminorm_hat(grid: GridSpec, fh: np.ndarray, symbol: np.ndarray) -> float:
    """``||m(D) f||_{L^2}`` for a symbol array on the half lattice."""
    lat = grid.lattice
    return math.sqrt(grid.measure * float(np.sum(lat.weight * np.abs(symbol * fh) ** 2)))


def lp_norm(grid: GridSpec, f: np.ndarray, p: float) -> float:
    """Grid-quadrature ``L^p`` norm; ``p = inf`` is the grid maximum."""
    a = np.abs(np.asarray(f, dtype=float))
    if math.isinf(p):
        return float(a.max()) if a.size else 0.0
    if p not in (1, 2, 4):
        raise ValueError(f"unsupported exponent p={p}")
    return float((np.sum(a**p) * grid.cell) ** (1.0 / p))


def integrate(grid: GridSpec, f: np.ndarray) -> float:
    return float(np.sum(f) * grid.cell)


# ------------------------------------------------------------- dealiasing

def dealias_mask(grid: GridSpec) -> np.ndarray:
    """2/3-rule mask on the half lattice: keep integer frequencies |m| < n/3 per axis."""
    masks = []
    for axis in range(grid.dim):
        n = grid.n[axis]
        if axis == grid.dim - 1:
            m = np.arange(n // 2 + 1)
        else:
            m = np.abs(np.fft.fftfreq(n, d=1.0 / n))
        masks.append(m < n / 3.0)
    out = masks[0]
    for m in masks[1:]:
        out = np.logical_and.outer(out, m)
    return out


def project_band(fh: np.ndarray, mask: np.ndarray | None) -> np.ndarray:
    return fh if mask is None else fh * mask


def oversample(grid: GridSpec, f: np.ndarray, factor: int) -> np.ndarray:
    """Trigonometric interpolation of a 1D field onto a ``factor``-times finer grid."""
    if grid.dim != 1:
        raise ValueError("oversampling is implemented for 1D fields")
    n = grid.n[0]
    fh = np.fft.rfft(f) / n
    big = np.zeros(factor * n // 2 + 1, dtype=complex)
    big[: n // 2 + 1] = fh
    # split the Nyquist mode between +-n/2 to keep the interpolant real and symmetric
    big[n // 2] *= 0.5
    return np.fft.irfft(big * factor * n, n=factor * n)
