"""Empirical constants for the multiplier and commutator estimates.

Each ``*_ratio`` function returns LHS/RHS of one estimate for a given pair
of fields. ``run_lab`` draws randomized band-limited families, evaluates
every estimate over many trials and several grid sizes, and reports the
largest ratio seen, which is the measured implicit constant.

Random fields: ``f(x) = mean + sum_{m=1}^{band} m^{-decay} cos(2 pi m x / L + phi_m)``
with phases drawn from ``numpy.random.Generator(PCG64(seed))``. The field
does not depend on the grid size, so refinement studies compare the same
function at different resolutions.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import spectral as sp

#: denominators below this are treated as zero
RHS_FLOOR = 1e-14
#: numerators allowed when the denominator vanishes
LHS_TOL = 1e-10


class InconsistencyError(ArithmeticError):
    """RHS vanishes while LHS does not: an implementation bug, not a counterexample."""


@dataclass(frozen=True)
class RandomFieldSpec:
    seed: int
    n: int
    decay: float = 1.5
    band: int = 16
    mean: float = 0.0
    period: float = 2 * math.pi

    def __post_init__(self):
        if not self.decay > 0:
            raise ValueError("decay must be positive")
        if not 1 <= self.band <= self.n // 6:
            # keeps quadratic products free of aliasing under the 2/3 rule
            raise ValueError(f"band must lie in [1, n/6], got {self.band} for n={self.n}")

    @property
    def grid(self) -> sp.GridSpec:
        return sp.GridSpec.create(self.n, self.period)

    def field(self) -> np.ndarray:
        rng = np.random.Generator(np.random.PCG64(self.seed))
        phases = rng.uniform(0.0, 2 * math.pi, size=self.band)
        (x,) = self.grid.coordinates()
        m = np.arange(1, self.band + 1)
        amp = m.astype(float) ** -self.decay
        k = 2 * math.pi * m / self.period
        return self.mean + np.sum(amp[:, None] * np.cos(k[:, None] * x[None, :] + phases[:, None]), axis=0)


def _ratio(lhs: float, rhs: float) -> float:
    if rhs < RHS_FLOOR:
        if lhs > LHS_TOL:
            raise InconsistencyError(f"RHS = {rhs:.3e} but LHS = {lhs:.3e}")
        return 0.0
    return lhs / rhs


def _product_hat(grid, a, b):
    mask = sp.dealias_mask(grid)
    return sp.forward(grid, a * b) * mask


def _apply(grid, symbol, f):
    return sp.inverse(grid, symbol * sp.forward(grid, f))


def _l2_hat(grid, fh):
    return sp.sobolev_norm_hat(grid, fh, 0.0)


# -------------------------------------------------------------- estimates

def kato_ponce_terms(grid: sp.GridSpec, f, g, s: float) -> tuple[float, float]:
    """``||[J^s, f] g||_2`` and ``||f_x||_inf ||J^{s-1} g||_2 + ||J^s f||_2 ||g||_inf``."""
    if s < 1:
        raise ValueError("Kato-Ponce needs s >= 1")
    lat = grid.lattice
    Js = sp.sym_bessel(lat.kmod, s)
    Jsg = _apply(grid, Js, g)
    comm = Js * _product_hat(grid, f, g) - _product_hat(grid, f, Jsg)
    lhs = _l2_hat(grid, comm)
    fx = _apply(grid, 1j * lat.kodd[0], f)
    rhs = (sp.lp_norm(grid, fx, math.inf) * sp.sobolev_norm(grid, g, s - 1)
           + sp.sobolev_norm(grid, f, s) * sp.lp_norm(grid, g, math.inf))
    return lhs, rhs


def kato_ponce_ratio(grid, f, g, s: float) -> float:
    return _ratio(*kato_ponce_terms(grid, f, g, s))


def _riesz(grid, f, alpha):
    if alpha == 0:
        return np.asarray(f, dtype=float)
    return _apply(grid, sp.sym_riesz_potential(grid.lattice.kmod, alpha), f)


def frac_leibniz_terms(grid, f, g, sigma: float, sigma1: float, sigma2: float,
                       p: float = 2, p1: float = 4, p2: float = 4) -> tuple[float, float]:
    """``||D^s(fg) - f D^s g - g D^s f||_p`` and ``||D^{s1} f||_{p1} ||D^{s2} g||_{p2}``.

    ``sigma2 = 0`` is the endpoint clause, read with ``D^0 = Id`` (means kept).
    """
    if not (0 < sigma < 1 and abs(sigma1 + sigma2 - sigma) < 1e-12):
        raise ValueError("need sigma = sigma1 + sigma2 in (0, 1)")
    if not (0 <= sigma1 < sigma or (sigma1 == sigma and sigma2 == 0)):
        raise ValueError("sigma1 out of range")
    if sigma2 == 0 and not math.isinf(p2):
        raise ValueError("the sigma2 = 0 endpoint requires p2 = inf")
    Ds = sp.sym_riesz_potential(grid.lattice.kmod, sigma)
    prod = sp.inverse(grid, _product_hat(grid, f, g))
    defect = (_apply(grid, Ds, prod) - f * _apply(grid, Ds, g) - g * _apply(grid, Ds, f))
    lhs = sp.lp_norm(grid, defect, p)
    rhs = sp.lp_norm(grid, _riesz(grid, f, sigma1), p1) * sp.lp_norm(grid, _riesz(grid, g, sigma2), p2)
    return lhs, rhs


def frac_leibniz_ratio(grid, f, g, sigma, sigma1, sigma2, p=2, p1=4, p2=4) -> float:
    return _ratio(*frac_leibniz_terms(grid, f, g, sigma, sigma1, sigma2, p, p1, p2))


def dmp_commutator_terms(grid, a, f, s: float) -> tuple[float, float]:
    """``||[D^{1/2}, a] D^{1/2} f||_2`` and ``||a||_{H^s} ||f||_2``."""
    if not s > 1.5:
        raise ValueError("the D^{1/2} commutator estimate needs s > 3/2")
    kmod = grid.lattice.kmod
    half = sp.sym_riesz_potential(kmod, 0.5)
    fh = sp.forward(grid, f)
    Dh_f = sp.inverse(grid, half * fh)
    D1_f = sp.inverse(grid, sp.sym_riesz_potential(kmod, 1.0) * fh)
    comm = half * _product_hat(grid, a, Dh_f) - _product_hat(grid, a, D1_f)
    lhs = _l2_hat(grid, comm)
    rhs = sp.sobolev_norm(grid, a, s) * sp.sobolev_norm(grid, f, 0.0)
    return lhs, rhs


def dmp_commutator_ratio(grid, a, f, s: float) -> float:
    return _ratio(*dmp_commutator_terms(grid, a, f, s))


def multiplier_estimate_ratios(grid: sp.GridSpec, f, s: float,
                               oversampling: int = 4) -> tuple[float, float, float]:
    """``(r_M, r_Minf, r_BR)``; all zero for ``f = 0``.

    The sup norm in the numerator of ``r_Minf`` is taken on an
    ``oversampling``-times finer interpolation grid.
    """
    f = np.asarray(f, dtype=float)
    fh = sp.forward(grid, f)
    l2 = _l2_hat(grid, fh)
    linf = sp.lp_norm(grid, f, math.inf)
    if l2 == 0.0 and linf == 0.0:
        return 0.0, 0.0, 0.0
    lat = grid.lattice
    k = lat.kodd[0]
    M = sp.sym_M(k)
    r_M = sp.seminorm_hat(grid, fh, sp.sym_bessel(lat.kmod, s) * M) / l2
    lin = sp.inverse(grid, M * (1.0 + lat.k[0] ** 2) * fh)
    r_Minf = float(np.max(np.abs(sp.oversample(grid, lin, oversampling)))) / linf
    br = (sp.sym_bessel(lat.kmod, 1.0) - lat.kmod) * 1j * k
    r_BR = sp.seminorm_hat(grid, fh, br) / l2
    return r_M, r_Minf, r_BR


def multiplier_M_bound(grid: sp.GridSpec, s: float) -> float:
    """Grid maximum of ``(1 + k^2)^{s/2} e^{-|k|}``."""
    k = grid.lattice.kmod
    return float(np.max(sp.sym_bessel(k, s) * np.exp(-k)))


# --------------------------------------------------------------- the lab

@dataclass
class RatioReport:
    name: str
    trials: int
    max_ratio: float
    argmax_seed: int
    degenerate: int = 0
    refinement: list[tuple[int, float]] = field(default_factory=list)
    params: dict = field(default_factory=dict)
    bound: float | None = None
    violations: int = 0

    @property
    def refinement_spread(self) -> float:
        vals = [r for _, r in self.refinement if r > 0]
        return max(vals) / min(vals) if vals else 1.0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["refinement"] = [list(p) for p in self.refinement]
        d["refinement_spread"] = self.refinement_spread
        return d


def trial_specs(seed: int, trials: int, n: int, band_max: int = 16):
    """Deterministic (f, g) field specs; the per-trial draw does not depend on ``n``."""
    rng = np.random.Generator(np.random.PCG64(seed))
    for i in range(trials):
        band = int(rng.integers(2, band_max + 1))
        decay = float(rng.uniform(0.5, 3.0))
        mean_f, mean_g = (float(v) for v in rng.uniform(-1.0, 1.0, size=2))
        sf = int(rng.integers(0, 2**63 - 1))
        sg = int(rng.integers(0, 2**63 - 1))
        yield i, (RandomFieldSpec(sf, n, decay, band, mean_f),
                  RandomFieldSpec(sg, n, decay, band, mean_g))


ESTIMATES = {
    "kato_ponce_s1": dict(kind="kato_ponce", s=1.0),
    "kato_ponce_s2.6": dict(kind="kato_ponce", s=2.6),
    "frac_leibniz_interior": dict(kind="frac_leibniz", sigma=0.5, sigma1=0.25, sigma2=0.25,
                                  p=2, p1=4, p2=4, clause="sigma_i in (0, sigma)"),
    "frac_leibniz_endpoint": dict(kind="frac_leibniz", sigma=0.5, sigma1=0.5, sigma2=0.0,
                                  p=2, p1=2, p2=math.inf, clause="sigma2 = 0, p2 = inf"),
    "dmp_commutator": dict(kind="dmp", s=1.6),
    "multiplier_M": dict(kind="r_M", s=2.6),
    "multiplier_M_Linfty": dict(kind="r_Minf", s=2.6),
    "bessel_riesz": dict(kind="r_BR", s=2.6),
}


def evaluate(name: str, grid, f, g) -> float:
    p = ESTIMATES[name]
    kind = p["kind"]
    if kind == "kato_ponce":
        return kato_ponce_ratio(grid, f, g, p["s"])
    if kind == "frac_leibniz":
        return frac_leibniz_ratio(grid, f, g, p["sigma"], p["sigma1"], p["sigma2"],
                                  p["p"], p["p1"], p["p2"])
    if kind == "dmp":
        return dmp_commutator_ratio(grid, f, g, p["s"])
    r_M, r_Minf, r_BR = multiplier_estimate_ratios(grid, f, p["s"])
    return {"r_M": r_M, "r_Minf": r_Minf, "r_BR": r_BR}[kind]


def _bound(name: str, grid) -> float | None:
    p = ESTIMATES[name]
    if p["kind"] == "r_M":
        return multiplier_M_bound(grid, p["s"])
    if p["kind"] == "r_BR":
        return 0.5 + 1e-10
    return None


def run_lab(trials: int = 200, ns=(128, 256, 512), seed: int = 0,
            names=None) -> dict[str, RatioReport]:
    """All estimates over ``trials`` random pairs at each grid size in ``ns``.

    ``max_ratio`` and ``argmax_seed`` refer to the finest grid; the per-grid
    maxima form the refinement series. ``violations`` counts trials above a
    hard bound where one is known.
    """
    names = list(ESTIMATES) if names is None else list(names)
    reports = {}
    for name in names:
        series, best, degenerate, violations = [], (-1.0, 0), 0, 0
        bound = None
        for n in ns:
            grid = sp.GridSpec.create(n)
            bound = _bound(name, grid)
            top = (-1.0, 0)
            for i, (fs, gs) in trial_specs(seed, trials, n):
                r = evaluate(name, grid, fs.field(), gs.field())
                if r == 0.0:
                    degenerate += 1
                if bound is not None and r > bound:
                    violations += 1
                if r > top[0]:
                    top = (r, fs.seed)
            series.append((n, top[0]))
            best = top
        params = {k: v for k, v in ESTIMATES[name].items()}
        reports[name] = RatioReport(name, trials, best[0], best[1], degenerate, series,
                                    params, bound, violations)
    return reports
