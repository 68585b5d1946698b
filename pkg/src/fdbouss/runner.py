"""Run execution with monitors, sweeps and plot-data emission."""

from __future__ import annotations

import itertools
import math
import platform
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from . import energy as en
from . import io
from . import spectral as sp
from .config import ConfigError, RunConfig, from_mapping
from .experiments import rough_profile
from .integrators import advance
from .model1d import Boussinesq1D, State1D, Whitham1D, gaussian, plane_wave, plane_wave_period
from .model2d import (Boussinesq2D, State2D, curl_norm, gaussian_2d, plane_wave_2d,
                      velocity_norm)

CONSERVATION_TOL = 1e-8
CURL_TOL = 1e-8
#: default depth bound when the data never dips below the rest level
H0_CAP = 0.99


@dataclass
class RunResult:
    out_dir: Path
    status: str
    verdicts: dict
    metadata: dict = field(repr=False)

    @property
    def passed(self) -> bool:
        return self.status == "ok" and all(v["passed"] for v in self.verdicts.values())

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1


class _Blowup(Exception):
    def __init__(self, t: float, reason: str):
        self.t = t
        self.reason = reason


# ---------------------------------------------------------------- data

def _random_1d(grid, cfg: RunConfig, amplitude: float, seed: int) -> np.ndarray:
    if amplitude == 0:
        return np.zeros(grid.shape)
    return rough_profile(grid, cfg.decay, seed, amplitude, band=cfg.band)


def _random_potential_2d(grid, cfg: RunConfig, seed: int) -> np.ndarray:
    """Random field with ``|k|^{-decay}`` spectrum on ``0 < |m| <= band``, max-normalized."""
    rng = np.random.Generator(np.random.PCG64(seed))
    lat = grid.lattice
    m = np.sqrt(sum((ki * L / (2 * math.pi)) ** 2 for ki, L in zip(lat.k, grid.period)))
    amp = np.where((m > 0) & (m <= cfg.band), np.where(m > 0, m, 1.0) ** -cfg.decay, 0.0)
    phase = rng.uniform(0, 2 * math.pi, size=amp.shape)
    f = sp.inverse(grid, amp * np.exp(1j * phase))
    return f / np.max(np.abs(f))


def initial_state(cfg: RunConfig, grid: sp.GridSpec):
    """Initial data for the configured model; not yet band-limited."""
    width = cfg.width if cfg.width is not None else grid.period[0] / 16
    fam = cfg.family
    if fam == "file":
        return _from_snapshot(cfg, grid)
    if cfg.model == "whitham-1d":
        (x,) = grid.coordinates()
        if fam == "gaussian":
            return cfg.amplitude * np.exp(-((x - grid.period[0] / 2) ** 2) / width**2)
        if fam == "plane-wave":
            return cfg.amplitude * np.cos(2 * math.pi * cfg.mode * x / grid.period[0])
        if fam == "random":
            return _random_1d(grid, cfg, cfg.amplitude, cfg.seed)
        return np.zeros(grid.shape)
    if cfg.model == "boussinesq-1d":
        if fam == "gaussian":
            return gaussian(grid, cfg.amplitude, width, cfg.u_amplitude)
        if fam == "plane-wave":
            return plane_wave(grid, cfg.mode, cfg.amplitude, cfg.beta)
        if fam == "random":
            return State1D(_random_1d(grid, cfg, cfg.amplitude, cfg.seed),
                           _random_1d(grid, cfg, cfg.u_amplitude, cfg.seed + 1))
        return State1D(np.zeros(grid.shape), np.zeros(grid.shape))
    if fam == "gaussian":
        return gaussian_2d(grid, cfg.amplitude, width, cfg.u_amplitude)
    if fam == "plane-wave":
        return plane_wave_2d(grid, cfg.mode, cfg.amplitude, cfg.beta)
    if fam == "random":
        eta = cfg.amplitude * _random_potential_2d(grid, cfg, cfg.seed)
        phi = _random_potential_2d(grid, cfg, cfg.seed + 1)
        ph = sp.forward(grid, phi)
        g1 = sp.inverse(grid, 1j * grid.lattice.kodd[0] * ph)
        g2 = sp.inverse(grid, 1j * grid.lattice.kodd[1] * ph)
        scale = max(float(np.max(np.abs(g1))), float(np.max(np.abs(g2))), 1e-300)
        return State2D(eta, cfg.u_amplitude * g1 / scale, cfg.u_amplitude * g2 / scale)
    z = np.zeros(grid.shape)
    return State2D(z, z.copy(), z.copy())


def _from_snapshot(cfg: RunConfig, grid: sp.GridSpec):
    snap = io.read_snapshot(cfg.path)
    want = {"whitham-1d": 1, "boussinesq-1d": 2, "boussinesq-2d": 3}[cfg.model]
    if snap.fields.shape != (want, *grid.shape):
        raise ConfigError([f"initial.path: snapshot holds fields of shape {snap.fields.shape}, "
                           f"the run needs {(want, *grid.shape)}"])
    f = snap.fields
    if cfg.model == "whitham-1d":
        return f[0].copy()
    return State1D(f[0].copy(), f[1].copy()) if cfg.dim == 1 else State2D(*(a.copy() for a in f))


def build_model(cfg: RunConfig, grid: sp.GridSpec):
    cls = {"boussinesq-1d": Boussinesq1D, "boussinesq-2d": Boussinesq2D, "whitham-1d": Whitham1D}
    return cls[cfg.model](grid, cfg.beta, dealias=cfg.dealias, linear_only=cfg.linear)


def final_time(cfg: RunConfig, grid: sp.GridSpec) -> float:
    if cfg.periods is not None:
        return cfg.periods * plane_wave_period(grid, cfg.mode, cfg.beta)
    return cfg.t_end


# ---------------------------------------------------------------- sampling

class _Sampler:
    """Turns spectral states into CSV rows, snapshots and monitor inputs."""

    def __init__(self, cfg: RunConfig, grid: sp.GridSpec, model, snap_dir: Path | None):
        self.cfg = cfg
        self.grid = grid
        self.model = model
        self.snap_dir = snap_dir
        self.rows: list[dict] = []
        self.reports: list[en.EnergyReport] = []
        self.energy_on = "energy" in cfg.monitors and cfg.model != "whitham-1d"
        if cfg.model == "whitham-1d":
            self.columns = ["t", "u_L2", "u_Hs", "mass", "l2_energy"]
        else:
            energy_cols = (["eta_Hs", "u_Hs12", "E_s", "cubic", "lower", "upper"]
                           if self.energy_on else ["eta_Hs", "u_Hs12"])
            tail = (["min_depth", "ratio", "mass", "momentum", "hamiltonian"] if cfg.dim == 1
                    else ["min_depth", "ratio", "mass", "hamiltonian", "curl_norm", "curl_rel"])
            self.columns = ["t"] + energy_cols + tail
            if not self.energy_on:
                self.columns.remove("ratio")

    def fields(self, w, t):
        m = self.model
        if self.cfg.model == "whitham-1d":
            return (m.to_physical(w),)
        st = m.to_physical(w, t)
        return (st.eta, st.u) if self.cfg.dim == 1 else (st.eta, st.u1, st.u2)

    def sample(self, step: int, t: float, w) -> None:
        cfg, g = self.cfg, self.grid
        fields = self.fields(w, t)
        if not all(np.all(np.isfinite(f)) for f in fields):
            raise _Blowup(t, "non-finite state")
        row = {"t": t}
        if cfg.model == "whitham-1d":
            (u,) = fields
            row.update(u_L2=sp.sobolev_norm(g, u, 0.0), u_Hs=sp.sobolev_norm(g, u, cfg.s),
                       mass=sp.integrate(g, u), l2_energy=0.5 * sp.integrate(g, u * u))
            norms = (row["u_Hs"],)
        elif cfg.dim == 1:
            st = State1D(*fields, t)
            row.update(self._energy_part(st))
            row.update(min_depth=st.min_depth, mass=self.model.mass(st),
                       momentum=self.model.momentum(st), hamiltonian=self._hamiltonian(st))
            norms = (row["eta_Hs"], row["u_Hs12"])
        else:
            st = State2D(*fields, t)
            row.update(self._energy_part(st))
            c = curl_norm(g, st.u1, st.u2)
            v = velocity_norm(g, st.u1, st.u2, 1.0)
            row.update(min_depth=st.min_depth, mass=self.model.mass(st),
                       hamiltonian=self._hamiltonian(st), curl_norm=c,
                       curl_rel=c / v if v > 0 else 0.0)
            norms = (row["eta_Hs"], row["u_Hs12"])
        row.setdefault("ratio", math.nan)
        self.rows.append(row)
        if self.snap_dir is not None:
            io.write_snapshot(self.snap_dir / f"snap_{step:06d}.bin", t, fields)
        sup = max(float(np.max(np.abs(f))) for f in fields)
        if not all(math.isfinite(x) for x in norms) or max(max(norms), sup) > cfg.blowup_norm:
            raise _Blowup(t, f"norm exceeded {cfg.blowup_norm:g}")

    def _energy_part(self, st) -> dict:
        cfg, g = self.cfg, self.grid
        if not self.energy_on:
            if cfg.dim == 1:
                return dict(eta_Hs=sp.sobolev_norm(g, st.eta, cfg.s),
                            u_Hs12=sp.sobolev_norm(g, st.u, cfg.s + 0.5))
            return dict(eta_Hs=sp.sobolev_norm(g, st.eta, cfg.s),
                        u_Hs12=velocity_norm(g, st.u1, st.u2, cfg.s + 0.5))
        rep = (en.modified_energy_1d(g, st, cfg.s) if cfg.dim == 1
               else en.modified_energy_2d(g, st, cfg.s))
        self.reports.append(rep)
        return dict(eta_Hs=rep.Hs_eta, u_Hs12=rep.Hs12_u, E_s=rep.E_s, cubic=rep.cubic,
                    lower=rep.lower, upper=rep.upper)

    def _hamiltonian(self, st) -> float:
        H = self.model.hamiltonian(st)
        if self.cfg.linear:
            # the linear flow conserves only the quadratic part
            sq = st.u**2 if self.cfg.dim == 1 else st.u1**2 + st.u2**2
            H -= 0.5 * sp.integrate(self.grid, st.eta * sq)
        return H


# ---------------------------------------------------------------- run

def existence_estimate(cfg: RunConfig, grid: sp.GridSpec, state) -> en.ExistenceEstimate:
    """Existence times for band-limited initial data; ``h0`` defaults to the measured depth."""
    depth0 = state.min_depth
    if depth0 <= 0:
        raise ConfigError([f"initial data cavitates: min(1 + eta0) = {depth0:.6g}"])
    h0 = cfg.h0 if cfg.h0 is not None else min(depth0, H0_CAP)
    eta_n = sp.sobolev_norm(grid, state.eta, cfg.s)
    u_n = (sp.sobolev_norm(grid, state.u, cfg.s + 0.5) if cfg.dim == 1
           else velocity_norm(grid, state.u1, state.u2, cfg.s + 0.5))
    return en.existence_time(eta_n, u_n, h0, cfg.C1, cfg.C2)


def _relative_drift(values, scale: float | None = None) -> float:
    """``max |q(t) - q(0)|`` over ``max(|q(0)|, scale)``; absolute when both vanish.

    ``scale`` guards quantities such as the mass of a zero-mean wave, whose
    reference value is pure round-off.
    """
    v = np.asarray(values, dtype=float)
    dev = float(np.max(np.abs(v - v[0]))) if v.size else 0.0
    ref = max(abs(float(v[0])), scale or 0.0)
    return dev / ref if ref > 0 else dev


def versions() -> dict:
    return {"fdbouss": __version__, "numpy": np.__version__,
            "python": platform.python_version()}


def _prepare_dir(out: Path, snapshots: bool) -> Path | None:
    out.mkdir(parents=True, exist_ok=True)
    for name in ("metadata.json", "series.csv"):
        (out / name).unlink(missing_ok=True)
    snap_dir = out / "snapshots"
    if snap_dir.exists():
        for p in snap_dir.glob("snap_*.bin"):
            p.unlink()
    if not snapshots:
        return None
    snap_dir.mkdir(exist_ok=True)
    return snap_dir


def run(cfg: RunConfig, out_dir: str | Path | None = None) -> RunResult:
    """Execute one configured simulation and write its artifacts.

    Returns the verdicts; the artifact set is written even when the run
    blows up (the series then stops at the last finite sample).
    """
    out = Path(out_dir if out_dir is not None else cfg.output_dir)
    snap_dir = _prepare_dir(out, cfg.snapshots)
    grid = cfg.grid()
    model = build_model(cfg, grid)
    data = initial_state(cfg, grid)
    if cfg.model == "whitham-1d":
        w = model.to_spectral(data)
        if cfg.dealias:
            w = sp.project_band(w, model.mask)
    else:
        data = model.band_limit(data)
        w = model.to_spectral(data)
        if cfg.dim == 2:
            w = model.project(w)
    t_end = final_time(cfg, grid)
    n_steps = max(1, int(math.ceil(t_end / cfg.dt - 1e-9)))
    h = t_end / n_steps

    meta = {"config": cfg.echo(), "versions": versions(),
            "steps": n_steps, "dt_effective": h, "t_end": t_end}
    sampler = _Sampler(cfg, grid, model, snap_dir)
    status, t_stop = "ok", t_end

    # existence times from the band-limited data
    constants = {}
    h0 = None
    if cfg.model != "whitham-1d":
        est = existence_estimate(cfg, grid, model.to_physical(w, 0.0))
        h0 = est.h0
        constants.update(T1=est.T1, T2=est.T2, T0=est.T0, h0=h0, C1=cfg.C1, C2=cfg.C2)

    f0 = sampler.fields(w, 0.0)
    scales = {"mass": sp.integrate(grid, np.abs(f0[0])), "momentum": sp.integrate(grid, np.abs(f0[-1]))}

    try:
        sampler.sample(0, 0.0, w)
        for i in range(1, n_steps + 1):
            w = advance(model, w, h, cfg.scheme)
            if cfg.dim == 2:
                w = model.project(w)
            t = i * h
            if not np.all(np.isfinite(w)):
                raise _Blowup(t, "non-finite state")
            if i % cfg.output_stride == 0 or i == n_steps:
                sampler.sample(i, t, w)
    except (_Blowup, FloatingPointError) as exc:
        t_stop = getattr(exc, "t", math.nan)
        status = f"blowup at t={io.fmt(t_stop)}"

    rows = sampler.rows
    verdicts = {}
    if sampler.energy_on and len(sampler.reports) >= 3:
        mon = en.energy_inequality_monitor(sampler.reports)
        for row, rep in zip(rows, sampler.reports):
            row["ratio"] = rep.ratio
        sandwich_bad = sum(not r.sandwich_ok for r in sampler.reports)
        constants.update(sup_ratio=mon.sup_ratio, sup_ratio_naive=mon.sup_ratio_naive)
        ok = math.isfinite(mon.sup_ratio) and sandwich_bad == 0
        verdicts["energy"] = {"passed": ok, "sandwich_violations": sandwich_bad,
                              "detail": f"sup |dE/dt|/(E+E^2) = {io.fmt(mon.sup_ratio)}"}
    elif sampler.energy_on:
        verdicts["energy"] = {"passed": False, "sandwich_violations": 0,
                              "detail": "fewer than 3 samples; lower output_stride"}
    if "cavitation" in cfg.monitors and h0 is not None:
        v = en.noncavitation_monitor([r["t"] for r in rows], [r["min_depth"] for r in rows],
                                     h0, horizon=constants["T2"])
        verdicts["cavitation"] = {"passed": v.passed, "detail": v.describe(),
                                  "first_violation": v.first_violation}
    if "conservation" in cfg.monitors:
        keys = (["mass", "l2_energy"] if cfg.model == "whitham-1d"
                else ["mass", "momentum", "hamiltonian"] if cfg.dim == 1
                else ["mass", "hamiltonian"])
        drifts = {k: _relative_drift([r[k] for r in rows], scales.get(k)) for k in keys}
        meta["conservation_drift"] = drifts
        verdicts["conservation"] = {"passed": all(d <= CONSERVATION_TOL for d in drifts.values()),
                                    "detail": ", ".join(f"{k} {io.fmt(d)}" for k, d in drifts.items())}
    if "curl" in cfg.monitors and cfg.dim == 2:
        worst = max(r["curl_rel"] for r in rows)
        meta["curl_max"] = worst
        verdicts["curl"] = {"passed": worst <= CURL_TOL, "detail": f"max curl/|u|_H1 = {io.fmt(worst)}"}

    if cfg.family == "plane-wave" and cfg.linear and status == "ok" and cfg.model != "whitham-1d":
        exact = (plane_wave(grid, cfg.mode, cfg.amplitude, cfg.beta, t_end) if cfg.dim == 1
                 else plane_wave_2d(grid, cfg.mode, cfg.amplitude, cfg.beta, t_end))
        got = model.to_physical(w, t_end)
        num = sum(float(np.sum((a - b) ** 2)) for a, b in zip(_fields(got), _fields(exact)))
        den = sum(float(np.sum(b**2)) for b in _fields(exact))
        meta["plane_wave_error"] = math.sqrt(num / den)

    failures = [r["t"] for r in rows if h0 is not None and r["min_depth"] < 0.5 * h0]
    if status != "ok":
        meta["t_star"] = t_stop
    elif failures:
        meta["t_star"] = failures[0]
    else:
        meta["t_star"] = None
    meta.update(status=status, verdicts=verdicts, constants=constants, samples=len(rows))

    with io.SeriesWriter(out / "series.csv", sampler.columns) as wr:
        for row in rows:
            wr.write(row)
    io.write_json(out / "metadata.json", meta)
    return RunResult(out, status, verdicts, meta)


def _fields(st):
    return (st.eta, st.u) if isinstance(st, State1D) else (st.eta, st.u1, st.u2)


# ---------------------------------------------------------------- sweep

def expand(base: RunConfig, vary: dict[str, list[str]]) -> list[RunConfig]:
    """Cartesian product of ``key -> values`` applied to ``base`` (later keys vary fastest)."""
    if not vary:
        return [base]
    keys = list(vary)
    out = []
    for combo in itertools.product(*(vary[k] for k in keys)):
        pairs = {k: v for k, v in base.echo().items() if v is not None}
        pairs.update(dict(zip(keys, combo)))
        out.append(from_mapping(pairs))
    return out


def _sweep_row(args) -> dict:
    index, cfg, out_dir = args
    row = {"index": index, "model": cfg.model, "n": "x".join(map(str, cfg.n)), "beta": cfg.beta,
           "family": cfg.family, "amplitude": cfg.amplitude, "u_amplitude": cfg.u_amplitude,
           "dt": cfg.dt, "out_dir": str(out_dir)}
    try:
        res = run(cfg, out_dir)
    except Exception as exc:  # one failing run must not take the sweep down
        row.update(status=f"error: {type(exc).__name__}: {exc}", passed=False,
                   t_star=None, sup_ratio=None, T0=None, verdicts={})
        return row
    c = res.metadata["constants"]
    row.update(status=res.status, passed=res.passed, t_star=res.metadata["t_star"],
               sup_ratio=c.get("sup_ratio"), T0=c.get("T0"),
               verdicts={k: v["passed"] for k, v in res.verdicts.items()})
    return row


def sweep(configs: list[RunConfig], parallelism: int = 1, out_root: str | Path = "sweep") -> list[dict]:
    """Run configs independently; rows come back in input order."""
    if not configs:
        raise ConfigError(["sweep: no configurations given"])
    if parallelism < 1:
        raise ConfigError(["sweep: parallelism must be a positive integer"])
    root = Path(out_root)
    jobs = [(i, c, root / f"run_{i:03d}") for i, c in enumerate(configs)]
    if parallelism == 1 or len(jobs) == 1:
        rows = [_sweep_row(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            rows = list(pool.map(_sweep_row, jobs))
    root.mkdir(parents=True, exist_ok=True)
    io.write_json(root / "summary.json", rows)
    return rows


# ---------------------------------------------------------------- plot data

PLOT_KINDS = ("series", "snapshot", "spectrum")


def _snapshot_path(run_dir: Path, which: str | None) -> Path:
    snaps = sorted((run_dir / "snapshots").glob("snap_*.bin"))
    if not snaps:
        raise FileNotFoundError(f"{run_dir}: no snapshots")
    if which is None or which == "last":
        return snaps[-1]
    if which == "first":
        return snaps[0]
    p = Path(which)
    return p if p.exists() else run_dir / "snapshots" / f"snap_{int(which):06d}.bin"


def spectrum(fields_row: np.ndarray, period: tuple[float, ...]) -> tuple[np.ndarray, np.ndarray]:
    """Shell amplitudes ``sqrt(2 sum |f_hat|^2)`` (``|f_hat_0|`` at zero) against ``|k|``.

    A cosine of amplitude ``a`` at wavenumber ``k`` yields ``a`` at ``k``.
    Values below ``1e-14`` times the peak are written as zero.
    """
    shape = fields_row.shape
    fh = np.fft.fftn(fields_row) / fields_row.size
    freqs = [np.fft.fftfreq(n, d=1.0 / n) for n in shape]
    grids = np.meshgrid(*freqs, indexing="ij")
    # shell index in units of the fundamental of the first axis
    scale = [period[0] / L for L in period]
    shell = np.rint(np.sqrt(sum((g * s) ** 2 for g, s in zip(grids, scale)))).astype(int)
    power = np.bincount(shell.ravel(), weights=(np.abs(fh) ** 2).ravel())
    amp = np.sqrt(2.0 * power)
    amp[0] = math.sqrt(power[0])
    peak = float(amp.max())
    amp[amp < 1e-14 * peak] = 0.0
    k = np.arange(amp.size) * 2 * math.pi / period[0]
    return k, amp


def emit_plot_data(run_dir: str | Path, kind: str, column: str | None = None,
                   snapshot: str | None = None, field: int = 0) -> str:
    """Whitespace-separated table text for gnuplot."""
    run_dir = Path(run_dir)
    if kind not in PLOT_KINDS:
        raise ValueError(f"unknown plot kind {kind!r}; choose from {', '.join(PLOT_KINDS)}")
    if kind == "series":
        series = io.read_series(run_dir / "series.csv")
        col = column or ("E_s" if "E_s" in series else list(series)[1])
        if col not in series:
            raise KeyError(f"no column {col!r}; have {', '.join(series)}")
        lines = [f"# t {col}"]
        lines += [f"{io.fmt(a)} {io.fmt(b)}" for a, b in zip(series["t"], series[col])]
        return "\n".join(lines) + "\n"
    meta = io.read_json(run_dir / "metadata.json")
    period = tuple(float(L) for L in meta["config"]["grid.L"])
    snap = io.read_snapshot(_snapshot_path(run_dir, snapshot))
    if kind == "snapshot":
        coords = np.meshgrid(*[np.arange(n) * L / n for n, L in zip(snap.fields.shape[1:], period)],
                             indexing="ij")
        cols = [c.ravel() for c in coords] + [f.ravel() for f in snap.fields]
        names = ["x", "y"][: snap.dim] + [f"f{i}" for i in range(snap.fields.shape[0])]
        lines = [f"# t = {io.fmt(snap.t)}", "# " + " ".join(names)]
        lines += [" ".join(io.fmt(v) for v in vals) for vals in zip(*cols)]
        return "\n".join(lines) + "\n"
    k, amp = spectrum(snap.fields[field], period)
    lines = [f"# t = {io.fmt(snap.t)}", "# |k| amplitude"]
    lines += [f"{io.fmt(a)} {io.fmt(b)}" for a, b in zip(k, amp)]
    return "\n".join(lines) + "\n"
