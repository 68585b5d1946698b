"""Run configuration: flat ``key = value`` text with dotted section keys.

Example::

    model = boussinesq-1d
    grid.n = 256
    grid.L = 2pi
    initial.family = gaussian
    initial.amplitude = 0.1
    integrator.dt = 1e-3
    integrator.t_end = 1

Blank lines and ``#`` comments are ignored. Lengths accept the token ``2pi``
(and multiples like ``4pi``).
"""

from __future__ import annotations

import dataclasses
import math
import re
from dataclasses import dataclass
from pathlib import Path

from . import spectral as sp
from .integrators import SCHEMES, rk4_stable
from .model1d import max_frequency

MODELS = ("boussinesq-1d", "boussinesq-2d", "whitham-1d")
FAMILIES = ("gaussian", "plane-wave", "random", "rest", "file")
MONITORS = ("energy", "cavitation", "conservation", "curl")


class ConfigError(ValueError):
    """All violated preconditions of a configuration, one per line."""

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.errors))


@dataclass
class RunConfig:
    model: str = "boussinesq-1d"
    n: tuple[int, ...] = (256,)
    L: tuple[float, ...] = (2 * math.pi,)
    beta: float = 1.0
    s: float = 2.6
    family: str = "gaussian"
    amplitude: float = 0.1
    width: float | None = None  # default L/16
    u_amplitude: float = 0.0
    mode: int = 4
    decay: float = 2.0
    band: int = 16
    path: str | None = None  # snapshot file for family "file"
    scheme: str = "IFRK4"
    dt: float = 1e-3
    t_end: float = 1.0
    periods: float | None = None  # plane wave: overrides t_end
    dealias: bool = True
    linear: bool = False
    output_stride: int = 10
    monitors: tuple[str, ...] = ("energy", "cavitation", "conservation")
    h0: float | None = None  # default: measured min(1 + eta0)
    C1: float = 1.0
    C2: float = 10.0
    blowup_norm: float = 1e6
    output_dir: str = "run"
    snapshots: bool = True
    seed: int = 0

    @property
    def dim(self) -> int:
        return 2 if self.model == "boussinesq-2d" else 1

    def grid(self) -> sp.GridSpec:
        return sp.GridSpec.create(self.n, self.L)

    def echo(self) -> dict:
        """Canonical key/value view; feeding it back through ``from_mapping`` reproduces the run."""
        out = {}
        for key, attr in _KEYS.items():
            v = getattr(self, attr)
            if isinstance(v, tuple):
                v = list(v)
            out[key] = v
        return out

    def to_text(self) -> str:
        lines = []
        for key, v in self.echo().items():
            if v is None:
                continue
            if isinstance(v, list):
                v = ",".join(repr(x) if isinstance(x, float) else str(x) for x in v)
            elif isinstance(v, bool):
                v = "true" if v else "false"
            elif isinstance(v, float):
                v = repr(v)
            lines.append(f"{key} = {v}")
        return "\n".join(lines) + "\n"

    def with_updates(self, **updates) -> "RunConfig":
        return dataclasses.replace(self, **updates)


#: text key -> attribute
_KEYS = {
    "model": "model",
    "grid.n": "n",
    "grid.L": "L",
    "beta": "beta",
    "s": "s",
    "initial.family": "family",
    "initial.amplitude": "amplitude",
    "initial.width": "width",
    "initial.u_amplitude": "u_amplitude",
    "initial.mode": "mode",
    "initial.decay": "decay",
    "initial.band": "band",
    "initial.path": "path",
    "integrator.scheme": "scheme",
    "integrator.dt": "dt",
    "integrator.t_end": "t_end",
    "integrator.periods": "periods",
    "integrator.dealias": "dealias",
    "integrator.linear": "linear",
    "diagnostics.output_stride": "output_stride",
    "diagnostics.monitors": "monitors",
    "diagnostics.h0": "h0",
    "diagnostics.C1": "C1",
    "diagnostics.C2": "C2",
    "diagnostics.blowup_norm": "blowup_norm",
    "output.dir": "output_dir",
    "output.snapshots": "snapshots",
    "seed": "seed",
}

_DEFAULTS = {f.name: f.default for f in dataclasses.fields(RunConfig)}

_PI = re.compile(r"^([0-9.eE+-]*)\s*\*?\s*pi$")


def parse_float(text: str) -> float:
    t = text.strip()
    m = _PI.match(t)
    if m:
        coef = m.group(1)
        return (float(coef) if coef not in ("", "+") else 1.0) * math.pi
    return float(t)


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on", "two-thirds"):
        return True
    if t in ("0", "false", "no", "off", "none"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_value(attr: str, text: str):
    default = _DEFAULTS[attr]
    if attr == "n":
        return tuple(int(x) for x in text.split(","))
    if attr == "L":
        return tuple(parse_float(x) for x in text.split(","))
    if attr == "monitors":
        items = [x.strip() for x in text.split(",") if x.strip()]
        return tuple(x for x in items if x != "none")
    if attr == "path":
        return None if text.strip().lower() == "none" else text.strip()
    if attr in ("width", "periods", "h0"):
        return None if text.strip().lower() == "none" else parse_float(text)
    if isinstance(default, bool):
        return _parse_bool(text)
    if isinstance(default, int):
        return int(text)
    if isinstance(default, float):
        return parse_float(text)
    return text.strip()


def parse_text(text: str) -> dict[str, str]:
    """Raw key/value pairs; later keys override earlier ones."""
    pairs = {}
    errors = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
            continue
        key, value = (p.strip() for p in line.split("=", 1))
        pairs[key] = value
    if errors:
        raise ConfigError(errors)
    return pairs


def from_mapping(pairs: dict) -> RunConfig:
    """Build and validate a config from text (or already-typed) values."""
    errors = []
    kwargs = {}
    for key, value in pairs.items():
        attr = _KEYS.get(key)
        if attr is None:
            errors.append(f"{key}: unknown key")
            continue
        if isinstance(value, str):
            try:
                value = _parse_value(attr, value)
            except ValueError as exc:
                errors.append(f"{key}: {exc}")
                continue
        elif isinstance(value, list):
            value = tuple(value)
        kwargs[attr] = value
    cfg = RunConfig(**kwargs)
    if cfg.dim == 2 and len(cfg.L) == 1:
        cfg.L = cfg.L * 2
    if len(cfg.n) == 1 and cfg.dim == 2:
        cfg.n = cfg.n * 2
    if "s" not in pairs and cfg.dim == 2:
        cfg.s = 3.1
    errors += validate(cfg)
    if errors:
        raise ConfigError(errors)
    return cfg


def load(path: str | Path, overrides: dict[str, str] | None = None) -> RunConfig:
    pairs = parse_text(Path(path).read_text())
    pairs.update(overrides or {})
    return from_mapping(pairs)


def validate(cfg: RunConfig) -> list[str]:
    """Every violated precondition; empty when the config is runnable."""
    e = []
    if cfg.model not in MODELS:
        e.append(f"model: must be one of {', '.join(MODELS)}, got {cfg.model!r}")
    dim = cfg.dim
    if len(cfg.n) != dim:
        e.append(f"grid.n: expected {dim} value(s), got {len(cfg.n)}")
    if any(n < 8 or n % 2 for n in cfg.n):
        e.append("grid.n: each size must be an even integer >= 8")
    if len(cfg.L) != dim:
        e.append(f"grid.L: expected {dim} value(s), got {len(cfg.L)}")
    if any(not L > 0 for L in cfg.L):
        e.append("grid.L: periods must be positive")
    if not cfg.beta > 0:
        e.append("beta: must be positive")
    monitors_on = bool(cfg.monitors) and cfg.model != "whitham-1d"
    if "energy" in cfg.monitors and cfg.model != "whitham-1d":
        if dim == 1 and not cfg.s > 2.5:
            e.append(f"s: energy monitors in 1D need s > 5/2, got {cfg.s}")
        if dim == 2 and not cfg.s > 3:
            e.append(f"s: energy monitors in 2D need s > 3, got {cfg.s}")
    elif not cfg.s >= 0:
        e.append("s: must be non-negative")
    if cfg.family not in FAMILIES:
        e.append(f"initial.family: must be one of {', '.join(FAMILIES)}, got {cfg.family!r}")
    if cfg.width is not None and not cfg.width > 0:
        e.append("initial.width: must be positive")
    if cfg.family == "plane-wave":
        if cfg.mode < 1 or (cfg.n and cfg.mode >= min(cfg.n) // 3):
            e.append("initial.mode: must satisfy 1 <= mode < n/3")
    if cfg.family == "random":
        if cfg.band < 1 or (cfg.n and cfg.band >= min(cfg.n) // 3):
            e.append("initial.band: must satisfy 1 <= band < n/3")
    if cfg.family == "file":
        if cfg.path is None:
            e.append("initial.path: required for family 'file'")
        elif not Path(cfg.path).is_file():
            e.append(f"initial.path: no such file {cfg.path!r}")
    if cfg.scheme not in SCHEMES:
        e.append(f"integrator.scheme: must be one of {', '.join(SCHEMES)}")
    if not cfg.dt > 0:
        e.append("integrator.dt: must be positive")
    if cfg.periods is not None:
        if cfg.family != "plane-wave":
            e.append("integrator.periods: only meaningful for plane-wave data")
        elif not cfg.periods > 0:
            e.append("integrator.periods: must be positive")
    elif not cfg.t_end > 0:
        e.append("integrator.t_end: must be positive")
    if cfg.output_stride < 1:
        e.append("diagnostics.output_stride: must be a positive integer")
    unknown = [m for m in cfg.monitors if m not in MONITORS]
    if unknown:
        e.append(f"diagnostics.monitors: unknown {', '.join(unknown)}")
    if "curl" in cfg.monitors and monitors_on and dim != 2:
        e.append("diagnostics.monitors: curl monitor needs the 2D model")
    if cfg.h0 is not None and not 0 < cfg.h0 < 1:
        e.append("diagnostics.h0: must lie in (0, 1)")
    if not cfg.C1 > 0 or not cfg.C2 > 0:
        e.append("diagnostics.C1/C2: must be positive")
    if not cfg.blowup_norm > 0:
        e.append("diagnostics.blowup_norm: must be positive")
    if cfg.seed < 0:
        e.append("seed: must be non-negative")
    if not e and cfg.scheme == "RK4":
        omega = max_frequency(cfg.grid(), cfg.beta)
        if not rk4_stable(cfg.dt, omega):
            e.append(f"integrator.dt: RK4 needs dt*omega_max <= 2.8, got {cfg.dt * omega:.3f}")
    return e
