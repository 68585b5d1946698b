"""Command-line entry point ``fdbouss``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import energy as en
from . import experiments as ex
from . import inequalities as iq
from . import io
from . import spectral as sp
from .config import ConfigError, load
from .runner import (PLOT_KINDS, build_model, emit_plot_data, existence_estimate, expand,
                     initial_state, run, sweep)


def _overrides(items: list[str] | None) -> dict[str, str]:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise ConfigError([f"--set expects key=value, got {item!r}"])
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _emit(obj, path: str | None) -> None:
    text = io.dumps(obj)
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_simulate(args) -> int:
    cfg = load(args.config, _overrides(args.set))
    res = run(cfg, args.out)
    for name, v in res.verdicts.items():
        print(f"{name}: {'pass' if v['passed'] else 'FAIL'} ({v['detail']})")
    print(f"status: {res.status}; artifacts in {res.out_dir}")
    return res.exit_code


def cmd_sweep(args) -> int:
    if not args.configs:
        raise ConfigError(["sweep: no configuration files given"])
    vary = {}
    for item in args.vary or []:
        key, _, values = item.partition("=")
        if not values:
            raise ConfigError([f"--vary expects key=v1,v2,..., got {item!r}"])
        vary[key.strip()] = [v.strip() for v in values.split(",")]
    configs = []
    errors = []
    for path in args.configs:
        try:
            configs += expand(load(path, _overrides(args.set)), vary)
        except ConfigError as exc:
            errors += [f"{path}: {e}" for e in exc.errors]
    if errors:
        raise ConfigError(errors)
    rows = sweep(configs, args.jobs, args.out)
    cols = ["index", "beta", "n", "status", "passed", "t_star", "sup_ratio", "T0"]
    print(" ".join(cols))
    for r in rows:
        print(" ".join(str(r[c]) for c in cols))
    return 0 if all(r["passed"] for r in rows) else 1


def cmd_verify(args) -> int:
    try:
        reports = iq.run_lab(args.trials, tuple(args.n), args.seed, args.estimates)
    except iq.InconsistencyError as exc:
        print(f"inconsistency: {exc}", file=sys.stderr)
        return 1
    out = {name: r.to_dict() for name, r in reports.items()}
    _emit(out, args.out)
    bad = [n for n, r in reports.items() if r.violations]
    for n in bad:
        print(f"{n}: {reports[n].violations} bound violations", file=sys.stderr)
    return 1 if bad else 0


def cmd_existence(args) -> int:
    if args.config:
        cfg = load(args.config, _overrides(args.set))
        if cfg.model == "whitham-1d":
            raise ConfigError(["existence-time: needs a Boussinesq model"])
        grid = cfg.grid()
        st = build_model(cfg, grid).band_limit(initial_state(cfg, grid))
        est = existence_estimate(cfg, grid, st)
    else:
        if args.eta_norm is None or args.u_norm is None or args.h0 is None:
            raise ConfigError(["existence-time: give --config or all of --eta-norm, --u-norm, --h0"])
        est = en.existence_time(args.eta_norm, args.u_norm, args.h0, args.C1, args.C2)
    _emit({"T1": est.T1, "T2": est.T2, "T0": est.T0, "h0": est.h0, "C1": est.C1, "C2": est.C2},
          args.out)
    return 0


def cmd_difference(args) -> int:
    rows = []
    ok = True
    for n in args.n:
        grid = sp.GridSpec.create(n)
        for delta in args.delta:
            a, b = ex.perturbed_pair(grid, delta, args.amplitude)
            rep = ex.gronwall_experiment(grid, a, b, args.dt, args.t_end, args.stride, args.s)
            rows.append({"n": n, "delta": delta, "E0": rep.E0, "E0_over_delta2": rep.E0 / delta**2,
                         "max_ratio": rep.max_ratio, "rate": rep.rate,
                         "bound_holds": rep.bound_holds})
            ok &= rep.bound_holds
    _emit(rows, args.out)
    return 0 if ok else 1


def cmd_convergence(args) -> int:
    errs, orders = ex.temporal_order(n=args.n)
    space = ex.spatial_convergence()
    _emit({"temporal_errors": errs, "temporal_orders": orders,
           "spatial_errors": {str(k): v for k, v in space.items()}}, args.out)
    return 0


def cmd_emit(args) -> int:
    text = emit_plot_data(args.run_dir, args.kind, args.column, args.snapshot, args.field)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fdbouss", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run one configuration")
    s.add_argument("config")
    s.add_argument("--out", help="output directory (default: output.dir)")
    s.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("sweep", help="run many configurations")
    s.add_argument("configs", nargs="*")
    s.add_argument("--vary", action="append", metavar="KEY=V1,V2")
    s.add_argument("--set", action="append", metavar="KEY=VALUE")
    s.add_argument("-j", "--jobs", type=int, default=1)
    s.add_argument("--out", default="sweep")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("verify-inequalities", help="randomized check of the commutator/product estimates")
    s.add_argument("--trials", type=int, default=200)
    s.add_argument("--n", type=int, nargs="+", default=[128, 256, 512])
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--estimates", nargs="+", choices=sorted(iq.ESTIMATES))
    s.add_argument("--out")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("existence-time", help="a-priori existence times T1, T2, T0")
    s.add_argument("--config")
    s.add_argument("--set", action="append", metavar="KEY=VALUE")
    s.add_argument("--eta-norm", type=float)
    s.add_argument("--u-norm", type=float)
    s.add_argument("--h0", type=float)
    s.add_argument("--C1", type=float, default=1.0)
    s.add_argument("--C2", type=float, default=10.0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_existence)

    s = sub.add_parser("difference", help="difference-energy growth between nearby solutions")
    s.add_argument("--n", type=int, nargs="+", default=[128, 256, 512])
    s.add_argument("--delta", type=float, nargs="+", default=[1e-3, 1e-4])
    s.add_argument("--amplitude", type=float, default=0.2)
    s.add_argument("--s", type=float, default=2.6)
    s.add_argument("--dt", type=float, default=1e-3)
    s.add_argument("--t-end", type=float, default=1.0)
    s.add_argument("--stride", type=int, default=10)
    s.add_argument("--out")
    s.set_defaults(func=cmd_difference)

    s = sub.add_parser("convergence", help="temporal and spatial convergence studies")
    s.add_argument("--n", type=int, default=128)
    s.add_argument("--out")
    s.set_defaults(func=cmd_convergence)

    s = sub.add_parser("emit-plot", help="gnuplot tables from a run directory")
    s.add_argument("run_dir")
    s.add_argument("kind", choices=PLOT_KINDS)
    s.add_argument("--column")
    s.add_argument("--snapshot", help="'first', 'last', a step number or a path")
    s.add_argument("--field", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_emit)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(exc, file=sys.stderr)
        return 2
    except (FileNotFoundError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
