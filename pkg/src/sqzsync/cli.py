"""Command-line front end.

    sqzsync steady --n 0 --r 1.5 --eps 0.5
    sqzsync cycle --r 1.5 --count 200 --seed 42 --tmax 20 --dt 0.01 --out cycle.csv
    sqzsync tongue --n 1 --r 1.5 --out tongue.csv --workers 4

Exit codes: 0 success, 1 parameter/usage error, 2 numerical failure
(flagged grid cells, pole clamps, singular generators, failed self-test).
"""
from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .dynamics import build_generator, steady_state, steady_state_analytic, steady_state_numeric
from .errors import NoMaximumFound, NumericalError, ParameterError
from .io import ResultEnvelope, grid_envelope, write_csv, write_json
from .limit_cycle import limit_cycle_radius, sample_initial_states, simulate_ensemble, steady_theta
from .metrics import epsilon_opt, has_phase_preference, q_grid, s_max
from .params import SystemParams, derive_reservoir, squeeze_db, validate_params
from .selftest import run_checks
from .sweep import arnold_tongue, sweep_s_vs_delta, sweep_s_vs_eps

EXIT_OK, EXIT_PARAM, EXIT_NUMERIC = 0, 1, 2
SUBCOMMANDS = ("steady", "cycle", "qfunc", "sweep-eps", "sweep-delta", "tongue", "eopt", "selftest")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_help()}\n{self.prog}: error: {message}")


def default_workers() -> int:
    env = os.environ.get("SQZSYNC_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError(f"SQZSYNC_WORKERS must be an integer, got {env!r}")
    return os.cpu_count() or 1


def _common() -> argparse.ArgumentParser:
    c = _Parser(add_help=False)
    g = c.add_argument_group("system parameters (rates in units of gamma0)")
    g.add_argument("--n", type=float, default=0.0, help="mean thermal occupation (>= 0)")
    g.add_argument("--r", type=float, default=0.0, help="squeezing strength (>= 0)")
    g.add_argument("--phi", type=float, default=0.0, help="squeezing angle in radians")
    g.add_argument("--delta", type=float, default=0.0, help="detuning")
    g.add_argument("--eps", type=float, default=0.0, help="drive strength")
    g.add_argument("--gamma0-scale", type=float, default=1.0,
                   help="physical value of gamma0, recorded in metadata for labelling only")
    o = c.add_argument_group("output")
    o.add_argument("--config", help="JSON file of flag defaults (explicit flags win)")
    o.add_argument("--out", default="-", help="output path, '-' for stdout")
    o.add_argument("--format", choices=("csv", "json", "auto"), default="auto")
    o.add_argument("--workers", type=int, default=None,
                   help="worker processes for sweeps (default: $SQZSYNC_WORKERS or CPU count)")
    return c


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sqzsync", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    common = _common()

    sub.add_parser("steady", parents=[common], help="steady-state Bloch vector and S_max")

    p = sub.add_parser("cycle", parents=[common], help="seeded ensemble of angular trajectories")
    p.add_argument("--count", type=int, default=200)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--tmax", type=float, default=20.0)
    p.add_argument("--dt", type=float, default=0.01)
    p.add_argument("--every", type=int, default=10, help="record every k-th step")
    p.add_argument("--omega0", type=float, default=0.0, help="free precession frequency")

    p = sub.add_parser("qfunc", parents=[common], help="steady-state Husimi Q on a (theta, phi) grid")
    p.add_argument("--n-theta", type=int, default=181)
    p.add_argument("--n-phi", type=int, default=361)

    p = sub.add_parser("sweep-eps", parents=[common], help="S(phi) versus drive strength")
    p.add_argument("--eps-min", type=float, default=0.0)
    p.add_argument("--eps-max", type=float, default=2.0)
    p.add_argument("--n-eps", type=int, default=200)
    p.add_argument("--n-phi", type=int, default=256)

    p = sub.add_parser("sweep-delta", parents=[common], help="S(phi) versus detuning")
    p.add_argument("--delta-min", type=float, default=-5.0)
    p.add_argument("--delta-max", type=float, default=5.0)
    p.add_argument("--n-delta", type=int, default=201)
    p.add_argument("--n-phi", type=int, default=256)

    p = sub.add_parser("tongue", parents=[common], help="S_max over (drive, detuning): Arnold tongue")
    p.add_argument("--eps-min", type=float, default=0.0)
    p.add_argument("--eps-max", type=float, default=4.0)
    p.add_argument("--n-eps", type=int, default=100)
    p.add_argument("--delta-min", type=float, default=-5.0)
    p.add_argument("--delta-max", type=float, default=5.0)
    p.add_argument("--n-delta", type=int, default=101)

    p = sub.add_parser("eopt", parents=[common], help="optimal drive strength")
    p.add_argument("--method", choices=("auto", "closed", "numeric"), default="auto")

    p = sub.add_parser("selftest", help="run the invariant suite")
    p.add_argument("--seed", type=int, default=2024)
    return parser


def _subparser(parser, name):
    return parser._subparsers._group_actions[0].choices[name]


def _parse(parser, argv):
    args, extra = parser.parse_known_args(argv)
    if extra:
        sub = _subparser(parser, args.command)
        sub.error(f"unrecognized arguments: {' '.join(extra)}")
    return args


def parse_args(argv) -> argparse.Namespace:
    parser = build_parser()
    args = _parse(parser, argv)
    cfg_path = getattr(args, "config", None)
    if cfg_path:
        try:
            with open(cfg_path, encoding="utf-8") as fh:
                cfg = json.load(fh)
        except (OSError, ValueError) as e:
            raise UsageError(f"cannot read config {cfg_path}: {e}")
        cfg.pop("command", None)
        sub = _subparser(parser, args.command)
        known = {a.dest for a in sub._actions}
        unknown = set(k.replace("-", "_") for k in cfg) - known
        if unknown:
            raise UsageError(f"unknown keys in config {cfg_path}: {sorted(unknown)}")
        sub.set_defaults(**{k.replace("-", "_"): v for k, v in cfg.items()})
        args = _parse(parser, argv)
    return args


def params_from_args(args) -> SystemParams:
    raw = SystemParams(n=args.n, r=args.r, sq_phase=args.phi, detuning=args.delta, drive=args.eps)
    return validate_params(raw)


def derived_meta(p: SystemParams, with_eopt: bool = True) -> dict:
    res = derive_reservoir(p)
    ts = steady_theta(res.N)
    out = {
        "N": res.N, "M_re": res.M.real, "M_im": res.M.imag, "gamma": res.gamma,
        "theta_s": ts, "r_s": limit_cycle_radius(ts), "squeeze_db": squeeze_db(p.r),
    }
    if with_eopt:
        try:
            out["eps_opt"] = epsilon_opt(p)
        except NoMaximumFound:
            out["eps_opt"] = None
    return out


def run_meta(args, p: SystemParams) -> dict:
    skip = {"config", "out", "format", "workers", "n", "r", "phi", "delta", "eps"}
    settings = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    return {"version": __version__, "params": p.as_dict(), "settings": settings}


def _emit(env: ResultEnvelope, args, default: str) -> None:
    fmt = args.format
    if fmt == "auto":
        out = str(args.out)
        fmt = "json" if out.endswith(".json") else "csv" if out.endswith(".csv") else default
    (write_json if fmt == "json" else write_csv)(env, args.out)


def cmd_steady(args) -> int:
    p = params_from_args(args)
    v = steady_state(p)
    num = steady_state_numeric(build_generator(p))
    smax, star = s_max(v)
    try:
        steady_state_analytic(p)
        method = "analytic"
    except NumericalError:
        method = "numeric"
    meta = {**run_meta(args, p), "derived": derived_meta(p)}
    data = {"rx": [v.rx], "ry": [v.ry], "rz": [v.rz], "s_max": [smax], "phi_star": [star],
            "phase_preference": [has_phase_preference(v)], "method": [method],
            "numeric_rx": [num.rx], "numeric_ry": [num.ry], "numeric_rz": [num.rz]}
    _emit(ResultEnvelope(meta, data), args, "json")
    return EXIT_OK


def cmd_cycle(args) -> int:
    p = params_from_args(args)
    if args.count < 1 or args.every < 1:
        raise UsageError("--count and --every must be >= 1")
    states = sample_initial_states(args.count, args.seed)
    run = simulate_ensemble(p, states, args.tmax, args.dt, omega0=args.omega0, seed=args.seed)
    idx = np.arange(0, len(run.times), args.every)
    if idx[-1] != len(run.times) - 1:
        idx = np.append(idx, len(run.times) - 1)
    k, m = len(run), len(idx)
    th, ph = run.theta[:, idx], run.phi[:, idx]
    rad = 0.5 * (1 + np.cos(th))
    data = {
        "path_id": np.repeat(np.arange(k), m),
        "t": np.tile(run.times[idx], k),
        "theta": th.ravel(), "phi": ph.ravel(),
        "x": (rad * np.cos(ph)).ravel(), "y": (rad * np.sin(ph)).ravel(),
    }
    final = run.radius[:, -1]
    meta = {**run_meta(args, p), "derived": derived_meta(p, with_eopt=False),
            "final_radius_mean": float(final.mean()), "final_radius_std": float(final.std()),
            "flagged_paths": int(run.flagged.sum())}
    _emit(ResultEnvelope(meta, data), args, "csv")
    return EXIT_NUMERIC if run.flagged.any() else EXIT_OK


def cmd_qfunc(args) -> int:
    p = params_from_args(args)
    v = steady_state(p)
    grid = q_grid(v, args.n_theta, args.n_phi)
    th, ph = np.meshgrid(grid.theta_axis, grid.phi_axis, indexing="ij")
    meta = {**run_meta(args, p), "derived": derived_meta(p), "steady_state": [v.rx, v.ry, v.rz],
            "normalization": grid.normalization(), "x_name": "theta", "y_name": "phi"}
    data = {"x": th.ravel(), "y": ph.ravel(), "value": grid.values.ravel()}
    _emit(ResultEnvelope(meta, data), args, "csv")
    return EXIT_OK


def _workers(args) -> int:
    w = args.workers if args.workers is not None else default_workers()
    if w < 1:
        raise UsageError("--workers must be >= 1")
    return w


def _emit_grid(grid, args, p) -> int:
    meta = {**run_meta(args, p), "derived": derived_meta(p, with_eopt=p.detuning == 0 and p.sq_phase == 0)}
    _emit(grid_envelope(grid, meta), args, "csv")
    return EXIT_NUMERIC if grid.n_flagged else EXIT_OK


def cmd_sweep_eps(args) -> int:
    p = params_from_args(args)
    grid = sweep_s_vs_eps(p, args.eps_min, args.eps_max, args.n_eps, args.n_phi, workers=_workers(args))
    return _emit_grid(grid, args, p)


def cmd_sweep_delta(args) -> int:
    p = params_from_args(args)
    grid = sweep_s_vs_delta(p, args.delta_min, args.delta_max, args.n_delta, args.n_phi, workers=_workers(args))
    return _emit_grid(grid, args, p)


def cmd_tongue(args) -> int:
    p = params_from_args(args)
    grid = arnold_tongue(p, (args.eps_min, args.eps_max), (args.delta_min, args.delta_max),
                         args.n_eps, args.n_delta, workers=_workers(args))
    return _emit_grid(grid, args, p)


def cmd_eopt(args) -> int:
    p = params_from_args(args)
    eps = epsilon_opt(p, args.method)
    smax, star = s_max(steady_state(p.replace(drive=eps)))
    meta = {**run_meta(args, p), "derived": derived_meta(p, with_eopt=False)}
    data = {"eps_opt": [eps], "s_max": [smax], "phi_star": [star]}
    _emit(ResultEnvelope(meta, data), args, "json")
    return EXIT_OK


def cmd_selftest(args) -> int:
    checks = run_checks(args.seed)
    for c in checks:
        print(c.line())
    failed = [c for c in checks if not c.ok and not c.finding]
    print(f"{len(checks) - len(failed)}/{len(checks)} checks passed")
    return EXIT_NUMERIC if failed else EXIT_OK


COMMANDS = {
    "steady": cmd_steady, "cycle": cmd_cycle, "qfunc": cmd_qfunc, "sweep-eps": cmd_sweep_eps,
    "sweep-delta": cmd_sweep_delta, "tongue": cmd_tongue, "eopt": cmd_eopt, "selftest": cmd_selftest,
}


def run(argv=None) -> int:
    try:
        args = parse_args(sys.argv[1:] if argv is None else argv)
        return COMMANDS[args.command](args)
    except UsageError as e:
        print(e, file=sys.stderr)
        return EXIT_PARAM
    except ParameterError as e:
        flag = getattr(e, "field", None)
        hint = f" (flag --{_FLAG_FOR.get(flag, flag)})" if flag else ""
        print(f"sqzsync: parameter error{hint}: {e}", file=sys.stderr)
        return EXIT_PARAM
    except (NumericalError, ArithmeticError) as e:
        print(f"sqzsync: numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as e:
        print(f"sqzsync: {e}", file=sys.stderr)
        return EXIT_PARAM


_FLAG_FOR = {"sq_phase": "phi", "detuning": "delta", "drive": "eps", "gamma0": "gamma0-scale"}


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
