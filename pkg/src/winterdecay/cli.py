"""Command-line front end.

Exit codes: 0 ok, 1 configuration error, 2 resonance solver failure,
3 physics violation, 4 Gauss-sum classification mismatch.
"""

import argparse
from dataclasses import asdict, dataclass
import json
import math
from pathlib import Path
import sys

import numpy as np

from . import __version__
from . import asymptotics as asym
from . import propagator as prop
from .resonance import ModelParams, ResonanceError, find_resonances
from .selfcheck import MUTATIONS, run_selfcheck
from .serialize import (ConfigError, format_table, parse_number, parse_time_list,
                        parse_time_value, read_config_file, read_state_file, write_text)
from .states import InitialState, build_spectral, q_squared

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_PHYSICS, EXIT_CLASS = 0, 1, 2, 3, 4

P_BOUND_TOL = 1e-6
P0_TOL = 1e-2
SNAPSHOT_TIMES = "T/8,T/16,T/27"


@dataclass
class RunConfig:
    alpha: float = 500.0
    radius: float = 1.0
    nmax: int = 1000
    state: str = None
    t_start: str = "0"
    t_stop: str = "1.2T"
    t_count: int = 2000
    times: str = None
    r_count: int = 800
    smear: str = "1/200"
    format: str = "csv"
    out: str = None
    threads: int = 1

    def validate(self):
        self.params()
        if int(self.t_count) < 1 or int(self.r_count) < 2:
            raise ConfigError("t-count must be >= 1 and r-count >= 2")
        if int(self.threads) < 1:
            raise ConfigError("threads must be >= 1")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"unknown format {self.format!r}")

    def params(self):
        try:
            return ModelParams(float(self.alpha), float(self.radius), int(self.nmax))
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    def initial(self, default="linear"):
        kind = self.state or default
        R = float(self.radius)
        if kind == "linear":
            return InitialState.linear(R)
        if kind == "constant":
            return InitialState.constant(R)
        if kind.startswith("file:"):
            r, phi = read_state_file(kind[5:])
            try:
                return InitialState.tabulated(r, phi, R)
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
        raise ConfigError(f"unknown state {kind!r}")

    def time_grid(self):
        T = self.params().revival_period
        if self.times:
            times = np.asarray(parse_time_list(self.times, T))
        else:
            start = parse_time_value(self.t_start, T)
            stop = parse_time_value(self.t_stop, T)
            times = np.linspace(start, stop, int(self.t_count))
        if np.any(times < 0):
            raise ConfigError("times must be >= 0")
        return times

    def metadata(self, command, **extra):
        meta = {"command": command, "version": __version__, **asdict(self)}
        meta.update(extra)
        return meta


def _emit(text, config, suffix=None):
    path = config.out
    if path is not None and suffix is not None:
        p = Path(path)
        path = str(p.with_name(f"{p.stem}_{suffix}{p.suffix}"))
    write_text(text, path, sys.stdout)


def cmd_resonances(config):
    params = config.params()
    res = find_resonances(params)
    k = res.k
    q2 = q_squared(k, params)
    cols = {"n": res.n, "re_k": k.real, "im_k": k.imag, "residual_abs": res.residuals(),
            "re_Q2": np.real(q2), "im_Q2": np.imag(q2)}
    _emit(format_table(cols, config.metadata("resonances"), config.format), config)
    return EXIT_OK


def cmd_decay(config):
    params = config.params()
    T = params.revival_period
    times = config.time_grid()
    spectral = build_spectral(params, config.initial())
    curve = prop.decay_curve(spectral, times, threads=int(config.threads))
    window = parse_number(config.smear) * T
    try:
        smeared = prop.smeared_log_derivative(curve, window)
    except (prop.EmptyWindowError, ValueError):
        smeared = np.full(times.shape, np.nan)
    cols = {"t": times, "t_over_T": times / T, "P": curve.P, "Pdot": curve.Pdot,
            "Pdot_over_P_smeared": smeared}
    meta = config.metadata("decay", revival_period=T, smear_window=window)
    _emit(format_table(cols, meta, config.format), config)

    positive = times > 0
    bad = positive & ((curve.P < -P_BOUND_TOL) | (curve.P > 1 + P_BOUND_TOL))
    bad |= ~positive & (np.abs(curve.P - 1) > P0_TOL)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        print(f"error: P({times[i]:.6g}) = {curve.P[i]:.10g} outside its bounds", file=sys.stderr)
        return EXIT_PHYSICS
    return EXIT_OK


def cmd_snapshot(config):
    params = config.params()
    T = params.revival_period
    spectral = build_spectral(params, config.initial(default="constant"))
    labels = (config.times or SNAPSHOT_TIMES).split(",")
    r = np.linspace(0.0, params.R, int(config.r_count))
    for i, label in enumerate(labels):
        t = parse_time_value(label, T)
        if t < 0:
            raise ConfigError("snapshot times must be >= 0")
        snap = prop.snapshot(spectral, t, r)
        meta = config.metadata("snapshot", t=t, t_label=label.strip(), revival_period=T)
        _emit(format_table({"r": r, "density": snap.density}, meta, config.format),
              config, suffix=i if len(labels) > 1 else None)
    return EXIT_OK


def cmd_derivative_scan(config):
    params = config.params()
    T = params.revival_period
    times = config.time_grid()
    times = times[times > 0]
    if times.size == 0:
        raise ConfigError("derivative scan needs times > 0")
    spectral = build_spectral(params, config.initial())
    h = 1e-6 * T
    curve = prop.decay_curve(spectral, times, threads=int(config.threads))
    fd = (prop.decay_law(times + h, spectral) - prop.decay_law(np.maximum(times - h, 0), spectral)) \
        / (times + h - np.maximum(times - h, 0))
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.abs(curve.Pdot - fd) / np.abs(fd)
    cols = {"t": times, "t_over_T": times / T, "P": curve.P, "Pdot": curve.Pdot,
            "Pdot_fd": fd, "rel_error": rel}
    _emit(format_table(cols, config.metadata("derivative-scan", revival_period=T, fd_step=h),
                       config.format), config)
    return EXIT_OK


def cmd_gauss(config, t_spec, L_max):
    t = asym.parse_time(t_spec)
    result = asym.classify_growth(t, L_max=int(L_max), check_parity=False)
    payload = {"t": t_spec, "class": result.growth_class, "exponent": result.exponent,
               "fit_range": list(result.fit_range)}
    if result.predicted_class is not None:
        payload["parity_class"] = result.predicted_class
    _emit(json.dumps(payload, sort_keys=True) + "\n", config)
    if result.predicted_class is not None and result.predicted_class != result.growth_class:
        print(f"error: fitted class {result.growth_class} but parity rule predicts "
              f"{result.predicted_class}", file=sys.stderr)
        return EXIT_CLASS
    return EXIT_OK


def cmd_limit(config, alphas):
    alphas = [parse_number(a) for a in alphas.split(",") if a.strip()]
    report = asym.derivative_limit_check(alphas, R=float(config.radius), n_max=int(config.nmax),
                                         initial=config.initial())
    payload = {"metadata": config.metadata("limit"), "rows": report.to_dicts(),
               "decreasing": report.decreasing}
    _emit(json.dumps(payload, sort_keys=True, indent=1) + "\n", config)
    if report.decreasing is not None:
        word = "decreasing" if report.decreasing else "NOT decreasing"
        print(f"|Pdot_exact - target| is {word} in alpha", file=sys.stderr)
    return EXIT_OK


def cmd_selfcheck(config, mutation=None):
    results = run_selfcheck(config.params(), config.initial(), mutation)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}: {r.detail}")
    failed = [r.name for r in results if not r.passed]
    if failed:
        print("failed: " + ", ".join(failed), file=sys.stderr)
        return 1
    return EXIT_OK


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("model and grids")
    g.add_argument("--config", help="key=value file; flags override its entries")
    g.add_argument("--alpha", type=float)
    g.add_argument("--radius", type=float)
    g.add_argument("--nmax", type=int)
    g.add_argument("--state", help="linear | constant | file:PATH (two-column CSV r,phi0)")
    g.add_argument("--t-start", dest="t_start", help="start time, e.g. 0 or T/8")
    g.add_argument("--t-stop", dest="t_stop", help="stop time, e.g. 1.2T")
    g.add_argument("--t-count", dest="t_count", type=int)
    g.add_argument("--times", help="comma list of times, e.g. T/8,T/16,0.01")
    g.add_argument("--r-count", dest="r_count", type=int)
    g.add_argument("--smear", help="smearing window as a fraction of T (default 1/200)")
    g.add_argument("--format", choices=("csv", "json"))
    g.add_argument("--out", help="output path (default: standard output)")
    g.add_argument("--threads", type=int)

    parser = argparse.ArgumentParser(prog="winterdecay", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("resonances", parents=[common], help="resonance table")
    sub.add_parser("decay", parents=[common], help="decay law P(t) and its derivative")
    sub.add_parser("snapshot", parents=[common], help="densities |phi(r,t)|^2")
    sub.add_parser("derivative-scan", parents=[common], help="analytic vs finite-difference dP/dt")
    gp = sub.add_parser("gauss", parents=[common], help="growth class of a quadratic Gauss sum")
    gp.add_argument("t", help="time in units of T, fraction (1/3) or decimal")
    gp.add_argument("--lmax", type=int, default=100000)
    lp = sub.add_parser("limit", parents=[common], help="dP/dt at the moving period vs alpha")
    lp.add_argument("--alphas", default="500,2000,8000")
    sp = sub.add_parser("selfcheck", parents=[common], help="fast invariant suite")
    sp.add_argument("--mutate", choices=MUTATIONS, help="corrupt the spectral data first")
    return parser


_CONFIG_KEYS = tuple(RunConfig.__dataclass_fields__)
_INT_KEYS = ("nmax", "t_count", "r_count", "threads")
_FLOAT_KEYS = ("alpha", "radius")


def make_config(args):
    values = {}
    if args.config:
        for key, value in read_config_file(args.config).items():
            if key not in _CONFIG_KEYS:
                raise ConfigError(f"unknown config key {key!r}")
            values[key] = value
    for key in _CONFIG_KEYS:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    try:
        for key in _INT_KEYS:
            if key in values:
                values[key] = int(values[key])
        for key in _FLOAT_KEYS:
            if key in values:
                values[key] = float(values[key])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    config = RunConfig(**values)
    if not math.isfinite(config.alpha):
        raise ConfigError("alpha must be finite")
    config.validate()
    return config


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        config = make_config(args)
        if args.command == "resonances":
            return cmd_resonances(config)
        if args.command == "decay":
            return cmd_decay(config)
        if args.command == "snapshot":
            return cmd_snapshot(config)
        if args.command == "derivative-scan":
            return cmd_derivative_scan(config)
        if args.command == "gauss":
            return cmd_gauss(config, args.t, args.lmax)
        if args.command == "limit":
            return cmd_limit(config, args.alphas)
        return cmd_selfcheck(config, args.mutate)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ResonanceError as exc:
        index = getattr(exc, "index", None) or getattr(exc, "indices", None)
        print(f"error: resonance solver failed at n={index}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except prop.RealnessError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PHYSICS


if __name__ == "__main__":
    sys.exit(main())
