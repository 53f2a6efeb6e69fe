"""Command-line entry point.

Subcommands: ``run`` (single trajectory, one filter, trace.csv), ``mc``
(Monte Carlo report: rmse.csv, mk.csv, timing.csv), ``verify`` (oracle
suites), ``scenarios`` (list built-ins). Configuration comes from an
optional flat key=value file plus flags, flags winning. All floats are
printed with 17 significant digits so identical invocations produce
byte-identical data CSVs; timing.csv and the timing section of summary.json
record wall-clock measurements and are exempt from that contract.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, NumericalError
from .harness import (SCENARIOS, Scenario, affine_exactness_error, build_scenario,
                      dominance_oracle, parameter_scan_oracle,
                      random_linear_instance, random_nonlinear_instance,
                      run_monte_carlo, run_trace)

SCHEMA_VERSION = 1

# Keys accepted in config files, with their parsers. CLI flags mirror these.
_KEY_PARSERS = {}


def _parse_bool(text: str) -> bool:
    low = str(text).strip().lower()
    if low in ("true", "1", "yes"):
        return True
    if low in ("false", "0", "no"):
        return False
    raise ConfigurationError(f"expected a boolean, got {text!r}")


def _parse_floats(text: str) -> tuple:
    try:
        return tuple(float(part) for part in str(text).split(","))
    except ValueError:
        raise ConfigurationError(f"expected comma-separated floats, got {text!r}")


def _parse_names(text: str) -> tuple:
    return tuple(part.strip() for part in str(text).split(",") if part.strip())


_KEY_PARSERS.update({
    "scenario": str,
    "filters": _parse_names,
    "filter": str,
    "runs": int,
    "steps": int,
    "seed": int,
    "out": str,
    "beta_scale": float,
    "xi_scale": float,
    "ut_a": float,
    "ut_b": float,
    "ut_kappa": float,
    "e_co2": float,
    "calibrated": _parse_bool,
    "calibration_offset": float,
    "sensor_count": int,
    "x0_true": _parse_floats,
    "x_hat0": _parse_floats,
    "phi0": float,
})

# Scenario-builder keyword arguments each scenario accepts from a RunConfig.
_SCENARIO_KEYS = {
    "o2": ("e_co2", "calibrated", "calibration_offset", "beta_scale",
           "sensor_count", "x0_true", "x_hat0", "phi0"),
    "nonlinear": ("xi_scale", "ut_a", "ut_b", "ut_kappa",
                  "x0_true", "x_hat0", "phi0"),
}


@dataclass
class RunConfig:
    """Merged file + flag configuration for run/mc."""

    scenario: str = "o2"
    filters: tuple | None = None
    filter: str | None = None
    runs: int = 100
    steps: int | None = None
    seed: int = 0
    out: str = "out"
    overrides: dict = field(default_factory=dict)

    def build(self) -> Scenario:
        if self.scenario not in SCENARIOS:
            raise ConfigurationError(
                f"unknown scenario {self.scenario!r}; available: {sorted(SCENARIOS)}")
        accepted = _SCENARIO_KEYS[self.scenario]
        rejected = sorted(set(self.overrides) - set(accepted))
        if rejected:
            raise ConfigurationError(
                f"scenario {self.scenario!r} does not accept: {', '.join(rejected)}")
        kwargs = dict(self.overrides)
        if self.scenario == "o2":
            for key in ("x0_true", "x_hat0"):
                if key in kwargs:
                    vals = kwargs[key]
                    if len(vals) != 1:
                        raise ConfigurationError(
                            f"{key} must be a single value for the o2 scenario")
                    kwargs[key] = float(vals[0])
        elif self.scenario == "nonlinear":
            if "phi0" in kwargs:
                kwargs["phi0"] = float(kwargs["phi0"]) * np.eye(2)
        return build_scenario(self.scenario, **kwargs)


def load_config_file(path: str) -> dict:
    """Flat key=value lines; # starts a comment; whitespace ignored."""
    values = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config file {path}: {exc}")
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(
                f"{path}:{lineno}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _KEY_PARSERS:
            raise ConfigurationError(
                f"{path}:{lineno}: unknown key {key!r}")
        values[key] = _KEY_PARSERS[key](value.strip())
    return values


def make_run_config(args: argparse.Namespace) -> RunConfig:
    merged = {}
    if getattr(args, "config", None):
        merged.update(load_config_file(args.config))
    for key, parser in _KEY_PARSERS.items():
        flag = getattr(args, key, None)
        if flag is not None:
            merged[key] = parser(flag) if isinstance(flag, str) else flag
    cfg = RunConfig()
    for key in ("scenario", "filters", "filter", "runs", "steps", "seed", "out"):
        if key in merged:
            setattr(cfg, key, merged.pop(key))
    cfg.overrides = merged
    if cfg.runs < 1:
        raise ConfigurationError(f"runs must be >= 1, got {cfg.runs}")
    if cfg.steps is not None and cfg.steps < 1:
        raise ConfigurationError(f"steps must be >= 1, got {cfg.steps}")
    return cfg


def _fmt(value) -> str:
    return "%.17g" % float(value)


def _write_csv(path: str, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def _write_summary(path: str, payload: dict) -> None:
    payload = dict(payload, schema_version=SCHEMA_VERSION)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _cmd_run(args) -> int:
    cfg = make_run_config(args)
    scenario = cfg.build()
    name = cfg.filter or scenario.filters[0]
    traj, trace = run_trace(scenario, filter_name=name, steps=cfg.steps,
                            seed=cfg.seed)
    os.makedirs(cfg.out, exist_ok=True)
    n = scenario.model.n
    header = (["k"]
              + [f"x_true_{i}" for i in range(1, n + 1)]
              + [f"x_hat_{i}" for i in range(1, n + 1)]
              + ["m_k", "tr_phi"])
    rows = []
    for k in range(1, traj.steps + 1):
        rows.append([str(k)]
                    + [_fmt(v) for v in traj.states[k]]
                    + [_fmt(v) for v in trace.x_hat[k - 1]]
                    + [str(int(trace.mk[k - 1])), _fmt(trace.tr_phi[k - 1])])
    _write_csv(os.path.join(cfg.out, "trace.csv"), header, rows)
    _write_summary(os.path.join(cfg.out, "summary.json"), {
        "command": "run",
        "scenario": scenario.name,
        "filter": name,
        "steps": traj.steps,
        "seed": cfg.seed,
        "rmse": float(np.sqrt(np.mean(trace.sq_err))),
        "mean_mk": float(np.mean(trace.mk)),
        "final_tr_phi": float(trace.tr_phi[-1]),
    })
    return 0


def _cmd_mc(args) -> int:
    cfg = make_run_config(args)
    scenario = cfg.build()
    reports = run_monte_carlo(scenario, filters=cfg.filters, runs=cfg.runs,
                              base_seed=cfg.seed, steps=cfg.steps)
    names = list(reports)
    os.makedirs(cfg.out, exist_ok=True)
    steps = reports[names[0]].steps
    ks = [str(k) for k in range(1, steps + 1)]
    _write_csv(os.path.join(cfg.out, "rmse.csv"),
               ["k"] + [f"rmse_{n}" for n in names],
               ([ks[i]] + [_fmt(reports[n].rmse[i]) for n in names]
                for i in range(steps)))
    _write_csv(os.path.join(cfg.out, "mk.csv"),
               ["k"] + [f"mean_mk_{n}" for n in names],
               ([ks[i]] + [_fmt(reports[n].mean_mk[i]) for n in names]
                for i in range(steps)))
    _write_csv(os.path.join(cfg.out, "timing.csv"),
               ["filter", "mean_step_seconds"],
               ([n, _fmt(np.mean(reports[n].mean_step_seconds))] for n in names))
    _write_summary(os.path.join(cfg.out, "summary.json"), {
        "command": "mc",
        "scenario": scenario.name,
        "runs": cfg.runs,
        "steps": steps,
        "seed": cfg.seed,
        "filters": names,
        "mean_rmse": {n: reports[n].mean_rmse() for n in names},
        "mean_mk": {n: float(np.mean(reports[n].mean_mk)) for n in names},
        "failed_runs": {n: len(reports[n].failures) for n in names},
        "timing": {n: float(np.mean(reports[n].mean_step_seconds))
                   for n in names},
    })
    return 0


def _verify_dominance(samples: int, instances: int) -> str | None:
    for build, label, base in ((random_linear_instance, "linear", 0),
                               (random_nonlinear_instance, "nonlinear", 10_000)):
        for i in range(instances):
            report = build(base + i)
            tol = 1e-8 * float(np.trace(report.new_state.Phi_hat))
            violation = dominance_oracle(report, delta_samples=samples, seed=i)
            if violation > tol:
                return (f"dominance violated on {label} instance {i}: "
                        f"max eigenvalue {violation:.3e} > tol {tol:.3e}")
    return None


def _verify_scan(instances: int) -> str | None:
    # One multiplicative grid step of the 200-point scan, with headroom for
    # the optimum landing between grid points.
    step = (20.0 / 1.001) ** (1.0 / 199.0)
    bound = step ** 1.5
    rng = np.random.default_rng(2026)
    for kind in ("alpha", "epsilon"):
        for i in range(instances):
            m = int(rng.integers(1, 5))
            if kind == "alpha":
                matrix = np.diag(rng.uniform(0.1, 3.0, size=m))
                expected = 2.0 * float(np.diag(matrix).max())
            else:
                root = rng.normal(size=(m, m))
                matrix = root @ root.T + 0.05 * np.eye(m)
                expected = 2.0 * float(np.linalg.eigvalsh(matrix)[-1])
            got = parameter_scan_oracle(kind, matrix)
            ratio = got / expected
            if not (1.0 / bound <= ratio <= bound):
                return (f"{kind} scan argmin off: instance {i}, got {got:.6g}, "
                        f"expected {expected:.6g} within one grid step")
    return None


def _verify_affine(instances: int) -> str | None:
    for i in range(instances):
        err = affine_exactness_error(i)
        if err > 1e-10:
            return (f"unscented prediction inexact on affine system {i}: "
                    f"relative error {err:.3e} > 1e-10")
    return None


def _cmd_verify(args) -> int:
    suites = {
        "dominance": lambda: _verify_dominance(args.samples, args.instances or 50),
        "scan": lambda: _verify_scan(args.instances or 20),
        "affine": lambda: _verify_affine(args.instances or 50),
    }
    chosen = list(suites) if args.suite == "all" else [args.suite]
    failed = False
    for name in chosen:
        reason = suites[name]()
        if reason is None:
            print(f"{name}: PASS")
        else:
            print(f"{name}: FAIL: {reason}")
            failed = True
    return 1 if failed else 0


def _cmd_scenarios(_args) -> int:
    for name in sorted(SCENARIOS):
        print(name)
    return 0


def _add_config_flags(parser: argparse.ArgumentParser, with_runs: bool) -> None:
    parser.add_argument("--config", help="flat key=value config file")
    parser.add_argument("--scenario", help="scenario name (see `scenarios`)")
    parser.add_argument("--steps", type=int, help="trajectory length")
    parser.add_argument("--seed", type=int, help="base seed")
    parser.add_argument("--out", help="output directory")
    if with_runs:
        parser.add_argument("--runs", type=int, help="Monte Carlo run count")
        parser.add_argument("--filters", help="comma-separated filter names")
    else:
        parser.add_argument("--filter", help="filter to trace")
    parser.add_argument("--beta-scale", dest="beta_scale", type=float,
                        help="linear-filter beta rule scale in (1, 2]")
    parser.add_argument("--xi-scale", dest="xi_scale", type=float,
                        help="nonlinear-filter xi rule scale in (0, 2]")
    parser.add_argument("--ut-a", dest="ut_a", type=float)
    parser.add_argument("--ut-b", dest="ut_b", type=float)
    parser.add_argument("--ut-kappa", dest="ut_kappa", type=float)
    parser.add_argument("--e-co2", dest="e_co2", type=float,
                        help="exhaled CO2 partial pressure (o2 scenario)")
    parser.add_argument("--calibrated", dest="calibrated",
                        help="true/false: shift the o2 drive into the sensor band")
    parser.add_argument("--calibration-offset", dest="calibration_offset",
                        type=float)
    parser.add_argument("--sensor-count", dest="sensor_count", type=int)
    parser.add_argument("--x0", dest="x0_true", help="true initial state (csv)")
    parser.add_argument("--xhat0", dest="x_hat0", help="initial estimate (csv)")
    parser.add_argument("--phi0", dest="phi0", type=float,
                        help="initial covariance scale")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="binklf",
        description="Kalman-like state estimation from one-bit sensor banks")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="single trajectory, one filter")
    _add_config_flags(p_run, with_runs=False)
    p_run.set_defaults(func=_cmd_run)

    p_mc = sub.add_parser("mc", help="Monte Carlo RMSE/m_k/timing report")
    _add_config_flags(p_mc, with_runs=True)
    p_mc.set_defaults(func=_cmd_mc)

    p_verify = sub.add_parser("verify", help="run the oracle suites")
    p_verify.add_argument("--suite", default="all",
                          choices=("dominance", "scan", "affine", "all"))
    p_verify.add_argument("--samples", type=int, default=1000,
                          help="uncertainty samples per dominance instance")
    p_verify.add_argument("--instances", type=int, default=None,
                          help="instances per suite (defaults per suite)")
    p_verify.set_defaults(func=_cmd_verify)

    p_sc = sub.add_parser("scenarios", help="list built-in scenarios")
    p_sc.set_defaults(func=_cmd_scenarios)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
