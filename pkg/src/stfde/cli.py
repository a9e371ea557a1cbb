"""Benchmark command line: run marches, write reports, optional dense diagnostics.

Config file (YAML)::

    problem: example1            # or a mapping, see below
    sizes: [16, 32, [64, 128]]   # m (with n = m) or [m, n] pairs
    methods: [gmres, pgmres, cgnr, pcgnr]
    ell: 8
    restart: 20
    tol: 1.0e-7
    iter_max: 500
    output:
      path: results.csv
      format: csv                # csv | json
    diagnostics: false

A constant-coefficient problem is given as a mapping::

    problem:
      name: constant
      alpha: 0.8
      beta: 0.6
      gamma: 1.8
      d_plus: 1.0
      d_minus: 1.0
      e_plus: 1.0
      e_minus: 1.0
      source: 0.0

Command-line flags override config values.
"""
import argparse
import logging
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np
import yaml

from .diagnostics import DIAGNOSTICS_SIZE_LIMIT, spectrum_diagnostics
from .krylov import METHODS, SolverConfig
from .problem import BUILTIN_PROBLEMS, Grid
from .report import (
    BenchmarkRecord,
    format_table,
    write_benchmark_csv,
    write_benchmark_json,
    write_spectrum_csv,
    write_summary_csv,
)
from .timestepper import ConvergenceError, march

log = logging.getLogger("stfde")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NOT_CONVERGED = 3


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    problem: object = "example1"
    sizes: List[Tuple[int, int]] = field(default_factory=list)
    methods: List[str] = field(default_factory=lambda: ["pgmres"])
    ell: int = 8
    restart: int = 20
    tol: float = 1e-7
    iter_max: int = 500
    out: Optional[str] = None
    format: str = "csv"
    diagnostics: bool = False
    seed: Optional[int] = None

    def validate(self):
        if self.format not in ("csv", "json"):
            raise ConfigError(f"field 'output.format': expected csv or json, got {self.format!r}")
        for i, method in enumerate(self.methods):
            if method not in METHODS:
                raise ConfigError(f"field 'methods[{i}]': unknown method {method!r}")
        for i, (m, n) in enumerate(self.sizes):
            if m < 2 or n < 1:
                raise ConfigError(f"field 'sizes[{i}]': need m >= 2 and n >= 1, got ({m}, {n})")
            if self.diagnostics and m > DIAGNOSTICS_SIZE_LIMIT:
                raise ConfigError(
                    f"field 'sizes[{i}]': diagnostics require m <= {DIAGNOSTICS_SIZE_LIMIT}, got {m}"
                )
        if self.ell < 1:
            raise ConfigError(f"field 'ell': must be >= 1, got {self.ell}")
        try:
            SolverConfig(tol=self.tol, restart=self.restart, iter_max=self.iter_max)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        build_problem(self.problem)
        return self


def build_problem(spec):
    if isinstance(spec, str):
        spec = {"name": spec}
    if not isinstance(spec, dict) or "name" not in spec:
        raise ConfigError("field 'problem': expected a built-in name or a mapping with 'name'")
    params = dict(spec)
    name = params.pop("name")
    if name not in BUILTIN_PROBLEMS:
        raise ConfigError(f"field 'problem.name': unknown problem {name!r}; "
                          f"choose from {sorted(BUILTIN_PROBLEMS)}")
    try:
        return BUILTIN_PROBLEMS[name](**params)
    except TypeError as exc:
        raise ConfigError(f"field 'problem': {exc}") from None
    except ValueError as exc:
        raise ConfigError(f"field 'problem': {exc}") from None


def _parse_sizes(raw, where="sizes"):
    sizes = []
    if not isinstance(raw, list):
        raise ConfigError(f"field '{where}': expected a list")
    for i, item in enumerate(raw):
        if isinstance(item, int) and not isinstance(item, bool):
            sizes.append((item, item))
        elif (isinstance(item, list) and len(item) == 2
              and all(isinstance(v, int) and not isinstance(v, bool) for v in item)):
            sizes.append((item[0], item[1]))
        else:
            raise ConfigError(f"field '{where}[{i}]': expected an integer m or a pair [m, n], got {item!r}")
    return sizes


def load_config(path):
    """Read a YAML run config; errors name the line or the offending field."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        data = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ConfigError(f"{path}: YAML syntax error{where}: {getattr(exc, 'problem', exc)}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")

    known = {"problem", "sizes", "methods", "ell", "restart", "tol", "iter_max",
             "output", "diagnostics", "seed"}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"{path}: unknown field(s) {unknown}")

    cfg = RunConfig()
    if "problem" in data:
        cfg.problem = data["problem"]
    if "sizes" in data:
        cfg.sizes = _parse_sizes(data["sizes"])
    if "methods" in data:
        methods = data["methods"]
        cfg.methods = [methods] if isinstance(methods, str) else list(methods)
    for key, kind in (("ell", int), ("restart", int), ("iter_max", int), ("tol", float), ("seed", int)):
        if key in data:
            value = data[key]
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"field '{key}': expected a number, got {value!r}")
            if kind is int and value != int(value):
                raise ConfigError(f"field '{key}': expected an integer, got {value!r}")
            setattr(cfg, key, kind(value))
    if "diagnostics" in data:
        if not isinstance(data["diagnostics"], bool):
            raise ConfigError(f"field 'diagnostics': expected true/false, got {data['diagnostics']!r}")
        cfg.diagnostics = data["diagnostics"]
    output = data.get("output", {})
    if not isinstance(output, dict):
        raise ConfigError("field 'output': expected a mapping with 'path' and 'format'")
    cfg.out = output.get("path", cfg.out)
    cfg.format = output.get("format", cfg.format)
    return cfg


def run_benchmark(config):
    """Run every (size, method) pair; failures are recorded and the sweep continues.

    Returns the list of :class:`~stfde.report.BenchmarkRecord`.
    """
    problem = build_problem(config.problem)
    records = []
    for m, n in config.sizes:
        grid = Grid.for_problem(problem, m, n)
        for method in config.methods:
            solver = SolverConfig(tol=config.tol, restart=config.restart,
                                  iter_max=config.iter_max, method=method)
            try:
                _, report = march(problem, grid, solver, config.ell)
            except ConvergenceError as exc:
                log.warning("m=%d n=%d %s: %s", m, n, method, exc)
                report = exc.report
            records.append(BenchmarkRecord(
                m=m, n=n, method=method, ell=config.ell, restart=config.restart,
                tol=config.tol, avg_iterations=report.avg_iterations,
                sup_error=report.sup_error_final, wall_time_s=report.wall_time_seconds,
                converged=report.converged,
            ))
    return records


def run_diagnostics(config, out_path):
    problem = build_problem(config.problem)
    summaries = []
    for m, n in config.sizes:
        diag = spectrum_diagnostics(problem, Grid.for_problem(problem, m, n), config.ell, k=1)
        summaries.append(diag.summary())
        if out_path is not None:
            write_spectrum_csv(out_path.with_name(f"{out_path.stem}_spectra_m{m}_n{n}.csv"),
                               diag.eigenvalues)
    if out_path is not None:
        write_summary_csv(out_path.with_name(f"{out_path.stem}_conditions.csv"), summaries)
    return summaries


def build_parser():
    parser = argparse.ArgumentParser(
        prog="stfde-bench",
        description="Solve the space-time fractional advection-diffusion benchmark and report "
                    "iteration counts, errors and timings.",
    )
    parser.add_argument("--config", help="YAML run configuration")
    parser.add_argument("--problem", help="built-in problem name (example1, constant)")
    parser.add_argument("--m", type=int, nargs="+", help="spatial intervals (one run per value)")
    parser.add_argument("--n", type=int, nargs="+", help="time steps (defaults to --m)")
    parser.add_argument("--method", nargs="+", choices=METHODS)
    parser.add_argument("--ell", type=int, help="preconditioner bandwidth parameter (default 8)")
    parser.add_argument("--restart", type=int, help="GMRES restart length (default 20)")
    parser.add_argument("--tol", type=float, help="relative residual tolerance (default 1e-7)")
    parser.add_argument("--iter-max", type=int, help="cap on GMRES restart cycles (default 500)")
    parser.add_argument("--out", help="report path")
    parser.add_argument("--format", choices=("csv", "json"))
    parser.add_argument("--diagnostics", action="store_true",
                        help="also write dense spectra and condition numbers (m <= 1024)")
    parser.add_argument("--seed", type=int, help="seed for randomized checks")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def config_from_args(args):
    cfg = load_config(args.config) if args.config else RunConfig()
    if args.problem:
        cfg.problem = args.problem
    if args.m:
        ns = args.n or args.m
        if len(ns) != len(args.m):
            raise ConfigError("--n must list as many values as --m")
        cfg.sizes = list(zip(args.m, ns))
    elif args.n:
        raise ConfigError("--n given without --m")
    if args.method:
        cfg.methods = list(args.method)
    for key in ("ell", "restart", "tol", "iter_max", "out", "format", "seed"):
        value = getattr(args, key)
        if value is not None:
            setattr(cfg, key, value)
    if args.diagnostics:
        cfg.diagnostics = True
    return cfg.validate()


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        config = config_from_args(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if config.seed is not None:
        np.random.seed(config.seed)

    records = run_benchmark(config)
    out_path = Path(config.out) if config.out else None
    if out_path is not None:
        if config.format == "csv":
            write_benchmark_csv(out_path, records)
        else:
            write_benchmark_json(out_path, records, metadata={"problem": str(config.problem)})
    print(format_table(records))

    if config.diagnostics:
        for row in run_diagnostics(config, out_path):
            print(f"m={row['m']} n={row['n']} ell={row['ell']} k={row['k']}: "
                  + ", ".join(f"{key[5:]}={row[key]:.4g}" for key in row if key.startswith("cond_")))

    if any(not r.converged for r in records):
        return EXIT_NOT_CONVERGED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
