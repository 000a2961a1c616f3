"""Command-line harness.

Subcommands: simulate, pcf, alpha-table, boot-var, moments, ci-band,
coverage, variance-comparison, ci-suite.  Exit codes: 0 success,
2 configuration/parameter error, 3 numerical error, 4 data error.

All randomized commands take ``--seed``; identical arguments and seed
produce byte-identical output files for any ``--threads`` value.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .bootstrap import (
    SCHEMES,
    alpha_coefficients,
    bootstrap_statistics,
    bootstrap_variance_limit,
)
from .errors import ConfigError, DataError, NumericalError, ParameterError, PpbootError
from .experiments import (
    midpoint_grid,
    parse_f_spec,
    parse_lambda_spec,
    run_ci_suite,
    run_variance_comparison,
)
from .geometry import (
    Interval1,
    Window2,
    simulate_homogeneous_poisson,
    simulate_inhomogeneous_poisson,
)
from .intensity import confidence_band, coverage_experiment
from .moments import IntegrationSpec, s_moments_poisson
from .patternio import ingest_pattern, read_window, write_pattern
from .rng import RngSeed
from .twopoint import KernelFunction, estimate_product_density, two_point_statistic

_CLI_METHODS = {"mc": "bootstrap_mc", "closed": "bootstrap_closed_form", "exact": "exact_poisson"}


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _write_csv(path: str | None, header: list[str], rows: list[list]) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(v if isinstance(v, str) else _fmt(v) for v in row))
    text = "\n".join(lines) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _write_text(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _load_config(path: str) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"config {path} must be a JSON object")
    return doc


def _add_common(p: argparse.ArgumentParser, seed: bool = True) -> None:
    if seed:
        p.add_argument("--seed", type=int, default=0, help="base RNG seed (u64)")
    p.add_argument("--threads", type=int, default=1, help="worker threads (results identical)")
    p.add_argument("--out", type=str, default=None, help="output path (stdout if omitted)")


def _cmd_simulate(args) -> int:
    seed = RngSeed(args.seed)
    if (args.intensity is None) == (args.lambda_spec is None):
        raise ConfigError("simulate needs exactly one of --lambda or --lambda-spec")
    window = read_window(args.window)
    if args.intensity is not None:
        if not isinstance(window, Window2):
            raise ConfigError("--lambda (homogeneous) needs a planar window file")
        pattern = simulate_homogeneous_poisson(args.intensity, window, seed)
    else:
        if not isinstance(window, Interval1):
            raise ConfigError("--lambda-spec (inhomogeneous) needs an interval window file")
        intensity = parse_lambda_spec(args.lambda_spec, window)
        pattern = simulate_inhomogeneous_poisson(intensity, window, seed)
    if args.out is None:
        raise ConfigError("simulate needs --out to name the pattern CSV")
    write_pattern(pattern, args.out)
    sys.stderr.write(f"wrote {pattern.n} points to {args.out}\n")
    return 0


def _cmd_pcf(args) -> int:
    pattern = ingest_pattern(args.input, args.window)
    kernel = KernelFunction(args.kernel, args.bandwidth)
    if args.rmin <= 0 or args.rmax <= args.rmin or args.rsteps < 1:
        raise ConfigError("need 0 < rmin < rmax and rsteps >= 1")
    r_grid = np.linspace(args.rmin, args.rmax, args.rsteps)
    table = estimate_product_density(pattern, r_grid, kernel)
    _write_csv(args.out, ["r", "rho_hat"], [list(row) for row in table])
    return 0


def _cmd_alpha_table(args) -> int:
    if args.nmin < 1 or args.nmax < args.nmin:
        raise ConfigError("need 1 <= nmin <= nmax")
    rows = []
    for n in range(args.nmin, args.nmax + 1):
        a = alpha_coefficients(n, args.scheme)
        rows.append([n, a.alpha2, a.alpha3, a.alpha4])
    _write_csv(args.out, ["n", "alpha2", "alpha3", "alpha4"], rows)
    return 0


def _cmd_boot_var(args) -> int:
    pattern = ingest_pattern(args.input, args.window)
    f = parse_f_spec(args.f_spec, pattern.window)
    seed = RngSeed(args.seed)
    stats = bootstrap_statistics(pattern, f, args.n_resamples, args.scheme,
                                 seed, threads=args.threads)
    v_n = float(np.var(stats, ddof=1))
    dev = stats - stats.mean()
    m4 = float(np.mean(dev**4))
    v_n_err = 3.0 * float(np.sqrt(max(m4 - v_n**2, 0.0) / len(stats)))
    limit = bootstrap_variance_limit(pattern, f, args.scheme)
    doc = {
        "n": pattern.n,
        "N": args.n_resamples,
        "scheme": args.scheme,
        "seed": args.seed,
        "theta_hat": two_point_statistic(pattern, f),
        "v_star_N": v_n,
        "v_star_N_err": v_n_err,
        "limit_closed_form": limit,
    }
    _write_text(args.out, json.dumps(doc, sort_keys=True, indent=2) + "\n")
    return 0


def _cmd_moments(args) -> int:
    window = read_window(args.window)
    if not isinstance(window, Window2):
        raise ConfigError("moments needs a planar window file")
    f = parse_f_spec(args.f_spec, window)
    method = {"mc": "monte_carlo", "quad": "product_quadrature"}.get(args.method)
    if method is None:
        raise ConfigError(f"unknown method {args.method!r}; use mc or quad")
    spec = IntegrationSpec(method=method, sample_count=args.samples,
                           nodes_per_axis=args.nodes, seed=RngSeed(args.seed),
                           threads=args.threads)
    m = s_moments_poisson(args.intensity, window, f, spec)
    doc = {"s2": m.s2, "s3": m.s3, "s4": m.s4, "e_theta": m.e_theta,
           "lambda": m.lam, "f_spec": args.f_spec, "method": m.method,
           "errors": dict(m.errors)}
    _write_text(args.out, json.dumps(doc, sort_keys=True, indent=2) + "\n")
    return 0


def _cmd_ci_band(args) -> int:
    pattern = ingest_pattern(args.input, args.window)
    if pattern.dim != 1:
        raise ConfigError("ci-band needs a one-dimensional pattern")
    method = _CLI_METHODS.get(args.method)
    if method is None:
        raise ConfigError(f"unknown method {args.method!r}; use mc, closed, or exact")
    grid = midpoint_grid(pattern.window, args.grid_steps)
    band = confidence_band(pattern, args.h, args.alpha, grid, method,
                           mc_draws=args.mc_draws, seed=RngSeed(args.seed))
    rows = [
        [x, lam, lo, hi, flag if flag else "ok"]
        for x, lam, lo, hi, flag in zip(band.grid, band.lambda_hat, band.lo, band.hi, band.flags)
    ]
    _write_csv(args.out, ["x", "lambda_hat", "lo", "hi", "flag"], rows)
    return 0


def _cmd_coverage(args) -> int:
    interval = Interval1(*(float(v) for v in args.interval.split(",")))
    intensity = parse_lambda_spec(args.lambda_spec, interval)
    method = _CLI_METHODS.get(args.method, args.method)
    grid = midpoint_grid(interval, args.grid_steps)
    cov = coverage_experiment(intensity, interval, args.h, args.alpha, method,
                              args.reps, grid, RngSeed(args.seed),
                              mc_draws=args.mc_draws, threads=args.threads)
    rows = [
        [x, ct, se_t, cs, se_s]
        for x, ct, se_t, cs, se_s in zip(cov.grid, cov.coverage_true, cov.se_true,
                                         cov.coverage_smoothed, cov.se_smoothed)
    ]
    _write_csv(args.out, ["x", "coverage_true_lambda", "coverage_true_lambda_se",
                          "coverage_e_lambda_hat", "coverage_e_lambda_hat_se"], rows)
    return 0


def _cmd_variance_comparison(args) -> int:
    config = _load_config(args.config)
    record = run_variance_comparison(config, threads=args.threads)
    _write_text(args.out, record.to_json())
    sys.stderr.write(f"variance-comparison done in {record.wall_clock_s:.2f}s\n")
    return 0


def _cmd_ci_suite(args) -> int:
    config = _load_config(args.config)
    record = run_ci_suite(config, threads=args.threads)
    _write_text(args.out, record.to_json())
    sys.stderr.write(f"ci-suite done in {record.wall_clock_s:.2f}s\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ppboot",
                                     description="Pointwise bootstrap audits for point process statistics")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate a Poisson pattern and write CSV + window sidecar")
    p.add_argument("--lambda", dest="intensity", type=float, default=None,
                   help="homogeneous intensity (planar window)")
    p.add_argument("--lambda-spec", type=str, default=None,
                   help="inhomogeneous intensity, e.g. linear:50,20 (interval window)")
    p.add_argument("--window", type=str, required=True, help="window sidecar JSON")
    _add_common(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("pcf", help="product density estimate over a radius grid")
    p.add_argument("--input", required=True)
    p.add_argument("--window", default=None)
    p.add_argument("--rmin", type=float, required=True)
    p.add_argument("--rmax", type=float, required=True)
    p.add_argument("--rsteps", type=int, required=True)
    p.add_argument("--bandwidth", type=float, required=True)
    p.add_argument("--kernel", choices=["box", "epa"], default="box")
    _add_common(p, seed=False)
    p.set_defaults(func=_cmd_pcf)

    p = sub.add_parser("alpha-table", help="alpha coefficients per n")
    p.add_argument("--nmin", type=int, required=True)
    p.add_argument("--nmax", type=int, required=True)
    p.add_argument("--scheme", choices=list(SCHEMES), default="multinomial")
    _add_common(p, seed=False)
    p.set_defaults(func=_cmd_alpha_table)

    p = sub.add_parser("boot-var", help="bootstrap variance estimate and its closed-form limit")
    p.add_argument("--input", required=True)
    p.add_argument("--window", default=None)
    p.add_argument("--f-spec", required=True)
    p.add_argument("--N", dest="n_resamples", type=int, required=True)
    p.add_argument("--scheme", choices=list(SCHEMES), default="multinomial")
    _add_common(p)
    p.set_defaults(func=_cmd_boot_var)

    p = sub.add_parser("moments", help="integrated s2, s3, s4 and E theta for a Poisson truth")
    p.add_argument("--lambda", dest="intensity", type=float, required=True)
    p.add_argument("--window", required=True)
    p.add_argument("--f-spec", required=True)
    p.add_argument("--method", choices=["mc", "quad"], default="mc")
    p.add_argument("--samples", type=int, default=200_000)
    p.add_argument("--nodes", type=int, default=32)
    _add_common(p)
    p.set_defaults(func=_cmd_moments)

    p = sub.add_parser("ci-band", help="confidence band for the intensity from one pattern")
    p.add_argument("--input", required=True)
    p.add_argument("--window", default=None)
    p.add_argument("--h", type=float, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--method", choices=list(_CLI_METHODS), required=True)
    p.add_argument("--grid-steps", type=int, default=20)
    p.add_argument("--mc-draws", type=int, default=100_000)
    _add_common(p)
    p.set_defaults(func=_cmd_ci_band)

    p = sub.add_parser("coverage", help="empirical band coverage under a known intensity")
    p.add_argument("--lambda-spec", required=True)
    p.add_argument("--interval", default="0,1", help="lo,hi")
    p.add_argument("--h", type=float, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--method", required=True,
                   help="mc, closed, exact, or a full method name (e.g. oracle_true_t)")
    p.add_argument("--reps", type=int, required=True)
    p.add_argument("--grid-steps", type=int, default=9)
    p.add_argument("--mc-draws", type=int, default=100_000)
    _add_common(p)
    p.set_defaults(func=_cmd_coverage)

    p = sub.add_parser("variance-comparison",
                       help="bootstrap limit vs true variance experiment (config-driven)")
    p.add_argument("--config", required=True)
    _add_common(p, seed=False)
    p.set_defaults(func=_cmd_variance_comparison)

    p = sub.add_parser("ci-suite", help="bands + coverage tables for all methods (config-driven)")
    p.add_argument("--config", required=True)
    _add_common(p, seed=False)
    p.set_defaults(func=_cmd_ci_suite)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ParameterError) as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return 2
    except NumericalError as exc:
        sys.stderr.write(f"numerical error: {exc}\n")
        return 3
    except DataError as exc:
        sys.stderr.write(f"data error: {exc}\n")
        return 4
    except PpbootError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
