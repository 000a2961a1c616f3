"""Reproducible experiment drivers tying the modules together.

``run_variance_comparison`` reproduces the head-to-head between what the
bootstrap estimates and the true estimator variance: it simulates
patterns from a homogeneous Poisson truth, evaluates the closed-form
bootstrap variance limit on each, and compares the Monte Carlo sample
variance of the statistic against the integrated targets 4*s3 + 2*s2
(truth) and 4*s3 + 6*s2 (what the bootstrap converges to), surfacing
their ratio.

``run_ci_suite`` builds intensity confidence bands on one realization by
every configured method, runs coverage simulations for each, and
tabulates closed-form versus Monte Carlo bootstrap thresholds.

Configurations are plain JSON-compatible dicts validated against a
strict schema: unknown keys are rejected.
"""
from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .bootstrap import SCHEMES, bootstrap_variance_limit
from .errors import ConfigError
from .geometry import (
    Interval1,
    IntensityFunction,
    Window2,
    constant_intensity,
    linear_intensity,
    simulate_homogeneous_poisson,
    simulate_inhomogeneous_poisson,
)
from .intensity import (
    BAND_METHODS,
    TStarQuery,
    confidence_band,
    coverage_experiment,
    kernel_intensity_estimate,
    t_star_closed_form,
    t_star_monte_carlo_band,
)
from .moments import IntegrationSpec, s_moments_poisson, true_variance_poisson
from .rng import RngSeed
from .twopoint import KernelFunction, PairFunction, constant_pair_function, kernel_pair_function, two_point_statistic


def parse_f_spec(spec: str, window) -> PairFunction:
    """Pair function from a compact string: ``ones``, ``const:v``, ``box:r=R,b=B``, ``epa:r=R,b=B``."""
    try:
        if spec == "ones":
            return constant_pair_function(window, 1.0)
        kind, _, rest = spec.partition(":")
        if kind == "const":
            return constant_pair_function(window, float(rest))
        if kind in ("box", "epa", "epanechnikov"):
            params = dict(item.split("=", 1) for item in rest.split(","))
            extra = set(params) - {"r", "b"}
            if extra:
                raise ConfigError(f"unknown f-spec parameters {sorted(extra)}")
            return kernel_pair_function(
                KernelFunction(kind if kind != "epanechnikov" else "epa", float(params["b"])),
                float(params["r"]),
                window,
            )
    except ConfigError:
        raise
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"cannot parse f-spec {spec!r}: {exc}") from exc
    raise ConfigError(f"unknown f-spec kind in {spec!r}; use ones, const:v, box:r=..,b=.., epa:r=..,b=..")


def parse_lambda_spec(spec: str, interval: Interval1) -> IntensityFunction:
    """Intensity from a compact string: ``const:c`` or ``linear:a,b`` (a + b*x)."""
    try:
        kind, _, rest = spec.partition(":")
        if kind == "const":
            return constant_intensity(float(rest))
        if kind == "linear":
            a_str, b_str = rest.split(",")
            return linear_intensity(float(a_str), float(b_str), interval)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"cannot parse lambda-spec {spec!r}: {exc}") from exc
    raise ConfigError(f"unknown lambda-spec kind in {spec!r}; use const:c or linear:a,b")


def window_from_dict(doc: dict) -> Window2 | Interval1:
    keys = set(doc)
    if keys == {"x_min", "x_max", "y_min", "y_max"}:
        return Window2(**{k: float(doc[k]) for k in keys})
    if keys == {"lo", "hi"}:
        return Interval1(float(doc["lo"]), float(doc["hi"]))
    raise ConfigError(f"window must have keys x_min/x_max/y_min/y_max or lo/hi, got {sorted(keys)}")


def _canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _sha256(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


@dataclass(frozen=True)
class ResultRecord:
    """One experiment's outputs: config echo, named results, error estimates.

    ``wall_clock_s`` is informational and excluded from the serialized
    record so identical (config, seed) runs produce byte-identical
    files.
    """

    experiment: str
    config: dict
    input_digest: str
    results: dict
    errors: dict
    series: dict
    seed: int
    wall_clock_s: float = field(compare=False)

    def to_json(self) -> str:
        doc = {
            "experiment": self.experiment,
            "config": self.config,
            "input_digest": self.input_digest,
            "results": self.results,
            "errors": self.errors,
            "series": self.series,
            "seed": self.seed,
        }
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"

    def digest(self) -> str:
        return _sha256(self.to_json())


def _validate_config(config: dict, schema: dict[str, tuple], experiment: str) -> dict:
    """Apply a {key: (checker, required, default)} schema; reject unknown keys."""
    if not isinstance(config, dict):
        raise ConfigError(f"{experiment} config must be an object, got {type(config).__name__}")
    unknown = set(config) - set(schema)
    if unknown:
        raise ConfigError(f"unknown {experiment} config keys: {sorted(unknown)}")
    out = {}
    for key, (checker, required, default) in schema.items():
        if key not in config:
            if required:
                raise ConfigError(f"{experiment} config missing required key {key!r}")
            out[key] = default
            continue
        try:
            out[key] = checker(config[key])
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}") from exc
    return out


def _positive_float(v) -> float:
    x = float(v)
    if not x > 0:
        raise ValueError(f"must be > 0, got {x}")
    return x


def _positive_int(v) -> int:
    x = int(v)
    if x != v or x <= 0:
        raise ValueError(f"must be a positive integer, got {v}")
    return x


def _seed_int(v) -> int:
    x = int(v)
    if x != v or x < 0:
        raise ValueError(f"must be a nonnegative integer, got {v}")
    return x


def _scheme(v) -> str:
    if v not in SCHEMES:
        raise ValueError(f"scheme must be one of {SCHEMES}, got {v!r}")
    return v


def _integration(v) -> IntegrationSpec:
    if not isinstance(v, dict):
        raise ValueError("integration must be an object")
    allowed = {"method", "sample_count", "nodes_per_axis"}
    unknown = set(v) - allowed
    if unknown:
        raise ConfigError(f"unknown integration keys: {sorted(unknown)}")
    return IntegrationSpec(
        method=v.get("method", "monte_carlo"),
        sample_count=int(v.get("sample_count", 200_000)),
        nodes_per_axis=int(v.get("nodes_per_axis", 32)),
    )


def _methods_list(v) -> list[str]:
    if isinstance(v, str):
        v = [v]
    if not isinstance(v, list) or not v:
        raise ValueError("methods must be a nonempty list of method names")
    for m in v:
        if m not in BAND_METHODS:
            raise ValueError(f"unknown band method {m!r}; use one of {BAND_METHODS}")
    return list(v)


_VARIANCE_SCHEMA = {
    "experiment": (str, False, "variance_comparison"),
    "lambda": (_positive_float, True, None),
    "window": (dict, True, None),
    "f_spec": (str, True, None),
    "scheme": (_scheme, True, None),
    "reps": (_positive_int, True, None),
    "integration": (_integration, False, IntegrationSpec()),
    "seed": (_seed_int, True, None),
}

_CI_SUITE_SCHEMA = {
    "experiment": (str, False, "ci_suite"),
    "lambda_spec": (str, True, None),
    "interval": (dict, True, None),
    "h": (_positive_float, True, None),
    "alpha": (float, True, None),
    "methods": (_methods_list, True, None),
    "reps": (_positive_int, True, None),
    "grid_steps": (_positive_int, True, None),
    "mc_draws": (_positive_int, False, 100_000),
    "seed": (_seed_int, True, None),
}


def midpoint_grid(interval: Interval1, steps: int) -> np.ndarray:
    """Cell-midpoint grid of the interval (steps points)."""
    edges = np.linspace(interval.lo, interval.hi, steps + 1)
    return 0.5 * (edges[:-1] + edges[1:])


def run_variance_comparison(config: dict, threads: int = 1) -> ResultRecord:
    """Bootstrap limit versus true variance for a homogeneous Poisson truth."""
    t0 = time.perf_counter()
    cfg = _validate_config(config, _VARIANCE_SCHEMA, "variance_comparison")
    if cfg["experiment"] != "variance_comparison":
        raise ConfigError(f"experiment must be 'variance_comparison', got {cfg['experiment']!r}")
    window = window_from_dict(cfg["window"])
    if not isinstance(window, Window2):
        raise ConfigError("variance_comparison needs a planar window")
    f = parse_f_spec(cfg["f_spec"], window)
    lam = cfg["lambda"]
    seed = RngSeed(cfg["seed"])

    thetas = np.empty(cfg["reps"])
    limits = np.empty(cfg["reps"])
    for r in range(cfg["reps"]):
        pattern = simulate_homogeneous_poisson(lam, window, seed.substream(0, r))
        thetas[r] = two_point_statistic(pattern, f)
        limits[r] = bootstrap_variance_limit(pattern, f, cfg["scheme"])

    spec = IntegrationSpec(
        method=cfg["integration"].method,
        sample_count=cfg["integration"].sample_count,
        nodes_per_axis=cfg["integration"].nodes_per_axis,
        seed=seed.substream(1),
        threads=threads,
    )
    moments = s_moments_poisson(lam, window, f, spec)

    reps = cfg["reps"]
    mc_var = float(np.var(thetas, ddof=1))
    dev = thetas - thetas.mean()
    m4 = float(np.mean(dev**4))
    mc_var_se = float(np.sqrt(max(m4 - mc_var**2, 0.0) / reps))
    mean_limit = float(np.mean(limits))
    mean_limit_se = float(np.std(limits, ddof=1) / np.sqrt(reps))

    target_boot = moments.reduced_bootstrap_expectation()
    target_true = moments.reduced_true_variance()
    results = {
        "mc_variance_theta": mc_var,
        "mean_bootstrap_limit": mean_limit,
        "integrated_4s3_plus_2s2": target_true,
        "integrated_4s3_plus_6s2": target_boot,
        "true_variance_full_form": true_variance_poisson(moments),
        "cancellation_gap_s4_vs_etheta_sq": moments.cancellation_gap,
        "ratio_empirical_bootstrap_over_true": (mean_limit / mc_var) if mc_var else 0.0,
        "ratio_integrated_bootstrap_over_true": (target_boot / target_true) if target_true else 0.0,
        "moments": {"s2": moments.s2, "s3": moments.s3, "s4": moments.s4,
                    "e_theta": moments.e_theta},
        "expected_pattern_size": lam * window.area,
    }
    errors = {
        "mc_variance_theta": 3.0 * mc_var_se,
        "mean_bootstrap_limit": 3.0 * mean_limit_se,
        "moments": dict(moments.errors),
    }
    series = {"theta": thetas.tolist(), "bootstrap_limit": limits.tolist()}
    return ResultRecord(
        experiment="variance_comparison",
        config=dict(config),
        input_digest=_sha256(_canonical_json(config)),
        results=results,
        errors=errors,
        series=series,
        seed=cfg["seed"],
        wall_clock_s=time.perf_counter() - t0,
    )


def run_ci_suite(config: dict, threads: int = 1) -> ResultRecord:
    """Bands on one realization plus coverage tables, for every configured method."""
    t0 = time.perf_counter()
    cfg = _validate_config(config, _CI_SUITE_SCHEMA, "ci_suite")
    if cfg["experiment"] != "ci_suite":
        raise ConfigError(f"experiment must be 'ci_suite', got {cfg['experiment']!r}")
    interval = window_from_dict(cfg["interval"])
    if not isinstance(interval, Interval1):
        raise ConfigError("ci_suite needs a one-dimensional interval")
    intensity = parse_lambda_spec(cfg["lambda_spec"], interval)
    h, alpha = cfg["h"], float(cfg["alpha"])
    if not 0.0 < alpha <= 1.0:
        raise ConfigError(f"alpha must lie in (0, 1], got {alpha}")
    seed = RngSeed(cfg["seed"])
    grid = midpoint_grid(interval, cfg["grid_steps"])

    reference = simulate_inhomogeneous_poisson(intensity, interval, seed.substream(0))
    bands = {}
    coverage = {}
    for k, method in enumerate(cfg["methods"]):
        band = confidence_band(reference, h, alpha, grid, method,
                               intensity=intensity, mc_draws=cfg["mc_draws"],
                               seed=seed.substream(2, k))
        bands[method] = {
            "x": band.grid.tolist(),
            "lambda_hat": band.lambda_hat.tolist(),
            "lo": band.lo.tolist(),
            "hi": band.hi.tolist(),
            "flag": list(band.flags),
        }
        if alpha < 1.0:
            cov = coverage_experiment(intensity, interval, h, alpha, method,
                                      cfg["reps"], grid, seed.substream(3, k),
                                      mc_draws=cfg["mc_draws"], threads=threads)
            coverage[method] = {
                "x": cov.grid.tolist(),
                "coverage_true_lambda": cov.coverage_true.tolist(),
                "coverage_true_lambda_se": cov.se_true.tolist(),
                "coverage_e_lambda_hat": cov.coverage_smoothed.tolist(),
                "coverage_e_lambda_hat_se": cov.se_smoothed.tolist(),
            }

    # closed-form vs Monte Carlo thresholds at the counts seen on the grid
    ref_counts = kernel_intensity_estimate(reference, h, grid).counts
    distinct_counts = sorted({int(p) for p in ref_counts if p >= 1})
    t_rows = []
    for j, p in enumerate(distinct_counts):
        if alpha >= 1.0 or np.exp(-p) >= alpha:
            continue
        t_closed = t_star_closed_form(TStarQuery(p, h, alpha))
        t_mc, t_lo, t_hi = t_star_monte_carlo_band(p, h, alpha, cfg["mc_draws"],
                                                   seed.substream(4, j))
        t_rows.append({"p": p, "t_closed": t_closed, "t_mc": t_mc,
                       "t_mc_err": max(t_hi - t_mc, t_mc - t_lo)})
    results = {"bands": bands, "coverage": coverage, "t_star_table": t_rows,
               "alpha": alpha, "h": h}
    errors = {"coverage_se": "per-point columns inside results.coverage"}
    return ResultRecord(
        experiment="ci_suite",
        config=dict(config),
        input_digest=_sha256(_canonical_json(config)),
        results=results,
        errors=errors,
        series={},
        seed=cfg["seed"],
        wall_clock_s=time.perf_counter() - t0,
    )
