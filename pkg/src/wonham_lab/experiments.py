"""Experiment orchestration behind the command line."""
import hashlib
from importlib import metadata
from pathlib import Path

import numpy as np

from . import io
from .bounds import check_bound_consistency, compute_bounds
from .campaign import coupling_tail, default_nu_bar, ergodic_averages, run_campaign
from .config import ExperimentConfig
from .exceptions import ConfigError, InsufficientHorizonError, NonErgodicError
from .filtering import run_two_filters
from .lyapunov import default_burn_in
from .model import validate
from .simulate import RngStream, simulate
from .twostate import two_state_summary

BOUND_COLUMNS = ("az", "mu_min", "bcl_rate", "spectral", "azu_limit", "azl_limit")
VERDICT_COLUMNS = ("source", "sigma", "gamma", "std_error", "az", "mu_min", "spectral",
                   "high_snr")
QUAD_COLUMNS = ("gamma", "lambda1", "lambda_sum", "quad_error_estimate")


def version_stamp() -> str:
    """Package version plus a short digest of the installed sources."""
    try:
        version = metadata.version("artifact")
    except metadata.PackageNotFoundError:
        version = "0+unknown"
    digest = hashlib.sha1()
    for path in sorted(Path(__file__).parent.glob("*.py")):
        digest.update(path.name.encode())
        digest.update(path.read_bytes())
    return f"wonham_lab {version}+g{digest.hexdigest()[:12]}"


def check_config(config: ExperimentConfig):
    report = validate(config.spec)
    if report.valid:
        return report
    if report.errors == ["generator is not ergodic"]:
        raise NonErgodicError("generator is not ergodic")
    raise ConfigError("; ".join(report.errors))


def _meta(config, experiment, burn_in, nu_bar, extra=()):
    lines = [f"version={version_stamp()}", f"experiment={experiment}"]
    for key in sorted(config.source):
        lines.append(f"{key}={config.source[key]}")
    spec = config.spec
    lines.append("generator=" + ";".join(",".join(io.fmt(v) for v in row)
                                         for row in spec.generator))
    if config.nu_is_default:
        lines.append("nu=stationary(default) " + ",".join(io.fmt(v) for v in spec.initial))
    lines.append(f"dt={io.fmt(config.dt)}")
    lines.append(f"horizon={io.fmt(config.horizon)}")
    lines.append(f"burn_in={io.fmt(burn_in)}")
    lines.append(f"replications={config.replications}")
    lines.append(f"seed={config.master_seed}")
    if nu_bar is not None:
        lines.append("nu_bar_used=" + ",".join(io.fmt(v) for v in nu_bar))
    lines.extend(extra)
    return "\n".join(lines) + "\n"


def _verdict_row(source, sigma, gamma, se, report):
    v = check_bound_consistency(gamma, se, sigma, report)
    return (source, sigma, gamma, se, v.az, v.mu_min, v.spectral, v.high_snr)


def run_experiment(config: ExperimentConfig, out_dir, experiment=None, threads=None) -> int:
    """Run one experiment and write its CSV files into ``out_dir``.

    Returns the process exit status; bound violations are data, not errors.
    """
    experiment = experiment or config.experiment
    if experiment is None:
        raise ConfigError("no experiment given")
    check_config(config)
    spec = config.spec
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    burn_in = default_burn_in(spec) if config.burn_in is None else config.burn_in
    if not config.horizon > burn_in:
        raise ConfigError("horizon must exceed burn_in")
    nu_bar = default_nu_bar(spec) if config.nu_bar is None else config.nu_bar
    seed, dt = config.master_seed, config.dt
    report = compute_bounds(spec)
    estimates, verdicts, extra = [], [], []

    if experiment in ("gamma-mc", "lyapunov"):
        res = run_campaign(spec, dt, config.horizon, config.replications, seed, burn_in,
                           nu_bar, threads)
        methods = (["distance_slope", "wedge_slope", "log_norm_slope"]
                   if experiment == "gamma-mc" else list(res.pooled))
        estimates = [res.pooled[m] for m in methods]
        g = res.pooled["distance_slope"]
        verdicts.append(_verdict_row("distance_slope", spec.sigma, g.value, g.std_error, report))
    elif experiment == "gamma-quad":
        q = two_state_summary(spec)
        io.write_csv(out / "quadrature.csv", QUAD_COLUMNS,
                     [(q.gamma, q.lambda1, q.lambda_sum, q.quad_error)])
        verdicts.append(_verdict_row("quadrature", spec.sigma, q.gamma, 0.0, report))
    elif experiment == "bounds":
        pass
    elif experiment == "couple":
        try:
            tail = coupling_tail(spec, nu_bar, 12, config.replications, seed)
        except InsufficientHorizonError as exc:
            raise ConfigError(f"{exc}; increase replications") from None
        io.write_csv(out / "coupling.csv", ("n", "tail", "count"),
                     zip(tail.n, tail.tail, tail.counts))
        io.write_csv(out / "coupling_fit.csv", ("slope", "std_error", "log_rate", "passes"),
                     [(tail.slope, tail.std_error, tail.log_rate,
                       "PASS" if tail.slope <= tail.log_rate + 3 * tail.std_error else "FAIL")])
    elif experiment == "ergodic-avg":
        checks = ergodic_averages(spec, dt, config.horizon, config.replications, seed,
                                  burn_in, threads)
        io.write_csv(out / "ergodic.csv",
                     ("function", "signal_average", "filter_average", "difference",
                      "std_error"),
                     [(c.name, c.signal_average, c.filter_average, c.difference, c.std_error)
                      for c in checks])
    elif experiment == "snr-sweep":
        if not config.sigma_sweep:
            raise ConfigError("snr-sweep needs sigma_sweep")
        rows = []
        for sigma in config.sigma_sweep:
            s = spec.replace(sigma=sigma)
            res = run_campaign(s, dt, config.horizon, config.replications, seed, burn_in,
                               nu_bar, threads)
            g = res.pooled["distance_slope"]
            lam = res.pooled["log_norm_slope"]
            quad = two_state_summary(s).gamma if s.d == 2 and s.h[0] != s.h[1] else float("nan")
            rows.append((sigma, g.value, g.std_error, lam.value, lam.std_error,
                         "" if np.isnan(quad) else quad))
            estimates.extend([g, lam])
            verdicts.append(_verdict_row("distance_slope", sigma, g.value, g.std_error,
                                         compute_bounds(s)))
        io.write_csv(out / "sweep.csv", ("sigma", "gamma", "gamma_se", "lambda1",
                                         "lambda1_se", "gamma_quadrature"), rows)
    elif experiment == "simulate":
        chain, obs = simulate(spec, config.horizon, dt, RngStream(seed, 0))
        run = run_two_filters(obs, spec, spec.initial, nu_bar)
        io.write_chain(out / "chain.csv", chain)
        io.write_observation(out / "observations.csv", obs)
        io.write_trajectory(out / "trajectory.csv", run.primary)
        io.write_trajectory(out / "two_filter.csv", run.alternate, run.log_dist)
    else:
        raise ConfigError(f"unknown experiment {experiment!r}")

    io.write_estimates(out / "estimates.csv", estimates, dt, seed)
    io.write_csv(out / "bounds.csv", BOUND_COLUMNS,
                 [tuple(getattr(report, c) for c in BOUND_COLUMNS)])
    io.write_csv(out / "verdicts.csv", VERDICT_COLUMNS, verdicts)
    (out / "meta.txt").write_text(_meta(config, experiment, burn_in, nu_bar, extra))
    return 0
