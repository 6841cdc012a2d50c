"""Flat ``key=value`` experiment configuration.

Recognized keys::

    d                   number of states (required)
    lambda.i.j          off-diagonal rate, 1-based, one per pair i != j (required)
    h.i                 observation level of state i (required)
    sigma               noise intensity (required)
    nu.i                initial law; omitted -> stationary distribution
    nu_bar.i            alternate filter start; omitted -> point mass on the
                        least likely initial state
    dt                  step size (default 1e-3)
    horizon             simulated time (default 200)
    burn_in             discarded initial time (default 10 / |spectral gap|)
    replications        number of independent paths (default 1)
    seed                master seed (default 0)
    experiment          gamma-mc, gamma-quad, lyapunov, bounds, couple,
                        ergodic-avg, snr-sweep or simulate
    sigma_sweep         comma-separated sigma values for snr-sweep

Blank lines and ``#`` comments are ignored.
"""
import re
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .exceptions import ConfigError
from .model import ModelSpec

EXPERIMENTS = ("gamma-mc", "gamma-quad", "lyapunov", "bounds", "couple",
               "ergodic-avg", "snr-sweep", "simulate")

_SCALARS = {"d": int, "sigma": float, "dt": float, "horizon": float, "burn_in": float,
            "replications": int, "seed": int, "experiment": str, "sigma_sweep": str}
_INDEXED = re.compile(r"^(lambda)\.(\d+)\.(\d+)$|^(h|nu|nu_bar)\.(\d+)$")


@dataclass
class ExperimentConfig:
    spec: ModelSpec
    dt: float = 1e-3
    horizon: float = 200.0
    burn_in: Optional[float] = None
    replications: int = 1
    master_seed: int = 0
    nu_bar: Optional[np.ndarray] = None
    outputs: Optional[str] = None
    experiment: Optional[str] = None
    sigma_sweep: List[float] = field(default_factory=list)
    nu_is_default: bool = True
    source: dict = field(default_factory=dict)  # raw key -> value text

    def __post_init__(self):
        if self.dt <= 0:
            raise ConfigError("dt must be > 0")
        if self.replications < 1:
            raise ConfigError("replications must be >= 1")
        if self.burn_in is not None and not self.horizon > self.burn_in >= 0:
            raise ConfigError("need horizon > burn_in >= 0")


def _number(kind, text, line):
    try:
        if kind is int:
            return int(text, 0)
        return float(text)
    except ValueError:
        raise ConfigError(f"malformed number {text!r}", line) from None


def parse_config(text: str) -> ExperimentConfig:
    scalars, lam, vectors, raw = {}, {}, {"h": {}, "nu": {}, "nu_bar": {}}, {}
    where = {}
    last = 0
    for lineno, line in enumerate(text.splitlines(), start=1):
        last = lineno
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"expected key=value, got {body!r}", lineno)
        key, value = (s.strip() for s in body.split("=", 1))
        if key in raw:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        raw[key] = value
        where[key] = lineno
        if key in _SCALARS:
            kind = _SCALARS[key]
            scalars[key] = value if kind is str else _number(kind, value, lineno)
            continue
        m = _INDEXED.match(key)
        if not m:
            raise ConfigError(f"unknown key {key!r}", lineno)
        if m.group(1):
            i, j = int(m.group(2)), int(m.group(3))
            if i == j:
                raise ConfigError(f"{key}: diagonal entries are derived from the row sums", lineno)
            lam[(i, j)] = (_number(float, value, lineno), lineno)
        else:
            vectors[m.group(4)][int(m.group(5))] = (_number(float, value, lineno), lineno)

    for key in ("d", "sigma"):
        if key not in scalars:
            raise ConfigError(f"missing required key {key!r}", last + 1)
    d = scalars["d"]
    if d < 2:
        raise ConfigError("d must be >= 2", where["d"])

    def check_index(idx, lineno, key):
        if not 1 <= idx <= d:
            raise ConfigError(f"{key} index {idx} outside 1..{d}", lineno)

    gen = np.zeros((d, d))
    for (i, j), (val, lineno) in lam.items():
        check_index(i, lineno, "lambda")
        check_index(j, lineno, "lambda")
        gen[i - 1, j - 1] = val
    for i in range(1, d + 1):
        for j in range(1, d + 1):
            if i != j and (i, j) not in lam:
                raise ConfigError(f"missing required key 'lambda.{i}.{j}'", last + 1)
    np.fill_diagonal(gen, -gen.sum(axis=1))

    def vector(name, required):
        entries = vectors[name]
        if not entries:
            if required:
                raise ConfigError(f"missing required key '{name}.1'", last + 1)
            return None
        out = np.zeros(d)
        for idx, (val, lineno) in entries.items():
            check_index(idx, lineno, name)
            out[idx - 1] = val
        for idx in range(1, d + 1):
            if idx not in entries:
                raise ConfigError(f"missing required key '{name}.{idx}'", last + 1)
        return out

    h = vector("h", True)
    nu = vector("nu", False)
    nu_bar = vector("nu_bar", False)
    spec = ModelSpec(gen, h, scalars["sigma"], nu)

    experiment = scalars.get("experiment")
    if experiment is not None and experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {experiment!r}", where["experiment"])
    sweep = []
    if "sigma_sweep" in scalars:
        parts = [p.strip() for p in scalars["sigma_sweep"].split(",") if p.strip()]
        sweep = [_number(float, p, where["sigma_sweep"]) for p in parts]
    try:
        return ExperimentConfig(
            spec=spec,
            dt=scalars.get("dt", 1e-3),
            horizon=scalars.get("horizon", 200.0),
            burn_in=scalars.get("burn_in"),
            replications=scalars.get("replications", 1),
            master_seed=scalars.get("seed", 0),
            nu_bar=nu_bar,
            experiment=experiment,
            sigma_sweep=sweep,
            nu_is_default=nu is None,
            source=raw,
        )
    except ConfigError as exc:
        key = {"dt": "dt", "replications": "replications", "burn_in": "burn_in"}
        for k in key:
            if k in str(exc) and k in where:
                raise ConfigError(str(exc), where[k]) from None
        raise
