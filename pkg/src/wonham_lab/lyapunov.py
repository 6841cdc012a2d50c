"""Estimators of the top Lyapunov exponent, lambda1 + lambda2 and gamma.

Every estimator works on a post-burn-in window of one simulated path and
reports a batch-means standard error (batches of one time unit).  Several
replications are combined with :func:`pool_estimates`, which uses the
between-replication spread.
"""
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .exceptions import DegenerateRunError, InsufficientHorizonError
from .filtering import FilterTrajectory, TwoFilterRun, wedge_log_norm
from .model import spectral_gap
from .simulate import ChainPath

METHODS = ("fk_pathwise", "fk_stationary", "log_norm_slope", "wedge_slope", "distance_slope")


class DegenerateWedgeError(DegenerateRunError):
    pass


@dataclass
class LyapunovEstimate:
    value: float
    std_error: float
    horizon: float
    burn_in: float
    method: str
    replications: int = 1
    spread: float = 0.0  # between-replication standard deviation
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.std_error < 0:
            raise ValueError("std_error must be non-negative")
        if not self.horizon > self.burn_in >= 0:
            raise InsufficientHorizonError("need horizon > burn_in >= 0")


def default_burn_in(spec) -> float:
    return 10.0 / abs(spectral_gap(spec.generator))


def _window(n_steps, dt, burn_in, batch_len):
    horizon = n_steps * dt
    if burn_in is None or not horizon > burn_in:
        raise InsufficientHorizonError(f"horizon {horizon} <= burn-in {burn_in}")
    start = int(np.ceil(burn_in / dt - 1e-9))
    per_batch = max(1, int(round(batch_len / dt)))
    if (n_steps - start) // per_batch < 2:
        raise InsufficientHorizonError("fewer than two batches after burn-in")
    return start, per_batch


def batch_means(rates: np.ndarray, per_batch: int):
    """Mean of ``rates`` and its batch-means standard error."""
    nb = len(rates) // per_batch
    means = rates[: nb * per_batch].reshape(nb, per_batch).mean(axis=1)
    return float(means.mean()), float(means.std(ddof=1) / np.sqrt(nb))


def slope_with_se(t: np.ndarray, y: np.ndarray, per_batch: int):
    """Least-squares slope of ``y`` on ``t`` with a batch-means standard error.

    The slope is a weighted sum ``sum_j W_j dy_j`` of the increments, where
    ``W_j`` is the tail sum of the regression weights.  Weighted residual
    increments are summed within batches and the batch sums are treated as
    independent.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    tc = t - t.mean()
    c = tc / (tc @ tc)
    slope = float(c @ y)
    w = np.cumsum(c[::-1])[::-1][1:]
    resid = np.diff(y) - slope * np.diff(t)
    contrib = w * resid
    nb = len(contrib) // per_batch
    if nb < 2:
        raise InsufficientHorizonError("fewer than two batches in slope window")
    sums = contrib[: nb * per_batch].reshape(nb, per_batch).sum(axis=1)
    rest = contrib[nb * per_batch:].sum()
    var = (sums @ sums + rest ** 2) * nb / (nb - 1)
    return slope, float(np.sqrt(var))


def _burn(traj_spec, burn_in):
    return default_burn_in(traj_spec) if burn_in is None else float(burn_in)


def lambda1_fk_pathwise(traj: FilterTrajectory, chain: ChainPath, burn_in=None,
                        batch_len: float = 1.0) -> LyapunovEstimate:
    """Time average of ``(pi(h) h(X) - pi(h)^2 / 2) / sigma^2``.

    ``h(X)`` enters through its exact integral over each step.
    """
    spec = traj.spec
    burn_in = _burn(spec, burn_in)
    n = len(traj.log_norm) - 1
    dt = traj.dt
    start, per_batch = _window(n, dt, burn_in, batch_len)
    drift = chain.step_integrals(spec.h, dt, n)
    ph = traj.pi_h[:-1]
    rates = (ph * drift / dt - 0.5 * ph ** 2) / spec.sigma ** 2
    value, se = batch_means(rates[start:], per_batch)
    return LyapunovEstimate(value, se, n * dt, burn_in, "fk_pathwise")


def lambda1_fk_stationary(traj: FilterTrajectory, burn_in=None,
                          batch_len: float = 1.0) -> LyapunovEstimate:
    """``E pi(h)^2 / (2 sigma^2)`` with the ergodic average as expectation."""
    spec = traj.spec
    burn_in = _burn(spec, burn_in)
    n = len(traj.log_norm) - 1
    start, per_batch = _window(n, traj.dt, burn_in, batch_len)
    rates = traj.pi_h[:-1] ** 2 / (2.0 * spec.sigma ** 2)
    value, se = batch_means(rates[start:], per_batch)
    return LyapunovEstimate(value, se, n * traj.dt, burn_in, "fk_stationary")


def _slope_estimate(t, y, dt, burn_in, batch_len, method):
    n = len(y) - 1
    start, per_batch = _window(n, dt, burn_in, batch_len)
    value, se = slope_with_se(t[start:], y[start:], per_batch)
    return LyapunovEstimate(value, se, n * dt, burn_in, method)


def lambda1_log_norm(traj: FilterTrajectory, burn_in=None,
                     batch_len: float = 1.0) -> LyapunovEstimate:
    """Growth rate of the accumulated log-normalizer ``log |rho_t|``."""
    burn_in = _burn(traj.spec, burn_in)
    return _slope_estimate(traj.times, traj.log_norm, traj.dt, burn_in, batch_len,
                           "log_norm_slope")


def lambda_sum_wedge(run: TwoFilterRun, burn_in=None,
                     batch_len: float = 1.0) -> LyapunovEstimate:
    """Growth rate of ``log |rho ^ rho_bar|``.

    For two states this is ``lambda1 + lambda2``; with more states it is
    only an upper-bounded rate, flagged in ``meta``.
    """
    if run.coincident:
        raise DegenerateWedgeError("identical initial conditions give a zero wedge")
    spec = run.primary.spec
    burn_in = _burn(spec, burn_in)
    est = _slope_estimate(run.times, wedge_log_norm(run), run.dt, burn_in, batch_len,
                          "wedge_slope")
    est.meta["upper_rate_only"] = spec.d > 2
    return est


def gamma_distance_slope(run: TwoFilterRun, burn_in=None,
                         batch_len: float = 1.0) -> LyapunovEstimate:
    """Exponential rate of ``|pi_t - pi_bar_t|``, the stability index."""
    if run.coincident or np.any(np.isneginf(run.log_dist)):
        raise DegenerateRunError("filters coincide; distance is identically zero")
    spec = run.primary.spec
    burn_in = _burn(spec, burn_in)
    horizon = (len(run.log_dist) - 1) * run.dt
    if horizon - burn_in < 10.0:
        raise InsufficientHorizonError("need at least 10 time units after burn-in")
    est = _slope_estimate(run.times, run.log_dist, run.dt, burn_in, batch_len,
                          "distance_slope")
    est.meta["nu"] = run.primary.pi[0].tolist()
    est.meta["nu_bar"] = run.alternate.pi[0].tolist()
    return est


def pool_estimates(estimates: Sequence[LyapunovEstimate]) -> LyapunovEstimate:
    """Mean over replications with the across-replication standard error.

    A single replication keeps its own within-path error.
    """
    estimates = list(estimates)
    if not estimates:
        raise ValueError("nothing to pool")
    first = estimates[0]
    if len(estimates) == 1:
        return replace(first, meta=dict(first.meta))
    vals = np.array([e.value for e in estimates])
    spread = float(vals.std(ddof=1))
    return LyapunovEstimate(float(vals.mean()), spread / np.sqrt(len(vals)), first.horizon,
                            first.burn_in, first.method, len(vals), spread, dict(first.meta))


def combined_se(*estimates: LyapunovEstimate) -> float:
    return float(np.sqrt(sum(e.std_error ** 2 for e in estimates)))
