"""Seeded Monte Carlo campaigns built from the simulation, filter and estimators."""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from .exceptions import InsufficientHorizonError
from .filtering import run_filter, run_two_filters
from .lyapunov import (
    LyapunovEstimate,
    batch_means,
    default_burn_in,
    gamma_distance_slope,
    lambda1_fk_pathwise,
    lambda1_fk_stationary,
    lambda1_log_norm,
    lambda_sum_wedge,
    pool_estimates,
)
from .model import ModelSpec, coupling_rate
from .simulate import RngStream, coupling_times, simulate


def _map(fn, items, threads):
    items = list(items)
    if threads is None or threads <= 1 or len(items) <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def default_nu_bar(spec: ModelSpec) -> np.ndarray:
    """A start far from ``spec.initial``: point mass on its least likely state."""
    nu_bar = np.zeros(spec.d)
    nu_bar[int(np.argmin(spec.initial))] = 1.0
    if np.array_equal(nu_bar, spec.initial):
        nu_bar = np.full(spec.d, 1.0 / spec.d)
    return nu_bar


def replicate(spec: ModelSpec, dt: float, horizon: float, burn_in: float, nu_bar,
              seed: int, rep: int) -> Dict[str, LyapunovEstimate]:
    """All five estimators on one simulated path."""
    chain, obs = simulate(spec, horizon, dt, RngStream(seed, rep))
    run = run_two_filters(obs, spec, spec.initial, nu_bar)
    traj = run.primary
    return {
        "fk_pathwise": lambda1_fk_pathwise(traj, chain, burn_in),
        "fk_stationary": lambda1_fk_stationary(traj, burn_in),
        "log_norm_slope": lambda1_log_norm(traj, burn_in),
        "wedge_slope": lambda_sum_wedge(run, burn_in),
        "distance_slope": gamma_distance_slope(run, burn_in),
    }


@dataclass
class CampaignResult:
    pooled: Dict[str, LyapunovEstimate]
    per_replication: List[Dict[str, LyapunovEstimate]] = field(repr=False)

    def values(self, method) -> np.ndarray:
        return np.array([r[method].value for r in self.per_replication])

    def paired(self, fn) -> LyapunovEstimate:
        """Pool a per-replication combination such as a difference of methods."""
        ests = [fn(r) for r in self.per_replication]
        return pool_estimates(ests)


def run_campaign(spec: ModelSpec, dt: float, horizon: float, replications: int,
                 seed: int, burn_in: Optional[float] = None, nu_bar=None,
                 threads: Optional[int] = None) -> CampaignResult:
    if replications < 1:
        raise ValueError("replications must be >= 1")
    burn_in = default_burn_in(spec) if burn_in is None else burn_in
    nu_bar = default_nu_bar(spec) if nu_bar is None else np.asarray(nu_bar, dtype=float)
    reps = _map(lambda r: replicate(spec, dt, horizon, burn_in, nu_bar, seed, r),
                range(replications), threads)
    pooled = {m: pool_estimates([r[m] for r in reps]) for m in reps[0]}
    for est in pooled.values():
        est.meta.update(dt=dt, seed=seed)
    return CampaignResult(pooled, reps)


def dt_convergence(spec: ModelSpec, dts: Sequence[float], horizon: float,
                   replications: int, seed: int, burn_in: Optional[float] = None,
                   nu_bar=None, threads: Optional[int] = None) -> Dict[float, np.ndarray]:
    """Per-replication gamma estimates at several step sizes.

    All step sizes share one Brownian path per replication: the observation
    is simulated at the finest step and summed into coarser blocks, so
    differences between step sizes isolate discretization error.
    """
    dts = sorted(dts)
    fine = dts[0]
    factors = [int(round(d / fine)) for d in dts]
    if any(abs(f * fine - d) > 1e-12 * d for f, d in zip(factors, dts)):
        raise ValueError("step sizes must be integer multiples of the finest one")
    burn_in = default_burn_in(spec) if burn_in is None else burn_in
    nu_bar = default_nu_bar(spec) if nu_bar is None else np.asarray(nu_bar, dtype=float)

    def one(rep):
        _, obs = simulate(spec, horizon, fine, RngStream(seed, rep))
        out = []
        for f in factors:
            run = run_two_filters(obs.coarsen(f) if f > 1 else obs, spec, spec.initial, nu_bar)
            out.append(gamma_distance_slope(run, burn_in).value)
        return out

    rows = np.array(_map(one, range(replications), threads))
    return {d: rows[:, i] for i, d in enumerate(dts)}


@dataclass
class ErgodicAverageCheck:
    name: str
    signal_average: float  # time average of g(X_t, pi_t)
    filter_average: float  # time average of sum_i pi_t(i) g(a_i, pi_t)
    std_error: float  # standard error of the difference

    @property
    def difference(self) -> float:
        return self.signal_average - self.filter_average


def ergodic_averages(spec: ModelSpec, dt: float, horizon: float, replications: int,
                     seed: int, burn_in: Optional[float] = None,
                     threads: Optional[int] = None) -> List[ErgodicAverageCheck]:
    """Two time averages that share the same limit under the joint invariant law.

    Test functions: ``g(x, u) = h(x) u(h)`` and ``g(x, u) = u(h)^2``.  The chain
    starts from ``spec.initial`` and the filter from the same law.
    """
    burn_in = default_burn_in(spec) if burn_in is None else burn_in
    h = spec.h

    def one(rep):
        chain, obs = simulate(spec, horizon, dt, RngStream(seed, rep))
        traj = run_filter(obs, spec, spec.initial)
        n = len(obs)
        start = int(np.ceil(burn_in / dt - 1e-9))
        per_batch = max(1, int(round(1.0 / dt)))
        if (n - start) // per_batch < 2:
            raise InsufficientHorizonError("fewer than two batches after burn-in")
        x = chain.state_at(np.arange(n) * dt)[start:]
        ph = traj.pi_h[:n][start:]
        rows = []
        for lhs, rhs in ((h[x] * ph, ph * ph), (ph * ph, ph * ph)):
            diff, se = batch_means(lhs - rhs, per_batch)
            rows.append((lhs.mean(), rhs.mean(), diff, se))
        return rows

    reps = _map(one, range(replications), threads)
    out = []
    for k, name in enumerate(("h(x)*u(h)", "u(h)^2")):
        lhs = np.array([r[k][0] for r in reps])
        rhs = np.array([r[k][1] for r in reps])
        diff = np.array([r[k][2] for r in reps])
        if replications > 1:
            se = diff.std(ddof=1) / np.sqrt(replications)
        else:
            se = reps[0][k][3]
        out.append(ErgodicAverageCheck(name, float(lhs.mean()), float(rhs.mean()), float(se)))
    return out


@dataclass
class CouplingTail:
    n: np.ndarray
    tail: np.ndarray  # empirical P(tau >= n)
    counts: np.ndarray
    slope: float  # fitted d log P(tau >= n) / dn
    std_error: float
    rate: float  # coupling rate bound r

    @property
    def log_rate(self) -> float:
        return float(np.log(self.rate))


def coupling_tail(spec: ModelSpec, nu2, n_max: int, replications: int, seed: int,
                  mode: str = "independent", min_count: int = 10) -> CouplingTail:
    """Empirical tail of the coupling time and its log-linear decay rate.

    The slope is a generalized least-squares fit of ``log P(tau >= n)`` over
    the ``n`` with at least ``min_count`` uncoupled pairs.  Tail estimates are
    nested, so ``Cov(log p_m, log p_n) = (1 - p_m) / (N p_m)`` for ``m <= n``.
    """
    tau = coupling_times(spec, nu2, float(n_max) + 1.0, replications, RngStream(seed, 0), mode)
    n = np.arange(1, n_max + 1)
    counts = np.array([(tau >= k).sum() for k in n])
    tail = counts / replications
    use = counts >= min_count
    if use.sum() < 2:
        raise InsufficientHorizonError("too few uncoupled pairs to fit a tail slope")
    nu, pu = n[use].astype(float), tail[use]
    v = (1.0 - pu) / (replications * pu)
    idx = np.arange(len(nu))
    cov = v[np.minimum.outer(idx, idx)]
    x = np.column_stack([np.ones_like(nu), nu])
    ci = np.linalg.inv(cov)
    info = x.T @ ci @ x
    beta = np.linalg.solve(info, x.T @ ci @ np.log(pu))
    se = float(np.sqrt(np.linalg.inv(info)[1, 1]))
    return CouplingTail(n, tail, counts, float(beta[1]), se, coupling_rate(spec.generator))
