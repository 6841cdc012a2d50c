"""Splitting scheme for the Wonham filter and its unnormalized (Zakai) form.

One step maps ``pi`` to ``pi'`` in three stages:

1. predict: ``p = exp(L' dt) pi``
2. correct: ``w_i = p_i exp(h_i dY / sigma^2 - h_i^2 dt / (2 sigma^2))``
3. normalize: ``pi' = w / |w|`` and accumulate ``log |w|``.

The corrector is an exact Gaussian likelihood, so iterates never leave the
simplex.  The accumulated ``log |w|`` tracks ``log |rho_t|`` of the linear
equation.

Two filters on the same increments are tracked through their difference
``pi_bar - pi = eps * v`` with ``|v| = 1`` and ``log eps`` kept separately.
Since one step is the projective map ``x -> A x / 1'A x``, the difference
propagates exactly as ``eps' v' = eps (A v - (1'A v / 1'A pi) A pi) / 1'A pi_bar``,
so the distance can be followed far below the double-precision range.
"""
from dataclasses import dataclass, field
from functools import lru_cache

import numba
import numpy as np

from .model import ModelSpec, matrix_exponential
from .simulate import ObservationPath


@lru_cache(maxsize=64)
def _transition_cached(gen_bytes, d, dt):
    g = np.frombuffer(gen_bytes, dtype=float).reshape(d, d)
    p = matrix_exponential(g, dt)
    p.setflags(write=False)
    return p


def transition_matrix(spec: ModelSpec, dt: float) -> np.ndarray:
    return _transition_cached(spec.generator.tobytes(), spec.d, float(dt))


@numba.njit(cache=True, nogil=True)
def _corrector(pred, dy, h, inv_s2, dt, out):
    """Fill ``out`` with scaled weights; return (sum, log-scale)."""
    d = pred.shape[0]
    m = -np.inf
    for i in range(d):
        if pred[i] > 0.0:
            e = h[i] * dy * inv_s2 - 0.5 * h[i] * h[i] * dt * inv_s2
            if e > m:
                m = e
    for i in range(d):
        e = h[i] * dy * inv_s2 - 0.5 * h[i] * h[i] * dt * inv_s2
        out[i] = np.exp(e - m)
    return m


@numba.njit(cache=True, nogil=True)
def _predict(x, trans, out):
    d = x.shape[0]
    for j in range(d):
        acc = 0.0
        for i in range(d):
            acc += x[i] * trans[i, j]
        out[j] = acc


@numba.njit(cache=True, nogil=True)
def _run_kernel(pi0, dys, trans, h, inv_s2, dt, log0):
    n = dys.shape[0]
    d = pi0.shape[0]
    pis = np.empty((n + 1, d))
    logs = np.empty(n + 1)
    pis[0] = pi0
    logs[0] = log0
    pred = np.empty(d)
    lik = np.empty(d)
    cur = pi0.copy()
    acc = log0
    for k in range(n):
        _predict(cur, trans, pred)
        m = _corrector(pred, dys[k], h, inv_s2, dt, lik)
        s = 0.0
        for i in range(d):
            pred[i] *= lik[i]
            s += pred[i]
        for i in range(d):
            cur[i] = pred[i] / s
        acc += np.log(s) + m
        pis[k + 1] = cur
        logs[k + 1] = acc
    return pis, logs


@numba.njit(cache=True, nogil=True)
def _wedge_l1(x, y):
    d = x.shape[0]
    tot = 0.0
    for i in range(d):
        for j in range(d):
            if i != j:
                tot += abs(x[i] * y[j] - x[j] * y[i])
    return tot


@numba.njit(cache=True, nogil=True)
def _difference_kernel(pi0, v0, log_eps0, dys, trans, h, inv_s2, dt):
    """log|pi_bar - pi| and log|pi ^ v| along the path (see module docstring)."""
    n = dys.shape[0]
    d = pi0.shape[0]
    log_dist = np.empty(n + 1)
    log_wedge = np.empty(n + 1)
    cur = pi0.copy()
    v = v0.copy()
    le = log_eps0
    log_dist[0] = le
    log_wedge[0] = le + np.log(_wedge_l1(cur, v))
    pa = np.empty(d)
    pb = np.empty(d)
    lik = np.empty(d)
    for k in range(n):
        _predict(cur, trans, pa)
        _predict(v, trans, pb)
        _corrector(pa, dys[k], h, inv_s2, dt, lik)
        s = 0.0
        c = 0.0
        for i in range(d):
            pa[i] *= lik[i]
            pb[i] *= lik[i]
            s += pa[i]
            c += pb[i]
        wn = 0.0
        for i in range(d):
            pb[i] = pb[i] - (c / s) * pa[i]
            wn += abs(pb[i])
        denom = s + np.exp(le) * c
        le = le + np.log(wn) - np.log(denom)
        for i in range(d):
            cur[i] = pa[i] / s
            v[i] = pb[i] / wn
        log_dist[k + 1] = le
        log_wedge[k + 1] = le + np.log(_wedge_l1(cur, v))
    return log_dist, log_wedge


def _as_simplex(x, d):
    x = np.asarray(x, dtype=float).ravel()
    if x.shape != (d,) or np.any(x < 0) or abs(x.sum() - 1.0) > 1e-12:
        raise ValueError("initial condition must lie on the probability simplex")
    return x


def _increments(obs):
    if isinstance(obs, ObservationPath):
        return obs.dt, np.ascontiguousarray(obs.increments, dtype=float)
    raise TypeError("expected an ObservationPath")


@dataclass
class FilterTrajectory:
    dt: float
    pi: np.ndarray  # (n + 1, d)
    log_norm: np.ndarray  # (n + 1,)
    spec: ModelSpec = field(repr=False)

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self.log_norm)) * self.dt

    @property
    def pi_h(self) -> np.ndarray:
        return self.pi @ self.spec.h


def filter_step(pi, dY: float, dt: float, spec: ModelSpec):
    """One predict/correct/normalize step; returns ``(pi_next, log|w|)``."""
    pi = _as_simplex(pi, spec.d)
    pis, logs = _run_kernel(pi, np.array([float(dY)]), transition_matrix(spec, dt),
                            spec.h, 1.0 / spec.sigma ** 2, float(dt), 0.0)
    return pis[1], float(logs[1])


def run_filter(obs: ObservationPath, spec: ModelSpec, init=None,
               log_norm0: float = 0.0) -> FilterTrajectory:
    """Filter the whole observation path starting from ``init``.

    ``log_norm0`` offsets the accumulated log-normalizer, which makes a
    restart from an intermediate state reproduce the tail bit for bit.
    """
    dt, dys = _increments(obs)
    init = spec.initial if init is None else init
    pi0 = _as_simplex(init, spec.d)
    pis, logs = _run_kernel(pi0, dys, transition_matrix(spec, dt), spec.h,
                            1.0 / spec.sigma ** 2, float(dt), float(log_norm0))
    return FilterTrajectory(dt, pis, logs, spec)


@dataclass
class TwoFilterRun:
    primary: FilterTrajectory
    alternate: FilterTrajectory
    log_dist: np.ndarray  # log |pi_k - pi_bar_k|_1, -inf when coincident
    log_wedge_unit: np.ndarray  # log |pi_k ^ pi_bar_k|_1

    @property
    def dt(self) -> float:
        return self.primary.dt

    @property
    def times(self) -> np.ndarray:
        return self.primary.times

    @property
    def coincident(self) -> bool:
        return bool(np.isneginf(self.log_dist[0]))


def run_two_filters(obs: ObservationPath, spec: ModelSpec, nu, nu_bar) -> TwoFilterRun:
    """Filters from ``nu`` and ``nu_bar`` on the same increments."""
    dt, dys = _increments(obs)
    nu = _as_simplex(nu, spec.d)
    nu_bar = _as_simplex(nu_bar, spec.d)
    first = run_filter(obs, spec, nu)
    second = run_filter(obs, spec, nu_bar)
    diff = nu_bar - nu
    eps = np.abs(diff).sum()
    n = len(dys)
    if eps == 0.0:
        neg = np.full(n + 1, -np.inf)
        return TwoFilterRun(first, second, neg, neg.copy())
    log_dist, log_wedge = _difference_kernel(
        nu, diff / eps, float(np.log(eps)), dys, transition_matrix(spec, dt),
        spec.h, 1.0 / spec.sigma ** 2, float(dt))
    return TwoFilterRun(first, second, log_dist, log_wedge)


def wedge_log_norm(run: TwoFilterRun) -> np.ndarray:
    """``log |rho_k ^ rho_bar_k|`` assembled from normalized quantities."""
    return run.primary.log_norm + run.alternate.log_norm + run.log_wedge_unit


def wedge_l1(x, y) -> float:
    """l1 norm of the antisymmetric matrix ``x_i y_j - x_j y_i``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return float(np.abs(np.outer(x, y) - np.outer(y, x)).sum())
