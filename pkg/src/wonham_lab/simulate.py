"""Exact simulation of the signal chain and its noisy observations."""
from dataclasses import dataclass

import numpy as np

from .exceptions import NonErgodicError
from .model import ModelSpec, check_ergodic

_PURPOSES = {"chain": 0, "noise": 1, "init": 2, "couple": 3}


@dataclass(frozen=True)
class RngStream:
    """Reproducible random streams keyed by (seed, replication, purpose)."""

    master_seed: int
    stream_id: int = 0

    def generator(self, purpose: str) -> np.random.Generator:
        seq = np.random.SeedSequence(
            self.master_seed, spawn_key=(self.stream_id, _PURPOSES[purpose]))
        return np.random.default_rng(seq)


@dataclass
class ChainPath:
    t_end: float
    jump_times: np.ndarray
    states: np.ndarray

    @property
    def initial_state(self) -> int:
        return int(self.states[0])

    def state_at(self, t) -> np.ndarray:
        """State just after time ``t`` (paths are right-continuous)."""
        idx = np.searchsorted(self.jump_times, t, side="right")
        return self.states[idx]

    def step_integrals(self, values, dt: float, n_steps: int) -> np.ndarray:
        """Exact ``int_{k dt}^{(k+1) dt} values[X_s] ds`` for each step.

        Each step starts from ``values[X_{k dt}] * dt``; every jump at time
        ``s`` inside the step then adds ``(v_new - v_old) * ((k+1) dt - s)``.
        """
        values = np.asarray(values, dtype=float)
        grid = np.arange(n_steps) * dt
        out = values[self.state_at(grid)] * dt
        jt = self.jump_times
        inside = jt < n_steps * dt
        jt = jt[inside]
        if jt.size:
            k = np.floor(jt / dt).astype(np.int64)
            # a jump exactly on a grid point belongs to the following step
            on_grid = k * dt == jt
            k = np.minimum(k, n_steps - 1)
            j = np.flatnonzero(inside)
            jump = values[self.states[j + 1]] - values[self.states[j]]
            contrib = np.where(on_grid, 0.0, jump * ((k + 1) * dt - jt))
            np.add.at(out, k, contrib)
        return out

    def occupation(self, d: int) -> np.ndarray:
        """Fraction of ``[0, t_end]`` spent in each state."""
        edges = np.concatenate([[0.0], self.jump_times, [self.t_end]])
        occ = np.zeros(d)
        np.add.at(occ, self.states, np.diff(edges))
        return occ / self.t_end


@dataclass
class ObservationPath:
    dt: float
    increments: np.ndarray
    drift: np.ndarray = None  # exact signal part of each increment

    @property
    def horizon(self) -> float:
        return self.dt * len(self.increments)

    def __len__(self):
        return len(self.increments)

    def coarsen(self, factor: int) -> "ObservationPath":
        """Sum consecutive blocks of ``factor`` increments (same Brownian path)."""
        n = len(self.increments) // factor
        inc = self.increments[: n * factor].reshape(n, factor).sum(axis=1)
        drift = None
        if self.drift is not None:
            drift = self.drift[: n * factor].reshape(n, factor).sum(axis=1)
        return ObservationPath(self.dt * factor, inc, drift)

    def split(self, k: int):
        """Increments before and after step ``k``."""
        first = ObservationPath(self.dt, self.increments[:k],
                                None if self.drift is None else self.drift[:k])
        second = ObservationPath(self.dt, self.increments[k:],
                                 None if self.drift is None else self.drift[k:])
        return first, second


def _draw_state(p, rng):
    return int(rng.choice(len(p), p=p))


def sample_chain(spec: ModelSpec, t_end: float, rng: RngStream) -> ChainPath:
    """Gillespie simulation: exponential holding times, embedded jump chain."""
    if t_end <= 0:
        raise ValueError("t_end must be positive")
    g = spec.generator
    exit_rates = -np.diag(g)
    if np.any(exit_rates <= 0):
        raise NonErgodicError("absorbing state in generator")
    check_ergodic(g)
    d = spec.d
    jump_probs = g / exit_rates[:, None]
    np.fill_diagonal(jump_probs, 0.0)
    cum = np.cumsum(jump_probs, axis=1)

    state = _draw_state(spec.initial, rng.generator("init"))
    gen = rng.generator("chain")
    times, states = [], [state]
    t = 0.0
    while True:
        t += gen.exponential(1.0 / exit_rates[state])
        if t > t_end:
            break
        state = min(int(np.searchsorted(cum[state], gen.random(), side="right")), d - 1)
        times.append(t)
        states.append(state)
    return ChainPath(float(t_end), np.array(times, dtype=float), np.array(states, dtype=np.int64))


def n_steps_for(t_end: float, dt: float) -> int:
    if dt <= 0:
        raise ValueError("dt must be positive")
    n = int(round(t_end / dt))
    if n < 1 or abs(n * dt - t_end) > 1e-9 * max(1.0, t_end):
        raise ValueError(f"dt={dt} does not divide the horizon {t_end}")
    return n


def sample_observation(path: ChainPath, spec: ModelSpec, dt: float,
                       rng: RngStream) -> ObservationPath:
    """Increments ``dY_k = int h(X_s) ds + sigma sqrt(dt) xi_k``."""
    n = n_steps_for(path.t_end, dt)
    drift = path.step_integrals(spec.h, dt, n)
    noise = rng.generator("noise").standard_normal(n)
    return ObservationPath(dt, drift + spec.sigma * np.sqrt(dt) * noise, drift)


def simulate(spec: ModelSpec, t_end: float, dt: float, rng: RngStream):
    """Chain and observation path for one replication."""
    path = sample_chain(spec, t_end, rng)
    return path, sample_observation(path, spec, dt, rng)


def coupling_times(spec: ModelSpec, nu2, t_max: float, size: int,
                   rng: RngStream, mode: str = "independent") -> np.ndarray:
    """Meeting times of chain pairs driven by one Poisson-matrix clock.

    Every off-diagonal pair ``(i, j)`` carries its own Poisson process with
    rate ``l_ij``; a chain sitting in ``i`` moves to ``j`` at its events.
    Both chains read the same clock, so once they meet they never separate.
    ``mode="independent"`` draws the two initial states independently from
    ``spec.initial`` and ``nu2``; ``mode="common"`` uses one uniform for both
    draws, so equal laws give equal starting states.  Uncoupled pairs return
    ``inf``.
    """
    g = spec.generator
    check_ergodic(g)
    d = spec.d
    nu2 = np.asarray(nu2, dtype=float)
    init = rng.generator("init")
    if mode == "independent":
        u1 = init.random(size)
        u2 = init.random(size)
    elif mode == "common":
        u1 = init.random(size)
        u2 = u1
    else:
        raise ValueError(f"unknown coupling mode {mode!r}")
    x = np.minimum(np.searchsorted(np.cumsum(spec.initial), u1, side="right"), d - 1)
    y = np.minimum(np.searchsorted(np.cumsum(nu2), u2, side="right"), d - 1)

    src, dst = np.nonzero(~np.eye(d, dtype=bool))
    rates = g[src, dst]
    keep = rates > 0
    src, dst, rates = src[keep], dst[keep], rates[keep]
    total = rates.sum()
    cum = np.cumsum(rates) / total

    tau = np.full(size, np.inf)
    tau[x == y] = 0.0
    t = np.zeros(size)
    active = np.flatnonzero(x != y)
    clock = rng.generator("couple")
    while active.size:
        t[active] += clock.exponential(1.0 / total, active.size)
        expired = t[active] > t_max
        active = active[~expired]
        if not active.size:
            break
        ev = np.minimum(np.searchsorted(cum, clock.random(active.size), side="right"),
                        len(rates) - 1)
        move_x = x[active] == src[ev]
        move_y = y[active] == src[ev]
        x[active[move_x]] = dst[ev[move_x]]
        y[active[move_y]] = dst[ev[move_y]]
        met = x[active] == y[active]
        tau[active[met]] = t[active[met]]
        active = active[~met]
    return tau


def coupling_time(spec: ModelSpec, nu2, t_max: float, rng: RngStream,
                  mode: str = "independent") -> float:
    return float(coupling_times(spec, nu2, t_max, 1, rng, mode)[0])
