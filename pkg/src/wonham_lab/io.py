"""CSV dumps.  Floats are written with 17 significant digits."""
import csv
import math
from pathlib import Path
from typing import Iterable, Sequence

ESTIMATE_COLUMNS = ("method", "value", "std_error", "horizon", "burn_in", "dt", "seed",
                    "replications")


def fmt(x, allow_inf=False) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int,)) and not isinstance(x, bool):
        return str(x)
    x = float(x)
    if math.isnan(x) or (math.isinf(x) and not allow_inf):
        raise ValueError(f"refusing to write non-finite value {x}")
    if math.isinf(x):
        return "-inf" if x < 0 else "inf"
    return f"{x:.17g}"


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence], allow_inf=False):
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v, allow_inf) for v in row])
    return path


def write_chain(path, chain):
    rows = [(0.0, int(chain.states[0]))]
    rows += [(t, int(s)) for t, s in zip(chain.jump_times, chain.states[1:])]
    return write_csv(path, ("t", "state"), rows)


def write_observation(path, obs):
    return write_csv(path, ("k", "dY"), enumerate(obs.increments))


def write_trajectory(path, traj, log_dist=None):
    d = traj.pi.shape[1]
    header = ["k", "t"] + [f"pi_{i + 1}" for i in range(d)] + ["log_norm"]
    if log_dist is not None:
        header.append("log_dist")

    def rows():
        for k in range(len(traj.log_norm)):
            row = [k, k * traj.dt, *traj.pi[k], traj.log_norm[k]]
            if log_dist is not None:
                row.append(log_dist[k])
            yield row

    return write_csv(path, header, rows(), allow_inf=log_dist is not None)


def estimate_row(est, dt, seed):
    return (est.method, est.value, est.std_error, est.horizon, est.burn_in, dt, seed,
            est.replications)


def write_estimates(path, estimates, dt, seed):
    return write_csv(path, ESTIMATE_COLUMNS, (estimate_row(e, dt, seed) for e in estimates))
