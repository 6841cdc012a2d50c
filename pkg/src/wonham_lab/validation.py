"""Input checks for the estimator classes; each returns a clean ndarray."""
import numbers

import numpy as np

from ._config import TOL
from .model import is_ergodic
from .exceptions import NonErgodicError


def check_generator(generator) -> np.ndarray:
    g = np.asarray(generator, dtype=float)
    if g.ndim != 2 or g.shape[0] != g.shape[1] or g.shape[0] < 2:
        raise ValueError(f"generator must be a square matrix with d >= 2, got {g.shape}")
    if not np.all(np.isfinite(g)):
        raise ValueError("generator has non-finite entries")
    if np.any(g[~np.eye(len(g), dtype=bool)] < 0):
        raise ValueError("generator has a negative off-diagonal rate")
    if np.any(np.abs(g.sum(axis=1)) > TOL.structural * max(1.0, np.abs(g).max())):
        raise ValueError("generator rows must sum to zero")
    if not is_ergodic(g):
        raise NonErgodicError("generator is not ergodic")
    return g


def check_levels(h, d) -> np.ndarray:
    h = np.asarray(h, dtype=float).ravel()
    if h.shape != (d,):
        raise ValueError(f"h must have {d} entries, got {h.size}")
    if not np.all(np.isfinite(h)):
        raise ValueError("h has non-finite entries")
    return h


def check_simplex(x, d, name="distribution") -> np.ndarray:
    x = np.asarray(x, dtype=float).ravel()
    if x.shape != (d,) or np.any(x < 0) or abs(x.sum() - 1.0) > TOL.structural:
        raise ValueError(f"{name} must be a probability vector of length {d}")
    return x


def check_positive(value, name) -> float:
    if not isinstance(value, numbers.Real) or not np.isfinite(value) or value <= 0:
        raise ValueError(f"{name} must be a positive number, got {value!r}")
    return float(value)


def check_increments(X) -> np.ndarray:
    x = np.asarray(X, dtype=float)
    if x.ndim == 2 and 1 in x.shape:
        x = x.ravel()
    if x.ndim != 1 or x.size == 0:
        raise ValueError("expected a 1-d array of observation increments")
    if not np.all(np.isfinite(x)):
        raise ValueError("increments contain NaN or inf")
    return x
