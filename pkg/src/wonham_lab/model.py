"""Filtering problem instance and generator-matrix algebra.

A model is a finite-state chain with rate matrix ``generator`` observed
through ``dY = h(X) dt + sigma dB``.  Everything here is a pure function of
small dense matrices, so accuracy is preferred over speed.
"""
from dataclasses import dataclass, field
from functools import cached_property
from typing import List

import numpy as np

from ._config import TOL
from .exceptions import NonErgodicError


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """Generator, observation levels, noise intensity and initial law.

    ``nu`` defaults to the stationary distribution when omitted.
    """

    generator: np.ndarray
    h: np.ndarray
    sigma: float
    nu: np.ndarray = None

    def __post_init__(self):
        g = np.array(self.generator, dtype=float)
        h = np.array(self.h, dtype=float).ravel()
        object.__setattr__(self, "generator", g)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "sigma", float(self.sigma))
        if self.nu is None:
            object.__setattr__(self, "nu", None)
        else:
            object.__setattr__(self, "nu", np.array(self.nu, dtype=float).ravel())
        g.setflags(write=False)
        h.setflags(write=False)

    @property
    def d(self) -> int:
        return self.generator.shape[0]

    @cached_property
    def mu(self) -> np.ndarray:
        return stationary_distribution(self.generator)

    @property
    def initial(self) -> np.ndarray:
        """Initial law, falling back to the stationary one."""
        return self.mu if self.nu is None else self.nu

    def replace(self, **changes) -> "ModelSpec":
        fields = dict(generator=self.generator, h=self.h, sigma=self.sigma, nu=self.nu)
        fields.update(changes)
        return ModelSpec(**fields)

    @classmethod
    def two_state(cls, lam12, lam21, h, sigma, nu=None):
        g = [[-lam12, lam12], [lam21, -lam21]]
        return cls(g, h, sigma, nu)


@dataclass
class ValidationReport:
    errors: List[str] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.errors

    def __str__(self):
        lines = [f"error: {e}" for e in self.errors] + [f"warning: {w}" for w in self.warnings]
        return "\n".join(lines) if lines else "valid"


def validate(spec: ModelSpec) -> ValidationReport:
    """Collect every structural problem in ``spec`` without raising."""
    report = ValidationReport()
    g = np.asarray(spec.generator, dtype=float)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        report.errors.append(f"generator must be square, got shape {g.shape}")
        return report
    d = g.shape[0]
    if d < 2:
        report.errors.append("need at least 2 states")
    if not np.all(np.isfinite(g)):
        report.errors.append("generator has non-finite entries")
        return report
    off = g[~np.eye(d, dtype=bool)]
    if np.any(off < 0):
        report.errors.append("negative off-diagonal rate")
    rows = np.abs(g.sum(axis=1))
    scale = max(1.0, np.abs(g).max())
    bad = np.flatnonzero(rows > TOL.structural * scale)
    if bad.size:
        report.errors.append(
            "row-sum != 0 in row(s) " + ", ".join(str(i + 1) for i in bad))
    if spec.h.shape != (d,):
        report.errors.append(f"h must have {d} entries, got {spec.h.size}")
    if not (np.isfinite(spec.sigma) and spec.sigma > 0):
        report.errors.append("sigma must be > 0")
    if spec.nu is not None:
        nu = spec.nu
        if nu.shape != (d,) or np.any(nu < 0) or abs(nu.sum() - 1.0) > TOL.structural:
            report.errors.append("nu is not a probability vector on the simplex")
    if report.errors:
        return report
    if not is_ergodic(g):
        report.errors.append("generator is not ergodic")
    if d == 2 and spec.h[0] == spec.h[1]:
        report.warnings.append("Delta h=0: 2-state closed form undefined")
    return report


def expm(a: np.ndarray) -> np.ndarray:
    """Matrix exponential by scaling and squaring with a degree-18 Taylor sum."""
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    norm = np.abs(a).sum(axis=0).max()
    s = 0 if norm <= 0.5 else int(np.ceil(np.log2(norm / 0.5)))
    b = a / 2.0 ** s
    result = np.eye(n)
    term = np.eye(n)
    for k in range(1, 19):
        term = term @ b / k
        result = result + term
    for _ in range(s):
        result = result @ result
    return result


def matrix_exponential(generator, t: float) -> np.ndarray:
    """Transition matrix ``exp(generator * t)`` for ``t >= 0``."""
    if t < 0:
        raise ValueError("t must be non-negative")
    g = np.asarray(generator, dtype=float)
    if t == 0:
        return np.eye(g.shape[0])
    p = expm(g * t)
    # Clean round-off so rows are exact probability vectors.
    p = np.clip(p, 0.0, None)
    return p / p.sum(axis=1, keepdims=True)


def _sorted_eigenvalues(g):
    ev = np.linalg.eigvals(g)
    return ev[np.argsort(np.abs(ev))]


def is_ergodic(generator) -> bool:
    """Simple zero eigenvalue and strictly positive ``exp(generator)``."""
    g = np.asarray(generator, dtype=float)
    ev = _sorted_eigenvalues(g)
    scale = max(1.0, np.abs(g).max())
    if abs(ev[0]) > TOL.zero_eigenvalue * scale:
        return False
    if abs(ev[1]) <= TOL.zero_eigenvalue * scale:
        return False
    return bool(np.all(expm(g) > TOL.ergodic_entry))


def check_ergodic(generator):
    if not is_ergodic(generator):
        raise NonErgodicError("generator does not describe an ergodic chain")


def stationary_distribution(generator) -> np.ndarray:
    """Solve ``mu^T generator = 0`` with the normalization row appended."""
    g = np.asarray(generator, dtype=float)
    check_ergodic(g)
    d = g.shape[0]
    a = np.vstack([g.T, np.ones((1, d))])
    b = np.zeros(d + 1)
    b[-1] = 1.0
    mu, *_ = np.linalg.lstsq(a, b, rcond=None)
    mu = np.clip(mu, 0.0, None)
    return mu / mu.sum()


def spectral_gap(generator) -> float:
    """Largest real part among the non-zero eigenvalues (negative)."""
    g = np.asarray(generator, dtype=float)
    check_ergodic(g)
    ev = _sorted_eigenvalues(g)
    return float(np.max(ev[1:].real))


def coupling_rate(generator) -> float:
    """``1 - sum_i min_{k != l} G_ki G_li`` with ``G = exp(generator)``.

    Bounds the one-step probability that two independent copies of the
    embedded unit-time chain fail to meet.
    """
    g = np.asarray(generator, dtype=float)
    check_ergodic(g)
    p = matrix_exponential(g, 1.0)
    d = p.shape[0]
    total = 0.0
    for i in range(d):
        col = p[:, i]
        prods = np.outer(col, col)
        prods[np.diag_indices(d)] = np.inf
        total += prods.min()
    return float(1.0 - total)
