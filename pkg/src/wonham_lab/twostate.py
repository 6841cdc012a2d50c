"""Closed forms for the two-state filter.

For ``d = 2`` the filter ``x = pi_t(1)`` is a scalar diffusion with drift
``l21 - (l12 + l21) x`` and diffusion coefficient
``(dh / sigma)^2 x^2 (1 - x)^2``.  Its stationary density is known in closed
form, which turns the stability index and the top Lyapunov exponent into
one-dimensional integrals.

All integrals are taken in the variable ``u`` with ``x = (1 + tanh u) / 2``.
Both endpoints of ``(0, 1)`` are essential singularities of the density and
the substitution maps them to doubly-exponentially decaying tails.
"""
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from ._config import TOL
from .exceptions import DegenerateObservationError, DomainError, NotApplicableError
from .model import ModelSpec, check_ergodic, stationary_distribution

# Tail cut-off relative to the peak of the log-integrand.  exp(-60) is far
# below the 1e-14 mass budget once the super-exponential tail decay is used.
_LOG_TAIL_CUT = -60.0
_QUAD_EPSREL = 1e-13


def _params(spec: ModelSpec, need_dh=True):
    if spec.d != 2:
        raise NotApplicableError("two-state formulas need d = 2")
    check_ergodic(spec.generator)
    l12 = spec.generator[0, 1]
    l21 = spec.generator[1, 0]
    h1, h2 = spec.h
    dh = h1 - h2
    if need_dh and dh == 0:
        raise DegenerateObservationError("Delta h = 0: closed form undefined")
    return l12, l21, h1, h2, dh


def _log_density_u(spec, u):
    """log q(x(u)) and log dx/du, with x = sigmoid(2u)."""
    l12, l21, _, _, dh = _params(spec)
    k = 2.0 * spec.sigma ** 2 / dh ** 2
    u = np.asarray(u, dtype=float)
    log_x = -np.logaddexp(0.0, -2.0 * u)
    log_1mx = -np.logaddexp(0.0, 2.0 * u)
    inv_x = 1.0 + np.exp(-2.0 * u)
    inv_1mx = 1.0 + np.exp(2.0 * u)
    expo = k * (-l21 * inv_x - l12 * inv_1mx + (l21 - l12) * 2.0 * u)
    log_q = expo - 2.0 * log_x - 2.0 * log_1mx
    log_jac = np.log(2.0) + log_x + log_1mx
    return log_q, log_jac


def log_density(spec: ModelSpec, x) -> np.ndarray:
    """Unnormalized log stationary density of ``pi_t(1)``.

    ``log q(x) = -2 log(x(1-x)) + k (-l21/x - l12/(1-x) + (l21-l12) log(x/(1-x)))``
    with ``k = 2 sigma^2 / dh^2``.
    """
    x = np.asarray(x, dtype=float)
    if np.any((x <= 0) | (x >= 1)):
        raise DomainError("density is defined on the open interval (0, 1)")
    u = 0.5 * (np.log(x) - np.log1p(-x))
    return _log_density_u(spec, u)[0]


def density_eval(spec: ModelSpec, x) -> np.ndarray:
    return np.exp(log_density(spec, x))


@dataclass
class _Window:
    lo: float
    hi: float
    peaks: np.ndarray
    shift: float


def _window(spec) -> _Window:
    u = np.linspace(-40.0, 40.0, 40001)
    lq, lj = _log_density_u(spec, u)
    lf = lq + lj
    shift = lf.max()
    keep = np.flatnonzero(lf - shift > _LOG_TAIL_CUT)
    step = u[1] - u[0]
    lo = u[keep[0]] - step
    hi = u[keep[-1]] + step
    interior = (lf[1:-1] >= lf[:-2]) & (lf[1:-1] >= lf[2:])
    peaks = u[1:-1][interior]
    peaks = peaks[(peaks > lo) & (peaks < hi)]
    return _Window(lo, hi, peaks, shift)


def _integrate_u(spec, moment, window=None):
    """Integral of ``moment(x) * q(x) dx`` scaled by ``exp(-shift)``."""
    w = window or _window(spec)

    def f(u):
        lq, lj = _log_density_u(spec, u)
        x = 1.0 / (1.0 + np.exp(-2.0 * u))
        return moment(x) * np.exp(lq + lj - w.shift)

    pts = list(w.peaks) if len(w.peaks) else None
    val, err = integrate.quad(f, w.lo, w.hi, points=pts, epsabs=0.0,
                              epsrel=_QUAD_EPSREL, limit=1000)
    return val, err


@dataclass
class Density2D:
    """Stationary density of the two-state filter with its quadrature."""

    spec: ModelSpec
    quad_tolerance: float = 1e-10

    def __post_init__(self):
        _params(self.spec)
        self._window = _window(self.spec)
        self._z, self._z_err = _integrate_u(self.spec, np.ones_like, self._window)

    @property
    def normalization(self) -> float:
        """``log Z`` is ``log(normalization) + log_shift``."""
        return self._z

    @property
    def log_normalization(self) -> float:
        return float(np.log(self._z) + self._window.shift)

    def eval(self, x):
        return density_eval(self.spec, x)

    def pdf(self, x):
        """Normalized density."""
        return np.exp(log_density(self.spec, x) - self.log_normalization)

    def expect(self, fn):
        """Stationary expectation of ``fn(pi_t(1))`` and an error estimate."""
        val, err = _integrate_u(self.spec, fn, self._window)
        mean = val / self._z
        return mean, abs(err / self._z) + abs(mean) * self._z_err / self._z


@dataclass
class TwoStateSummary:
    gamma: float
    lambda1: float
    lambda_sum: float
    quad_error: float


def two_state_summary(spec: ModelSpec) -> TwoStateSummary:
    """Stability index, top exponent and ``lambda1 + lambda2`` by quadrature."""
    l12, l21, h1, h2, dh = _params(spec)
    dens = Density2D(spec)
    r, r_err = dens.expect(lambda x: x * (1.0 - x))
    m1, m1_err = dens.expect(lambda x: x)
    m2, m2_err = dens.expect(lambda x: x * x)
    s2 = spec.sigma ** 2
    gamma = -(l12 + l21) + dh ** 2 / s2 * (-0.5 + r)
    lam1 = (h2 ** 2 + 2.0 * h2 * dh * m1 + dh ** 2 * m2) / (2.0 * s2)
    err = dh ** 2 / s2 * r_err
    return TwoStateSummary(gamma, lam1, lambda_sum_closed_form(spec), err)


def gamma_quadrature(spec: ModelSpec) -> float:
    return two_state_summary(spec).gamma


def lambda1_quadrature(spec: ModelSpec) -> float:
    """Top Lyapunov exponent ``E(pi(h))^2 / (2 sigma^2)`` under the density."""
    l12, l21, h1, h2, dh = _params(spec, need_dh=False)
    if dh == 0:
        return h1 ** 2 / (2.0 * spec.sigma ** 2)
    return two_state_summary(spec).lambda1


def lambda_sum_closed_form(spec: ModelSpec) -> float:
    """``lambda1 + lambda2``; defined also when ``h1 == h2``."""
    l12, l21, h1, h2, _ = _params(spec, need_dh=False)
    mu = stationary_distribution(spec.generator)
    mu_h = mu @ spec.h
    return -(l12 + l21) + ((h1 + h2) * mu_h - 0.5 * h1 ** 2 - 0.5 * h2 ** 2) / spec.sigma ** 2


def gamma_expansion_low_snr(spec: ModelSpec) -> float:
    """Large-sigma expansion of gamma through the sigma^-4 term.

    The sigma^-4 coefficient is ``-h' Gamma h`` where Gamma solves the
    algebraic Lyapunov equation; for two states this equals
    ``-dh^4 mu1^2 mu2^2 / (2 (l12 + l21))``.
    """
    l12, l21, h1, h2, dh = _params(spec, need_dh=False)
    mu1, mu2 = stationary_distribution(spec.generator)
    s2 = spec.sigma ** 2
    c2 = -0.5 * (h1 ** 2 + h2 ** 2) + (mu2 * h1 + mu1 * h2) * (mu1 * h1 + mu2 * h2)
    c4 = -dh ** 4 * mu1 ** 2 * mu2 ** 2 / (2.0 * (l12 + l21))
    return -(l12 + l21) + c2 / s2 + c4 / s2 ** 2


def gamma_expansion_high_snr(spec: ModelSpec) -> float:
    """Small-sigma asymptote ``-dh^2/(2 sigma^2) + c log(sigma^-2)``.

    ``c = 4 l12 l21 / (l12 + l21)``, i.e. twice ``sum_i mu_i |l_ii|``.  The
    o(1) factor is dropped, so this is only meaningful as a trend.
    """
    l12, l21, h1, h2, dh = _params(spec)
    if spec.sigma >= 1:
        warnings.warn("high-SNR expansion used with sigma >= 1", RuntimeWarning)
    s2 = spec.sigma ** 2
    return -0.5 * dh ** 2 / s2 + np.log(1.0 / s2) * 4.0 * l12 * l21 / (l12 + l21)


def lambda1_refined_expansion(spec: ModelSpec, terms: int = 2) -> float:
    """Small-sigma expansion of the top exponent (any number of states).

    ``mu(h^2) / (2 sigma^2) - log(sigma^-2) sum_i mu_i |l_ii|``; pass
    ``terms=1`` for the leading term only.
    """
    h = spec.h
    if len(np.unique(h)) != len(h):
        raise NotApplicableError("expansion requires pairwise distinct h values")
    mu = stationary_distribution(spec.generator)
    s2 = spec.sigma ** 2
    lead = 0.5 * (mu @ h ** 2) / s2
    if terms == 1:
        return float(lead)
    return float(lead - np.log(1.0 / s2) * (mu @ np.abs(np.diag(spec.generator))))


@dataclass
class GammaLyapunovSolution:
    Gamma: np.ndarray
    residual: float


def _lyapunov_forcing(spec):
    mu = stationary_distribution(spec.generator)
    q = np.diag(mu) - np.outer(mu, mu)
    qh = q @ spec.h
    return np.outer(qh, qh)


def solve_gamma_lyapunov(spec: ModelSpec) -> GammaLyapunovSolution:
    """Zero-sum solution of ``L' G + G L + Q h h' Q = 0``, ``Q = diag(mu) - mu mu'``.

    The Lyapunov operator has the one-dimensional kernel ``mu mu'``; the
    constraint ``sum_ij G_ij = 0`` is appended as an extra row, which makes
    the stacked system full rank.
    """
    g = spec.generator
    d = spec.d
    c = _lyapunov_forcing(spec)
    eye = np.eye(d)
    # row-major vec: vec(L'G) = kron(L', I) vec G, vec(G L) = kron(I, L') vec G
    op = np.kron(g.T, eye) + np.kron(eye, g.T)
    a = np.vstack([op, np.ones((1, d * d))])
    b = np.concatenate([-c.ravel(), [0.0]])
    sol, *_ = np.linalg.lstsq(a, b, rcond=None)
    gamma = sol.reshape(d, d)
    gamma = 0.5 * (gamma + gamma.T)
    resid = np.abs(g.T @ gamma + gamma @ g + c).max()
    return GammaLyapunovSolution(gamma, float(resid))


def lambda1_expansion_low_snr(spec: ModelSpec) -> float:
    """``mu(h)^2 / (2 sigma^2) + h' Gamma h / (2 sigma^4)``."""
    mu = stationary_distribution(spec.generator)
    gam = solve_gamma_lyapunov(spec).Gamma
    s2 = spec.sigma ** 2
    return float(0.5 * (mu @ spec.h) ** 2 / s2 + 0.5 * spec.h @ gam @ spec.h / s2 ** 2)


def fokker_planck_residual(spec: ModelSpec, xs, dps: int = 40) -> float:
    """Relative residual of the stationary Kolmogorov forward equation.

    Plugs the normalized density into
    ``-(b q)' + (dh^2 / (2 sigma^2)) (x^2 (1-x)^2 q)''`` using high-precision
    numerical differentiation, and returns ``max |residual|`` over ``xs``
    divided by ``max |(b q)'|`` over the same points.
    """
    import mpmath

    l12, l21, _, _, dh = _params(spec)
    log_z = Density2D(spec).log_normalization
    k = 2 * spec.sigma ** 2 / dh ** 2
    with mpmath.workdps(dps):
        mk = mpmath.mpf(k)
        a12, a21 = mpmath.mpf(l12), mpmath.mpf(l21)
        diff_coef = mpmath.mpf(dh) ** 2 / (2 * mpmath.mpf(spec.sigma) ** 2)
        lz = mpmath.mpf(log_z)

        def q(x):
            expo = mk * (-a21 / x - a12 / (1 - x) + (a21 - a12) * mpmath.log(x / (1 - x)))
            return mpmath.exp(expo - 2 * mpmath.log(x * (1 - x)) - lz)

        def flux_drift(x):
            return (a21 - (a12 + a21) * x) * q(x)

        def spread(x):
            return x ** 2 * (1 - x) ** 2 * q(x)

        res, scale = [], []
        for x in xs:
            x = mpmath.mpf(x)
            t1 = mpmath.diff(flux_drift, x)
            t2 = diff_coef * mpmath.diff(spread, x, 2)
            res.append(abs(-t1 + t2))
            scale.append(abs(t1))
    return float(max(res) / max(scale))
