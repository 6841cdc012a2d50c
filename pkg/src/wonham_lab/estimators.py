"""scikit-learn style front ends for the filter and the stability campaign."""
import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .bounds import compute_bounds
from .campaign import default_nu_bar, run_campaign
from .filtering import run_filter, run_two_filters
from .lyapunov import (
    default_burn_in,
    gamma_distance_slope,
    lambda1_fk_stationary,
    lambda1_log_norm,
    lambda_sum_wedge,
    pool_estimates,
)
from .model import ModelSpec
from .simulate import ObservationPath
from .twostate import two_state_summary
from .validation import (
    check_generator,
    check_increments,
    check_levels,
    check_positive,
    check_simplex,
)


def _spec(est) -> ModelSpec:
    g = check_generator(est.generator)
    h = check_levels(est.h, g.shape[0])
    sigma = check_positive(est.sigma, "sigma")
    nu = None if est.nu is None else check_simplex(est.nu, g.shape[0], "nu")
    return ModelSpec(g, h, sigma, nu)


class WonhamFilter(TransformerMixin, BaseEstimator):
    """Conditional state probabilities from observation increments.

    ``transform`` maps an array of ``n`` increments ``dY`` to the ``(n + 1, d)``
    array of filter states, the first row being ``nu``.

    Examples
    --------
    >>> f = WonhamFilter([[-1, 1], [1, -1]], h=[1, -1], sigma=1.0, dt=0.01)
    >>> f.fit_transform(np.zeros(5)).shape
    (6, 2)
    """

    def __init__(self, generator=None, h=None, sigma=1.0, dt=1e-3, nu=None):
        self.generator = generator
        self.h = h
        self.sigma = sigma
        self.dt = dt
        self.nu = nu

    def fit(self, X=None, y=None):
        self.spec_ = _spec(self)
        self.dt_ = check_positive(self.dt, "dt")
        self.n_states_ = self.spec_.d
        if X is not None:
            check_increments(X)
        return self

    def trajectory(self, X):
        check_is_fitted(self, "spec_")
        obs = ObservationPath(self.dt_, check_increments(X))
        return run_filter(obs, self.spec_)

    def transform(self, X):
        return self.trajectory(X).pi

    def score(self, X, y=None):
        """Log-likelihood ratio of the path against pure noise, per unit time."""
        traj = self.trajectory(X)
        return float(traj.log_norm[-1] / (len(traj.log_norm) - 1) / self.dt_)


class StabilityIndexEstimator(BaseEstimator):
    """Monte Carlo estimate of the filter stability index and Lyapunov exponents.

    ``fit()`` with no data simulates ``replications`` paths from the model;
    ``fit(X)`` with a list of observation increment arrays filters those
    instead.  Fitted attributes: ``gamma_``, ``gamma_std_error_``,
    ``lambda1_``, ``lambda_sum_``, ``estimates_``, ``bounds_`` and, for two
    states with ``h1 != h2``, ``gamma_quadrature_``.
    """

    def __init__(self, generator=None, h=None, sigma=1.0, nu=None, nu_bar=None, dt=1e-3,
                 horizon=200.0, burn_in=None, replications=10, random_state=0, n_jobs=None):
        self.generator = generator
        self.h = h
        self.sigma = sigma
        self.nu = nu
        self.nu_bar = nu_bar
        self.dt = dt
        self.horizon = horizon
        self.burn_in = burn_in
        self.replications = replications
        self.random_state = random_state
        self.n_jobs = n_jobs

    def fit(self, X=None, y=None):
        spec = _spec(self)
        dt = check_positive(self.dt, "dt")
        nu_bar = (default_nu_bar(spec) if self.nu_bar is None
                  else check_simplex(self.nu_bar, spec.d, "nu_bar"))
        burn_in = default_burn_in(spec) if self.burn_in is None else float(self.burn_in)
        if X is None:
            horizon = check_positive(self.horizon, "horizon")
            if int(self.replications) < 1:
                raise ValueError("replications must be >= 1")
            res = run_campaign(spec, dt, horizon, int(self.replications),
                               int(self.random_state), burn_in, nu_bar, self.n_jobs)
            self.estimates_ = res.pooled
        else:
            per_path = []
            for inc in X:
                obs = ObservationPath(dt, check_increments(inc))
                run = run_two_filters(obs, spec, spec.initial, nu_bar)
                per_path.append({
                    "fk_stationary": lambda1_fk_stationary(run.primary, burn_in),
                    "log_norm_slope": lambda1_log_norm(run.primary, burn_in),
                    "wedge_slope": lambda_sum_wedge(run, burn_in),
                    "distance_slope": gamma_distance_slope(run, burn_in),
                })
            if not per_path:
                raise ValueError("X holds no observation paths")
            self.estimates_ = {m: pool_estimates([p[m] for p in per_path])
                               for m in per_path[0]}
        gamma = self.estimates_["distance_slope"]
        self.gamma_ = gamma.value
        self.gamma_std_error_ = gamma.std_error
        self.lambda1_ = self.estimates_["log_norm_slope"].value
        self.lambda_sum_ = self.estimates_["wedge_slope"].value
        self.bounds_ = compute_bounds(spec)
        if spec.d == 2 and spec.h[0] != spec.h[1]:
            self.gamma_quadrature_ = two_state_summary(spec).gamma
        self.spec_ = spec
        return self
