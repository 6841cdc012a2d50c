import numpy as np
import pytest

from wonham_lab import (
    InsufficientHorizonError,
    LyapunovEstimate,
    ModelSpec,
    RngStream,
    gamma_distance_slope,
    lambda1_fk_pathwise,
    lambda1_fk_stationary,
    lambda1_log_norm,
    lambda_sum_wedge,
    run_filter,
    run_two_filters,
    sample_observation,
    simulate,
)
from wonham_lab.campaign import run_campaign
from wonham_lab.exceptions import DegenerateRunError
from wonham_lab.lyapunov import (
    DegenerateWedgeError,
    batch_means,
    combined_se,
    pool_estimates,
    slope_with_se,
)
from wonham_lab.simulate import ChainPath

SYM = [[-1.0, 1.0], [1.0, -1.0]]
G3 = [[-1.5, 1.0, 0.5], [0.3, -0.8, 0.5], [1.2, 0.4, -1.6]]


def path(spec, horizon=40.0, dt=1e-3, seed=0, init=None):
    chain, obs = simulate(spec, horizon, dt, RngStream(seed))
    return chain, obs, run_filter(obs, spec, init)


class TestConstantObservation:
    @pytest.mark.parametrize("c, sigma", [(1.5, 1.0), (-0.7, 0.4)])
    def test_fk_estimators_exact(self, c, sigma):
        spec = ModelSpec(G3, [c, c, c], sigma)
        chain, _, traj = path(spec)
        want = c * c / (2 * sigma ** 2)
        assert lambda1_fk_pathwise(traj, chain, 5.0).value == pytest.approx(want, rel=1e-12)
        assert lambda1_fk_stationary(traj, 5.0).value == pytest.approx(want, rel=1e-12)

    def test_log_norm_slope(self):
        spec = ModelSpec(G3, [1.2] * 3, 0.8)
        _, _, traj = path(spec, horizon=100.0)
        est = lambda1_log_norm(traj, 5.0)
        assert abs(est.value - 1.44 / 1.28) <= 3 * est.std_error

    def test_zero_levels(self):
        spec = ModelSpec(G3, [0, 0, 0], 1.0)
        _, _, traj = path(spec)
        assert lambda1_fk_stationary(traj, 5.0).value == 0.0


def test_frozen_chain_single_state_rate():
    spec = ModelSpec(np.zeros((2, 2)), [2.0, -1.0], 0.5)
    frozen = ChainPath(60.0, np.array([]), np.array([1]))
    obs = sample_observation(frozen, spec, 1e-3, RngStream(0))
    traj = run_filter(obs, spec, [0.5, 0.5])
    # once the filter has locked on, log |rho_t| = h^2 t / (2 s^2) + h (Y_t - h t) / s^2
    noise = np.concatenate([[0.0], np.cumsum(obs.increments)]) - (-1.0) * traj.times
    corrected = traj.log_norm - (-1.0) * noise / 0.25
    t = traj.times
    sel = t >= 5.0
    assert np.polyfit(t[sel], corrected[sel], 1)[0] == pytest.approx(2.0, abs=1e-9)


def test_wedge_slope_deterministic_when_levels_cancel():
    # h1 + h2 = 0 removes the noise term from log |rho ^ rho_bar|
    spec = ModelSpec([[-1.0, 1.0], [2.0, -2.0]], [0.5, -0.5], 0.7)
    _, obs, _ = path(spec)
    run = run_two_filters(obs, spec, [1, 0], [0, 1])
    want = -3.0 + (-0.25) / 0.49
    assert lambda_sum_wedge(run, 5.0).value == pytest.approx(want, abs=1e-9)


def test_wedge_slope_equal_levels():
    spec = ModelSpec(SYM, [1.0, 1.0], 1.0)
    res = run_campaign(spec, 2e-3, 40.0, 16, seed=1, burn_in=5.0)
    w = res.pooled["wedge_slope"]
    assert abs(w.value + 1.0) <= 3 * w.std_error


def test_wedge_slope_three_states_flagged():
    spec = ModelSpec(G3, [1.0, 0.0, -2.0], 1.0)
    _, obs, _ = path(spec)
    run = run_two_filters(obs, spec, [1, 0, 0], [0, 0, 1])
    assert lambda_sum_wedge(run, 5.0).meta["upper_rate_only"] is True


@pytest.fixture(scope="module")
def campaigns():
    specs = {
        "benchmark": ModelSpec(SYM, [1.0, -1.0], 1.0),
        "asymmetric": ModelSpec([[-1.0, 1.0], [2.0, -2.0]], [0.5, -1.0], 0.6),
        "three-state": ModelSpec(G3, [1.0, 0.0, -2.0], 0.8),
    }
    return {k: (s, run_campaign(s, 2e-3, 60.0, 24, seed=99, burn_in=6.0))
            for k, s in specs.items()}


@pytest.mark.parametrize("name", ["benchmark", "asymmetric", "three-state"])
@pytest.mark.parametrize("other", ["fk_pathwise", "fk_stationary"])
def test_cross_estimator_agreement(campaigns, name, other):
    _, res = campaigns[name]
    a, b = res.pooled[other], res.pooled["log_norm_slope"]
    assert abs(a.value - b.value) <= 3 * combined_se(a, b)


@pytest.mark.parametrize("name", ["benchmark", "asymmetric"])
def test_lyap_identity(campaigns, name):
    _, res = campaigns[name]
    g, w, l1 = (res.pooled[m] for m in ("distance_slope", "wedge_slope", "log_norm_slope"))
    assert abs(g.value - (w.value - 2 * l1.value)) <= 3 * combined_se(g, w, l1)


@pytest.mark.parametrize("name", ["benchmark", "asymmetric", "three-state"])
def test_gamma_negative_and_records_initials(campaigns, name):
    spec, res = campaigns[name]
    g = res.pooled["distance_slope"]
    assert g.value + 3 * g.std_error < 0
    assert len(g.meta["nu"]) == spec.d and len(g.meta["nu_bar"]) == spec.d


@pytest.mark.parametrize("spec", [ModelSpec(SYM, [1.0, -1.0], 0.7),
                                  ModelSpec(G3, [1.0, 0.0, -2.0], 0.8)])
def test_initial_condition_invariance(spec):
    _, obs = simulate(spec, 80.0, 1e-3, RngStream(31))
    a = lambda1_log_norm(run_filter(obs, spec, np.eye(spec.d)[0]), 5.0)
    b = lambda1_log_norm(run_filter(obs, spec, np.eye(spec.d)[-1]), 5.0)
    assert abs(a.value - b.value) <= 3 * min(a.std_error, b.std_error)


def test_lambda1_increases_with_snr():
    values = []
    for sigma in (4.0, 2.0, 1.0, 0.5):
        spec = ModelSpec([[-1.0, 1.0], [2.0, -2.0]], [1.0, -1.0], sigma)
        values.append(run_campaign(spec, 2e-3, 40.0, 8, seed=5, burn_in=4.0)
                      .pooled["fk_stationary"].value)
    assert all(a < b for a, b in zip(values, values[1:]))


@pytest.mark.parametrize("rates, sigma, want", [((1.0, 2.0), 30.0, 0.5 / 9),
                                                ((1.0, 1.0), 0.1, 0.5)])
def test_fk_stationary_extreme_noise_levels(rates, sigma, want):
    spec = ModelSpec.two_state(*rates, [1.0, -1.0], sigma)
    dt = 1e-3 if sigma > 1 else 1e-4
    _, _, traj = path(spec, horizon=60.0, dt=dt, seed=3)
    est = lambda1_fk_stationary(traj, 3.0)
    assert est.value * sigma ** 2 == pytest.approx(want, rel=0.10)


class TestErrors:
    def test_horizon_not_past_burn_in(self):
        spec = ModelSpec(SYM, [1.0, -1.0], 1.0)
        _, _, traj = path(spec, horizon=2.0)
        with pytest.raises(InsufficientHorizonError):
            lambda1_log_norm(traj, burn_in=5.0)

    def test_short_distance_window(self):
        spec = ModelSpec(SYM, [1.0, -1.0], 1.0)
        _, obs, _ = path(spec, horizon=12.0)
        run = run_two_filters(obs, spec, [1, 0], [0, 1])
        with pytest.raises(InsufficientHorizonError):
            gamma_distance_slope(run, burn_in=5.0)

    def test_coincident_initials(self):
        spec = ModelSpec(SYM, [1.0, -1.0], 1.0)
        _, obs, _ = path(spec, horizon=20.0)
        run = run_two_filters(obs, spec, [0.3, 0.7], [0.3, 0.7])
        with pytest.raises(DegenerateWedgeError):
            lambda_sum_wedge(run, 2.0)
        with pytest.raises(DegenerateRunError):
            gamma_distance_slope(run, 2.0)

    @pytest.mark.parametrize("kwargs", [dict(std_error=-1.0), dict(burn_in=10.0, horizon=5.0),
                                        dict(burn_in=-1.0)])
    def test_estimate_invariants(self, kwargs):
        base = dict(value=0.0, std_error=0.1, horizon=10.0, burn_in=1.0, method="fk_pathwise")
        base.update(kwargs)
        with pytest.raises(ValueError):
            LyapunovEstimate(**base)


def test_slope_with_se_on_random_walk():
    rng = np.random.default_rng(0)
    dt, n = 1e-2, 200_000
    t = np.arange(n + 1) * dt
    slopes, ses = [], []
    for _ in range(40):
        y = np.concatenate([[0.0], np.cumsum(0.3 * dt + 0.5 * np.sqrt(dt) * rng.standard_normal(n))])
        s, se = slope_with_se(t, y, 100)
        slopes.append(s)
        ses.append(se)
    # OLS slope of a Brownian path with drift: Var = 6 s^2 / (5 T)
    assert np.mean(slopes) == pytest.approx(0.3, abs=4 * np.std(slopes) / np.sqrt(40))
    assert np.mean(ses) == pytest.approx(np.sqrt(6 * 0.25 / (5 * n * dt)), rel=0.1)
    assert np.std(slopes) == pytest.approx(np.mean(ses), rel=0.35)


def test_batch_means():
    mean, se = batch_means(np.array([1.0, 3.0, 2.0, 2.0, 0.0, 4.0]), 2)
    assert mean == 2.0 and se == 0.0


def test_pooling():
    ests = [LyapunovEstimate(v, 0.5, 10.0, 1.0, "fk_stationary") for v in (1.0, 2.0, 3.0)]
    pooled = pool_estimates(ests)
    assert pooled.value == 2.0
    assert pooled.std_error == pytest.approx(1.0 / np.sqrt(3))
    assert pooled.replications == 3
    assert pool_estimates(ests[:1]).std_error == 0.5
    with pytest.raises(ValueError):
        pool_estimates([])
