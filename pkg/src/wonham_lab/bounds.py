"""Known bounds on the stability index, evaluated from a model."""
from dataclasses import asdict, dataclass
from typing import Dict, Optional

import numpy as np

from .model import ModelSpec, check_ergodic, spectral_gap, stationary_distribution

PASS, FAIL, SKIPPED = "PASS", "FAIL", "SKIPPED"


@dataclass
class BoundsReport:
    az: float  # -2 min_{i!=j} sqrt(l_ij l_ji)
    mu_min: float  # -sum_i mu_i min_{j!=i} l_ij
    bcl_rate: float  # exponent of the non-asymptotic version of az
    spectral: float  # spectral gap of the generator
    azu_limit: float  # upper limit of sigma^2 gamma as sigma -> 0
    azl_limit: float  # lower limit of sigma^2 gamma as sigma -> 0

    def as_dict(self) -> Dict[str, float]:
        return asdict(self)


def compute_bounds(spec: ModelSpec) -> BoundsReport:
    g = spec.generator
    check_ergodic(g)
    d = spec.d
    mu = stationary_distribution(g)
    off = ~np.eye(d, dtype=bool)
    az = -2.0 * np.sqrt(g * g.T)[off].min()
    rates = np.where(off, g, np.inf)
    mu_min = -float(mu @ rates.min(axis=1))
    diff2 = (spec.h[:, None] - spec.h[None, :]) ** 2
    # nearest neighbour in h for each state j
    nearest = np.where(off, diff2, np.inf).min(axis=1)
    azu = -0.5 * float(mu @ nearest)
    azl = -0.5 * float(mu @ diff2.sum(axis=1))
    return BoundsReport(float(az) + 0.0, mu_min + 0.0, float(az) + 0.0,
                        spectral_gap(g), azu + 0.0, azl + 0.0)


@dataclass
class ConsistencyVerdict:
    az: str
    mu_min: str
    spectral: str
    high_snr: str

    def as_dict(self) -> Dict[str, str]:
        return asdict(self)

    @property
    def all_pass(self) -> bool:
        return FAIL not in self.as_dict().values()


def check_bound_consistency(gamma: float, std_error: float, sigma: float,
                            report: BoundsReport, high_snr_slack: float = 0.3,
                            low_snr_slack: Optional[float] = None) -> ConsistencyVerdict:
    """Compare a gamma estimate with every bound that applies.

    ``az`` is skipped when vacuous (some rate is zero).  The spectral bound is
    a sigma -> infinity statement and is checked for ``sigma >= 10`` with
    slack ``1 / sigma^2`` unless given.  The high-SNR window is checked for
    ``sigma <= 0.2`` on ``sigma^2 gamma``.
    """
    tol = 3.0 * std_error

    def verdict(ok):
        return PASS if ok else FAIL

    az = SKIPPED if report.az >= 0 else verdict(gamma <= report.az + tol)
    mu_min = SKIPPED if report.mu_min >= 0 else verdict(gamma <= report.mu_min + tol)
    if sigma >= 10:
        slack = 1.0 / sigma ** 2 if low_snr_slack is None else low_snr_slack
        spectral = verdict(gamma <= report.spectral + tol + slack)
    else:
        spectral = SKIPPED
    if sigma <= 0.2:
        scaled = sigma ** 2 * gamma
        s_tol = sigma ** 2 * tol
        high = verdict(report.azl_limit - high_snr_slack - s_tol <= scaled
                       <= report.azu_limit + high_snr_slack + s_tol)
    else:
        high = SKIPPED
    return ConsistencyVerdict(az, mu_min, spectral, high)
