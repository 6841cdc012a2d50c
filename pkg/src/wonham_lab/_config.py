from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    """Numerical thresholds shared across modules."""

    structural: float = 1e-12  # row sums, simplex sums
    algebraic: float = 1e-10  # balance equations, Lyapunov residuals
    ergodic_entry: float = 1e-12  # minimum entry of exp(generator)
    zero_eigenvalue: float = 1e-9
    log_dist_floor: float = 1e-280


TOL = Tolerances()
