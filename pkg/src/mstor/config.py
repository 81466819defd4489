"""Numerical tolerances used across the package.

Every threshold lives here so call sites never hard-code a constant.
"""

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    spectral_tol: float = 1e-10
    spectral_max_iters: int = 100_000
    # virtual shift, as a fraction of ||M||_inf, applied during power iteration
    spectral_shift: float = 0.5
    # witness u must satisfy min(A u) > witness_rel * ||A||_inf * ||u||_inf
    witness_rel: float = 1e-12
    inverse_nonneg_tol: float = 1e-12
    dense_limit: int = 2000
    pivot_rel: float = 1e-14
    scaling_steps_per_row: int = 10
    p_bound_slack: float = 1e-12
    weight_sum_tol: float = 1e-15
    # entrywise tolerance for the identity checks of the validators (0 = exact)
    identity_tol: float = 0.0


DEFAULT_TOLERANCES = Tolerances()
