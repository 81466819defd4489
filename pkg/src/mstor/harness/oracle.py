"""Independent reference solution: Picard iteration with a dense direct solve."""

import warnings

import numpy as np

from ..config import DEFAULT_TOLERANCES
from ..errors import EvaluationError, OracleFailure
from ..matclass import spectral_radius_nonneg
from ..nonlinear import evaluate_map
from ..sparse import DenseLU


def picard_oracle(problem, tol=1e-13, max_iters=10000, tolerances=DEFAULT_TOLERANCES):
    """Iterate ``x <- A^{-1} G(x)`` from zero until successive iterates differ by ``tol``.

    Warns when the contraction condition ``rho(|A^{-1}| P) < 1`` fails.
    """
    lu = DenseLU(problem.A, tolerances)
    P = problem.P.toarray()
    if P.any():
        rho = spectral_radius_nonneg(np.abs(lu.inverse()) @ P, tolerances=tolerances)
        if rho >= 1.0:
            warnings.warn(f"rho(|A^-1| P) = {rho:.6g} >= 1: the fixed point may not be unique "
                          "and Picard iteration may fail", RuntimeWarning, stacklevel=2)
    x = np.zeros(problem.n)
    for _ in range(max_iters):
        try:
            x_new = lu.solve(evaluate_map(problem.G, x))
        except EvaluationError as exc:
            raise OracleFailure(f"Picard iteration failed: {exc}") from None
        if not np.all(np.isfinite(x_new)):
            raise OracleFailure("Picard iterate became non-finite")
        if np.abs(x_new - x).max(initial=0.0) <= tol:
            return x_new
        x = x_new
    raise OracleFailure(f"Picard oracle did not reach tol {tol} in {max_iters} iterations")
