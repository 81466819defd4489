"""Spectral radius of nonnegative matrices and M-/H-/monotone class membership."""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.sparse.csgraph import connected_components

from .config import DEFAULT_TOLERANCES
from .errors import DomainError, IterationLimitError, SingularMatrixError
from .sparse import DenseLU, comparison_matrix, csr, diagonal, inf_norm, require_square

DIAGONAL_DOMINANCE = "diagonal-dominance"
SCALING_ITERATION = "scaling-iteration"
DENSE_INVERSE = "dense-inverse"


@dataclass(frozen=True)
class MatrixClassReport:
    is_m_matrix: bool
    is_h_matrix: bool
    is_monotone: bool
    witness: Optional[np.ndarray] = None
    method: Optional[str] = None
    reason: str = ""

    def __bool__(self):
        return self.is_m_matrix or self.is_h_matrix or self.is_monotone


def spectral_radius_nonneg(M, tol=None, max_iters=None, tolerances=DEFAULT_TOLERANCES):
    """Spectral radius of an elementwise nonnegative square matrix.

    The spectrum is the union of the spectra of the diagonal blocks on the
    strongly connected components, so rho is the largest block value.  A
    single node contributes its diagonal entry.  Larger blocks are irreducible;
    power iteration from the all-ones vector runs on ``B + c I`` with
    ``c = spectral_shift * ||B||_inf``.  The shift makes the block primitive,
    so the Collatz-Wielandt bracket ``min(Bx/x) <= rho <= max(Bx/x)`` closes.
    Stops when the bracket is narrower than ``2 tol``.
    """
    tol = tolerances.spectral_tol if tol is None else tol
    max_iters = tolerances.spectral_max_iters if max_iters is None else max_iters
    M = csr(M)
    require_square(M)
    if M.nnz and M.data.min() < 0.0:
        raise DomainError("spectral_radius_nonneg requires a nonnegative matrix")
    n = M.shape[0]
    if n == 0 or M.nnz == 0:
        return 0.0
    ncomp, labels = connected_components(M, directed=True, connection="strong")
    sizes = np.bincount(labels, minlength=ncomp)
    single = sizes[labels] == 1
    rho = float(diagonal(M)[single].max(initial=0.0))
    for k in np.flatnonzero(sizes > 1):
        idx = np.flatnonzero(labels == k)
        rho = max(rho, _irreducible_radius(M[idx][:, idx], tol, max_iters, tolerances.spectral_shift))
    return rho


def _irreducible_radius(B, tol, max_iters, shift_factor):
    shift = shift_factor * inf_norm(B)
    x = np.ones(B.shape[0])
    estimates = []
    for _ in range(max_iters):
        y = B @ x + shift * x
        ratios = y / x
        upper, lower = float(ratios.max()), float(ratios.min())
        estimates.append(0.5 * (upper + lower) - shift)
        if upper - lower <= 2.0 * tol:
            return max(estimates[-1], 0.0)
        x = y / y.max()
    raise IterationLimitError(
        f"power iteration did not converge in {max_iters} iterations",
        estimates=tuple(estimates[-2:]),
    )


def _witness_ok(A, u, norm, tolerances):
    if u is None or not np.all(np.isfinite(u)) or u.min() <= 0.0:
        return False
    Au = A @ u
    return bool(Au.min() > tolerances.witness_rel * norm * u.max())


def is_m_matrix(A, tolerances=DEFAULT_TOLERANCES):
    """Decide whether ``A`` is a nonsingular M-matrix.

    Tier 1 tries ``u = 1`` (strict diagonal dominance); tier 2 runs the Jacobi
    scaling iteration ``u <- u + D^{-1}(e - A u)`` for at most ``10 n`` steps,
    which finds a witness for irreducibly dominant matrices; tier 3 (n up to
    the dense limit) checks ``A^{-1} >= 0`` with a dense factorization.
    """
    A = csr(A)
    require_square(A)
    n = A.shape[0]
    rows = np.repeat(np.arange(n), np.diff(A.indptr))
    off = rows != A.indices
    positive = np.flatnonzero(off & (A.data > 0.0))
    if positive.size:
        k = positive[0]
        return MatrixClassReport(False, False, False, reason=f"positive off-diagonal entry at ({rows[k]}, {A.indices[k]})")
    d = diagonal(A)
    bad = np.flatnonzero(d <= 0.0)
    if bad.size:
        return MatrixClassReport(False, False, False, reason=f"nonpositive diagonal entry in row {bad[0]}")
    norm = inf_norm(A)

    u = np.ones(n)
    if _witness_ok(A, u, norm, tolerances):
        return MatrixClassReport(True, True, True, witness=u, method=DIAGONAL_DOMINANCE)

    e = np.ones(n)
    u = e / d
    for _ in range(tolerances.scaling_steps_per_row * n):
        Au = A @ u
        if u.min() > 0.0 and Au.min() > tolerances.witness_rel * norm * u.max():
            return MatrixClassReport(True, True, True, witness=u / u.max(), method=SCALING_ITERATION)
        u = u + (e - Au) / d
        if not np.all(np.isfinite(u)) or np.abs(u).max() > 1e150:
            break

    if n > tolerances.dense_limit:
        return MatrixClassReport(False, False, False, method=SCALING_ITERATION,
                                 reason="no witness from the scaling iteration; dense test skipped above the dense limit")
    try:
        inv = DenseLU(A, tolerances).inverse()
    except SingularMatrixError as exc:
        return MatrixClassReport(False, False, False, method=DENSE_INVERSE, reason=f"singular: {exc}")
    if inv.min() < -tolerances.inverse_nonneg_tol * max(1.0, np.abs(inv).max()):
        return MatrixClassReport(False, False, False, method=DENSE_INVERSE, reason="inverse has a negative entry")
    u = inv.sum(axis=1)
    witness = u / u.max() if _witness_ok(A, u, norm, tolerances) else None
    return MatrixClassReport(True, True, True, witness=witness, method=DENSE_INVERSE)


def is_h_matrix(A, tolerances=DEFAULT_TOLERANCES):
    """``A`` is an H-matrix iff its comparison matrix is an M-matrix.

    ``is_m_matrix``/``is_monotone`` in the returned report refer to ``A`` itself
    and are only set when ``A`` coincides with its comparison matrix.
    """
    A = csr(A)
    C = comparison_matrix(A)
    rep = is_m_matrix(C, tolerances)
    own = rep.is_m_matrix and (A != C).nnz == 0
    return MatrixClassReport(own, rep.is_m_matrix, own, witness=rep.witness, method=rep.method, reason=rep.reason)


def is_monotone(A, tolerances=DEFAULT_TOLERANCES):
    """Monotone (nonsingular with ``A^{-1} >= 0``): exact dense test up to the dense limit,
    the M-matrix sufficient test beyond it."""
    A = csr(A)
    require_square(A)
    if A.shape[0] > tolerances.dense_limit:
        rep = is_m_matrix(A, tolerances)
        return MatrixClassReport(rep.is_m_matrix, rep.is_h_matrix, rep.is_m_matrix, rep.witness, rep.method, rep.reason)
    try:
        inv = DenseLU(A, tolerances).inverse()
    except SingularMatrixError as exc:
        return MatrixClassReport(False, False, False, method=DENSE_INVERSE, reason=f"singular: {exc}")
    ok = bool(inv.min() >= -tolerances.inverse_nonneg_tol * max(1.0, np.abs(inv).max()))
    return MatrixClassReport(False, False, ok, method=DENSE_INVERSE,
                             reason="" if ok else "inverse has a negative entry")


def nonneg_part(X, tolerances=DEFAULT_TOLERANCES):
    """Clip roundoff-level negatives of a matrix that is nonnegative in exact arithmetic."""
    X = np.asarray(X, dtype=np.float64)
    floor = -tolerances.inverse_nonneg_tol * max(1.0, np.abs(X).max(initial=0.0))
    if X.size and X.min() < floor:
        raise DomainError("product expected to be nonnegative has a negative entry")
    return np.maximum(X, 0.0)
