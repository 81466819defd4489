"""Sparse and small-dense matrix primitives.

Matrices are ``scipy.sparse.csr_matrix`` objects in canonical form: float64,
sorted column indices, duplicates summed, explicit zeros dropped.  Vectors are
1-d float64 numpy arrays.
"""

import warnings

import numba
import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .config import DEFAULT_TOLERANCES
from .errors import CapacityError, DimensionError, DomainError, SingularMatrixError


def csr(A):
    """Return ``A`` as a canonical float64 CSR matrix (a fresh copy)."""
    if sp.issparse(A):
        M = sp.csr_matrix(A, dtype=np.float64, copy=True)
    else:
        M = sp.csr_matrix(np.atleast_2d(np.asarray(A, dtype=np.float64)))
    M.sum_duplicates()
    M.eliminate_zeros()
    M.sort_indices()
    return M


def from_triples(rows, cols, vals, shape):
    """Build a CSR matrix from coordinate triples; duplicates are summed, zeros dropped."""
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    vals = np.asarray(vals, dtype=np.float64)
    if not (rows.shape == cols.shape == vals.shape):
        raise DimensionError("rows, cols and vals must have equal length")
    n_rows, n_cols = shape
    if rows.size and (rows.min() < 0 or rows.max() >= n_rows or cols.min() < 0 or cols.max() >= n_cols):
        raise DimensionError(f"triple index out of range for shape {shape}")
    return csr(sp.coo_matrix((vals, (rows, cols)), shape=shape))


def as_vector(x, n=None, name="vector"):
    """Validate an external vector: 1-d, float64, finite, optionally of length ``n``."""
    v = np.array(x, dtype=np.float64).ravel()
    if n is not None and v.shape[0] != n:
        raise DimensionError(f"{name} has length {v.shape[0]}, expected {n}")
    bad = np.flatnonzero(~np.isfinite(v))
    if bad.size:
        raise DomainError(f"{name} has a non-finite entry at index {bad[0]}")
    return v


def require_square(A, name="matrix"):
    if A.shape[0] != A.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {A.shape}")


def inf_norm(A):
    if sp.issparse(A):
        if A.nnz == 0:
            return 0.0
        return float(np.max(np.asarray(abs(A).sum(axis=1)).ravel()))
    A = np.asarray(A, dtype=np.float64)
    if A.size == 0:
        return 0.0
    return float(np.max(np.abs(A).sum(axis=1)))


def abs_matrix(A):
    """Elementwise absolute value; the sparsity pattern is preserved."""
    M = csr(A)
    np.abs(M.data, out=M.data)
    return M


def comparison_matrix(A):
    """The comparison matrix: ``|a_ii|`` on the diagonal, ``-|a_ij|`` elsewhere."""
    M = csr(A)
    require_square(M)
    rows = np.repeat(np.arange(M.shape[0]), np.diff(M.indptr))
    on_diag = rows == M.indices
    M.data = np.where(on_diag, np.abs(M.data), -np.abs(M.data))
    return M


def diagonal(A):
    return np.asarray(A.diagonal(), dtype=np.float64)


def is_nonnegative(A):
    if sp.issparse(A):
        return A.nnz == 0 or bool(A.data.min() >= 0.0)
    return bool(np.all(np.asarray(A) >= 0.0))


def structurally_equal(A, B):
    """Entrywise exact equality of two sparse matrices (stored zeros ignored)."""
    if A.shape != B.shape:
        return False
    D = csr(A) - csr(B)
    D.eliminate_zeros()
    return D.nnz == 0


def max_abs_diff(A, B):
    D = csr(A) - csr(B)
    return 0.0 if D.nnz == 0 else float(np.max(np.abs(D.data)))


# ---------------------------------------------------------------------------
# triangular solves

@numba.njit(cache=True, nogil=True)
def _forward_substitution(indptr, indices, data, b, x):
    n = b.shape[0]
    for i in range(n):
        s = b[i]
        d = 0.0
        for k in range(indptr[i], indptr[i + 1]):
            j = indices[k]
            if j < i:
                s -= data[k] * x[j]
            elif j == i:
                d = data[k]
        x[i] = s / d
    return x


class LowerTriangular:
    """A validated lower-triangular CSR matrix ready for repeated forward solves."""

    def __init__(self, L):
        L = csr(L)
        require_square(L, "lower-triangular matrix")
        rows = np.repeat(np.arange(L.shape[0]), np.diff(L.indptr))
        upper = np.flatnonzero(L.indices > rows)
        if upper.size:
            k = upper[0]
            raise DomainError(f"matrix is not lower triangular: entry ({rows[k]}, {L.indices[k]})")
        d = diagonal(L)
        zero = np.flatnonzero(d == 0.0)
        if zero.size:
            raise SingularMatrixError(f"zero or missing diagonal entry in row {zero[0]}", row=int(zero[0]))
        self.matrix = L
        self.n = L.shape[0]
        self._indptr = L.indptr.astype(np.int64)
        self._indices = L.indices.astype(np.int64)
        self._data = L.data

    def solve(self, b, out=None):
        b = np.ascontiguousarray(b, dtype=np.float64)
        if b.shape != (self.n,):
            raise DimensionError(f"right-hand side has shape {b.shape}, expected ({self.n},)")
        x = np.empty(self.n) if out is None else out
        return _forward_substitution(self._indptr, self._indices, self._data, b, x)


def lower_triangular_solve(L, b):
    """Solve ``L x = b`` by forward substitution."""
    return LowerTriangular(L).solve(as_vector(b, name="b"))


# ---------------------------------------------------------------------------
# dense direct oracle

class DenseLU:
    """Partial-pivoting LU of a (densified) matrix; the independent direct-solve oracle."""

    def __init__(self, A, tolerances=DEFAULT_TOLERANCES):
        n = A.shape[0]
        if A.shape[0] != A.shape[1]:
            raise DimensionError(f"matrix must be square, got shape {A.shape}")
        if n > tolerances.dense_limit:
            raise CapacityError(f"n = {n} exceeds the dense limit {tolerances.dense_limit}")
        dense = A.toarray() if sp.issparse(A) else np.array(A, dtype=np.float64)
        scale = inf_norm(dense)
        self.n = n
        if n == 0:
            self._lu = None
            return
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", sla.LinAlgWarning)
            lu, piv = sla.lu_factor(dense, check_finite=True)
        pivots = np.abs(np.diag(lu))
        small = np.flatnonzero(pivots <= tolerances.pivot_rel * scale)
        if scale == 0.0 or small.size:
            row = int(small[0]) if small.size else 0
            raise SingularMatrixError(f"pivot below threshold at step {row}", row=row)
        self._lu = (lu, piv)

    def solve(self, b):
        b = np.asarray(b, dtype=np.float64)
        if self.n == 0:
            return b.copy()
        return sla.lu_solve(self._lu, b)

    def inverse(self):
        return self.solve(np.eye(self.n))


def dense_lu_solve(A, b, tolerances=DEFAULT_TOLERANCES):
    """Solve ``A x = b`` densely with partial pivoting (guarded to n <= dense_limit)."""
    b = as_vector(b, A.shape[0], "b")
    return DenseLU(A, tolerances).solve(b)
