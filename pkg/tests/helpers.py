"""Independent reference implementations and random problem builders used by the tests."""

import numpy as np
import scipy.sparse as sp

from mstor.nonlinear import BoundedMap, WeaklyNonlinearProblem


def textbook_gauss_seidel_step(A, b, x):
    """One classical Gauss-Seidel sweep on dense A, written index by index."""
    A = np.asarray(A, dtype=float)
    x = np.array(x, dtype=float)
    n = len(x)
    for i in range(n):
        s = b[i]
        for j in range(n):
            if j != i:
                s -= A[i, j] * x[j]
        x[i] = s / A[i, i]
    return x


def textbook_jacobi_step(A, b, x):
    A = np.asarray(A, dtype=float)
    n = len(x)
    y = np.empty(n)
    for i in range(n):
        s = b[i]
        for j in range(n):
            if j != i:
                s -= A[i, j] * x[j]
        y[i] = s / A[i, i]
    return y


def expanded_local_iterate(M, N, x, rhs, s):
    """``(M^-1 N)^s x + sum_{j<s} (M^-1 N)^j M^-1 rhs`` with dense arithmetic."""
    M, N = np.asarray(M.toarray() if sp.issparse(M) else M), np.asarray(N.toarray() if sp.issparse(N) else N)
    T = np.linalg.solve(M, N)
    c = np.linalg.solve(M, rhs)
    out = np.linalg.matrix_power(T, s) @ x
    for j in range(s):
        out += np.linalg.matrix_power(T, j) @ c
    return out


def random_h_matrix(rng, n, density=0.3, margin=0.2):
    """Random sparse matrix with strictly dominant diagonal of random sign pattern."""
    off = sp.random(n, n, density=density, random_state=rng, data_rvs=lambda k: rng.uniform(-1, 1, k)).tolil()
    off.setdiag(0.0)
    off = off.tocsr()
    rowsum = np.asarray(abs(off).sum(axis=1)).ravel()
    d = (rowsum + margin + rng.uniform(0, 1, n)) * rng.choice([-1.0, 1.0], n)
    return sp.csr_matrix(off + sp.diags(d))


def sine_problem(A, q, b, name="random"):
    """``G(x) = diag(q) sin(x) + b`` with ``P = diag(q)``."""
    q = np.asarray(q, dtype=float)
    b = np.asarray(b, dtype=float)

    def g(x):
        return q * np.sin(x) + b
    return WeaklyNonlinearProblem(A, BoundedMap(g, sp.diags(q), "q sin(x) + b"), name)


def linear_problem(A, K, b, name="linear"):
    """``G(x) = K x + b`` with ``P = |K|``."""
    K = sp.csr_matrix(K)

    def g(x):
        return K @ x + b
    return WeaklyNonlinearProblem(A, BoundedMap(g, abs(K), "K x + b"), name)
