"""P-bounded nonlinear maps and weakly nonlinear test problems ``A x = G(x)``."""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp

from .config import DEFAULT_TOLERANCES
from .errors import DimensionError, DomainError, EvaluationError, GenerationError
from .sparse import DenseLU, as_vector, csr, is_nonnegative, require_square


def _exp_decay(t):
    # e^{-t} clamped at t = 0: Lipschitz constant 1 on the whole line
    return np.exp(-np.maximum(t, 0.0))


# name -> (componentwise function, Lipschitz constant); linear_c is the constant map
NONLINEARITIES = {
    "sine": (np.sin, 1.0),
    "arctan": (np.arctan, 1.0),
    "exp_decay": (_exp_decay, 1.0),
    "linear_c": (None, 0.0),
}


@dataclass(frozen=True)
class BoundedMap:
    """A mapping G with a nonnegative matrix P such that ``|G(x) - G(y)| <= P |x - y|``."""

    evaluator: Callable[[np.ndarray], np.ndarray]
    P: sp.csr_matrix
    description: str = ""
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        P = csr(self.P)
        require_square(P, "P")
        if not is_nonnegative(P):
            raise DomainError("bound matrix P must be elementwise nonnegative")
        object.__setattr__(self, "P", P)

    @property
    def n(self):
        return self.P.shape[0]

    def __call__(self, x):
        return evaluate_map(self, x)


def evaluate_map(G, x):
    """Evaluate ``G(x)``; a non-finite output raises with the first bad index."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (G.n,):
        raise DimensionError(f"G expects a vector of length {G.n}, got shape {x.shape}")
    y = np.asarray(G.evaluator(x), dtype=np.float64).reshape(-1)
    if y.shape != (G.n,):
        raise DimensionError(f"G returned shape {y.shape}, expected ({G.n},)")
    bad = np.flatnonzero(~np.isfinite(y))
    if bad.size:
        raise EvaluationError(f"G produced a non-finite value at index {bad[0]}", index=int(bad[0]))
    return y


def componentwise_map(n, nonlinearity="sine", coupling=1.0, c=0.0):
    """``G(x)_i = coupling * g(x_i)`` with ``P = coupling * L_g * I``.

    For ``linear_c`` the map is the constant ``coupling * c``.
    """
    if nonlinearity not in NONLINEARITIES:
        raise DomainError(f"unknown nonlinearity {nonlinearity!r}")
    if coupling < 0.0:
        raise DomainError("coupling must be nonnegative")
    g, lip = NONLINEARITIES[nonlinearity]
    coupling = float(coupling)
    if g is None:
        value = coupling * float(c)

        def evaluator(x):
            return np.full(x.shape, value)
        desc = f"constant {value!r}"
    else:
        def evaluator(x):
            return coupling * g(x)
        desc = f"{coupling!r} * {nonlinearity}(x)"
    P = sp.identity(n, format="csr") * (coupling * lip)
    params = {"nonlinearity": nonlinearity, "coupling": coupling}
    if nonlinearity == "linear_c":
        params["c"] = float(c)
    return BoundedMap(evaluator, P, desc, params)


@dataclass
class PBoundReport:
    samples: int
    violations: int
    worst_margin: float
    worst_pair: Optional[tuple]
    worst_index: Optional[int]

    @property
    def passed(self):
        return self.violations == 0


def verify_p_bound(G, samples=1000, radius=100.0, seed=0, tolerances=DEFAULT_TOLERANCES):
    """Sample pairs from ``[-radius, radius]^n`` and test ``|G(x) - G(y)| <= P|x - y|``.

    The margin is ``max_i (|G(x) - G(y)| - P|x - y|)_i``; a pair violates the
    bound when its margin exceeds the slack tolerance.
    """
    if samples < 1 or radius <= 0.0:
        raise DomainError("need samples >= 1 and radius > 0")
    rng = np.random.default_rng(seed)
    worst, worst_pair, worst_index, violations = -np.inf, None, None, 0
    for _ in range(samples):
        x = rng.uniform(-radius, radius, G.n)
        y = rng.uniform(-radius, radius, G.n)
        margin = np.abs(evaluate_map(G, x) - evaluate_map(G, y)) - G.P @ np.abs(x - y)
        k = int(np.argmax(margin))
        if margin[k] > tolerances.p_bound_slack:
            violations += 1
        if margin[k] > worst:
            worst, worst_pair, worst_index = float(margin[k]), (x, y), k
    return PBoundReport(samples, violations, worst, worst_pair, worst_index)


@dataclass
class WeaklyNonlinearProblem:
    A: sp.csr_matrix
    G: BoundedMap
    name: str = "problem"
    known_solution: Optional[np.ndarray] = None
    provenance: str = "generated"
    notes: dict = field(default_factory=dict)

    def __post_init__(self):
        self.A = csr(self.A)
        require_square(self.A, "A")
        if self.G.n != self.A.shape[0]:
            raise DimensionError(f"G has dimension {self.G.n}, A has {self.A.shape[0]}")
        if self.known_solution is not None:
            x = as_vector(self.known_solution, self.n, "known_solution")
            res = np.abs(self.A @ x - evaluate_map(self.G, x)).max(initial=0.0)
            if res > 1e-10 * (1.0 + np.abs(x).max(initial=0.0)):
                raise DomainError(f"known solution has residual {res:.3g}")
            self.known_solution = x

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def P(self):
        return self.G.P


def laplacian_1d(n, scaled=False):
    """``tridiag(-1, 2, -1)`` of order n, optionally divided by ``h^2`` with ``h = 1/(n+1)``."""
    A = sp.diags([-1.0, 2.0, -1.0], [-1, 0, 1], shape=(n, n), format="csr")
    return csr(A * (n + 1) ** 2 if scaled else A)


def laplacian_2d(m):
    """Five-point Laplacian on an m-by-m interior grid, scaled by ``1/h^2``, ``h = 1/(m+1)``."""
    T = sp.diags([-1.0, 2.0, -1.0], [-1, 0, 1], shape=(m, m))
    return csr(sp.kronsum(T, T) * float((m + 1) ** 2))


def laplacian_2d_min_eig(m):
    h = 1.0 / (m + 1)
    return 8.0 * np.sin(np.pi * h / 2.0) ** 2 / h**2


def _solution_for(A, G, nonlinearity, c):
    if nonlinearity in ("sine", "arctan") or (nonlinearity == "linear_c" and c == 0.0):
        return np.zeros(A.shape[0])
    if nonlinearity == "linear_c" and A.shape[0] <= DEFAULT_TOLERANCES.dense_limit:
        return DenseLU(A).solve(evaluate_map(G, np.zeros(A.shape[0])))
    return None


def make_problem(A, nonlinearity="sine", coupling=1.0, c=0.0, name=None):
    """A componentwise problem over an arbitrary matrix; no hypothesis check."""
    A = csr(A)
    G = componentwise_map(A.shape[0], nonlinearity, coupling, c)
    x = _solution_for(A, G, nonlinearity, c)
    return WeaklyNonlinearProblem(A, G, name or f"{nonlinearity}-n{A.shape[0]}", x)


def generate_grid_problem(m, nonlinearity="sine", coupling=1.0, c=0.0):
    """Five-point Laplacian problem with ``G(x)_i = coupling * g(x_i)``.

    Raises when ``coupling >= lambda_min(A)``, the largest coupling for which
    ``rho(A^{-1} P) < 1`` with ``P = coupling * I``.
    """
    if m < 2:
        raise GenerationError("grid size m must be at least 2")
    if coupling < 0.0:
        raise GenerationError("coupling must be nonnegative")
    lam = laplacian_2d_min_eig(m)
    _, lip = NONLINEARITIES.get(nonlinearity, (None, 1.0))
    if coupling * lip >= lam:
        raise GenerationError(
            f"coupling {coupling} too large: rho(A^-1 P) < 1 needs coupling < {lam:.6g}",
            max_safe_coupling=lam,
        )
    A = laplacian_2d(m)
    prob = make_problem(A, nonlinearity, coupling, c, name=f"grid{m}-{nonlinearity}")
    prob.notes.update({"generator": "grid", "m": m, "rho_A_inv_P": coupling * lip / lam})
    return prob


