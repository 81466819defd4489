"""Multi-splittings, two-stage decompositions, TOR relaxation matrices and
the parameter bounds that guarantee convergence."""

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
import scipy.sparse as sp

from .config import DEFAULT_TOLERANCES
from .errors import DimensionError, DomainError, ParameterError, PartitionError, SingularMatrixError
from .matclass import is_h_matrix, is_monotone, nonneg_part, spectral_radius_nonneg
from .sparse import (
    DenseLU,
    abs_matrix,
    comparison_matrix,
    csr,
    diagonal,
    is_nonnegative,
    max_abs_diff,
    require_square,
)

ALL_TO_V = "all_to_V"
ALTERNATE_ROWS = "alternate_rows"
COLUMN_HALVES = "column_halves"
LOWER_PARTITIONS = (ALL_TO_V, ALTERNATE_ROWS, COLUMN_HALVES)

BLOCK_JACOBI = "block_jacobi_overlap0"
BLOCK_OVERLAP = "block_overlap_k"
GLOBAL_COPIES = "global_copies"
SPLITTING_STRATEGIES = (BLOCK_JACOBI, BLOCK_OVERLAP, GLOBAL_COPIES)


@dataclass(frozen=True)
class TwoStageSplit:
    """``B = D - (V + V_star) - U`` with D diagonal, V and V_star strictly lower, U zero-diagonal."""

    D: sp.csr_matrix
    V: sp.csr_matrix
    V_star: sp.csr_matrix
    U: sp.csr_matrix
    B: sp.csr_matrix

    @property
    def n(self):
        return self.B.shape[0]

    def reconstruct(self):
        return csr(self.D - self.V - self.V_star - self.U)


@dataclass(frozen=True)
class MultiSplitting:
    """The collection ``(B_l : D_l, V_l, V*_l, U_l; C_l; E_l)``, ``l = 1..p``.

    ``E[l]`` holds the diagonal of the weighting matrix ``E_l``.
    """

    A: sp.csr_matrix
    splits: List[TwoStageSplit]
    C: List[sp.csr_matrix]
    E: List[np.ndarray]
    strategy: str = "custom"

    @property
    def p(self):
        return len(self.splits)

    @property
    def n(self):
        return self.A.shape[0]

    def check(self, tolerances=DEFAULT_TOLERANCES):
        """Raise if the defining identities are violated."""
        for l, (s, C) in enumerate(zip(self.splits, self.C)):
            if max_abs_diff(s.B - C, self.A) != 0.0:
                raise DomainError(f"B_{l} - C_{l} != A")
        W = np.vstack(self.E)
        if W.min() < 0.0 or W.max() > 1.0:
            raise DomainError("weights must lie in [0, 1]")
        dev = np.abs(W.sum(axis=0) - 1.0)
        if dev.max() > tolerances.weight_sum_tol:
            raise DomainError(f"weights do not sum to one at index {int(dev.argmax())}")


@dataclass(frozen=True)
class TorParameters:
    """Relaxation parameters; scalars (uniform) or one pair per splitting."""

    alpha: object
    beta: object
    mode: str = "uniform"

    def __post_init__(self):
        if self.mode not in ("uniform", "per_splitting"):
            raise ParameterError(f"unknown parameter mode {self.mode!r}")
        a = np.atleast_1d(np.asarray(self.alpha, dtype=np.float64))
        b = np.atleast_1d(np.asarray(self.beta, dtype=np.float64))
        if self.mode == "uniform" and (a.size != 1 or b.size != 1):
            raise ParameterError("uniform parameters must be scalars")
        if a.shape != b.shape:
            raise ParameterError("alpha and beta must have the same length")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ParameterError("alpha and beta must be finite")
        if a.min() < 0.0 or b.min() < 0.0:
            raise ParameterError("alpha and beta must be nonnegative")
        if (a + b).min() <= 0.0:
            raise ParameterError("alpha + beta must be positive")

    @classmethod
    def per_splitting(cls, alphas, betas):
        return cls(tuple(float(a) for a in alphas), tuple(float(b) for b in betas), mode="per_splitting")

    def pair(self, l):
        if self.mode == "uniform":
            return float(self.alpha), float(self.beta)
        return float(self.alpha[l]), float(self.beta[l])

    def pairs(self, p):
        if self.mode == "per_splitting" and len(self.alpha) != p:
            raise ParameterError(f"{len(self.alpha)} parameter pairs given for {p} splittings")
        return [self.pair(l) for l in range(p)]

    def sums(self, p):
        return [a + b for a, b in self.pairs(p)]


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class HypothesisReport:
    theorem: str
    checks: List[Check] = field(default_factory=list)
    rho_value: float = float("nan")
    parameter_upper_bound: float = float("nan")
    warnings: List[str] = field(default_factory=list)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def failed(self):
        return [c for c in self.checks if not c.passed]

    def to_dict(self):
        return {
            "theorem": self.theorem,
            "passed": self.passed,
            "rho_value": self.rho_value,
            "parameter_upper_bound": self.parameter_upper_bound,
            "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail} for c in self.checks],
            "warnings": list(self.warnings),
        }


# ---------------------------------------------------------------------------
# two-stage decomposition and TOR matrices

def _row_index(A):
    return np.repeat(np.arange(A.shape[0]), np.diff(A.indptr))


def _lower_mask(L, partition):
    """Boolean mask over the stored entries of the strictly lower matrix ``L``: True -> V."""
    rows, cols = _row_index(L), L.indices
    n = L.shape[0]
    if isinstance(partition, str):
        if partition == ALL_TO_V:
            return np.ones(L.nnz, dtype=bool)
        if partition == ALTERNATE_ROWS:
            return rows % 2 == 1
        if partition == COLUMN_HALVES:
            return cols < n / 2
        raise PartitionError(f"unknown lower partition {partition!r}")
    mask = partition
    if sp.issparse(mask):
        mask = mask.toarray()
    mask = np.asarray(mask)
    if mask.shape != (n, n):
        raise DimensionError(f"partition mask has shape {mask.shape}, expected {(n, n)}")
    return mask[rows, cols].astype(bool)


def two_stage_decompose(B, partition=ALL_TO_V):
    """Split ``B = D - (V + V_star) - U``.

    ``V + V_star`` is the strictly lower part of ``-B``; ``partition`` decides
    which of those entries go to ``V`` (``all_to_V``, ``alternate_rows``: odd
    0-based rows, ``column_halves``: columns below n/2, or an n-by-n boolean mask).
    """
    B = csr(B)
    require_square(B, "B")
    d = diagonal(B)
    zero = np.flatnonzero(d == 0.0)
    if zero.size:
        raise SingularMatrixError(f"zero diagonal entry in row {zero[0]}", row=int(zero[0]))
    D = csr(sp.diags(d))
    L = csr(-sp.tril(B, k=-1))
    to_v = _lower_mask(L, partition)
    V, V_star = L.copy(), L.copy()
    V.data = np.where(to_v, L.data, 0.0)
    V_star.data = np.where(to_v, 0.0, L.data)
    V.eliminate_zeros()
    V_star.eliminate_zeros()
    U = csr(-sp.triu(B, k=1))
    return TwoStageSplit(D=D, V=V, V_star=V_star, U=U, B=B)


def tor_matrices(split, alpha, beta):
    """Relaxation pair ``M = (2D - alpha V - beta V_star)/(alpha + beta)``, ``N = M - B``.

    M is lower triangular with diagonal ``2D/(alpha + beta)``.
    """
    alpha, beta = float(alpha), float(beta)
    if alpha < 0.0 or beta < 0.0 or not alpha + beta > 0.0:
        raise ParameterError(f"need alpha, beta >= 0 and alpha + beta > 0, got ({alpha}, {beta})")
    t = alpha + beta
    M = csr(2.0 * split.D - alpha * split.V - beta * split.V_star)
    # true division; scipy's csr / t multiplies by 1/t
    M.data /= t
    N = csr(M - split.B)
    return M, N


# ---------------------------------------------------------------------------
# multi-splitting construction

def _blocks(n, p, overlap):
    edges = np.linspace(0, n, p + 1).round().astype(int)
    out = []
    for l in range(p):
        lo, hi = edges[l], edges[l + 1]
        out.append((max(lo - overlap, 0), min(hi + overlap, n)))
    return edges, out


def _restrict(A, lo, hi):
    """Entries of A with row and column in [lo, hi), plus the full diagonal elsewhere."""
    coo = A.tocoo()
    inside = (coo.row >= lo) & (coo.row < hi) & (coo.col >= lo) & (coo.col < hi)
    keep = inside | (coo.row == coo.col)
    return csr(sp.coo_matrix((coo.data[keep], (coo.row[keep], coo.col[keep])), shape=A.shape))


def build_multisplitting(A, p, strategy=BLOCK_JACOBI, overlap=0, partition=ALL_TO_V):
    """Construct ``(B_l, C_l, E_l)`` for ``l = 1..p`` and decompose each ``B_l``.

    ``block_jacobi_overlap0`` keeps the contiguous diagonal block l of A plus
    the diagonal elsewhere; ``block_overlap_k`` extends each block by
    ``overlap`` indices on both sides and averages the weights over the
    coverage; ``global_copies`` uses ``B_l = A`` with ``E_l = I/p``.
    """
    A = csr(A)
    require_square(A, "A")
    n = A.shape[0]
    p = int(p)
    if p < 1 or p > n:
        raise PartitionError(f"need 1 <= p <= n, got p = {p}, n = {n}")
    if overlap < 0:
        raise PartitionError("overlap must be nonnegative")
    if strategy == BLOCK_JACOBI:
        overlap = 0
    elif strategy not in SPLITTING_STRATEGIES:
        raise PartitionError(f"unknown splitting strategy {strategy!r}")

    Bs, Es = [], []
    if strategy == GLOBAL_COPIES:
        for _ in range(p):
            Bs.append(A.copy())
            Es.append(np.full(n, 1.0 / p))
    else:
        _, ranges = _blocks(n, p, overlap)
        cover = np.zeros(n)
        for lo, hi in ranges:
            cover[lo:hi] += 1.0
        for lo, hi in ranges:
            Bs.append(_restrict(A, lo, hi))
            w = np.zeros(n)
            w[lo:hi] = 1.0 / cover[lo:hi]
            Es.append(w)
    splits = [two_stage_decompose(B, partition) for B in Bs]
    Cs = [csr(B - A) for B in Bs]
    return MultiSplitting(A=A, splits=splits, C=Cs, E=Es, strategy=strategy)


# ---------------------------------------------------------------------------
# convergence hypotheses

def _jacobi_bound_matrix(A, P):
    """``|D|^{-1} (|B| + P)`` for ``A = D - B``."""
    d = diagonal(A)
    zero = np.flatnonzero(d == 0.0)
    if zero.size:
        raise SingularMatrixError(f"zero diagonal entry in row {zero[0]}", row=int(zero[0]))
    offdiag = abs_matrix(A - sp.diags(d))
    return csr(sp.diags(1.0 / np.abs(d)) @ (offdiag + P))


def _check_p(A, P):
    P = csr(P)
    if P.shape != A.shape:
        raise DimensionError(f"P has shape {P.shape}, A has shape {A.shape}")
    if not is_nonnegative(P):
        raise DomainError("P must be elementwise nonnegative")
    return P


def tor_parameter_bound(A, P, kind="h_matrix", tolerances=DEFAULT_TOLERANCES):
    """Upper bound on ``alpha + beta``: ``4/(1 + rho(|D|^{-1}(|B| + P)))`` for
    H-matrices, 2 for monotone matrices with regular splittings."""
    A = csr(A)
    require_square(A, "A")
    P = _check_p(A, P)
    if kind == "monotone":
        return 2.0
    if kind != "h_matrix":
        raise ParameterError(f"unknown bound kind {kind!r}")
    rho = spectral_radius_nonneg(_jacobi_bound_matrix(A, P), tolerances=tolerances)
    return 4.0 / (1.0 + rho)


def _tol_equal(X, Y, tolerances):
    diff = max_abs_diff(X, Y)
    return diff <= tolerances.identity_tol, diff


def _first_offender(X, Y):
    Dm = csr(X - Y).tocoo()
    if Dm.nnz == 0:
        return ""
    k = int(np.argmax(np.abs(Dm.data)))
    return f" (row {Dm.row[k]}, col {Dm.col[k]})"


def _check_ms(A, ms):
    if ms.A.shape != A.shape:
        raise DimensionError("multi-splitting does not match A")


def _inner_warning(report, inner_steps):
    if inner_steps is None:
        return
    steps = np.atleast_1d(np.asarray(inner_steps))
    if steps.size and steps.min() == 1:
        report.warnings.append("inner step count s_l(i) = 1 is outside the stated hypothesis s_l(i) > 1")


def validate_h_hypotheses(A, ms, P, inner_steps=None, tolerances=DEFAULT_TOLERANCES):
    """Check the H-matrix convergence hypotheses for ``(A, ms, P)``.

    The spectral condition is on ``rho(<A>^{-1} P)``; it is decided exactly
    with a dense solve up to the dense limit and by the equivalent regular-
    splitting test ``rho(|D|^{-1}(|B| + P)) < 1`` beyond it.
    """
    A = csr(A)
    require_square(A, "A")
    P = _check_p(A, P)
    _check_ms(A, ms)
    n = A.shape[0]
    rep = HypothesisReport(theorem="h_matrix")

    cls = is_h_matrix(A, tolerances)
    rep.checks.append(Check("A is an H-matrix", cls.is_h_matrix, cls.method or cls.reason))

    rho = spectral_radius_nonneg(_jacobi_bound_matrix(A, P), tolerances=tolerances)
    rep.rho_value = rho
    rep.parameter_upper_bound = 4.0 / (1.0 + rho)
    if n <= tolerances.dense_limit and cls.is_h_matrix:
        cmp = comparison_matrix(A)
        X = nonneg_part(DenseLU(cmp, tolerances).solve(P.toarray()), tolerances)
        exact = spectral_radius_nonneg(X, tolerances=tolerances)
        rep.checks.append(Check("rho(<A>^-1 P) < 1", exact < 1.0, f"dense: {exact:.12g}; sufficient test: {rho:.12g}"))
    else:
        rep.checks.append(Check("rho(<A>^-1 P) < 1", rho < 1.0, f"sufficient test rho(|D|^-1(|B|+P)) = {rho:.12g}"))

    cmpA = comparison_matrix(A)
    d = diagonal(A)
    bad_c, bad_d, bad_e = [], [], []
    for l, (s, C) in enumerate(zip(ms.splits, ms.C)):
        ok, diff = _tol_equal(comparison_matrix(s.B) - abs_matrix(C), cmpA, tolerances)
        if not ok:
            bad_c.append(f"l={l}: max diff {diff:.3g}" + _first_offender(comparison_matrix(s.B) - abs_matrix(C), cmpA))
        dl = diagonal(s.D)
        rows = np.flatnonzero(np.abs(dl - d) > tolerances.identity_tol)
        if rows.size:
            bad_d.append(f"l={l}: row {rows[0]}")
        rhs = abs_matrix(s.D) - abs_matrix(s.V) - abs_matrix(s.V_star) - abs_matrix(s.U)
        ok, diff = _tol_equal(comparison_matrix(s.B), rhs, tolerances)
        if not ok:
            bad_e.append(f"l={l}: max diff {diff:.3g}" + _first_offender(comparison_matrix(s.B), rhs))
    rep.checks.append(Check("<A> = <B_l> - |C_l|", not bad_c, "; ".join(bad_c)))
    rep.checks.append(Check("D_l = diag(A)", not bad_d, "; ".join(bad_d)))
    rep.checks.append(Check("<B_l> = |D_l| - |V_l| - |V*_l| - |U_l|", not bad_e, "; ".join(bad_e)))
    _inner_warning(rep, inner_steps)
    return rep


def validate_monotone_hypotheses(A, ms, P, inner_steps=None, tolerances=DEFAULT_TOLERANCES):
    """Check the monotone-matrix convergence hypotheses; the parameter bound is 2."""
    A = csr(A)
    require_square(A, "A")
    P = _check_p(A, P)
    _check_ms(A, ms)
    n = A.shape[0]
    rep = HypothesisReport(theorem="monotone", parameter_upper_bound=2.0)

    mono = is_monotone(A, tolerances)
    rep.checks.append(Check("A is monotone", mono.is_monotone, mono.method or mono.reason))

    if mono.is_monotone and n <= tolerances.dense_limit:
        X = nonneg_part(DenseLU(A, tolerances).solve(P.toarray()), tolerances)
        rho = spectral_radius_nonneg(X, tolerances=tolerances)
        detail = f"dense: {rho:.12g}"
    else:
        # an M-matrix A = <A> makes rho(A^-1 P) < 1 equivalent to this test
        rho = spectral_radius_nonneg(_jacobi_bound_matrix(A, P), tolerances=tolerances)
        detail = f"sufficient test rho(|D|^-1(|B|+P)) = {rho:.12g}"
    rep.rho_value = rho
    rep.checks.append(Check("rho(A^-1 P) < 1", bool(mono.is_monotone and rho < 1.0), detail))

    bad_c, bad_d = [], []
    for l, (s, C) in enumerate(zip(ms.splits, ms.C)):
        if not is_nonnegative(C):
            bad_c.append(f"l={l}: C_l has a negative entry")
        elif not is_monotone(s.B, tolerances).is_monotone:
            bad_c.append(f"l={l}: B_l^-1 has a negative entry")
        for name, X in (("D_l", s.D), ("V_l", s.V), ("V*_l", s.V_star), ("U_l", s.U)):
            if not is_nonnegative(X):
                bad_d.append(f"l={l}: {name} has a negative entry")
    rep.checks.append(Check("(B_l, C_l) regular splittings", not bad_c, "; ".join(bad_c)))
    rep.checks.append(Check("D_l, V_l, V*_l, U_l >= 0", not bad_d, "; ".join(bad_d)))
    _inner_warning(rep, inner_steps)
    return rep
