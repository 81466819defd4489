"""Synchronous multi-splitting two-stage TOR iteration for ``A x = G(x)``.

One outer step evaluates ``g = G(x^i)`` once and, for every splitting l,
runs ``s_l(i)`` inner sweeps

    z <- M_l^{-1} (N_l z + C_l x^i + g),   z_0 = x^i

with the TOR pair ``(M_l, N_l)`` of ``B_l``.  The local results are combined
as ``x^{i+1} = sum_l E_l z_l`` in fixed order l = 0..p-1, so the iterates do
not depend on how many workers computed the local solves.
"""

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DivergenceError, EvaluationError, ParameterError
from .nonlinear import evaluate_map
from .sparse import LowerTriangular, as_vector
from .splitting import HypothesisReport, TorParameters, tor_matrices

log = logging.getLogger(__name__)

FAMILIES = ("TOR", "AOR", "SOR", "GS", "JOR", "Jacobi")


def preset_parameters(family, r=None, w=None, alpha=None, beta=None):
    """Relaxation parameters of the classical method families.

    AOR: ``alpha = 2r, alpha + beta = 2w``; SOR: ``(2w, 0)``; GS: ``(2, 0)``;
    JOR: ``(0, 2w)``; Jacobi: ``(0, 2)``; TOR takes ``alpha`` and ``beta`` directly.
    """
    key = {f.lower(): f for f in FAMILIES}.get(str(family).lower())
    if key is None:
        raise ParameterError(f"unknown method family {family!r}")
    if key == "TOR":
        if alpha is None or beta is None:
            raise ParameterError("TOR needs alpha and beta")
        return TorParameters(float(alpha), float(beta))
    if key == "GS":
        return TorParameters(2.0, 0.0)
    if key == "Jacobi":
        return TorParameters(0.0, 2.0)
    if w is None:
        raise ParameterError(f"{key} needs the relaxation factor w")
    if key == "SOR":
        return TorParameters(2.0 * w, 0.0)
    if key == "JOR":
        return TorParameters(0.0, 2.0 * w)
    if r is None:
        raise ParameterError("AOR needs both r and w")
    a, b = 2.0 * r, 2.0 * w - 2.0 * r
    if b < 0.0:
        raise ParameterError(f"AOR with r = {r} > w = {w} gives beta < 0")
    return TorParameters(a, b)


@dataclass(frozen=True)
class InnerSchedule:
    """Inner step counts ``s_l(i)``: a constant, one constant per splitting, or ``f(l, i)``."""

    kind: str = "constant"
    values: object = 1

    @classmethod
    def constant(cls, s):
        return cls("constant", int(s))

    @classmethod
    def per_splitting(cls, steps):
        return cls("per_splitting_constant", tuple(int(s) for s in steps))

    @classmethod
    def function(cls, f):
        return cls("function", f)

    def __post_init__(self):
        if self.kind == "constant":
            if int(self.values) < 1:
                raise ParameterError("inner step count must be >= 1")
        elif self.kind == "per_splitting_constant":
            if min(self.values) < 1:
                raise ParameterError("inner step counts must be >= 1")
        elif self.kind != "function":
            raise ParameterError(f"unknown schedule kind {self.kind!r}")

    def steps(self, l, i):
        if self.kind == "constant":
            return int(self.values)
        if self.kind == "per_splitting_constant":
            return int(self.values[l])
        s = int(self.values(l, i))
        if s < 1:
            raise ParameterError(f"schedule produced s_{l}({i}) = {s} < 1")
        return s

    def describe(self, p):
        if self.kind == "constant":
            return str(self.values)
        if self.kind == "per_splitting_constant":
            return ";".join(str(v) for v in self.values)
        return "function"


@dataclass
class SolverConfig:
    params: TorParameters
    schedule: InnerSchedule = field(default_factory=InnerSchedule)
    tol_residual: float = 1e-10
    max_outer: int = 10000
    worker_count: Optional[int] = None
    record_history: bool = True
    hypothesis: Optional[HypothesisReport] = None

    def __post_init__(self):
        if not self.tol_residual > 0.0:
            raise ParameterError("tol_residual must be positive")
        if self.max_outer < 1:
            raise ParameterError("max_outer must be >= 1")
        if self.worker_count is not None and self.worker_count < 1:
            raise ParameterError("worker_count must be >= 1")


@dataclass
class IterationReport:
    converged: bool
    outer_iterations: int
    final_residual: float
    x: np.ndarray
    residual_history: list = field(default_factory=list)
    error_history: Optional[list] = None
    wall_time: float = 0.0
    parameter_bound_used: Optional[float] = None
    diagnostic: str = ""


class SolverState:
    """Problem, splitting, current iterate and the cached TOR pairs per splitting."""

    def __init__(self, problem, ms, params, x0=None):
        if ms.n != problem.n:
            raise ParameterError("multi-splitting and problem dimensions differ")
        self.problem = problem
        self.ms = ms
        self.x = np.zeros(problem.n) if x0 is None else as_vector(x0, problem.n, "x0").copy()
        self.i = 0
        self._cache = {}
        self.params = None
        self.set_parameters(params)

    def set_parameters(self, params):
        pairs = params.pairs(self.ms.p)
        self.params = params
        self.pairs = pairs
        for l, (a, b) in enumerate(pairs):
            if (l, a, b) not in self._cache:
                M, N = tor_matrices(self.ms.splits[l], a, b)
                self._cache[(l, a, b)] = (M, N, LowerTriangular(M))

    def tor_pair(self, l):
        a, b = self.pairs[l]
        return self._cache[(l, a, b)]


def inner_sweep(M, N, z, c, lower=None):
    """One relaxation sweep ``M^{-1}(N z + c)`` by forward substitution."""
    if lower is None:
        lower = LowerTriangular(M)
    return lower.solve(N @ z + c)


def local_iterate(l, x_i, rhs, s, state):
    """``s`` inner sweeps of splitting ``l`` from ``x_i`` with constant right-hand side ``rhs``."""
    if s < 1:
        raise ParameterError("inner step count must be >= 1")
    M, N, lower = state.tor_pair(l)
    z = x_i
    for _ in range(s):
        z = lower.solve(N @ z + rhs)
    return z


def outer_step(state, config, executor=None):
    """Compute ``x^{i+1}`` from ``state.x`` (the state itself is not advanced)."""
    ms = state.ms
    x = state.x
    g = evaluate_map(state.problem.G, x)
    steps = [config.schedule.steps(l, state.i) for l in range(ms.p)]

    def work(l):
        return local_iterate(l, x, ms.C[l] @ x + g, steps[l], state)

    if executor is None:
        local = [work(l) for l in range(ms.p)]
    else:
        local = list(executor.map(work, range(ms.p)))
    x_new = np.zeros(ms.n)
    for l in range(ms.p):
        x_new += ms.E[l] * local[l]
    bad = np.flatnonzero(~np.isfinite(x_new))
    if bad.size:
        raise DivergenceError(f"non-finite iterate at outer step {state.i + 1}, index {bad[0]}",
                              iteration=state.i + 1, index=int(bad[0]))
    return x_new


def residual(problem, x):
    """Relative nonlinear residual ``||A x - G(x)||_inf / (1 + ||G(x)||_inf)``."""
    g = evaluate_map(problem.G, x)
    r = problem.A @ x - g
    return float(np.abs(r).max(initial=0.0) / (1.0 + np.abs(g).max(initial=0.0)))


def solve(problem, ms, config, x0=None, callback: Optional[Callable] = None):
    """Iterate outer steps until the residual drops to ``tol_residual`` or ``max_outer`` is hit."""
    start = time.perf_counter()
    state = SolverState(problem, ms, config.params, x0)
    workers = config.worker_count or ms.p
    executor = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    xstar = problem.known_solution
    history, errors = [], ([] if xstar is not None else None)
    converged, diagnostic = False, ""
    res = np.inf
    try:
        while True:
            try:
                res = residual(problem, state.x)
            except EvaluationError as exc:
                diagnostic = f"divergence: {exc}"
                break
            if not np.isfinite(res):
                diagnostic = f"divergence: non-finite residual at outer step {state.i}"
                break
            if config.record_history:
                history.append(res)
                if errors is not None:
                    errors.append(float(np.abs(state.x - xstar).max(initial=0.0)))
            if callback is not None:
                callback(state.i, state.x, res)
            if res <= config.tol_residual:
                converged = True
                break
            if state.i >= config.max_outer:
                diagnostic = f"not converged after {state.i} outer iterations"
                break
            try:
                x_new = outer_step(state, config, executor)
            except (DivergenceError, EvaluationError) as exc:
                diagnostic = f"divergence: {exc}"
                break
            state.x = x_new
            state.i += 1
    finally:
        if executor is not None:
            executor.shutdown()
    if diagnostic:
        log.info(diagnostic)
    final = history[-1] if history else (res if np.isfinite(res) else float("nan"))
    bound = config.hypothesis.parameter_upper_bound if config.hypothesis is not None else None
    return IterationReport(
        converged=converged,
        outer_iterations=state.i,
        final_residual=float(final),
        x=state.x,
        residual_history=history,
        error_history=errors,
        wall_time=time.perf_counter() - start,
        parameter_bound_used=bound,
        diagnostic=diagnostic,
    )
