"""Acceptance criteria 1-10.  Each test carries a ``criterion_<k>`` marker; the
terminal summary prints one PASS/FAIL line per criterion."""

import time

import numpy as np
import pytest
import scipy.sparse as sp

from helpers import (
    linear_problem,
    random_h_matrix,
    sine_problem,
    textbook_gauss_seidel_step,
    textbook_jacobi_step,
)
from mstor import (
    InnerSchedule,
    SolverConfig,
    SolverState,
    TorParameters,
    build_multisplitting,
    make_problem,
    outer_step,
    preset_parameters,
    solve,
    tor_matrices,
    tor_parameter_bound,
    validate_monotone_hypotheses,
    verify_p_bound,
)
from mstor.harness import ExperimentSpec, load_problem, picard_oracle, run_experiment
from mstor.nonlinear import NONLINEARITIES, componentwise_map, laplacian_1d
from mstor.splitting import BLOCK_JACOBI, BLOCK_OVERLAP, GLOBAL_COPIES, LOWER_PARTITIONS

FIXTURE_NAMES = ["two_by_two", "cos_1d", "tridiag3_arctan", "grid8_sine", "grid8_expdecay", "grid20_arctan"]


def _inf(x):
    return float(np.abs(x).max(initial=0.0))


# ---------------------------------------------------------------- criterion 1

def _desk_problems(count=20, seed=2024):
    rng = np.random.default_rng(seed)
    out = []
    for k in range(count):
        n = int(rng.integers(6, 101))
        A = random_h_matrix(rng, n, density=min(1.0, 4.0 / n))
        q = rng.uniform(0.0, 0.15, n)
        b = rng.uniform(-1.0, 1.0, n)
        out.append(sine_problem(A, q, b, name=f"desk{k}"))
    return out


@pytest.mark.criterion_1
def test_fixed_point_consistency():
    start = time.perf_counter()
    rng = np.random.default_rng(7)
    worst = 0.0
    strategies = [(BLOCK_JACOBI, 0), (BLOCK_OVERLAP, 2), (GLOBAL_COPIES, 0)]
    for k, prob in enumerate(_desk_problems()):
        xstar = picard_oracle(prob)
        scale = 1.0 + _inf(xstar)
        bound = tor_parameter_bound(prob.A, prob.P)
        pairs = []
        for _ in range(5):
            t = bound * rng.uniform(0.05, 0.95)
            q = rng.uniform()
            pairs.append(TorParameters(q * t, (1.0 - q) * t))
        for j, (strategy, overlap) in enumerate(strategies):
            for p in (1, 2, 4):
                partition = LOWER_PARTITIONS[(k + j + p) % 3]
                ms = build_multisplitting(prob.A, p, strategy, overlap, partition)
                state = SolverState(prob, ms, pairs[0], xstar)
                for params in pairs:
                    state.set_parameters(params)
                    for s in (1, 2, 5):
                        x1 = outer_step(state, SolverConfig(params, InnerSchedule.constant(s)))
                        err = _inf(x1 - xstar) / scale
                        worst = max(worst, err)
                        assert err <= 1e-12, (prob.name, strategy, p, s, params)
    elapsed = time.perf_counter() - start
    print(f"worst relative fixed-point defect {worst:.2e}, {elapsed:.2f} s")
    assert elapsed < 10.0


# ---------------------------------------------------------------- criterion 2

@pytest.mark.criterion_2
def test_h_matrix_convergence_on_grids():
    start = time.perf_counter()
    for m in (4, 8, 16):
        spec = ExperimentSpec(grid=m, nonlinearity="sine", coupling=1.0, p=2, inner=[4],
                              sweep_points=5, sweep_ratios=[0.0, 0.5, 1.0], seed=m)
        records = run_experiment(spec)
        assert records[0].hypotheses["h_matrix"]["passed"], records[0].hypotheses["h_matrix"]["checks"]
        bound = records[0].parameter_bound
        assert len(records) == 15
        for r in records:
            t = r.alpha + r.beta
            assert 0.1 * bound < t < 0.9 * bound
            assert r.converged, (m, r.alpha, r.beta, r.diagnostic)
            assert r.final_residual <= 1e-10
            assert r.outer_iterations <= 10000
    elapsed = time.perf_counter() - start
    print(f"grid sweeps {elapsed:.2f} s")
    assert elapsed < 60.0


# ---------------------------------------------------------------- criterion 3

def _monotone_case(A, sums):
    prob = make_problem(A, "arctan", 0.5)
    for p in range(1, min(3, prob.n) + 1):
        ms = build_multisplitting(prob.A, p, BLOCK_JACOBI)
        rep = validate_monotone_hypotheses(prob.A, ms, prob.P)
        assert rep.passed, rep.failed()
        assert rep.parameter_upper_bound == 2.0
        for t in sums:
            for q in (0.0, 0.5, 1.0):
                for s in (1, 3):
                    cfg = SolverConfig(TorParameters(q * t, (1.0 - q) * t), InnerSchedule.constant(s))
                    out = solve(prob, ms, cfg, np.linspace(-1.0, 1.0, prob.n))
                    assert out.converged, (prob.n, p, t, q, s, out.diagnostic)
                    assert out.final_residual <= 1e-10


@pytest.mark.criterion_3
def test_monotone_convergence_tridiagonal():
    start = time.perf_counter()
    sums = (0.5, 1.0, 1.5, 1.9)
    _monotone_case(laplacian_1d(3), sums)
    # scaled variant keeps rho(A^-1 P) < 1 at a larger order
    _monotone_case(laplacian_1d(8, scaled=True), sums)
    elapsed = time.perf_counter() - start
    print(f"monotone runs {elapsed:.2f} s")
    assert elapsed < 10.0


# ---------------------------------------------------------------- criterion 4

@pytest.mark.criterion_4
def test_bound_formula_two_by_two():
    A = sp.csr_matrix([[2.0, -1.0], [-1.0, 2.0]])
    assert abs(tor_parameter_bound(A, sp.csr_matrix((2, 2))) - 8.0 / 3.0) <= 1e-10


@pytest.mark.criterion_4
def test_bound_formula_tridiagonal_toeplitz():
    A = laplacian_1d(10)
    P = 0.1 * sp.identity(10, format="csr")
    # Jacobi matrix of tridiag(-1,2,-1) has eigenvalues cos(k pi/11)
    expected = 4.0 / (1.0 + np.cos(np.pi / 11.0) + 0.05)
    assert abs(tor_parameter_bound(A, P) - expected) <= 1e-8


# ---------------------------------------------------------------- criterion 5

def _reduction_systems():
    rng = np.random.default_rng(5)
    n = 10
    dense = rng.uniform(-1.0, 1.0, (n, n))
    np.fill_diagonal(dense, 0.0)
    dense += np.diag(np.abs(dense).sum(axis=1) + rng.uniform(0.5, 1.5, n))
    tri = laplacian_1d(n).toarray()
    b = rng.uniform(-1.0, 1.0, n)
    K = 0.05 * rng.uniform(-1.0, 1.0, (n, n))
    return [(dense, None, b), (tri, None, b), (dense, K, b), (tri, K, b)]


@pytest.mark.criterion_5
@pytest.mark.parametrize("family", ["GS", "Jacobi"])
def test_family_reduction_matches_textbook(family):
    step_ref = textbook_gauss_seidel_step if family == "GS" else textbook_jacobi_step
    for A, K, b in _reduction_systems():
        n = len(b)
        Kd = np.zeros((n, n)) if K is None else K
        prob = linear_problem(sp.csr_matrix(A), Kd, b)
        ms = build_multisplitting(prob.A, 1)
        cfg = SolverConfig(preset_parameters(family), InnerSchedule.constant(1))
        state = SolverState(prob, ms, cfg.params, np.zeros(n))
        x_ref = np.zeros(n)
        for _ in range(50):
            x_ref = step_ref(A, Kd @ x_ref + b, x_ref)
            state.x = outer_step(state, cfg)
            state.i += 1
            assert _inf(state.x - x_ref) <= 1e-14


# ---------------------------------------------------------------- criterion 6

def _trajectory(prob, ms, params, steps=25, s=2):
    cfg = SolverConfig(params, InnerSchedule.constant(s), tol_residual=1e-300, max_outer=steps)
    seen = []
    solve(prob, ms, cfg, np.linspace(-0.5, 0.5, prob.n), callback=lambda i, x, r: seen.append(x.copy()))
    return seen


@pytest.mark.criterion_6
@pytest.mark.parametrize("name", FIXTURE_NAMES)
def test_per_splitting_uniform_equals_uniform(fixtures_dir, name):
    prob = load_problem(fixtures_dir / name)
    for strategy, p in ((BLOCK_JACOBI, min(2, prob.n)), (GLOBAL_COPIES, min(3, prob.n))):
        ms = build_multisplitting(prob.A, p, strategy)
        for a, b in ((2.0, 0.0), (0.7, 0.9), (0.0, 1.3)):
            uni = _trajectory(prob, ms, TorParameters(a, b))
            per = _trajectory(prob, ms, TorParameters.per_splitting([a] * p, [b] * p))
            assert len(uni) == len(per)
            for u, v in zip(uni, per):
                assert np.array_equal(u, v)


# ---------------------------------------------------------------- criterion 7

@pytest.mark.criterion_7
def test_worker_count_determinism(fixtures_dir):
    prob = load_problem(fixtures_dir / "grid8_sine")
    ms = build_multisplitting(prob.A, 4, BLOCK_OVERLAP, overlap=3)
    x0 = np.random.default_rng(3).uniform(-1.0, 1.0, prob.n)
    runs = []
    for workers in (1, 2, 4):
        cfg = SolverConfig(TorParameters(1.1, 0.6), InnerSchedule.constant(3), worker_count=workers)
        runs.append(solve(prob, ms, cfg, x0))
    assert runs[0].converged
    for r in runs[1:]:
        assert r.residual_history == runs[0].residual_history
        assert np.array_equal(r.x, runs[0].x)


# ---------------------------------------------------------------- criterion 8

@pytest.mark.criterion_8
@pytest.mark.parametrize("name", FIXTURE_NAMES)
def test_solver_agrees_with_oracle(fixtures_dir, name):
    prob = load_problem(fixtures_dir / name)
    assert prob.n <= 400
    ms = build_multisplitting(prob.A, min(2, prob.n), BLOCK_JACOBI)
    cfg = SolverConfig(preset_parameters("SOR", w=1.2), InnerSchedule.constant(2))
    out = solve(prob, ms, cfg, np.random.default_rng(0).uniform(-1.0, 1.0, prob.n))
    assert out.converged, out.diagnostic
    x_or = picard_oracle(prob)
    assert _inf(out.x - x_or) <= 1e-6


# ---------------------------------------------------------------- criterion 9

def _random_construction(rng, integer):
    n = int(rng.integers(2, 40))
    if integer:
        dense = rng.integers(-4, 5, (n, n)).astype(float) * (rng.uniform(size=(n, n)) < 0.3)
        np.fill_diagonal(dense, rng.integers(1, 60, n) * rng.choice([-1.0, 1.0], n))
        A = sp.csr_matrix(dense)
        t = rng.uniform(0.01, 4.0)
    else:
        A = random_h_matrix(rng, n, density=0.3)
        t = rng.uniform(1.0, 4.0)
    strategy = [BLOCK_JACOBI, BLOCK_OVERLAP, GLOBAL_COPIES][int(rng.integers(3))]
    p = int(rng.integers(1, min(n, 6) + 1))
    overlap = int(rng.integers(0, 4))
    partition = LOWER_PARTITIONS[int(rng.integers(3))]
    if rng.uniform() < 0.2:
        partition = rng.uniform(size=(n, n)) < 0.5
    q = rng.uniform()
    return A, strategy, p, overlap, partition, q * t, (1.0 - q) * t


def _exactly_zero(X):
    X = sp.csr_matrix(X)
    return X.nnz == 0 or not np.any(X.data)


@pytest.mark.criterion_9
def test_splitting_identities_exact():
    rng = np.random.default_rng(99)
    for k in range(100):
        A, strategy, p, overlap, partition, alpha, beta = _random_construction(rng, integer=k % 2 == 1)
        ms = build_multisplitting(A, p, strategy, overlap, partition)
        total = np.zeros(A.shape[0])
        for l in range(ms.p):
            split = ms.splits[l]
            assert _exactly_zero(split.B - ms.C[l] - ms.A)
            assert _exactly_zero(split.D - split.V - split.V_star - split.U - split.B)
            M, N = tor_matrices(split, alpha, beta)
            assert _exactly_zero((M - N) - split.B), (k, alpha + beta)
            total += ms.E[l]
        assert np.abs(total - 1.0).max() <= 1e-15


# ---------------------------------------------------------------- criterion 10

@pytest.mark.criterion_10
@pytest.mark.parametrize("name", sorted(NONLINEARITIES))
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_builtin_nonlinearities_p_bounded(name, seed):
    G = componentwise_map(6, name, coupling=1.0, c=0.75)
    rep = verify_p_bound(G, samples=1000, radius=100.0, seed=seed)
    assert rep.violations == 0, rep.worst_margin
