"""Single runs and parameter sweeps with JSON records and a CSV summary."""

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import List, Optional

import numpy as np

from ..errors import ParameterError, PartitionError
from ..mmio import read_mtx
from ..nonlinear import generate_grid_problem, make_problem
from ..solver import InnerSchedule, SolverConfig, preset_parameters, solve
from ..splitting import (
    BLOCK_JACOBI,
    BLOCK_OVERLAP,
    GLOBAL_COPIES,
    LOWER_PARTITIONS,
    TorParameters,
    build_multisplitting,
    validate_h_hypotheses,
    validate_monotone_hypotheses,
)
from .oracle import picard_oracle
from .problem_io import load_problem

SCHEMA_VERSION = "mstor.run/1"
CSV_COLUMNS = ["alpha", "beta", "s", "p", "outer_iterations", "final_residual", "converged", "wall_ms", "oracle_delta"]


@dataclass
class ExperimentSpec:
    # problem source: exactly one of problem_dir, matrix, grid
    problem_dir: Optional[str] = None
    matrix: Optional[str] = None
    grid: Optional[int] = None
    nonlinearity: str = "sine"
    coupling: float = 1.0
    c: float = 0.0
    splitting: str = "block0"
    p: int = 1
    lower_partition: str = "all"
    family: str = "gs"
    r: Optional[float] = None
    w: Optional[float] = None
    alpha: Optional[float] = None
    beta: Optional[float] = None
    alphas: Optional[List[float]] = None
    betas: Optional[List[float]] = None
    inner: List[int] = field(default_factory=lambda: [1])
    tol: float = 1e-10
    max_outer: int = 10000
    workers: Optional[int] = None
    sweep_sums: Optional[List[float]] = None
    sweep_ratios: Optional[List[float]] = None
    sweep_points: Optional[int] = None
    x0: str = "random"
    seed: int = 0
    with_oracle: bool = False
    report: Optional[str] = None
    csv: Optional[str] = None


@dataclass
class RunRecord:
    spec: dict
    hypotheses: dict
    parameter_bound: float
    alpha: object
    beta: object
    s: str
    p: int
    outer_iterations: int
    final_residual: float
    converged: bool
    wall_ms: float
    oracle_delta: Optional[float]
    residual_history: list
    error_history: Optional[list]
    diagnostic: str
    schema_version: str = SCHEMA_VERSION

    def csv_row(self):
        row = {k: getattr(self, k) for k in CSV_COLUMNS}
        for k in ("alpha", "beta"):
            v = row[k]
            row[k] = ";".join(repr(float(t)) for t in v) if isinstance(v, (list, tuple)) else repr(float(v))
        row["final_residual"] = "" if self.final_residual is None else repr(float(self.final_residual))
        row["wall_ms"] = repr(float(self.wall_ms))
        row["oracle_delta"] = "" if self.oracle_delta is None else repr(float(self.oracle_delta))
        return row


def parse_splitting(text):
    """``block0`` | ``overlap:<k>`` | ``global`` -> (strategy, overlap)."""
    if text in ("block0", BLOCK_JACOBI):
        return BLOCK_JACOBI, 0
    if text in ("global", GLOBAL_COPIES):
        return GLOBAL_COPIES, 0
    if text.startswith("overlap:"):
        try:
            k = int(text.split(":", 1)[1])
        except ValueError:
            raise PartitionError(f"bad overlap in {text!r}") from None
        return BLOCK_OVERLAP, k
    raise PartitionError(f"unknown splitting {text!r}")


def parse_lower_partition(text):
    """``all`` | ``alt-rows`` | ``col-halves`` | ``mask:<file>`` -> partition argument."""
    table = {"all": "all_to_V", "alt-rows": "alternate_rows", "col-halves": "column_halves"}
    if text in table:
        return table[text]
    if text in LOWER_PARTITIONS:
        return text
    if text.startswith("mask:"):
        return read_mtx(text.split(":", 1)[1]).toarray() != 0.0
    raise PartitionError(f"unknown lower partition {text!r}")


def parse_nonlinearity(text):
    """``sin`` | ``arctan`` | ``expdecay`` | ``const:<c>`` -> (name, c)."""
    table = {"sin": "sine", "sine": "sine", "arctan": "arctan", "expdecay": "exp_decay", "exp_decay": "exp_decay"}
    if text in table:
        return table[text], 0.0
    if text.startswith("const:"):
        try:
            return "linear_c", float(text.split(":", 1)[1])
        except ValueError:
            raise ParameterError(f"bad constant in {text!r}") from None
    raise ParameterError(f"unknown nonlinearity {text!r}")


def build_problem(spec):
    sources = [spec.problem_dir is not None, spec.matrix is not None, spec.grid is not None]
    if sum(sources) != 1:
        raise ParameterError("give exactly one of --problem, --matrix, --grid")
    if spec.problem_dir is not None:
        return load_problem(spec.problem_dir)
    name, c = spec.nonlinearity, spec.c
    if spec.grid is not None:
        return generate_grid_problem(spec.grid, name, spec.coupling, c)
    return make_problem(read_mtx(spec.matrix), name, spec.coupling, c, name=Path(spec.matrix).stem)


def base_parameters(spec):
    if spec.alphas is not None or spec.betas is not None:
        if spec.alphas is None or spec.betas is None:
            raise ParameterError("--alphas and --betas must be given together")
        return TorParameters.per_splitting(spec.alphas, spec.betas)
    fam = spec.family.lower()
    if fam == "tor" or (spec.alpha is not None and spec.beta is not None):
        return preset_parameters("TOR", alpha=spec.alpha, beta=spec.beta)
    return preset_parameters(fam, r=spec.r, w=spec.w)


def schedule_for(spec):
    if len(spec.inner) == 1:
        return InnerSchedule.constant(spec.inner[0])
    return InnerSchedule.per_splitting(spec.inner)


def validate(problem, ms, inner_steps=None):
    """Both hypothesis reports plus the bound of whichever set of hypotheses holds."""
    h = validate_h_hypotheses(problem.A, ms, problem.P, inner_steps=inner_steps)
    mono = validate_monotone_hypotheses(problem.A, ms, problem.P, inner_steps=inner_steps)
    if h.passed:
        bound = h.parameter_upper_bound
    elif mono.passed:
        bound = mono.parameter_upper_bound
    else:
        bound = h.parameter_upper_bound
    return h, mono, bound


def parameter_grid(spec, bound):
    """Parameter sets for the run: the base set, or the sweep over alpha+beta and alpha/(alpha+beta)."""
    if spec.sweep_sums is None and spec.sweep_points is None and spec.sweep_ratios is None:
        return [base_parameters(spec)]
    if spec.sweep_sums is not None:
        sums = list(spec.sweep_sums)
    elif spec.sweep_points is not None:
        sums = list(np.linspace(0.1 * bound, 0.9 * bound, spec.sweep_points + 2)[1:-1])
    else:
        sums = [sum(base_parameters(spec).pair(0))]
    if spec.sweep_ratios is not None:
        ratios = list(spec.sweep_ratios)
    else:
        a, b = base_parameters(spec).pair(0)
        ratios = [a / (a + b)]
    grid = []
    for t in sums:
        for q in ratios:
            if not (0.0 <= q <= 1.0):
                raise ParameterError(f"ratio alpha/(alpha+beta) = {q} outside [0, 1]")
            grid.append(TorParameters(q * t, (1.0 - q) * t))
    return grid


def _summary(report):
    d = report.to_dict()
    return {k: d[k] for k in ("theorem", "passed", "rho_value", "parameter_upper_bound", "checks", "warnings")}


def _finite(v):
    return v is None or math.isfinite(v)


def run_experiment(spec):
    """Run every grid point of ``spec``; returns the list of records and writes the outputs."""
    problem = build_problem(spec)
    strategy, overlap = parse_splitting(spec.splitting)
    ms = build_multisplitting(problem.A, spec.p, strategy, overlap, parse_lower_partition(spec.lower_partition))
    schedule = schedule_for(spec)
    if schedule.kind == "per_splitting_constant" and len(schedule.values) != ms.p:
        raise ParameterError(f"{len(schedule.values)} inner counts given for p = {ms.p}")
    h, mono, bound = validate(problem, ms, inner_steps=spec.inner)
    grid = parameter_grid(spec, bound)

    rng = np.random.default_rng(spec.seed)
    x0 = rng.uniform(-1.0, 1.0, problem.n) if spec.x0 == "random" else np.zeros(problem.n)
    x_oracle = picard_oracle(problem) if spec.with_oracle else None

    spec_echo = {k: v for k, v in asdict(spec).items()}
    hyp = {"h_matrix": _summary(h), "monotone": _summary(mono)}
    records = []
    for params in grid:
        config = SolverConfig(params, schedule, spec.tol, spec.max_outer, spec.workers, hypothesis=None)
        rep = solve(problem, ms, config, x0)
        delta = None if x_oracle is None else float(np.abs(rep.x - x_oracle).max(initial=0.0))
        if params.mode == "uniform":
            alpha, beta = params.pair(0)
        else:
            alpha, beta = list(params.alpha), list(params.beta)
        rec = RunRecord(
            spec=spec_echo, hypotheses=hyp, parameter_bound=float(bound), alpha=alpha, beta=beta,
            s=schedule.describe(ms.p), p=ms.p, outer_iterations=rep.outer_iterations,
            final_residual=rep.final_residual, converged=rep.converged, wall_ms=rep.wall_time * 1e3,
            oracle_delta=delta, residual_history=rep.residual_history, error_history=rep.error_history,
            diagnostic=rep.diagnostic,
        )
        if not _finite(rec.final_residual):
            rec.final_residual = None
        records.append(rec)
    if spec.report:
        write_json(records, spec.report)
    if spec.csv:
        write_csv(records, spec.csv)
    return records


def write_json(records, path):
    doc = {"schema_version": SCHEMA_VERSION, "records": [asdict(r) for r in records]}
    Path(path).write_text(json.dumps(doc, indent=1, allow_nan=False) + "\n")


def write_csv(records, path):
    with Path(path).open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        w.writeheader()
        for r in records:
            w.writerow(r.csv_row())
