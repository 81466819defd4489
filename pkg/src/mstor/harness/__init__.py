"""File I/O, reference oracle and experiment orchestration."""

from .experiment import ExperimentSpec, RunRecord, run_experiment, write_csv, write_json
from .oracle import picard_oracle
from .problem_io import load_problem, save_problem

__all__ = [
    "ExperimentSpec",
    "RunRecord",
    "load_problem",
    "picard_oracle",
    "run_experiment",
    "save_problem",
    "write_csv",
    "write_json",
]
