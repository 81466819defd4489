"""Regenerate the shipped problem fixtures: ``python fixtures/make_fixtures.py``."""

from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.optimize import brentq

from mstor import BoundedMap, WeaklyNonlinearProblem, generate_grid_problem, laplacian_1d, make_problem
from mstor.harness import save_problem

HERE = Path(__file__).parent


def main():
    A = sp.csr_matrix([[2.0, -1.0], [-1.0, 2.0]])
    save_problem(make_problem(A, "linear_c", 1.0, c=1.0, name="two_by_two"), HERE / "two_by_two")

    root = brentq(lambda t: 2.0 * t - np.cos(t), 0.0, 1.0, xtol=1e-15)
    G = BoundedMap(np.cos, sp.identity(1), "cos(x)", {"nonlinearity": "external", "evaluator": "numpy:cos"})
    save_problem(WeaklyNonlinearProblem(sp.csr_matrix([[2.0]]), G, "cos_1d", np.array([root])), HERE / "cos_1d")

    save_problem(make_problem(laplacian_1d(3), "arctan", 0.5, name="tridiag3_arctan"), HERE / "tridiag3_arctan")
    save_problem(generate_grid_problem(8, "sine", 1.0), HERE / "grid8_sine")
    save_problem(generate_grid_problem(8, "exp_decay", 1.0), HERE / "grid8_expdecay")
    save_problem(generate_grid_problem(20, "arctan", 1.0), HERE / "grid20_arctan")


if __name__ == "__main__":
    main()
