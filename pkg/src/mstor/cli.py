"""Command-line interface: ``mstor solve|sweep|generate|validate|oracle``.

Exit codes: 0 converged/validated, 2 not converged, 3 validation failed, 4 input error.
"""

import argparse
import json
import logging
import sys

import numpy as np

from .errors import MstorError
from .harness.experiment import (
    ExperimentSpec,
    build_problem,
    parse_lower_partition,
    parse_nonlinearity,
    parse_splitting,
    run_experiment,
    validate,
)
from .harness.oracle import picard_oracle
from .harness.problem_io import save_problem
from .mmio import write_vec
from .nonlinear import generate_grid_problem
from .splitting import build_multisplitting

EXIT_OK, EXIT_NOT_CONVERGED, EXIT_INVALID, EXIT_INPUT = 0, 2, 3, 4


def _floats(text):
    return [float(t) for t in text.split(",") if t.strip()]


def _ints(text):
    return [int(t) for t in text.split(",") if t.strip()]


def _add_problem_args(p):
    g = p.add_argument_group("problem")
    g.add_argument("--problem", help="problem directory or archive")
    g.add_argument("--matrix", help="Matrix Market file for A (G from --nonlinearity)")
    g.add_argument("--grid", type=int, help="five-point Laplacian on an m x m grid")
    g.add_argument("--nonlinearity", default="sin", help="sin|arctan|expdecay|const:<c>")
    g.add_argument("--coupling", type=float, default=1.0)


def _add_splitting_args(p):
    g = p.add_argument_group("splitting")
    g.add_argument("--splittings", type=int, default=1, help="number of splittings p")
    g.add_argument("--splitting", default="block0", help="block0|overlap:<k>|global")
    g.add_argument("--lower-partition", default="all", help="all|alt-rows|col-halves|mask:<file>")
    g.add_argument("--inner", default="1", help="inner steps s, or one per splitting as csv")


def _add_solver_args(p):
    g = p.add_argument_group("iteration")
    g.add_argument("--family", default="gs", help="tor|aor|sor|gs|jor|jacobi")
    g.add_argument("--alpha", type=float)
    g.add_argument("--beta", type=float)
    g.add_argument("--r", type=float)
    g.add_argument("--w", type=float)
    g.add_argument("--alphas", help="per-splitting alpha values (csv)")
    g.add_argument("--betas", help="per-splitting beta values (csv)")
    g.add_argument("--tol", type=float, default=1e-10)
    g.add_argument("--max-outer", type=int, default=10000)
    g.add_argument("--workers", type=int)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--x0", choices=("random", "zeros"), default="random")
    g.add_argument("--report", help="JSON record output path")
    g.add_argument("--csv", help="CSV summary output path")
    g.add_argument("--with-oracle", action="store_true")


def build_parser():
    parser = argparse.ArgumentParser(prog="mstor", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run one solve")
    _add_problem_args(p)
    _add_splitting_args(p)
    _add_solver_args(p)

    p = sub.add_parser("sweep", help="sweep alpha+beta and alpha/(alpha+beta)")
    _add_problem_args(p)
    _add_splitting_args(p)
    _add_solver_args(p)
    p.add_argument("--sums", help="alpha+beta values (csv); default: --points inside the bound")
    p.add_argument("--ratios", default="1", help="alpha/(alpha+beta) values (csv)")
    p.add_argument("--points", type=int, default=5, help="evenly spaced sums in (0.1, 0.9) x bound")

    p = sub.add_parser("generate", help="write a grid problem directory")
    _add_problem_args(p)
    p.add_argument("--out", required=True)

    p = sub.add_parser("validate", help="check the convergence hypotheses")
    _add_problem_args(p)
    _add_splitting_args(p)
    p.add_argument("--report", help="JSON output path")

    p = sub.add_parser("oracle", help="reference solution by Picard iteration with a direct solve")
    _add_problem_args(p)
    p.add_argument("--tol", type=float, default=1e-13)
    p.add_argument("--max-iters", type=int, default=10000)
    p.add_argument("--out", help="write the solution vector here")
    return parser


def _spec_from_args(args, sweep=False):
    name, c = parse_nonlinearity(args.nonlinearity)
    spec = ExperimentSpec(
        problem_dir=args.problem, matrix=args.matrix, grid=args.grid, nonlinearity=name,
        coupling=args.coupling, c=c, splitting=args.splitting, p=args.splittings,
        lower_partition=args.lower_partition, family=args.family, r=args.r, w=args.w,
        alpha=args.alpha, beta=args.beta,
        alphas=_floats(args.alphas) if args.alphas else None,
        betas=_floats(args.betas) if args.betas else None,
        inner=_ints(args.inner), tol=args.tol, max_outer=args.max_outer, workers=args.workers,
        x0=args.x0, seed=args.seed, with_oracle=args.with_oracle, report=args.report, csv=args.csv,
    )
    if sweep:
        spec.sweep_ratios = _floats(args.ratios)
        if args.sums:
            spec.sweep_sums = _floats(args.sums)
        else:
            spec.sweep_points = args.points
    return spec


def _print_records(records):
    for r in records:
        a = r.alpha if not isinstance(r.alpha, list) else "/".join(f"{v:g}" for v in r.alpha)
        b = r.beta if not isinstance(r.beta, list) else "/".join(f"{v:g}" for v in r.beta)
        delta = "" if r.oracle_delta is None else f" oracle_delta={r.oracle_delta:.3e}"
        res = "n/a" if r.final_residual is None else f"{r.final_residual:.3e}"
        print(f"alpha={a} beta={b} s={r.s} p={r.p} converged={r.converged} "
              f"outer={r.outer_iterations} residual={res} wall_ms={r.wall_ms:.1f}{delta}")


def _problem_from_args(args):
    name, c = parse_nonlinearity(args.nonlinearity)
    return build_problem(ExperimentSpec(problem_dir=args.problem, matrix=args.matrix, grid=args.grid,
                                        nonlinearity=name, coupling=args.coupling, c=c))


def _run(args):
    if args.command in ("solve", "sweep"):
        records = run_experiment(_spec_from_args(args, sweep=args.command == "sweep"))
        _print_records(records)
        return EXIT_OK if all(r.converged for r in records) else EXIT_NOT_CONVERGED

    if args.command == "generate":
        if args.grid is None:
            raise MstorError("generate needs --grid")
        name, c = parse_nonlinearity(args.nonlinearity)
        prob = generate_grid_problem(args.grid, name, args.coupling, c)
        print(save_problem(prob, args.out))
        return EXIT_OK

    if args.command == "validate":
        problem = _problem_from_args(args)
        strategy, overlap = parse_splitting(args.splitting)
        ms = build_multisplitting(problem.A, args.splittings, strategy, overlap,
                                  parse_lower_partition(args.lower_partition))
        h, mono, bound = validate(problem, ms, inner_steps=_ints(args.inner))
        doc = {"h_matrix": h.to_dict(), "monotone": mono.to_dict(), "parameter_bound": bound}
        text = json.dumps(doc, indent=2)
        if args.report:
            with open(args.report, "w") as fh:
                fh.write(text + "\n")
        print(text)
        return EXIT_OK if (h.passed or mono.passed) else EXIT_INVALID

    if args.command == "oracle":
        problem = _problem_from_args(args)
        x = picard_oracle(problem, tol=args.tol, max_iters=args.max_iters)
        if args.out:
            write_vec(args.out, x)
        print(f"n={problem.n} max|x|={np.abs(x).max(initial=0.0):.6g}")
        return EXIT_OK
    raise AssertionError(args.command)


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return _run(args)
    except (MstorError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
