"""Problem directories: ``A.mtx``, ``problem.json``, optional ``P.mtx`` and ``solution.vec``."""

import importlib
import json
import shutil
import tempfile
from pathlib import Path

from ..errors import DimensionError, ParseError
from ..mmio import read_mtx, read_vec, write_mtx, write_vec
from ..nonlinear import NONLINEARITIES, BoundedMap, WeaklyNonlinearProblem, componentwise_map

FORMAT = "mstor.problem/1"


def _import_evaluator(spec, path):
    module, _, attr = spec.partition(":")
    if not module or not attr:
        raise ParseError(f"evaluator must be 'module:attribute', got {spec!r}", path)
    try:
        obj = importlib.import_module(module)
        for part in attr.split("."):
            obj = getattr(obj, part)
    except (ImportError, AttributeError) as exc:
        raise ParseError(f"cannot import evaluator {spec!r}: {exc}", path) from None
    return obj


def load_problem(path):
    """Load a problem directory (or a zip/tar archive of one)."""
    path = Path(path)
    if path.is_file():
        with tempfile.TemporaryDirectory() as tmp:
            shutil.unpack_archive(str(path), tmp)
            inner = [p for p in Path(tmp).rglob("problem.json")]
            if not inner:
                raise ParseError("archive contains no problem.json", path)
            return _load_dir(inner[0].parent, provenance_path=path)
    return _load_dir(path, provenance_path=path)


def _load_dir(d, provenance_path):
    meta_path = d / "problem.json"
    try:
        meta = json.loads(meta_path.read_text())
    except FileNotFoundError:
        raise ParseError("missing problem.json", meta_path) from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", meta_path, exc.lineno) from None
    A = read_mtx(d / "A.mtx")
    if A.shape[0] != A.shape[1]:
        raise DimensionError(f"A.mtx is not square: {A.shape}")
    n = A.shape[0]
    if "n" in meta and int(meta["n"]) != n:
        raise DimensionError(f"problem.json declares n = {meta['n']}, A.mtx has n = {n}")
    P = read_mtx(d / "P.mtx") if (d / "P.mtx").exists() else None
    if P is not None and P.shape != A.shape:
        raise DimensionError(f"P.mtx has shape {P.shape}, A.mtx has {A.shape}")

    kind = meta.get("nonlinearity")
    if kind == "external":
        if P is None:
            raise ParseError("external nonlinearity requires P.mtx", d)
        spec = meta.get("evaluator")
        if not spec:
            raise ParseError("external nonlinearity requires an 'evaluator' entry", meta_path)
        G = BoundedMap(_import_evaluator(spec, meta_path), P, meta.get("description", spec),
                       {"nonlinearity": "external", "evaluator": spec})
    elif kind in NONLINEARITIES:
        G = componentwise_map(n, kind, float(meta.get("coupling", 1.0)), float(meta.get("c", 0.0)))
        if P is not None:
            G = BoundedMap(G.evaluator, P, G.description, dict(G.params, declared_P=True))
    else:
        raise ParseError(f"unknown nonlinearity {kind!r}", meta_path)

    sol = read_vec(d / "solution.vec") if (d / "solution.vec").exists() else None
    return WeaklyNonlinearProblem(A, G, meta.get("name", d.name), sol, provenance="loaded",
                                  notes={"source": str(provenance_path)})


def save_problem(problem, path):
    """Write ``problem`` as a directory that ``load_problem`` reads back."""
    d = Path(path)
    d.mkdir(parents=True, exist_ok=True)
    params = dict(problem.G.params)
    kind = params.get("nonlinearity")
    meta = {"format": FORMAT, "name": problem.name, "n": problem.n}
    if kind in NONLINEARITIES:
        meta["nonlinearity"] = kind
        meta["coupling"] = params.get("coupling", 1.0)
        if kind == "linear_c":
            meta["c"] = params.get("c", 0.0)
        if params.get("declared_P"):
            write_mtx(d / "P.mtx", problem.P)
    elif kind == "external" and params.get("evaluator"):
        meta["nonlinearity"] = "external"
        meta["evaluator"] = params["evaluator"]
        meta["description"] = problem.G.description
        write_mtx(d / "P.mtx", problem.P)
    else:
        raise ParseError("map has no serializable description (set params['evaluator'] = 'module:attr')", d)
    write_mtx(d / "A.mtx", problem.A)
    (d / "problem.json").write_text(json.dumps(meta, indent=2) + "\n")
    if problem.known_solution is not None:
        write_vec(d / "solution.vec", problem.known_solution)
    return d
