"""Matrix Market coordinate I/O and plain-text vectors."""

from pathlib import Path

import numpy as np

from .errors import ParseError
from .sparse import csr, from_triples

_HEADER = "%%matrixmarket"


def read_mtx(path):
    """Read a ``coordinate real|integer|pattern general|symmetric`` Matrix Market file.

    Indices are 1-based; symmetric storage is expanded on load.
    """
    path = Path(path)
    with path.open() as fh:
        lines = fh.read().splitlines()
    if not lines or not lines[0].lower().startswith(_HEADER):
        raise ParseError("missing %%MatrixMarket header", path, 1)
    head = lines[0].split()
    if len(head) != 5:
        raise ParseError(f"malformed header {lines[0]!r}", path, 1)
    obj, fmt, field, symmetry = (h.lower() for h in head[1:])
    if obj != "matrix" or fmt != "coordinate":
        raise ParseError(f"unsupported object/format {obj} {fmt}", path, 1)
    if field not in ("real", "integer", "pattern"):
        raise ParseError(f"unsupported field {field!r}", path, 1)
    if symmetry not in ("general", "symmetric"):
        raise ParseError(f"unsupported symmetry {symmetry!r}", path, 1)

    lineno = 1
    size = None
    while lineno < len(lines):
        text = lines[lineno].strip()
        lineno += 1
        if text and not text.startswith("%"):
            size = text
            break
    if size is None:
        raise ParseError("missing size line", path, lineno)
    try:
        n_rows, n_cols, nnz = (int(t) for t in size.split())
    except ValueError:
        raise ParseError(f"malformed size line {size!r}", path, lineno) from None

    rows, cols, vals = [], [], []
    for k in range(lineno, len(lines)):
        text = lines[k].strip()
        if not text or text.startswith("%"):
            continue
        parts = text.split()
        want = 2 if field == "pattern" else 3
        if len(parts) != want:
            raise ParseError(f"expected {want} fields, got {len(parts)}", path, k + 1)
        try:
            i, j = int(parts[0]), int(parts[1])
            v = 1.0 if field == "pattern" else float(parts[2])
        except ValueError:
            raise ParseError(f"malformed entry {text!r}", path, k + 1) from None
        if not (1 <= i <= n_rows and 1 <= j <= n_cols):
            raise ParseError(f"index ({i}, {j}) out of range (indices are 1-based)", path, k + 1)
        if not np.isfinite(v):
            raise ParseError("non-finite value", path, k + 1)
        rows.append(i - 1)
        cols.append(j - 1)
        vals.append(v)
        if symmetry == "symmetric" and i != j:
            rows.append(j - 1)
            cols.append(i - 1)
            vals.append(v)
    declared = nnz if symmetry == "general" else None
    stored = len(vals) if symmetry == "general" else None
    if declared is not None and stored != declared:
        raise ParseError(f"declared {declared} entries, found {stored}", path, len(lines))
    return from_triples(rows, cols, vals, (n_rows, n_cols))


def write_mtx(path, A, comment=None):
    A = csr(A).tocoo()
    with Path(path).open("w") as fh:
        fh.write("%%MatrixMarket matrix coordinate real general\n")
        if comment:
            fh.write(f"% {comment}\n")
        fh.write(f"{A.shape[0]} {A.shape[1]} {A.nnz}\n")
        for i, j, v in zip(A.row, A.col, A.data):
            fh.write(f"{i + 1} {j + 1} {float(v)!r}\n")


def read_vec(path):
    path = Path(path)
    values = []
    for k, line in enumerate(path.read_text().splitlines(), start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        try:
            values.append(float(text))
        except ValueError:
            raise ParseError(f"malformed value {text!r}", path, k) from None
    return np.array(values, dtype=np.float64)


def write_vec(path, x):
    Path(path).write_text("".join(f"{float(v)!r}\n" for v in np.asarray(x, dtype=np.float64)))
