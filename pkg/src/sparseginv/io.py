"""Reading and writing dense matrices.

Supported on input: MatrixMarket (array or coordinate), headerless CSV
and the JSON object ``{"rows": m, "cols": n, "entries": [...]}`` with
row-major entries (flat, or a list of rows).  Output adds CSV and JSON.
"""

from __future__ import annotations

import io as _io
import json
from pathlib import Path

import numpy as np
import scipy.io
import scipy.sparse

from . import linalg
from .errors import InvalidMatrix

FORMATS = ("mtx", "csv", "json")


def _format_of(path, fmt: str | None) -> str:
    if fmt is not None:
        if fmt not in FORMATS:
            raise InvalidMatrix(f"unknown matrix format {fmt!r}")
        return fmt
    suffix = Path(path).suffix.lower().lstrip(".")
    return {"mm": "mtx", "txt": "csv"}.get(suffix, suffix if suffix in FORMATS else "mtx")


def matrix_from_json(obj) -> np.ndarray:
    try:
        rows, cols = int(obj["rows"]), int(obj["cols"])
        A = np.asarray(obj["entries"], dtype=float).reshape(rows, cols)
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidMatrix(f"bad JSON matrix: {exc}") from exc
    return linalg.as_matrix(A)


def matrix_to_json(A) -> dict:
    A = np.asarray(A, dtype=float)
    return {"rows": A.shape[0], "cols": A.shape[1], "entries": A.ravel().tolist()}


def read_matrix(path, fmt: str | None = None) -> np.ndarray:
    """Load a dense float matrix; the format defaults to the file suffix."""
    fmt = _format_of(path, fmt)
    try:
        if fmt == "mtx":
            M = scipy.io.mmread(str(path))
            A = M.toarray() if scipy.sparse.issparse(M) else np.asarray(M)
        elif fmt == "csv":
            A = np.loadtxt(path, delimiter=",", ndmin=2)
        else:
            with open(path) as fh:
                return matrix_from_json(json.load(fh))
    except (OSError, ValueError) as exc:
        raise InvalidMatrix(f"cannot read {path}: {exc}") from exc
    if np.iscomplexobj(A):
        raise InvalidMatrix("complex matrices are not supported")
    return linalg.as_matrix(np.asarray(A, dtype=float))


def dumps_matrix(A, fmt: str = "mtx") -> str:
    A = np.asarray(A, dtype=float)
    if fmt == "mtx":
        buf = _io.BytesIO()
        scipy.io.mmwrite(buf, A, precision=17)
        return buf.getvalue().decode()
    if fmt == "csv":
        return "".join(",".join(repr(float(x)) for x in row) + "\n" for row in A)
    if fmt == "json":
        return json.dumps(matrix_to_json(A))
    raise InvalidMatrix(f"unknown matrix format {fmt!r}")


def write_matrix(path, A, fmt: str | None = None) -> None:
    fmt = _format_of(path, fmt)
    Path(path).write_text(dumps_matrix(A, fmt))
