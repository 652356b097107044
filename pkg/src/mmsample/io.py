"""File formats: point CSV, graph JSON, raw matrices, and emitted artifacts.

JSON is written with 17 significant digits per float so every number
round-trips exactly; non-finite floats become ``null``.  All writes go
through a temporary file and an atomic rename.
"""

from __future__ import annotations

import csv
import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .space import FiniteMetricMeasureSpace, build_from_graph, build_from_matrix, build_from_points


def _encode(obj) -> str:
    if obj is None or obj is True or obj is False:
        return json.dumps(obj)
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return "null"
        if x == int(x) and abs(x) < 1e16:
            return f"{int(x)}.0"
        return format(x, ".17g")
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        items = ", ".join(f"{json.dumps(str(k), ensure_ascii=False)}: {_encode(v)}" for k, v in obj.items())
        return "{" + items + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_encode(v) for v in obj) + "]"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(obj) -> str:
    return _encode(obj) + "\n"


def atomic_write(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path, obj) -> None:
    atomic_write(path, dumps(obj))


def read_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _fmt(x) -> str:
    return format(float(x), ".17g")


def matrix_to_csv(m) -> str:
    return "".join(",".join(_fmt(x) for x in row) + "\n" for row in np.asarray(m))


def write_matrix_csv(path, m) -> None:
    atomic_write(path, matrix_to_csv(m))


def read_matrix_csv(path) -> np.ndarray:
    rows = []
    with open(path, encoding="utf-8", newline="") as fh:
        for row in csv.reader(fh):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                rows.append([float(c) for c in row])
            except ValueError:
                raise ValidationError(f"{path}: non-numeric matrix entry in row {len(rows) + 1}") from None
    if any(len(r) != len(rows) for r in rows):
        raise ValidationError(f"{path}: matrix is not square")
    return np.array(rows, dtype=float).reshape(len(rows), len(rows))


def read_vector_csv(path) -> np.ndarray:
    """One number per row; a non-numeric first row is taken as a header."""
    vals = []
    with open(path, encoding="utf-8", newline="") as fh:
        for k, row in enumerate(csv.reader(fh)):
            if not row or not row[0].strip():
                continue
            try:
                vals.append(float(row[0]))
            except ValueError:
                if k == 0:
                    continue
                raise ValidationError(f"{path}: non-numeric value in row {k + 1}") from None
    return np.array(vals)


def write_vector_csv(path, v, header: str = "weight") -> None:
    atomic_write(path, header + "\n" + "".join(_fmt(x) + "\n" for x in v))


def read_points_csv(path, metric_exponent: float = 2.0) -> FiniteMetricMeasureSpace:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader)]
        rows = [r for r in reader if r and any(c.strip() for c in r)]
    has_mass = header[-1] == "mass"
    dims = header[:-1] if has_mass else header
    if dims != [f"x{i}" for i in range(len(dims))] or not dims:
        raise ValidationError(f"{path}: header must be x0,...,x{{d-1}}[,mass], got {','.join(header)}")
    try:
        data = np.array([[float(c) for c in r] for r in rows], dtype=float)
    except ValueError:
        raise ValidationError(f"{path}: rows must be numeric with {len(header)} columns") from None
    if data.ndim != 2 or data.shape[1] != len(header):
        raise ValidationError(f"{path}: every row needs {len(header)} columns")
    masses = data[:, -1] if has_mass else None
    coords = data[:, :-1] if has_mass else data
    return build_from_points(coords, masses, metric_exponent)


def write_points_csv(path, coords, masses=None) -> None:
    coords = np.atleast_2d(np.asarray(coords, dtype=float))
    d = coords.shape[1]
    head = ",".join(f"x{i}" for i in range(d)) + (",mass" if masses is not None else "")
    lines = [head]
    for k, row in enumerate(coords):
        cells = [_fmt(x) for x in row]
        if masses is not None:
            cells.append(_fmt(masses[k]))
        lines.append(",".join(cells))
    atomic_write(path, "\n".join(lines) + "\n")


def read_graph_json(path) -> FiniteMetricMeasureSpace:
    doc = read_json(path)
    try:
        vertices = [(v["id"], v.get("mass", 1.0)) for v in doc["vertices"]]
        edges = [(e["u"], e["v"], e["w"]) for e in doc["edges"]]
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"{path}: malformed graph document ({exc})") from None
    return build_from_graph(vertices, edges)


def read_matrix_space(path, masses_path=None, tol_tri=None) -> FiniteMetricMeasureSpace:
    d = read_matrix_csv(path)
    m = read_vector_csv(masses_path) if masses_path else None
    return build_from_matrix(d, m, tol_tri=tol_tri)


def sniff_format(path) -> str:
    p = Path(path)
    if p.suffix.lower() == ".json":
        return "graph"
    with open(p, encoding="utf-8") as fh:
        first = fh.readline().strip()
    return "points" if first.startswith("x0") else "matrix"


def read_space(path, fmt: str | None = None, masses_path=None, metric_exponent: float = 2.0) -> FiniteMetricMeasureSpace:
    fmt = fmt or sniff_format(path)
    if fmt == "points":
        return read_points_csv(path, metric_exponent)
    if fmt == "graph":
        return read_graph_json(path)
    if fmt == "matrix":
        return read_matrix_space(path, masses_path)
    raise ValidationError(f"unknown input format {fmt!r}")


def write_quasimetric(path, q) -> None:
    """Matrix CSV at ``path`` plus a JSON sidecar with ``s``, ``K`` and ``variant``."""
    path = Path(path)
    write_matrix_csv(path, q.values)
    write_json(path.with_suffix(".json"), q.sidecar())


def read_quasimetric(path):
    from .snowflake import QuasimetricMatrix

    path = Path(path)
    side = read_json(path.with_suffix(".json"))
    q = QuasimetricMatrix(read_matrix_csv(path), float(side["s"]), side["variant"])
    q.__dict__["quasi_constant_K"] = float(side["K"])
    return q
