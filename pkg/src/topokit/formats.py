"""Plain-text readers and writers: XYZ, ASCII PLY, PPM (P3), diagram CSV, JSON.

Every writer formats floats with 17 significant digits so that reading a
written file returns the exact same values and repeated runs give
byte-identical files.
"""
import json
import math
from pathlib import Path

import numpy as np

from .exceptions import ParseError
from .optimizer import ToyProblem, fmt
from .persistence import diagram_from_triples


def _lines(path):
    try:
        text = Path(path).read_text()
    except (OSError, UnicodeDecodeError) as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    return text.splitlines()


def _float(token, where):
    try:
        return float(token)
    except ValueError:
        raise ParseError(f"{where}: not a number: {token!r}") from None


# --- point clouds ---------------------------------------------------------

def read_xyz(path, ncols=None):
    """Whitespace-separated rows; ``#`` starts a comment. All rows need the same width."""
    rows = []
    for n, line in enumerate(_lines(path), 1):
        line = line.split("#", 1)[0].strip()
        if line:
            rows.append([_float(t, f"{path}:{n}") for t in line.split()])
    if not rows:
        raise ParseError(f"{path}: no points")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise ParseError(f"{path}: rows have differing widths {sorted(widths)}")
    if ncols is not None and widths != {ncols}:
        raise ParseError(f"{path}: expected {ncols} columns, found {widths.pop()}")
    return np.array(rows, dtype=np.float64)


def write_xyz(path, points, flags=None):
    P = np.asarray(points, dtype=np.float64)
    out = []
    for i, row in enumerate(P):
        fields = [fmt(v) for v in row]
        if flags is not None:
            fields.append(str(int(flags[i])))
        out.append(" ".join(fields))
    Path(path).write_text("\n".join(out) + "\n")


def read_ply(path):
    """ASCII PLY with a vertex element; the first three vertex properties are x, y, z."""
    lines = _lines(path)
    if not lines or lines[0].strip() != "ply":
        raise ParseError(f"{path}: missing 'ply' magic")
    n_vertex, props, in_vertex, body = None, 0, False, None
    for i, line in enumerate(lines[1:], 1):
        tok = line.split()
        if not tok or tok[0] in ("comment", "obj_info"):
            continue
        if tok[0] == "format" and tok[1:2] != ["ascii"]:
            raise ParseError(f"{path}: only ASCII PLY is supported")
        elif tok[0] == "element":
            in_vertex = tok[1] == "vertex"
            if in_vertex:
                n_vertex = int(tok[2])
            elif n_vertex is None:
                raise ParseError(f"{path}: vertex element must come first")
        elif tok[0] == "property" and in_vertex:
            props += 1
        elif tok[0] == "end_header":
            body = i + 1
            break
    if body is None or n_vertex is None or props < 3:
        raise ParseError(f"{path}: incomplete header")
    data = [line.split() for line in lines[body:body + n_vertex]]
    if len(data) != n_vertex or n_vertex == 0:
        raise ParseError(f"{path}: expected {n_vertex} vertices, found {len(data)}")
    return np.array([[_float(t, path) for t in row[:3]] for row in data])


def write_ply(path, points):
    P = np.asarray(points, dtype=np.float64)
    head = ["ply", "format ascii 1.0", f"element vertex {len(P)}",
            "property double x", "property double y", "property double z", "end_header"]
    rows = [" ".join(fmt(v) for v in p) for p in P]
    Path(path).write_text("\n".join(head + rows) + "\n")


def read_cloud(path):
    """XYZ or PLY by extension (``.ply``); everything else is read as XYZ."""
    return read_ply(path) if str(path).lower().endswith(".ply") else read_xyz(path)


# --- images -------------------------------------------------------------

def read_ppm(path):
    """ASCII PPM (P3) as an H x W x 3 float array scaled to [0, 1]."""
    tokens = []
    for line in _lines(path):
        tokens += line.split("#", 1)[0].split()
    if not tokens or tokens[0] != "P3":
        raise ParseError(f"{path}: not an ASCII PPM (P3)")
    try:
        w, h, maxval = (int(t) for t in tokens[1:4])
        vals = np.array([int(t) for t in tokens[4:]], dtype=np.float64)
    except ValueError:
        raise ParseError(f"{path}: malformed PPM") from None
    if w <= 0 or h <= 0 or maxval <= 0 or len(vals) != w * h * 3:
        raise ParseError(f"{path}: expected {w}x{h}x3 samples, found {len(vals)}")
    if vals.min() < 0 or vals.max() > maxval:
        raise ParseError(f"{path}: sample outside [0, {maxval}]")
    return vals.reshape(h, w, 3) / maxval


def write_ppm(path, img, maxval=255):
    Y = np.asarray(img, dtype=np.float64)
    h, w, _ = Y.shape
    q = np.rint(np.clip(Y, 0, 1) * maxval).astype(int)
    rows = [" ".join(str(v) for v in q[r].ravel()) for r in range(h)]
    Path(path).write_text(f"P3\n{w} {h}\n{maxval}\n" + "\n".join(rows) + "\n")


def write_grid_csv(path, arr):
    """An H x W x 3 array as H rows of W*3 values (r, g, b per pixel)."""
    A = np.asarray(arr, dtype=np.float64)
    rows = [",".join(fmt(v) for v in A[r].ravel()) for r in range(A.shape[0])]
    Path(path).write_text("\n".join(rows) + "\n")


# --- diagrams -------------------------------------------------------------

DIAGRAM_HEADER = "dim,birth,death"


def _num(x):
    return "inf" if math.isinf(x) else fmt(x)


def diagram_csv(diagram, min_persistence=None):
    rows = [DIAGRAM_HEADER] + [f"{d},{_num(b)},{_num(e)}"
                               for d, b, e in diagram.triples(min_persistence)]
    return "\n".join(rows) + "\n"


def write_diagram_csv(path, diagram, min_persistence=None):
    Path(path).write_text(diagram_csv(diagram, min_persistence))


def read_diagram_csv(path):
    lines = [ln for ln in _lines(path) if ln.strip()]
    if not lines or lines[0].strip() != DIAGRAM_HEADER:
        raise ParseError(f"{path}: expected header {DIAGRAM_HEADER!r}")
    triples = []
    for n, line in enumerate(lines[1:], 2):
        parts = line.split(",")
        if len(parts) != 3:
            raise ParseError(f"{path}:{n}: expected 3 fields")
        triples.append((int(_float(parts[0], path)), _float(parts[1], path), _float(parts[2], path)))
    return diagram_from_triples(triples)


# --- JSON -----------------------------------------------------------------

def dumps(obj, indent=0):
    """Deterministic JSON: sorted keys, two-space indent, 17-digit floats."""
    pad, inner = "  " * indent, "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {dumps(obj[k], indent + 1)}" for k in sorted(obj)]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        return "[\n" + ",\n".join(inner + dumps(v, indent + 1) for v in obj) + "\n" + pad + "]"
    if isinstance(obj, (bool, np.bool_)) or obj is None:
        return json.dumps(bool(obj) if obj is not None else None)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        if not math.isfinite(obj):
            raise ValueError("JSON cannot hold non-finite numbers")
        return fmt(obj)
    return json.dumps(obj)


def write_json(path, obj):
    Path(path).write_text(dumps(obj) + "\n")


def read_problem(path):
    """Toy optimization problem from JSON.

    Keys: ``target_values`` (list), ``simplices`` (maximal simplices; faces
    are added), optional ``supv_weight`` and ``initial_values``. Returns
    ``(problem, initial_values or None)``.
    """
    try:
        data = json.loads(Path(path).read_text())
        target = [float(v) for v in data["target_values"]]
        simplices = [tuple(int(v) for v in s) for s in data["simplices"]]
        w = float(data.get("supv_weight", 1.0))
        init = data.get("initial_values")
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise ParseError(f"{path}: invalid problem file: {exc}") from exc
    if any(v < 0 or v >= len(target) for s in simplices for v in s):
        raise ParseError(f"{path}: simplex vertex out of range")
    if init is not None and len(init) != len(target):
        raise ParseError(f"{path}: initial_values length differs from target_values")
    try:
        problem = ToyProblem(simplices, np.array(target), w)
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return problem, None if init is None else np.array(init, dtype=np.float64)


def write_problem(path, problem, initial_values=None):
    top = [s for s in problem.simplices
           if not any(len(t) > len(s) and set(s) <= set(t) for t in problem.simplices)]
    obj = {"simplices": [list(s) for s in top],
           "target_values": [float(v) for v in problem.target_values],
           "supv_weight": float(problem.supv_weight)}
    if initial_values is not None:
        obj["initial_values"] = [float(v) for v in initial_values]
    write_json(path, obj)
