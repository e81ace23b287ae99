"""Operator files and trajectory tables.

Operator files are JSON::

    {"dim": 2, "case": 2, "omega": 1.0, "k": 1.0,
     "operators": {"A": [[re, im], ...], "C": [...], ...}}

with each operator's entries listed row-major as ``[re, im]`` pairs. An
operator may also be given as ``{"entries": [...]}``.

Trajectory tables have the columns ``t``, ``re_i_j``, ``im_i_j`` (row-major,
1-based), ``trace_re``, ``eig_1 .. eig_d`` (ascending) and ``residual``.
Floats are written with 17 significant digits so a write/read/write cycle
reproduces the text exactly.
"""

import csv
import json
import math

import numpy as np

from .errors import DimensionMismatchError, DomainError

FLOAT_FORMAT = "%.17g"
CASE_ROLES = {1: ("A", "B", "X"), 2: ("A", "C", "D")}


class FormatError(DomainError):
    """Malformed operator or trajectory file."""


def format_float(x):
    x = float(x)
    if math.isnan(x):
        return "nan"
    return FLOAT_FORMAT % x


def operator_to_entries(a):
    a = np.asarray(a, dtype=complex)
    return [[float(z.real), float(z.imag)] for z in a.reshape(-1)]


def entries_to_operator(entries, dim):
    if isinstance(entries, dict):
        if "entries" not in entries:
            raise FormatError("operator object needs an 'entries' field")
        entries = entries["entries"]
    try:
        arr = np.asarray(entries, dtype=float)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"operator entries must be [re, im] pairs: {exc}") from None
    if arr.shape != (dim * dim, 2):
        raise FormatError(f"expected {dim * dim} [re, im] pairs, got array of shape {arr.shape}")
    return (arr[:, 0] + 1j * arr[:, 1]).reshape(dim, dim)


def operators_to_json(operators, case=None, omega=None, k=None):
    """Serializable dict for a mapping ``role -> operator``."""
    ops = {name: np.asarray(op, dtype=complex) for name, op in operators.items()}
    dims = {op.shape for op in ops.values()}
    if len(dims) != 1:
        raise DimensionMismatchError("operators must share one dimension")
    doc = {"dim": int(next(iter(dims))[0])}
    if case is not None:
        doc["case"] = int(case)
    if omega is not None:
        doc["omega"] = float(omega)
    if k is not None:
        doc["k"] = float(k)
    doc["operators"] = {name: operator_to_entries(op) for name, op in ops.items()}
    return doc


def write_operators(path, operators, case=None, omega=None, k=None):
    with open(path, "w") as fh:
        json.dump(operators_to_json(operators, case, omega, k), fh, indent=1)


def parse_operators(doc):
    """Inverse of :func:`operators_to_json`; returns ``(operators, header)``."""
    if not isinstance(doc, dict):
        raise FormatError("operator file must hold a JSON object")
    if "dim" not in doc or "operators" not in doc:
        raise FormatError("operator file needs 'dim' and 'operators'")
    dim = doc["dim"]
    if not isinstance(dim, int) or dim < 1:
        raise FormatError(f"'dim' must be a positive integer, got {dim!r}")
    if not isinstance(doc["operators"], dict):
        raise FormatError("'operators' must map role names to entries")
    ops = {name: entries_to_operator(e, dim) for name, e in doc["operators"].items()}
    header = {key: doc[key] for key in ("case", "omega", "k") if key in doc}
    return ops, header


def read_operators(path):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from None
    return parse_operators(doc)


def infer_case(operators):
    if "B" in operators or "X" in operators:
        return 1
    if "C" in operators or "D" in operators:
        return 2
    raise FormatError("cannot infer the case from the operator roles")


# ---------------------------------------------------------------------------
# trajectories


def trajectory_columns(dim):
    cols = ["t"]
    for i in range(1, dim + 1):
        for j in range(1, dim + 1):
            cols += [f"re_{i}_{j}", f"im_{i}_{j}"]
    cols.append("trace_re")
    cols += [f"eig_{i}" for i in range(1, dim + 1)]
    cols.append("residual")
    return cols


def trajectory_rows(traj):
    """Numeric rows in column order; ``residual`` is NaN without a reference."""
    d = traj.dim
    n = len(traj)
    flat = traj.states.reshape(n, d * d)
    inter = np.empty((n, 2 * d * d))
    inter[:, 0::2] = flat.real
    inter[:, 1::2] = flat.imag
    res = traj.residuals
    if res is None:
        res = np.full(n, np.nan)
    return np.column_stack([traj.times, inter, traj.traces.real, traj.spectra, res])


def write_trajectory_csv(fh, traj):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(trajectory_columns(traj.dim))
    for row in trajectory_rows(traj):
        w.writerow([format_float(x) for x in row])


def read_trajectory_csv(fh):
    """Returns ``(columns, rows)`` with rows as a float array."""
    r = csv.reader(fh)
    cols = next(r)
    rows = np.array([[float(x) for x in row] for row in r if row])
    return cols, rows


def trajectory_to_json(traj, metadata=None):
    rows = trajectory_rows(traj)
    return {
        "columns": trajectory_columns(traj.dim),
        # encode as text so that the 17-digit representation survives
        "rows": [[format_float(x) for x in row] for row in rows],
        "metadata": metadata or {},
    }


def write_trajectory_json(fh, traj, metadata=None):
    json.dump(trajectory_to_json(traj, metadata), fh, indent=1)


def read_trajectory_json(fh):
    doc = json.load(fh)
    rows = np.array([[float(x) for x in row] for row in doc["rows"]])
    return doc["columns"], rows, doc.get("metadata", {})


def states_from_rows(columns, rows):
    """Recover the ``(n, d, d)`` states from a trajectory table."""
    n_entries = sum(1 for c in columns if c.startswith("re_"))
    d = int(round(math.sqrt(n_entries)))
    if d * d != n_entries:
        raise FormatError("table does not hold a square number of entries")
    block = rows[:, 1:1 + 2 * n_entries]
    return (block[:, 0::2] + 1j * block[:, 1::2]).reshape(-1, d, d)
