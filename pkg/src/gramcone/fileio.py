"""JSON and CSV formats for models, gramians, specs, reports and signals.

Complex numbers are written as ``[re, im]`` pairs everywhere; matrices as
nested lists of such pairs. Every document carries a ``"schema"`` string.
"""
from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

import numpy as np

from .errors import DomainError
from .oracles import Signal
from .system import StateSpace

MODEL_SCHEMA = "gramcone.model/1"
GRAMIAN_SCHEMA = "gramcone.gramian/1"
DISTURBANCE_SCHEMA = "gramcone.disturbance/1"
UNCERTAINTY_SCHEMA = "gramcone.uncertainty/1"
REPORT_SCHEMA = "gramcone.report/1"
SIGNAL_SCHEMA = "gramcone.signal/1"


class FormatError(DomainError):
    """Malformed input file; the message names the offending field."""


def encode_complex(x):
    """ndarray (or scalar) of complex -> nested lists with ``[re, im]`` leaves."""
    a = np.asarray(x)
    if a.ndim == 0:
        z = complex(a)
        return [z.real, z.imag]
    return [encode_complex(v) for v in a]


def decode_complex(obj, where="value", ndim=None):
    """Inverse of :func:`encode_complex`.

    With ``ndim`` given the nesting depth decides the format: depth ``ndim``
    means plain real entries, depth ``ndim + 1`` with a trailing 2 means
    ``[re, im]`` pairs. Without it every innermost 2-list is a pair.
    """
    try:
        arr = np.asarray(obj, dtype=float)
    except (TypeError, ValueError):
        _locate_bad_leaf(obj, where)
        raise FormatError(f"{where}: ragged nested lists") from None
    if ndim is None:
        ndim = arr.ndim - 1 if arr.ndim and arr.shape[-1] == 2 else arr.ndim
    if arr.ndim == ndim + 1 and arr.shape[-1] == 2:
        out = arr[..., 0] + 1j * arr[..., 1]
    elif arr.ndim == ndim:
        out = arr.astype(complex)
    else:
        raise FormatError(f"{where}: expected depth {ndim} (real) or {ndim + 1} ([re, im]), got shape {arr.shape}")
    if not np.all(np.isfinite(out)):
        raise FormatError(f"{where}: non-finite entries")
    return out


def _locate_bad_leaf(v, path):
    if isinstance(v, list):
        for i, t in enumerate(v):
            _locate_bad_leaf(t, f"{path}[{i}]")
    elif not (isinstance(v, (int, float)) and not isinstance(v, bool)):
        raise FormatError(f"{path}: expected a number, got {v!r}")


def _load_json(path):
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


def _check_keys(doc, allowed, required, where):
    if not isinstance(doc, dict):
        raise FormatError(f"{where}: expected a JSON object")
    for k in doc:
        if k not in allowed:
            raise FormatError(f"{where}: unknown key {k!r}")
    for k in required:
        if k not in doc:
            raise FormatError(f"{where}: missing key {k!r}")


def _check_schema(doc, schema, where):
    got = doc.get("schema", schema)
    if got != schema:
        raise FormatError(f"{where}: schema {got!r} is not {schema!r}")


def _matrix(doc, key, where, shape=None):
    M = decode_complex(doc[key], f"{where}.{key}", ndim=2)
    if shape is not None and M.shape != shape:
        raise FormatError(f"{where}.{key}: shape {M.shape}, expected {shape}")
    return M


def model_to_dict(sys: StateSpace, labels=None):
    doc = {"schema": MODEL_SCHEMA, "n": sys.n, "m": sys.m, "p": sys.p,
           "A": encode_complex(sys.A), "B": encode_complex(sys.B),
           "C": encode_complex(sys.C), "D": encode_complex(sys.D)}
    if labels:
        doc["labels"] = labels
    return doc


def model_from_dict(doc, allow_unstable=False, where="model"):
    _check_keys(doc, {"schema", "n", "m", "p", "A", "B", "C", "D", "labels"}, ["A", "B", "C", "D"], where)
    _check_schema(doc, MODEL_SCHEMA, where)
    A = _matrix(doc, "A", where)
    n = A.shape[0]
    if A.shape != (n, n):
        raise FormatError(f"{where}.A: shape {A.shape} is not square")
    B = _matrix(doc, "B", where)
    C = _matrix(doc, "C", where)
    m = int(doc.get("m", B.shape[1]))
    p = int(doc.get("p", C.shape[0]))
    for key, M, shape in (("B", B, (n, m)), ("C", C, (p, n))):
        if M.shape != shape:
            raise FormatError(f"{where}.{key}: shape {M.shape}, expected {shape}")
    D = _matrix(doc, "D", where, (p, m))
    if "n" in doc and int(doc["n"]) != n:
        raise FormatError(f"{where}.n: declared {doc['n']}, A is {n}x{n}")
    try:
        return StateSpace(A, B, C, D, allow_unstable=allow_unstable)
    except DomainError as exc:
        raise FormatError(f"{where}: {exc}") from exc


def load_model(path, allow_unstable=False):
    return model_from_dict(_load_json(path), allow_unstable, where=str(path))


def save_json(doc, path, pretty=True):
    Path(path).write_text(json.dumps(doc, indent=2 if pretty else None) + "\n")


def gramian_to_dict(V):
    return {"schema": GRAMIAN_SCHEMA, "V": encode_complex(np.asarray(V))}


def load_gramian(path, dim=None):
    doc = _load_json(path)
    where = str(path)
    _check_keys(doc, {"schema", "V", "n", "m"}, ["V"], where)
    _check_schema(doc, GRAMIAN_SCHEMA, where)
    V = _matrix(doc, "V", where, (dim, dim) if dim is not None else None)
    return V


DISTURBANCE_KEYS = {
    "unit_energy": set(),
    "per_channel": {"bounds"},
    "grouped": {"groups", "bounds"},
    "principal_component": {"M"},
}


def disturbance_from_dict(doc, m, where="spec"):
    from .extended import build_spec

    if not isinstance(doc, dict) or "kind" not in doc:
        raise FormatError(f"{where}: missing key 'kind'")
    kind = doc["kind"]
    if kind not in DISTURBANCE_KEYS:
        raise FormatError(f"{where}.kind: unknown disturbance kind {kind!r}")
    required = DISTURBANCE_KEYS[kind] - ({"bounds"} if kind == "per_channel" else set())
    _check_keys(doc, {"schema", "kind"} | DISTURBANCE_KEYS[kind], ["kind"] + sorted(required), where)
    _check_schema(doc, DISTURBANCE_SCHEMA, where)
    params = {}
    if "bounds" in doc:
        params["bounds"] = np.asarray(doc["bounds"], dtype=float)
    if "groups" in doc:
        params["groups"] = doc["groups"]
    if "M" in doc:
        params["M"] = _matrix(doc, "M", where)
    return build_spec(kind, m=m, **params)


UNCERTAINTY_KEYS = {
    "full_block": set(),
    "two_block": {"out_sizes", "in_sizes"},
    "block_diagonal": {"out_sizes", "in_sizes"},
    "scalar_block": set(),
    "iqc": {"Pi"},
}


def uncertainty_from_dict(doc, sys, where="uncertainty"):
    from .robust import make_uncertainty

    if not isinstance(doc, dict) or "kind" not in doc:
        raise FormatError(f"{where}: missing key 'kind'")
    kind = doc["kind"]
    if kind not in UNCERTAINTY_KEYS:
        raise FormatError(f"{where}.kind: unknown uncertainty kind {kind!r}")
    _check_keys(doc, {"schema", "kind"} | UNCERTAINTY_KEYS[kind], ["kind"] + sorted(UNCERTAINTY_KEYS[kind]), where)
    _check_schema(doc, UNCERTAINTY_SCHEMA, where)
    params = {k: doc[k] for k in ("out_sizes", "in_sizes") if k in doc}
    if "Pi" in doc:
        params["Pi"] = _matrix(doc, "Pi", where)
    return make_uncertainty(kind, sys, **params)


def write_signal_csv(signal: Signal, path):
    """Header ``k, re_0, im_0, re_1, im_1, ...``; one row per sample."""
    m = signal.m
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["k"] + [f"{part}_{i}" for i in range(m) for part in ("re", "im")])
        for k, row in enumerate(signal.samples):
            vals = []
            for z in row:
                vals += [repr(float(z.real)), repr(float(z.imag))]
            wr.writerow([k] + vals)


def read_signal_csv(path, m=None):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or not rows[0] or rows[0][0] != "k":
        raise FormatError(f"{path}: first header column must be 'k'")
    width = len(rows[0]) - 1
    if width % 2:
        raise FormatError(f"{path}: expected re/im column pairs after 'k'")
    ch = width // 2
    if m is not None and ch != m:
        raise FormatError(f"{path}: {ch} channels, expected {m}")
    data = np.zeros((len(rows) - 1, ch), dtype=complex)
    for i, row in enumerate(rows[1:]):
        if len(row) != width + 1:
            raise FormatError(f"{path}: line {i + 2} has {len(row)} fields, expected {width + 1}")
        try:
            if int(row[0]) != i:
                raise FormatError(f"{path}: line {i + 2} has k={row[0]}, expected {i}")
            vals = [float(v) for v in row[1:]]
        except ValueError as exc:
            raise FormatError(f"{path}: line {i + 2}: {exc}") from exc
        data[i] = np.array(vals[0::2]) + 1j * np.array(vals[1::2])
    return Signal(data)


def digest(*paths):
    h = hashlib.sha256()
    for p in paths:
        h.update(Path(p).read_bytes())
    return h.hexdigest()


def to_jsonable(obj):
    """Recursively convert numpy data; complex arrays become ``[re, im]`` lists."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return encode_complex(obj)
        return obj.tolist()
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def validate_report(doc):
    _check_keys(doc, {"schema", "command", "inputs", "results", "version", "wall_time", "status"},
                ["schema", "command", "inputs", "results", "version", "status"], "report")
    _check_schema(doc, REPORT_SCHEMA, "report")
    return doc
