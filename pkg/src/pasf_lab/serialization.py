"""Frame files and deterministic JSON encoding."""
from __future__ import annotations

import hashlib
import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .frames import PASF
from .lp_core import INF

SCHEMA_VERSION = 1
FRAME_KEYS = {"schema", "p", "r", "d", "n", "F", "T", "label"}


class SchemaError(ValueError):
    """Frame or certificate file does not match the expected layout."""


def _reject_constant(name):
    raise SchemaError(f"non-finite literal {name} is not allowed")


def to_jsonable(obj):
    """Plain-Python view of reports: numpy to lists, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return obj


def dumps(obj) -> str:
    """Canonical JSON: sorted keys, shortest round-trip floats, trailing newline."""
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def atomic_write(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def frame_to_dict(P: PASF) -> dict:
    return {
        "schema": SCHEMA_VERSION,
        "p": P.p,
        "r": "inf" if P.r == INF else P.r,
        "d": P.d,
        "n": P.n,
        "F": P.F.tolist(),
        "T": P.T.tolist(),
        "label": P.label,
    }


def save_frame(P: PASF, path) -> None:
    text = json.dumps(frame_to_dict(P), indent=1, allow_nan=False) + "\n"
    atomic_write(Path(path), text)


def _exponent(value, name):
    if value == "inf":
        return INF
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"{name} must be a number")
    return float(value)


def _matrix(value, rows, cols, name) -> np.ndarray:
    if not isinstance(value, list) or len(value) != rows:
        raise SchemaError(f"{name} must have {rows} rows")
    for row in value:
        if not isinstance(row, list) or len(row) != cols:
            raise SchemaError(f"{name} must be {rows} x {cols}")
        for v in row:
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise SchemaError(f"{name} entries must be numbers")
    M = np.array(value, dtype=float).reshape(rows, cols)
    if not np.all(np.isfinite(M)):
        raise SchemaError(f"{name} has non-finite entries")
    return M


def frame_from_dict(data: dict) -> tuple[PASF, list[str]]:
    """Validate a frame record; returns the frame and any warnings."""
    if not isinstance(data, dict):
        raise SchemaError("frame file must hold a JSON object")
    warnings: list[str] = []
    unknown = set(data) - FRAME_KEYS
    if unknown:
        raise SchemaError(f"unknown frame keys: {sorted(unknown)}")
    if data.get("schema") != SCHEMA_VERSION:
        raise SchemaError(f"unsupported schema version {data.get('schema')!r}; expected {SCHEMA_VERSION}")
    for key in ("p", "d", "n", "F", "T"):
        if key not in data:
            raise SchemaError(f"missing field {key!r}")
    p = _exponent(data["p"], "p")
    if "r" in data:
        r = _exponent(data["r"], "r")
    else:
        r = p
        warnings.append(f"frame file has no 'r'; defaulted to r = p = {p:g}")
    d, n = data["d"], data["n"]
    if not (isinstance(d, int) and isinstance(n, int)) or d < 1 or n < 1:
        raise SchemaError("d and n must be positive integers")
    F = _matrix(data["F"], n, d, "F")
    T = _matrix(data["T"], d, n, "T")
    label = data.get("label", "")
    if not isinstance(label, str):
        raise SchemaError("label must be a string")
    try:
        return PASF(F, T, p, r, label), warnings
    except ValueError as exc:
        raise SchemaError(str(exc)) from exc


def load_frame(path) -> tuple[PASF, list[str], str]:
    """Read a frame file; returns (frame, warnings, sha256 of the bytes)."""
    raw = Path(path).read_bytes()
    try:
        data = json.loads(raw.decode("utf-8"), parse_constant=_reject_constant)
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SchemaError(f"malformed JSON: {exc}") from exc
    P, warnings = frame_from_dict(data)
    return P, warnings, sha256_bytes(raw)


def load_json(path):
    raw = Path(path).read_bytes()
    try:
        return json.loads(raw.decode("utf-8"), parse_constant=_reject_constant), sha256_bytes(raw)
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SchemaError(f"malformed JSON in {path}: {exc}") from exc
