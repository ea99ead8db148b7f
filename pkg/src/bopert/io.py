"""Snapshot and report persistence.

JSON snapshot::

    {"config": {...}, "times": [...], "states": [{"N": int, "coeffs": [[re, im], ...]}, ...]}

Binary coefficient dump: the 8 ASCII bytes ``BOPERT01``, then ``N`` as a
little-endian int64, then for every state its ``N+1`` coefficients as
interleaved little-endian float64 ``re, im`` pairs.
"""
from __future__ import annotations

import csv
import json
import struct
from pathlib import Path

import numpy as np

from .errors import FormatError
from .evolution import Trajectory
from .spectral import TorusField

__all__ = [
    "MAGIC",
    "trajectory_to_dict",
    "trajectory_from_dict",
    "save_snapshot",
    "load_snapshot",
    "save_coefficient_dump",
    "load_coefficient_dump",
    "write_csv",
    "read_csv",
    "write_json",
]

MAGIC = b"BOPERT01"
_HEADER = struct.Struct("<8sq")


def trajectory_to_dict(traj: Trajectory) -> dict:
    return {
        "config": traj.config,
        "times": [float(t) for t in traj.times],
        "states": [s.to_dict() for s in traj.states],
    }


def trajectory_from_dict(doc: dict) -> Trajectory:
    try:
        states = [TorusField.from_dict(s) for s in doc["states"]]
        return Trajectory(np.asarray(doc["times"], dtype=np.float64), states, doc.get("config", {}))
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed trajectory snapshot: {exc}") from exc


def write_json(path, doc) -> None:
    Path(path).write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")


def save_snapshot(traj: Trajectory, path) -> Path:
    """Write ``traj`` as JSON; a ``.bin`` suffix writes the binary dump instead."""
    path = Path(path)
    if path.suffix == ".bin":
        save_coefficient_dump(traj, path)
    else:
        write_json(path, trajectory_to_dict(traj))
    return path


def load_snapshot(path) -> Trajectory:
    path = Path(path)
    raw = path.read_bytes()
    if raw[:8] == MAGIC:
        raise FormatError(f"{path} is a binary coefficient dump; use load_coefficient_dump")
    try:
        doc = json.loads(raw)
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path} is not a JSON snapshot") from exc
    if not isinstance(doc, dict) or not {"times", "states"} <= doc.keys():
        raise FormatError(f"{path} lacks 'times'/'states'")
    return trajectory_from_dict(doc)


def save_coefficient_dump(traj: Trajectory, path) -> Path:
    path = Path(path)
    N = traj.states[0].N if len(traj) else 0
    body = traj.coeff_array().astype("<c16", copy=False).tobytes()
    path.write_bytes(_HEADER.pack(MAGIC, N) + body)
    return path


def load_coefficient_dump(path) -> np.ndarray:
    """Coefficient array of shape ``(n_states, N+1)``."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise FormatError("file shorter than the 16-byte header")
    magic, N = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}")
    if N < 0:
        raise FormatError(f"negative mode count {N}")
    body = raw[_HEADER.size:]
    width = 16 * (N + 1)
    if len(body) % width:
        raise FormatError(f"payload of {len(body)} bytes is not a whole number of states")
    return np.frombuffer(body, dtype="<c16").reshape(-1, N + 1).astype(np.complex128)


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]
