"""CSV and JSON writers; every file carries the config hash."""

import json
import os

import numpy as np


def _fmt(v):
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_csv(path, columns, rows, config_hash, units=None):
    """Write rows under a '# config_sha256=' line, an optional units line and a header."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    rows = np.asarray(rows, dtype=float)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# config_sha256={config_hash}\n")
        if units:
            fh.write("# units: " + ", ".join(f"{c}[{u}]" for c, u in zip(columns, units)) + "\n")
        fh.write(",".join(columns) + "\n")
        for r in rows.reshape(-1, len(columns)):
            fh.write(",".join(_fmt(v) for v in r) + "\n")


def read_csv(path):
    """Return (config_hash, columns, data array)."""
    h = None
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    body = []
    for ln in lines:
        if ln.startswith("# config_sha256="):
            h = ln.split("=", 1)[1]
        elif not ln.startswith("#"):
            body.append(ln)
    cols = body[0].split(",")
    data = np.array([[float(v) for v in ln.split(",")] for ln in body[1:]]).reshape(-1, len(cols))
    return h, cols, data


def _jsonable(o):
    if isinstance(o, dict):
        return {str(k): _jsonable(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_jsonable(v) for v in o]
    if isinstance(o, np.ndarray):
        return _jsonable(o.tolist())
    if isinstance(o, (np.bool_, bool)):
        return bool(o)
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating, float)):
        f = float(o)
        return f if np.isfinite(f) else str(f)
    return o


def write_json(path, payload, config_hash):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    data = {"config_sha256": config_hash}
    data.update(_jsonable(payload))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")
