"""Output files: norms CSV, JSON report, field snapshots.  All writes are atomic.

Snapshot text format: one header line

    # modlab-field n=<n> N=<N> L=<L> t=<t>

followed by one line ``<re> <im>`` per node in C order.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from ..grid import Field, make_grid

SNAPSHOT_TAG = "modlab-field"
NORM_COLUMNS = ("scenario", "u0_id", "p", "t", "window", "norm", "ratio")


def p_label(p: float) -> str:
    return "inf" if math.isinf(p) else f"{p:g}"


def write_atomic(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise
    return path


def norms_csv(series_list) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(NORM_COLUMNS)
    for ser in series_list:
        for r in ser.rows:
            w.writerow([ser.scenario, r.u0_id, p_label(r.p), repr(float(r.t)), r.window,
                        repr(float(r.norm)), repr(float(r.ratio))])
    return buf.getvalue()


def read_norms_csv(path) -> list:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if rows and tuple(rows[0].keys()) != NORM_COLUMNS:
        raise ValueError(f"{path}: unexpected columns {tuple(rows[0].keys())}")
    return [{"scenario": r["scenario"], "u0_id": int(r["u0_id"]), "p": float(r["p"]),
             "t": float(r["t"]), "window": r["window"], "norm": float(r["norm"]),
             "ratio": float(r["ratio"])} for r in rows]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k) if not isinstance(k, float) else p_label(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def report_json(scenario: str, checks, constants: dict) -> str:
    doc = {"scenario": scenario,
           "checks": [c.as_dict() for c in checks],
           "constants": constants}
    return json.dumps(_jsonable(doc), indent=2) + "\n"


def snapshot_text(f: Field) -> str:
    g = f.grid
    lines = [f"# {SNAPSHOT_TAG} n={g.n} N={g.N} L={g.L!r} t={float(f.time_tag)!r}"]
    lines += [f"{float(v.real)!r} {float(v.imag)!r}" for v in f.values.reshape(-1)]
    return "\n".join(lines) + "\n"


def write_snapshot(path, f: Field) -> Path:
    return write_atomic(path, snapshot_text(f))


def read_snapshot(path) -> Field:
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) < 2 or header[0] != "#" or header[1] != SNAPSHOT_TAG:
            raise ValueError(f"{path}: missing snapshot header")
        meta = dict(item.split("=", 1) for item in header[2:])
        data = np.loadtxt(fh, ndmin=2)
    try:
        g = make_grid(int(meta["n"]), float(meta["L"]), int(meta["N"]))
        t = float(meta.get("t", 0.0))
    except KeyError as exc:
        raise ValueError(f"{path}: header lacks {exc}") from None
    if data.shape != (g.size, 2):
        raise ValueError(f"{path}: expected {g.size} rows of 're im', got {data.shape}")
    return Field(g, (data[:, 0] + 1j * data[:, 1]).reshape(g.shape), t)
