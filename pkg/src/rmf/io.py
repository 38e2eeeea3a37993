"""Readers and writers for curves, frame fields, curvature tables and reports.

All floats are written with at most 12 significant digits so output bytes
do not depend on the last bits of a computation.
"""

from __future__ import annotations

import csv
import io as _io
import json
import math
from pathlib import Path

import numpy as np

from .core import SampledCurve
from .framing import CurvatureField, FrameField

SIG_DIGITS = 12


def fmt(x) -> str:
    v = float(x)
    if not math.isfinite(v):
        return "nan" if math.isnan(v) else ("inf" if v > 0 else "-inf")
    out = format(v, f".{SIG_DIGITS}g")
    return "0" if out == "-0" else out


def _round(v: float):
    if not math.isfinite(v):
        return None
    r = float(format(v, f".{SIG_DIGITS}g"))
    return 0.0 if r == 0 else r


def jsonable(obj):
    """Recursively convert numpy containers and round floats to 12 digits.

    Non-finite floats become ``null``.
    """
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _round(float(obj))
    return obj


def dumps(obj) -> str:
    return json.dumps(jsonable(obj), indent=2, sort_keys=False) + "\n"


def _write_text(path, text: str):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _csv_text(header, rows) -> str:
    buf = _io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(fmt(v) for v in row) + "\n")
    return buf.getvalue()


# ---------------------------------------------------------------------------
# sampled curves


def curve_csv(s, points) -> str:
    pts = np.asarray(points, dtype=float)
    header = ["s"] + [f"x{i + 1}" for i in range(pts.shape[1])]
    return _csv_text(header, np.column_stack([np.asarray(s, dtype=float), pts]))


def write_curve_csv(path, curve: SampledCurve):
    _write_text(path, curve_csv(curve.s, curve.points))


def read_curve_csv(path, name=None) -> SampledCurve:
    """Read ``s,x1,...,xn``; raises ValueError (with line numbers) on bad rows."""
    path = Path(path)
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if r and any(c.strip() for c in r)]
    if not rows:
        raise ValueError(f"{path}: no samples")
    header = [h.strip() for h in rows[0]]
    if len(header) < 3 or header[0] != "s" or header[1:] != [f"x{i}" for i in range(1, len(header))]:
        raise ValueError(f"{path}:1: expected header s,x1,...,xn, got {','.join(header)}")
    data = []
    for lineno, r in enumerate(rows[1:], start=2):
        if len(r) != len(header):
            raise ValueError(f"{path}:{lineno}: expected {len(header)} fields, got {len(r)}")
        try:
            data.append([float(c) for c in r])
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: {exc}") from None
    if not data:
        raise ValueError(f"{path}: no samples")
    arr = np.array(data)
    try:
        return SampledCurve(arr[:, 0], arr[:, 1:], name=name or path.stem)
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from None


# ---------------------------------------------------------------------------
# frames and curvatures


def frame_field_records(field: FrameField) -> list:
    return [{"s": float(s), "xi": f} for s, f in zip(field.s, field.frames)]


def write_frame_json(path, field: FrameField):
    _write_text(path, dumps(frame_field_records(field)))


def read_frame_json(path) -> FrameField:
    with open(path, encoding="utf-8") as fh:
        recs = json.load(fh)
    s = np.array([r["s"] for r in recs], dtype=float)
    frames = np.array([r["xi"] for r in recs], dtype=float)
    return FrameField(s, frames)


def curvature_csv(cf: CurvatureField) -> str:
    cols = [cf.s[:, None], cf.k]
    header = ["s"] + [f"k{j + 1}" for j in range(cf.k.shape[1])]
    if cf.kappa is not None and cf.tau is not None:
        theta = cf.theta if cf.theta is not None else np.full(cf.s.size, np.nan)
        cols += [np.asarray(cf.kappa)[:, None], np.asarray(cf.tau)[:, None], np.asarray(theta)[:, None]]
        header += ["kappa", "tau", "theta"]
    return _csv_text(header, np.hstack(cols))


def write_curvature_csv(path, cf: CurvatureField):
    _write_text(path, curvature_csv(cf))


def write_json(path, obj):
    _write_text(path, dumps(obj))
