"""CSV/JSON writers and readers.

Floats are written with ``repr`` (shortest round-trip decimal), so a
trajectory read back is bit-identical to the one written.  Infinite values
are written as the token "inf" in JSON.
"""
from __future__ import annotations

import csv
import json
import math
from enum import Enum
from pathlib import Path

import numpy as np

from .exponents import Params
from .ode_core import EquationKind, Frame, Trajectory, TrajectoryMeta


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def jsonable(obj):
    """Recursively convert to JSON-safe values ("inf" for infinities)."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return "nan"
        return x
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    return obj


def dumps(obj) -> str:
    return json.dumps(jsonable(obj), indent=2, sort_keys=True) + "\n"


def sidecar_path(csv_path) -> Path:
    return Path(csv_path).with_suffix(".json")


def write_trajectory(traj: Trajectory, csv_path) -> tuple[Path, Path]:
    csv_path = Path(csv_path)
    with csv_path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["coord", "value", "slope"])
        for c, v, s in zip(traj.coord.tolist(), traj.value.tolist(), traj.slope.tolist()):
            w.writerow([fmt(c), fmt(v), fmt(s)])
    meta_path = sidecar_path(csv_path)
    meta_path.write_text(dumps(traj.meta.as_dict()))
    return csv_path, meta_path


def read_trajectory(csv_path) -> Trajectory:
    csv_path = Path(csv_path)
    meta = json.loads(sidecar_path(csv_path).read_text())
    with csv_path.open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    arr = {k: np.array([float(r[k]) for r in rows]) for k in ("coord", "value", "slope")}
    prm = Params(float(meta["params"]["n"]), float(meta["params"]["p"]))
    tm = TrajectoryMeta(EquationKind(meta["kind"]), Frame(meta["frame"]), prm,
                        meta.get("options", {}), meta.get("termination", "span_end"),
                        meta.get("event_coord"))
    return Trajectory(arr["coord"], arr["value"], arr["slope"], tm)


def write_ledger(ledger, csv_path) -> Path:
    csv_path = Path(csv_path)
    with csv_path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["r", "c", "I", "residual"])
        for row in zip(ledger.r.tolist(), ledger.c.tolist(), ledger.I.tolist(),
                       ledger.residuals.tolist()):
            w.writerow([fmt(x) for x in row])
    return csv_path


def write_sweep(result, csv_path) -> Path:
    csv_path = Path(csv_path)
    with csv_path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["a", "tag", "radius", "terminal_value", "ell", "ell_converged"])
        for a, shot in zip(result.grid, result.shots):
            est = shot.ell_estimate
            w.writerow([fmt(a), shot.tag.value, fmt(shot.radius),
                        fmt(shot.terminal.value if shot.terminal else None),
                        fmt(est.value if est else None),
                        fmt(est.converged if est else None)])
    return csv_path


def gnuplot_script(csv_path, xlabel="r", ylabel="value", logx=True) -> str:
    name = Path(csv_path).name
    lines = ["set datafile separator ','", f"set xlabel '{xlabel}'", f"set ylabel '{ylabel}'"]
    if logx:
        lines.append("set logscale x")
    lines.append(f"plot '{name}' every ::1 using 1:2 with lines title '{Path(csv_path).stem}'")
    return "\n".join(lines) + "\n"
