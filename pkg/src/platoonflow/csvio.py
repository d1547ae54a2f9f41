"""Deterministic CSV writers.

Floats are serialized with 9 significant digits and rows carry no
timestamps or environment state, so re-running a deterministic
experiment reproduces files byte for byte. Every writer funnels through
one routine that checks its own schema before touching the disk.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

from .ring import TrajectoryLog

METRICS_HEADER = ("density", "p", "combo", "status", "mean_speed_mps", "mean_nfr",
                  "nff_g_per_km", "co2_g_per_km", "nox_g_per_km", "voc_g_per_km",
                  "pm_g_per_km", "violations")


def format_value(value) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return "%.9g" % value
    return str(value)


def write_csv(path: str | Path, header: Sequence[str], rows: Sequence[Sequence],
              key_cols: Sequence[int] = ()) -> Path:
    """Write rows after validating the schema.

    key_cols names columns that together must be lexicographically
    non-decreasing down the file, catching unsorted emitters early.
    """
    header = tuple(header)
    if len(set(header)) != len(header) or any(not h for h in header):
        raise ValueError(f"malformed header {header}")
    prev_key = None
    lines = [",".join(header)]
    for row in rows:
        if len(row) != len(header):
            raise ValueError(f"row width {len(row)} != header width {len(header)}: {row}")
        if key_cols:
            key = tuple(row[i] for i in key_cols)
            if prev_key is not None and key < prev_key:
                raise ValueError(f"rows not sorted on key columns: {key} after {prev_key}")
            prev_key = key
        lines.append(",".join(format_value(v) for v in row))
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")
    return path


def write_metrics_csv(rows: Sequence[dict], path: str | Path) -> Path:
    table = [[r[k] for k in METRICS_HEADER] for r in rows]
    # rows arrive sorted by (combo, p, density)
    return write_csv(path, METRICS_HEADER, table, key_cols=(2, 1, 0))


def write_trajectory_csv(log: TrajectoryLog, path: str | Path) -> Path:
    rows = []
    for row_i, t in enumerate(log.times):
        for veh in range(log.x.shape[1]):
            rows.append((float(t), veh, float(log.x[row_i, veh]),
                         float(log.v[row_i, veh]), float(log.a[row_i, veh])))
    return write_csv(path, ("t", "vehicle_index", "x", "v", "a"), rows,
                     key_cols=(0, 1))


def write_violations_csv(log: TrajectoryLog, path: str | Path) -> Path:
    rows = [(v.t, v.vehicle, v.gap) for v in log.violations]
    return write_csv(path, ("t", "follower_index", "gap"), rows, key_cols=(0,))


def write_sequence_csv(log: TrajectoryLog, path: str | Path) -> Path:
    platoon_of = {idx: pid for pid, plat in enumerate(log.platoons)
                  for idx in plat.members}
    rows = [(i, str(cls), platoon_of.get(i, -1))
            for i, cls in enumerate(log.labels)]
    return write_csv(path, ("index", "class", "platoon_id"), rows, key_cols=(0,))


def write_strategy_map_csv(log: TrajectoryLog, path: str | Path) -> Path:
    platoon_of = {idx: pid for pid, plat in enumerate(log.platoons)
                  for idx in plat.members}
    rows = []
    for i, (cls, asg) in enumerate(zip(log.labels, log.assignments)):
        rows.append((i, str(cls), platoon_of.get(i, -1), str(asg.strategy),
                     "" if asg.h is None else format_value(asg.h)))
    return write_csv(path, ("vehicle_index", "class", "platoon_id", "strategy",
                            "h_param"), rows, key_cols=(0,))


def write_region_csv(rows: Sequence[tuple[float, float, bool]],
                     strategy: str, path: str | Path) -> Path:
    table = [(strategy, v, margin, stable) for v, margin, stable in rows]
    return write_csv(path, ("strategy", "v_e", "margin", "stable"), table)


def write_curves_csv(rows: Sequence[dict], path: str | Path) -> Path:
    header = ("v_mps", "nfr", "nff_g_per_km", "co2_g_per_km", "nox_g_per_km",
              "voc_g_per_km", "pm_g_per_km")
    table = [[r[k] for k in header] for r in rows]
    return write_csv(path, header, table, key_cols=(0,))
