"""CSV/JSON result files.

Column order and number formatting are fixed so reports can be compared
byte for byte.
"""
from __future__ import annotations

import csv
import json
import os
from typing import Iterable, Optional, Sequence

from .network import Network
from .scenario import plan_to_dict
from .sndet import ObjectivePoint

FRONTIER_COLUMNS = ["plan_id", "z1", "z2", "z2_minus_z1"]
ASSIGNMENT_COLUMNS = [
    "plan_id", "s", "t", "F", "mode", "path_stations", "t_path", "c_path", "C_rail", "f_rail", "P_rail",
]


def fmt(x: Optional[float]) -> str:
    if x is None:
        return ""
    return f"{x:.6f}"


def frontier_rows(points: Sequence[ObjectivePoint]) -> list[list[str]]:
    return [[p.plan_id, fmt(p.z1), fmt(p.z2), fmt(p.profit)] for p in points]


def assignment_rows(points: Sequence[ObjectivePoint]) -> list[list[str]]:
    rows = []
    for p in points:
        for dec in p.lm.decisions:
            path = dec.rail_path if dec.rail_path is not None else dec.highway_path
            mode = dec.mode
            if dec.rail_path is None and mode != "split":
                mode = "highway"
            rows.append(
                [
                    p.plan_id,
                    dec.demand.origin,
                    dec.demand.destination,
                    fmt(dec.demand.volume),
                    mode,
                    ">".join(path.stations) if path else "",
                    fmt(path.travel_time) if path else "",
                    fmt(path.unit_cost) if path else "",
                    fmt(dec.rail_unit_cost),
                    fmt(dec.rail_volume),
                    fmt(dec.rail_probability),
                ]
            )
    return rows


def _write_csv(path: str, header: list[str], rows: Iterable[list[str]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def select_point(points: Sequence[ObjectivePoint]) -> Optional[ObjectivePoint]:
    """Representative point for plan.json: the largest z2 - z1, cheapest on ties."""
    if not points:
        return None
    return max(points, key=lambda p: (round(p.profit, 6), -p.z1, p.plan_id))


def write_report(
    points: Sequence[ObjectivePoint],
    out_dir: str,
    network: Network | None = None,
    figures: bool = True,
) -> list[str]:
    """Write frontier.csv, assignment.csv, plan.json (and figures); returns written paths."""
    os.makedirs(out_dir, exist_ok=True)
    points = list(points)
    written = []
    path = os.path.join(out_dir, "frontier.csv")
    _write_csv(path, FRONTIER_COLUMNS, frontier_rows(points))
    written.append(path)
    path = os.path.join(out_dir, "assignment.csv")
    _write_csv(path, ASSIGNMENT_COLUMNS, assignment_rows(points))
    written.append(path)

    chosen = select_point(points)
    if chosen is not None:
        path = os.path.join(out_dir, "plan.json")
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(plan_to_dict(chosen.plan), fh, indent=2)
            fh.write("\n")
        written.append(path)

    if figures and points:
        from .plotting import plot_frontier, plot_mode_split

        written.append(plot_frontier(points, os.path.join(out_dir, "frontier.png"), highlight=chosen))
        written.append(plot_mode_split(chosen, os.path.join(out_dir, "mode_split.png")))
    return written
