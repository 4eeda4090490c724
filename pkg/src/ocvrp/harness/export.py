"""Solution JSON, GeoJSON, convergence CSV and the comparison table."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Iterable, Optional, Sequence

from ..errors import FormatError
from ..model import Instance, Route, Solution
from .experiment import RunReport
from .instances import dumps, write_text

TRACE_HEADER = ("iteration", "iteration_best_km", "global_best_km")


def solution_to_dict(solution: Solution, instance_name: Optional[str] = None) -> dict:
    meta = solution.meta
    return {
        "instance": instance_name if instance_name is not None else meta.get("instance", ""),
        "solver": meta.get("solver", ""),
        "params": meta.get("params", {}),
        "seed": meta.get("seed"),
        "routes": [
            {"vehicle": r.vehicle_id, "stops": list(r.stops), "load": r.load, "distance_km": r.distance}
            for r in solution.routes
        ],
        "total_distance_km": solution.total_distance,
        "wall_time_s": meta.get("wall_time"),
    }


def solution_from_dict(data: dict) -> Solution:
    try:
        routes = tuple(
            Route(int(r["vehicle"]), tuple(int(s) for s in r["stops"]), float(r["load"]), float(r["distance_km"]))
            for r in data["routes"]
        )
        meta = {
            "instance": data.get("instance", ""),
            "solver": data.get("solver", ""),
            "params": data.get("params", {}),
            "seed": data.get("seed"),
            "wall_time": data.get("wall_time_s"),
        }
        return Solution(routes, float(data["total_distance_km"]), meta)
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"invalid solution JSON: {exc}") from exc


def export_solution(solution: Solution, path: str | Path, instance_name: Optional[str] = None) -> None:
    write_text(path, dumps(solution_to_dict(solution, instance_name)))


def load_solution(path: str | Path) -> Solution:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON ({exc})") from exc
    return solution_from_dict(data)


def solution_geojson(instance: Instance, solution: Solution) -> dict:
    """One open LineString per route (depot first, last customer last) plus stop Points."""
    locs = instance.locations

    def coord(i: int) -> list[float]:
        return [locs[i].lon, locs[i].lat]

    features = [
        {
            "type": "Feature",
            "properties": {"role": "depot", "index": 0, "id": locs[0].id},
            "geometry": {"type": "Point", "coordinates": coord(0)},
        }
    ]
    for r_idx, route in enumerate(solution.routes):
        features.append(
            {
                "type": "Feature",
                "properties": {
                    "role": "route",
                    "route": r_idx,
                    "vehicle": route.vehicle_id,
                    "load": route.load,
                    "distance_km": route.distance,
                },
                "geometry": {"type": "LineString", "coordinates": [coord(0)] + [coord(s) for s in route.stops]},
            }
        )
        for seq, s in enumerate(route.stops):
            features.append(
                {
                    "type": "Feature",
                    "properties": {
                        "role": "stop",
                        "index": s,
                        "id": locs[s].id,
                        "route": r_idx,
                        "sequence": seq + 1,
                        "demand": locs[s].demand,
                    },
                    "geometry": {"type": "Point", "coordinates": coord(s)},
                }
            )
    return {
        "type": "FeatureCollection",
        "properties": {"instance": instance.name, "total_distance_km": solution.total_distance},
        "features": features,
    }


def export_geojson(instance: Instance, solution: Solution, path: str | Path) -> None:
    write_text(path, dumps(solution_geojson(instance, solution)))


def trace_csv(rows: Iterable[Sequence[float]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TRACE_HEADER)
    for it, it_best, g_best in rows:
        writer.writerow([int(it), repr(float(it_best)), repr(float(g_best))])
    return buf.getvalue()


def export_trace(rows: Iterable[Sequence[float]], path: str | Path) -> None:
    write_text(path, trace_csv(rows))


def _cell(mean: float, std: float, n: int) -> str:
    if n == 1:
        return f"{mean:.1f}"
    return f"{mean:.1f} ± {std:.1f}"


def format_table(reports: Sequence[RunReport]) -> str:
    """Plain-text comparison grid: one block per instance size, one column per solver."""
    labels: list[str] = []
    for rep in reports:
        if rep.label not in labels:
            labels.append(rep.label)
    by_case: dict[int, dict[str, RunReport]] = {}
    for rep in reports:
        by_case.setdefault(rep.customers, {})[rep.label] = rep

    header = ["Case (n)", "Metric"] + labels
    body: list[list[str]] = []
    for n in sorted(by_case):
        cols = by_case[n]
        dist = [_cell(*cols[l].distance, cols[l].runs) if l in cols else "-" for l in labels]
        secs = [_cell(*cols[l].wall_time, cols[l].runs) if l in cols else "-" for l in labels]
        body.append([str(n), "Dist. (km)"] + dist)
        body.append(["", "Time (s)"] + secs)

    widths = [max(len(row[i]) for row in [header] + body) for i in range(len(header))]

    def line(row: list[str]) -> str:
        cells = [row[0].ljust(widths[0]), row[1].ljust(widths[1])]
        cells += [c.rjust(w) for c, w in zip(row[2:], widths[2:])]
        return "  ".join(cells).rstrip()

    rule = "-" * len(line(header))
    out = [line(header), rule]
    for idx, row in enumerate(body):
        out.append(line(row))
        if idx % 2 == 1 and idx + 1 < len(body):
            out.append(rule)
    return "\n".join(out) + "\n"
