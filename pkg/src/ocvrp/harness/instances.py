"""Instance JSON I/O and the synthetic instance generator.

Instance files look like::

    {"name": "cairo_50",
     "locations": [{"id": 0, "lat": 30.05, "lon": 31.3, "demand": 0.0}, ...],
     "vehicles": [{"id": 0, "capacity": 10.0, "fixed_cost": 25.0}, ...],
     "matrix_file": "cairo_50.dmx"}

The first location is the depot. ``time_window`` is optional on locations
and vehicles, ``fixed_cost`` on vehicles, ``matrix_file`` (resolved relative
to the JSON file) at the top level; without it a haversine matrix is built.
"""

from __future__ import annotations

import json
import logging
import math
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

from ..errors import ConsistencyError, CorruptMatrix, FormatError, IoError
from ..matrix import build_matrix, load_matrix, save_matrix
from ..model import Instance, Location, Vehicle

log = logging.getLogger(__name__)

DECIMALS = 6
KM_PER_DEG_LAT = 111.32
DEFAULT_BBOX = (29.90, 31.10, 30.20, 31.50)  # lat1, lon1, lat2, lon2


def canonical(obj: Any) -> Any:
    """Round floats to a fixed precision so dumps are byte-stable."""
    if isinstance(obj, float):
        r = round(obj, DECIMALS)
        return 0.0 if r == 0 else r
    if isinstance(obj, dict):
        return {k: canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [canonical(v) for v in obj]
    return obj


def dumps(obj: Any) -> str:
    return json.dumps(canonical(obj), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def write_text(path: str | Path, text: str) -> None:
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def _window(raw: Any, where: str) -> Optional[tuple[float, float]]:
    if raw is None:
        return None
    if not isinstance(raw, (list, tuple)) or len(raw) != 2:
        raise FormatError(f"{where}: time_window must be a [start, end] pair")
    return float(raw[0]), float(raw[1])


def _number(entry: dict, key: str, where: str, default: Any = ...) -> float:
    if key not in entry:
        if default is ...:
            raise FormatError(f"{where}: missing field {key!r}")
        return default
    value = entry[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise FormatError(f"{where}: field {key!r} must be a number")
    return value


def instance_from_dict(data: Any, base_dir: Path | None = None, matrix_mode: str = "haversine") -> Instance:
    if not isinstance(data, dict):
        raise FormatError("instance JSON must be an object")
    for key in ("locations", "vehicles"):
        if not isinstance(data.get(key), list):
            raise FormatError(f"instance JSON needs a {key!r} list")
    try:
        locations = []
        for pos, raw in enumerate(data["locations"]):
            where = f"locations[{pos}]"
            if not isinstance(raw, dict):
                raise FormatError(f"{where} must be an object")
            locations.append(
                Location(
                    id=int(_number(raw, "id", where, pos)),
                    lat=float(_number(raw, "lat", where)),
                    lon=float(_number(raw, "lon", where)),
                    demand=float(_number(raw, "demand", where, 0.0)),
                    time_window=_window(raw.get("time_window"), where),
                )
            )
        vehicles = []
        for pos, raw in enumerate(data["vehicles"]):
            where = f"vehicles[{pos}]"
            if not isinstance(raw, dict):
                raise FormatError(f"{where} must be an object")
            fixed = raw.get("fixed_cost")
            vehicles.append(
                Vehicle(
                    id=int(_number(raw, "id", where, pos)),
                    capacity=float(_number(raw, "capacity", where)),
                    fixed_cost=None if fixed is None else float(fixed),
                    time_window=_window(raw.get("time_window"), where),
                )
            )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(f"invalid instance data: {exc}") from exc
    if len(locations) < 2:
        raise FormatError("instance needs a depot and at least one customer")
    if not vehicles:
        raise FormatError("instance needs at least one vehicle")

    if data.get("matrix_file"):
        mpath = Path(data["matrix_file"])
        if not mpath.is_absolute() and base_dir is not None:
            mpath = base_dir / mpath
        try:
            matrix = load_matrix(mpath)
        except OSError as exc:
            raise FormatError(f"cannot read matrix file {mpath}: {exc}") from exc
        if matrix.n != len(locations):
            raise ConsistencyError(
                f"matrix {mpath} has order {matrix.n}, instance has {len(locations)} locations"
            )
    else:
        matrix = build_matrix(locations, matrix_mode)

    try:
        instance = Instance(str(data.get("name", "")), tuple(locations), tuple(vehicles), matrix)
    except ConsistencyError:
        raise
    except ValueError as exc:
        raise FormatError(str(exc)) from exc
    if not instance.capacity_sufficient:
        log.warning(
            "instance %s is infeasible: demand %g exceeds fleet capacity %g",
            instance.name, instance.total_demand, instance.total_capacity,
        )
    return instance


def load_instance(path: str | Path, matrix_mode: str = "haversine") -> Instance:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON ({exc})") from exc
    except UnicodeDecodeError as exc:
        raise FormatError(f"{path}: not UTF-8 ({exc})") from exc
    return instance_from_dict(data, base_dir=path.parent, matrix_mode=matrix_mode)


def instance_to_dict(instance: Instance, matrix_file: str | None = None) -> dict:
    def loc(l: Location) -> dict:
        out = {"id": l.id, "lat": l.lat, "lon": l.lon, "demand": l.demand}
        if l.time_window is not None:
            out["time_window"] = list(l.time_window)
        return out

    def veh(v: Vehicle) -> dict:
        out: dict = {"id": v.id, "capacity": v.capacity}
        if v.fixed_cost is not None:
            out["fixed_cost"] = v.fixed_cost
        if v.time_window is not None:
            out["time_window"] = list(v.time_window)
        return out

    data = {
        "name": instance.name,
        "locations": [loc(l) for l in instance.locations],
        "vehicles": [veh(v) for v in instance.vehicles],
    }
    if matrix_file is not None:
        data["matrix_file"] = matrix_file
    return data


def save_instance(instance: Instance, path: str | Path, matrix_path: str | Path | None = None) -> None:
    """Write instance JSON; with ``matrix_path`` the matrix goes to an OCVRP-DMX file too."""
    path = Path(path)
    ref = None
    if matrix_path is not None:
        matrix_path = Path(matrix_path)
        save_matrix(instance.matrix, matrix_path)
        try:
            ref = str(matrix_path.resolve().relative_to(path.resolve().parent))
        except ValueError:
            ref = str(matrix_path.resolve())
    write_text(path, dumps(instance_to_dict(instance, ref)))


@dataclass(frozen=True)
class GeneratorSpec:
    n: int
    vehicles: int
    capacity: float
    clusters: int = 0  # 0 means uniform layout
    spread_km: float = 2.0
    bbox: tuple[float, float, float, float] = DEFAULT_BBOX
    seed: int = 0
    name: Optional[str] = None

    def __post_init__(self) -> None:
        if self.n < 1 or self.vehicles < 1:
            raise ValueError("need at least one customer and one vehicle")
        if self.vehicles * self.capacity < self.n:
            raise ValueError(
                f"{self.vehicles} vehicles x capacity {self.capacity} cannot serve {self.n} unit demands"
            )
        if self.clusters < 0 or self.spread_km < 0:
            raise ValueError("clusters and spread must be non-negative")

    @property
    def layout(self) -> str:
        return "clustered" if self.clusters else "uniform"


def generate_instance(spec: GeneratorSpec) -> Instance:
    """Random unit-demand instance with the depot at the centre of the box."""
    rng = random.Random(spec.seed)
    lat1, lon1, lat2, lon2 = spec.bbox
    lo_lat, hi_lat = sorted((lat1, lat2))
    lo_lon, hi_lon = sorted((lon1, lon2))
    r = lambda x: round(x, DECIMALS)  # noqa: E731

    def uniform_point() -> tuple[float, float]:
        return rng.uniform(lo_lat, hi_lat), rng.uniform(lo_lon, hi_lon)

    depot = Location(0, r((lo_lat + hi_lat) / 2), r((lo_lon + hi_lon) / 2), 0.0)
    points = []
    if spec.clusters:
        centres = [uniform_point() for _ in range(spec.clusters)]
        for i in range(spec.n):
            clat, clon = centres[i % spec.clusters]
            sd_lat = spec.spread_km / KM_PER_DEG_LAT
            sd_lon = spec.spread_km / (KM_PER_DEG_LAT * math.cos(math.radians(clat)))
            lat = min(max(rng.gauss(clat, sd_lat), lo_lat), hi_lat)
            lon = min(max(rng.gauss(clon, sd_lon), lo_lon), hi_lon)
            points.append((lat, lon))
    else:
        points = [uniform_point() for _ in range(spec.n)]

    locations = [depot] + [Location(i + 1, r(lat), r(lon), 1.0) for i, (lat, lon) in enumerate(points)]
    vehicles = [Vehicle(v, float(spec.capacity)) for v in range(spec.vehicles)]
    name = spec.name or f"synthetic_{spec.layout}_{spec.n}_{spec.vehicles}_s{spec.seed}"
    return Instance(name, tuple(locations), tuple(vehicles), build_matrix(locations))
