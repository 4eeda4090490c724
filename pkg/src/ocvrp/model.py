"""Problem and solution data model for the open capacitated VRP.

Locations are kept in canonical order with the depot at index 0; every
solver addresses locations by that position. Vehicles are likewise
addressed by their position in the fleet, while the external ``id`` fields
are carried along for round-tripping.

Routes are *open*: a vehicle leaves the depot and finishes at its last
customer, so there is no closing arc back to index 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Iterable, Mapping, Optional, Sequence

from .errors import ConsistencyError, InvalidIndex
from .matrix import DistanceMatrix

EPS = 1e-9
DEPOT = 0


@dataclass(frozen=True)
class Location:
    id: int
    lat: float
    lon: float
    demand: float = 0.0
    time_window: Optional[tuple[float, float]] = None

    def __post_init__(self) -> None:
        if self.demand < 0:
            raise ValueError(f"location {self.id}: negative demand {self.demand}")
        if self.time_window is not None:
            start, end = self.time_window
            if start > end:
                raise ValueError(f"location {self.id}: time window start after end")
            object.__setattr__(self, "time_window", (float(start), float(end)))


@dataclass(frozen=True)
class Vehicle:
    id: int
    capacity: float
    fixed_cost: Optional[float] = None
    time_window: Optional[tuple[float, float]] = None

    def __post_init__(self) -> None:
        if not self.capacity > 0:
            raise ValueError(f"vehicle {self.id}: capacity must be positive")
        if self.time_window is not None:
            object.__setattr__(self, "time_window", tuple(float(t) for t in self.time_window))


@dataclass(frozen=True, eq=False)
class Instance:
    name: str
    locations: tuple[Location, ...]
    vehicles: tuple[Vehicle, ...]
    matrix: DistanceMatrix

    def __post_init__(self) -> None:
        object.__setattr__(self, "locations", tuple(self.locations))
        object.__setattr__(self, "vehicles", tuple(self.vehicles))
        if len(self.locations) < 2:
            raise ValueError("an instance needs a depot and at least one more location")
        if self.locations[DEPOT].demand != 0:
            raise ValueError("depot (first location) must have zero demand")
        if self.matrix.n != len(self.locations):
            raise ConsistencyError(
                f"matrix order {self.matrix.n} does not match {len(self.locations)} locations"
            )
        if not self.vehicles:
            raise ValueError("fleet is empty")

    @property
    def n(self) -> int:
        return len(self.locations)

    @property
    def customers(self) -> range:
        return range(1, self.n)

    @cached_property
    def demands(self) -> list[float]:
        return [loc.demand for loc in self.locations]

    @cached_property
    def capacities(self) -> list[float]:
        return [v.capacity for v in self.vehicles]

    @property
    def total_demand(self) -> float:
        return sum(self.demands)

    @property
    def total_capacity(self) -> float:
        return sum(self.capacities)

    @property
    def capacity_sufficient(self) -> bool:
        return self.total_capacity + EPS >= self.total_demand

    def d(self, i: int, j: int) -> float:
        return self.matrix.rows[i][j]


@dataclass(frozen=True)
class Route:
    vehicle_id: int
    stops: tuple[int, ...]
    load: float
    distance: float


@dataclass(frozen=True)
class Solution:
    routes: tuple[Route, ...]
    total_distance: float
    meta: Mapping[str, Any] = field(default_factory=dict)

    @property
    def route_count(self) -> int:
        return len(self.routes)

    def arcs(self) -> Iterable[tuple[int, int]]:
        """Every traversed arc, depot legs included, no return arcs."""
        for route in self.routes:
            prev = DEPOT
            for stop in route.stops:
                yield prev, stop
                prev = stop

    def with_meta(self, **updates: Any) -> "Solution":
        return Solution(self.routes, self.total_distance, {**self.meta, **updates})


def route_distance(instance: Instance, stops: Sequence[int]) -> float:
    """Length of the open path depot -> stops[0] -> ... -> stops[-1]."""
    if len(stops) == 0:
        raise ValueError("route has no stops")
    n = instance.n
    rows = instance.matrix.rows
    total = 0.0
    prev = DEPOT
    for s in stops:
        if not 1 <= s < n:
            raise InvalidIndex(f"stop index {s} outside 1..{n - 1}")
        total += rows[prev][s]
        prev = s
    return total


def make_route(instance: Instance, vehicle_id: int, stops: Sequence[int]) -> Route:
    stops = tuple(int(s) for s in stops)
    load = sum(instance.demands[s] for s in stops)
    return Route(vehicle_id, stops, load, route_distance(instance, stops))


def make_solution(
    instance: Instance, routes: Mapping[int, Sequence[int]] | Sequence[Sequence[int]], **meta: Any
) -> Solution:
    """Build a Solution from per-vehicle stop lists, dropping empty routes.

    ``routes`` is either a mapping vehicle index -> stops or a sequence where
    position i holds the stops of vehicle i.
    """
    items = routes.items() if isinstance(routes, Mapping) else enumerate(routes)
    built = tuple(make_route(instance, v, stops) for v, stops in items if len(stops) > 0)
    return Solution(built, sum(r.distance for r in built), dict(meta))


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def _close(a: float, b: float, rel: float = 1e-9) -> bool:
    return abs(a - b) <= rel * max(1.0, abs(a), abs(b))


def validate_solution(
    instance: Instance, solution: Solution, *, strict_utilization: bool = False
) -> ValidationReport:
    """Check every route and solution invariant; problems are returned, not raised.

    Fleet utilization below 100% is reported as a warning unless
    ``strict_utilization`` is set, in which case it becomes a violation.
    """
    report = ValidationReport()
    bad = report.violations.append
    n = instance.n
    seen: dict[int, int] = {}
    used_vehicles: set[int] = set()
    recomputed_total = 0.0

    for r_idx, route in enumerate(solution.routes):
        tag = f"route {r_idx} (vehicle {route.vehicle_id})"
        if not 0 <= route.vehicle_id < len(instance.vehicles):
            bad(f"{tag}: unknown vehicle {route.vehicle_id}")
            continue
        if route.vehicle_id in used_vehicles:
            bad(f"{tag}: vehicle {route.vehicle_id} used by more than one route")
        used_vehicles.add(route.vehicle_id)
        if not route.stops:
            bad(f"{tag}: empty route")
            continue
        in_range = True
        for s in route.stops:
            if s == DEPOT:
                bad(f"{tag}: depot listed as a stop")
                in_range = False
            elif not 0 < s < n:
                bad(f"{tag}: stop {s} out of range")
                in_range = False
            elif s in seen:
                bad(f"{tag}: customer {s} visited more than once")
            seen.setdefault(s, r_idx)
        if not in_range:
            continue
        load = sum(instance.demands[s] for s in route.stops)
        if not _close(load, route.load):
            bad(f"{tag}: stored load {route.load} differs from recomputed {load}")
        capacity = instance.vehicles[route.vehicle_id].capacity
        if load > capacity + EPS:
            bad(f"{tag}: capacity exceeded ({load:g} > {capacity:g})")
        dist = route_distance(instance, route.stops)
        if not _close(dist, route.distance):
            bad(f"{tag}: stored distance {route.distance!r} differs from recomputed {dist!r}")
        recomputed_total += dist

    for c in instance.customers:
        if c not in seen:
            bad(f"customer {c} unserved")
    if not _close(recomputed_total, solution.total_distance):
        bad(
            f"total distance {solution.total_distance!r} differs from "
            f"recomputed {recomputed_total!r}"
        )

    if report.ok:
        fleet = utilization(instance, solution).fleet
        if fleet < 1.0 - EPS:
            msg = f"fleet utilization {fleet:.1%} below 100%"
            (report.violations if strict_utilization else report.warnings).append(msg)
    return report


@dataclass(frozen=True)
class Utilization:
    per_route: tuple[float, ...]
    fleet: float


def utilization(instance: Instance, solution: Solution) -> Utilization:
    """Load/capacity per route and summed over the whole fleet.

    Unused vehicles count towards the fleet capacity with zero load.
    """
    caps = instance.capacities
    per_route = tuple(r.load / caps[r.vehicle_id] for r in solution.routes)
    fleet = sum(r.load for r in solution.routes) / sum(caps)
    return Utilization(per_route, fleet)
