"""Construction heuristics + guided local search, built natively.

This mirrors the usual routing-toolkit pipeline: build a first solution
with one of the classic constructors, then refine it with guided local
search (GLS) until a wall-clock limit or a move budget runs out. Routes are
open throughout: no constructor or move ever pays for a return to the depot.
"""

from __future__ import annotations

import enum
import time
from dataclasses import asdict, dataclass
from typing import Callable, Optional, Sequence

from .errors import Infeasible
from .localsearch import best_two_opt_move
from .model import DEPOT, EPS, Instance, Solution, make_solution

IMPROVEMENT_TOL = 1e-9


class FirstSolutionStrategy(enum.Enum):
    PATH_CHEAPEST_ARC = "pca"
    PARALLEL_CHEAPEST_INSERTION = "pci"
    SAVINGS = "savings"
    AUTOMATIC = "auto"


@dataclass(frozen=True)
class BaselineParams:
    strategy: FirstSolutionStrategy = FirstSolutionStrategy.AUTOMATIC
    time_limit: Optional[float] = 5.0
    budget_moves: Optional[int] = None  # set for deterministic runs; overrides time_limit
    lambda_factor: float = 0.1
    seed: int = 0

    def __post_init__(self) -> None:
        if isinstance(self.strategy, str):
            object.__setattr__(self, "strategy", FirstSolutionStrategy(self.strategy))
        if self.budget_moves is None:
            if self.time_limit is None or not self.time_limit > 0:
                raise ValueError("time_limit must be positive when no move budget is given")
        elif self.budget_moves < 0:
            raise ValueError("budget_moves must be non-negative")
        if not self.lambda_factor > 0:
            raise ValueError("lambda_factor must be positive")

    def to_dict(self) -> dict:
        out = asdict(self)
        out["strategy"] = self.strategy.value
        return out


def _unpackable(instance: Instance) -> None:
    if not instance.capacity_sufficient:
        raise Infeasible(
            f"total demand {instance.total_demand:g} exceeds fleet capacity {instance.total_capacity:g}"
        )


def path_cheapest_arc(instance: Instance) -> Solution:
    """Fill vehicles one at a time, always driving to the nearest customer that fits."""
    _unpackable(instance)
    rows = instance.matrix.rows
    dem = instance.demands
    unvisited = list(instance.customers)
    routes: list[list[int]] = []
    for cap in instance.capacities:
        if not unvisited:
            break
        route: list[int] = []
        cur, room = DEPOT, cap
        while True:
            best, best_d = None, 0.0
            row = rows[cur]
            for j in unvisited:
                if dem[j] <= room + EPS and (best is None or row[j] < best_d):
                    best, best_d = j, row[j]
            if best is None:
                break
            route.append(best)
            unvisited.remove(best)
            room -= dem[best]
            cur = best
        routes.append(route)
    if unvisited:
        raise Infeasible(f"path cheapest arc left customers {unvisited} unrouted")
    return make_solution(instance, routes, solver="pca")


def _insertion_cost(rows, route: Sequence[int], pos: int, j: int) -> float:
    u = route[pos - 1] if pos > 0 else DEPOT
    if pos == len(route):
        return rows[u][j]
    v = route[pos]
    return rows[u][j] + rows[j][v] - rows[u][v]


def parallel_cheapest_insertion(instance: Instance) -> Solution:
    """Grow all routes at once, each step inserting the globally cheapest (customer, slot).

    Ties go to the lower customer index, then vehicle, then position.
    """
    _unpackable(instance)
    rows = instance.matrix.rows
    dem = instance.demands
    caps = instance.capacities
    routes: list[list[int]] = [[] for _ in caps]
    loads = [0.0] * len(caps)
    pending = list(instance.customers)
    while pending:
        best = None
        for j in pending:
            opened_empty: set[float] = set()
            for v, route in enumerate(routes):
                if loads[v] + dem[j] > caps[v] + EPS:
                    continue
                if not route:
                    # empty vehicles of equal capacity are interchangeable
                    if caps[v] in opened_empty:
                        continue
                    opened_empty.add(caps[v])
                for pos in range(len(route) + 1):
                    key = (_insertion_cost(rows, route, pos, j), j, v, pos)
                    if best is None or key < best:
                        best = key
        if best is None:
            raise Infeasible(f"no vehicle has room for any of customers {pending}")
        _, j, v, pos = best
        routes[v].insert(pos, j)
        loads[v] += dem[j]
        pending.remove(j)
    return make_solution(instance, routes, solver="pci")


def _assign_vehicles(instance: Instance, routes: list[list[int]]) -> list[list[int]]:
    """Match routes to vehicles, heaviest route to largest vehicle.

    Surplus routes are dissolved (lightest first), routes too heavy for
    their vehicle shed tail customers, and every displaced customer is
    cheapest-inserted into a route that still has room.
    """
    rows = instance.matrix.rows
    dem = instance.demands
    caps = instance.capacities
    order = sorted(range(len(caps)), key=lambda v: (-caps[v], v))
    routes = sorted(routes, key=lambda r: (-sum(dem[s] for s in r), r))
    kept, surplus = routes[: len(caps)], routes[len(caps):]
    assigned: list[list[int]] = [[] for _ in caps]
    for v, route in zip(order, kept):
        assigned[v] = list(route)
    pool = [s for r in surplus for s in r]
    loads = [sum(dem[s] for s in r) for r in assigned]
    for v in range(len(caps)):
        # an overfull route sheds its tail; dropping the last stop needs no reconnection
        while loads[v] > caps[v] + EPS:
            c = assigned[v].pop()
            loads[v] -= dem[c]
            pool.append(c)
    for j in sorted(pool):
        best = None
        for v, route in enumerate(assigned):
            if loads[v] + dem[j] > caps[v] + EPS:
                continue
            for pos in range(len(route) + 1):
                key = (_insertion_cost(rows, route, pos, j), v, pos)
                if best is None or key < best:
                    best = key
        if best is None:
            raise Infeasible(
                f"savings produced {len(routes)} routes for {len(caps)} vehicles "
                f"and customer {j} cannot be re-inserted"
            )
        _, v, pos = best
        assigned[v].insert(pos, j)
        loads[v] += dem[j]
    return assigned


def savings_open(instance: Instance) -> Solution:
    """Clarke & Wright with the open-route saving s(i, j) = d(0, j) - d(i, j).

    A merge appends the route starting at j to the route ending at i.
    Merges are capacity-checked against the largest vehicle; routes are
    matched to concrete vehicles afterwards.
    """
    _unpackable(instance)
    rows = instance.matrix.rows
    dem = instance.demands
    cap = max(instance.capacities)
    customers = list(instance.customers)
    for c in customers:
        if dem[c] > cap + EPS:
            raise Infeasible(f"customer {c} does not fit in any vehicle")

    savings = []
    for i in customers:
        for j in customers:
            if i != j:
                s = rows[DEPOT][j] - rows[i][j]
                if s > 0:
                    savings.append((-s, i, j))
    savings.sort()

    route_of = {c: [c] for c in customers}  # customer -> its route list (shared object)
    load = {id(r): dem[r[0]] for r in route_of.values()}
    for _, i, j in savings:
        ri, rj = route_of[i], route_of[j]
        if ri is rj or ri[-1] != i or rj[0] != j:
            continue
        if load[id(ri)] + load[id(rj)] > cap + EPS:
            continue
        load[id(ri)] += load.pop(id(rj))
        ri.extend(rj)
        for c in rj:
            route_of[c] = ri

    unique = {id(r): r for r in route_of.values()}
    routes = sorted(unique.values(), key=lambda r: r[0])
    return make_solution(instance, _assign_vehicles(instance, routes), solver="savings")


CONSTRUCTORS: dict[FirstSolutionStrategy, Callable[[Instance], Solution]] = {
    FirstSolutionStrategy.PATH_CHEAPEST_ARC: path_cheapest_arc,
    FirstSolutionStrategy.PARALLEL_CHEAPEST_INSERTION: parallel_cheapest_insertion,
    FirstSolutionStrategy.SAVINGS: savings_open,
}


def _best_construction(instance: Instance) -> tuple[FirstSolutionStrategy, Solution]:
    best: Optional[tuple[FirstSolutionStrategy, Solution]] = None
    errors = []
    for strategy, build in CONSTRUCTORS.items():
        try:
            sol = build(instance)
        except Infeasible as exc:
            errors.append(f"{strategy.name}: {exc}")
            continue
        if best is None or sol.total_distance < best[1].total_distance:
            best = (strategy, sol)
    if best is None:
        raise Infeasible("every constructor failed: " + "; ".join(errors))
    return best


def automatic_select(instance: Instance) -> FirstSolutionStrategy:
    """Strategy whose first solution is shortest; ties keep enum order."""
    return _best_construction(instance)[0]


def construct(instance: Instance, strategy: FirstSolutionStrategy) -> Solution:
    if strategy is FirstSolutionStrategy.AUTOMATIC:
        return _best_construction(instance)[1]
    return CONSTRUCTORS[strategy](instance)


class GuidedLocalSearch:
    """GLS over 2-opt, inter-route relocate and inter-route swap.

    The descent minimises the augmented cost ``f + lam * sum(p_e)``; at each
    local optimum the used arcs with the largest utility ``d_e / (1 + p_e)``
    get their penalty bumped. The best solution by true cost is kept.
    """

    def __init__(
        self,
        instance: Instance,
        params: BaselineParams,
        trace_sink: Optional[Callable[[tuple[int, float, float]], None]] = None,
        clock: Callable[[], float] = time.perf_counter,
    ):
        self.instance = instance
        self.params = params
        self.trace_sink = trace_sink
        self.clock = clock
        m = instance.matrix
        self.dist = m.rows
        self.symmetric = m.symmetric
        self.aug = [list(r) for r in m.rows]
        self.penalties: dict[tuple[int, int], int] = {}
        self.lam = 0.0
        self.steps = 0
        self.rounds = 0
        self._deadline = 0.0

    # -- stopping ----------------------------------------------------------

    def _exhausted(self) -> bool:
        if self.params.budget_moves is not None:
            return self.steps >= self.params.budget_moves
        return self.clock() >= self._deadline

    # -- cost helpers ------------------------------------------------------

    def _path_cost(self, rows, route: Sequence[int]) -> float:
        total, prev = 0.0, DEPOT
        for s in route:
            total += rows[prev][s]
            prev = s
        return total

    def true_cost(self, routes: Sequence[Sequence[int]]) -> float:
        return sum(self._path_cost(self.dist, r) for r in routes)

    # -- neighbourhoods ----------------------------------------------------

    def _best_move(self, routes, loads):
        G = self.aug
        dem = self.instance.demands
        caps = self.instance.capacities
        best_delta = -IMPROVEMENT_TOL
        best = None

        for v, route in enumerate(routes):
            mv = best_two_opt_move(G, route, self.symmetric)
            if mv is not None and mv.delta < best_delta:
                best_delta, best = mv.delta, ("2opt", v, mv)

        # relocate c from route a to route b
        for a, ra in enumerate(routes):
            la = len(ra)
            for p, c in enumerate(ra):
                prev = ra[p - 1] if p > 0 else DEPOT
                removal = -G[prev][c]
                if p + 1 < la:
                    nxt = ra[p + 1]
                    removal += G[prev][nxt] - G[c][nxt]
                dc = dem[c]
                row_c = G[c]
                seen_empty: set[float] = set()
                for b, rb in enumerate(routes):
                    if b == a or loads[b] + dc > caps[b] + EPS:
                        continue
                    if not rb:
                        if caps[b] in seen_empty:
                            continue
                        seen_empty.add(caps[b])
                    u = DEPOT
                    for q in range(len(rb) + 1):
                        if q < len(rb):
                            w = rb[q]
                            add = G[u][c] + row_c[w] - G[u][w]
                        else:
                            add = G[u][c]
                        delta = removal + add
                        if delta < best_delta:
                            best_delta, best = delta, ("relocate", a, p, b, q)
                        if q < len(rb):
                            u = rb[q]

        # swap x in route a with y in route b
        def replace_cost(route, p, old, new):
            prev = route[p - 1] if p > 0 else DEPOT
            d = G[prev][new] - G[prev][old]
            if p + 1 < len(route):
                nxt = route[p + 1]
                d += G[new][nxt] - G[old][nxt]
            return d

        for a in range(len(routes)):
            ra = routes[a]
            if not ra:
                continue
            for b in range(a + 1, len(routes)):
                rb = routes[b]
                if not rb:
                    continue
                for p, x in enumerate(ra):
                    for q, y in enumerate(rb):
                        if loads[a] - dem[x] + dem[y] > caps[a] + EPS:
                            continue
                        if loads[b] - dem[y] + dem[x] > caps[b] + EPS:
                            continue
                        delta = replace_cost(ra, p, x, y) + replace_cost(rb, q, y, x)
                        if delta < best_delta:
                            best_delta, best = delta, ("swap", a, p, b, q)
        return best

    def _apply(self, move, routes, loads) -> None:
        dem = self.instance.demands
        kind = move[0]
        if kind == "2opt":
            _, v, mv = move
            routes[v] = mv.apply(routes[v])
        elif kind == "relocate":
            _, a, p, b, q = move
            c = routes[a].pop(p)
            routes[b].insert(q, c)
            loads[a] -= dem[c]
            loads[b] += dem[c]
        else:
            _, a, p, b, q = move
            x, y = routes[a][p], routes[b][q]
            routes[a][p], routes[b][q] = y, x
            loads[a] += dem[y] - dem[x]
            loads[b] += dem[x] - dem[y]

    # -- penalties ---------------------------------------------------------

    def _penalize(self, routes) -> None:
        arcs = []
        for route in routes:
            prev = DEPOT
            for s in route:
                arcs.append((prev, s))
                prev = s
        if not arcs:
            return
        utils = [self.dist[i][j] / (1 + self.penalties.get((i, j), 0)) for i, j in arcs]
        top = max(utils)
        for (i, j), u in zip(arcs, utils):
            if u == top:
                self._bump(i, j)
                if self.symmetric and (j, i) != (i, j):
                    self._bump(j, i)

    def _bump(self, i: int, j: int) -> None:
        self.penalties[(i, j)] = self.penalties.get((i, j), 0) + 1
        self.aug[i][j] += self.lam

    # -- driver ------------------------------------------------------------

    def run(self, initial: Solution) -> Solution:
        instance = self.instance
        if self.params.budget_moves is None:
            self._deadline = self.clock() + self.params.time_limit
        routes: list[list[int]] = [[] for _ in instance.vehicles]
        for r in initial.routes:
            routes[r.vehicle_id] = list(r.stops)
        loads = [sum(instance.demands[s] for s in r) for r in routes]

        best_routes = [list(r) for r in routes]
        best_f = self.true_cost(routes)
        first_optimum = True

        while not self._exhausted():
            # descend on the augmented objective
            while not self._exhausted():
                move = self._best_move(routes, loads)
                if move is None:
                    break
                self._apply(move, routes, loads)
                self.steps += 1
                f = self.true_cost(routes)
                if f < best_f - IMPROVEMENT_TOL:
                    best_f, best_routes = f, [list(r) for r in routes]
            else:
                break
            f = self.true_cost(routes)
            if first_optimum:
                n_arcs = sum(len(r) for r in routes)
                self.lam = self.params.lambda_factor * f / max(n_arcs, 1)
                first_optimum = False
            self._penalize(routes)
            self.steps += 1
            self.rounds += 1
            if self.trace_sink is not None:
                self.trace_sink((self.rounds, f, best_f))

        return make_solution(instance, best_routes)


def guided_local_search(
    instance: Instance,
    initial: Solution,
    params: BaselineParams,
    trace_sink: Optional[Callable[[tuple[int, float, float]], None]] = None,
) -> Solution:
    return GuidedLocalSearch(instance, params, trace_sink).run(initial)


def solve_baseline(
    instance: Instance,
    params: BaselineParams,
    trace_sink: Optional[Callable[[tuple[int, float, float]], None]] = None,
) -> Solution:
    """Constructor -> GLS -> drop empty routes, with metrics recomputed from scratch."""
    if params.strategy is FirstSolutionStrategy.AUTOMATIC:
        strategy, initial = _best_construction(instance)
    else:
        strategy, initial = params.strategy, construct(instance, params.strategy)
    best = guided_local_search(instance, initial, params, trace_sink)
    return best.with_meta(
        solver="baseline",
        seed=params.seed,
        params={**params.to_dict(), "first_solution": strategy.value},
    )
