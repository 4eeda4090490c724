"""Ant Colony Optimization for the open capacitated VRP.

Each ant leaves the depot with the first vehicle of the fleet and keeps
extending its path with the pseudo-random proportional rule: with
probability ``q0`` it takes the arc maximising ``tau**alpha * eta**beta``,
otherwise it samples an arc with probability proportional to that product.
When no unvisited customer fits in the remaining capacity the ant returns
(for free, routes are open) and starts over with the next vehicle.

After the colony has built its solutions every route is polished with
2-opt, trails evaporate, and every ant deposits ``1 / C_k`` on the arcs it
used. If the global best does not improve for ``stagnation_limit``
consecutive iterations, all trails are reset to ``tau0``; the best solution
itself survives the reset (and, with ``keep_best_trails``, so do the trails
on its arcs).
"""

from __future__ import annotations

import enum
import math
import random
from dataclasses import asdict, dataclass, replace
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .errors import InfeasibleConstruction, InvalidCost
from .localsearch import improve_solution
from .model import DEPOT, EPS, Instance, Solution, make_solution

TAU_MIN = 1e-12
MIN_ARC_KM = 1e-9

TraceRow = tuple[int, float, float]
TraceSink = Callable[[TraceRow], None]


@dataclass(frozen=True)
class AcoParams:
    alpha: float
    beta: float
    rho: float
    q0: float
    ants: int = 40
    iterations: int = 150
    stagnation_limit: int = 20
    max_attempts: int = 50
    tau0: Optional[float] = None  # None: ants / nearest-neighbour length
    keep_best_trails: bool = False  # stagnation reset spares the best solution's arcs
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0 < self.rho <= 1:
            raise ValueError(f"rho must lie in (0, 1], got {self.rho}")
        if not 0 <= self.q0 <= 1:
            raise ValueError(f"q0 must lie in [0, 1], got {self.q0}")
        if self.ants < 1 or self.iterations < 1:
            raise ValueError("ants and iterations must be at least 1")
        if self.stagnation_limit < 1 or self.max_attempts < 1:
            raise ValueError("stagnation_limit and max_attempts must be at least 1")
        if self.tau0 is not None and not self.tau0 > 0:
            raise ValueError(f"tau0 must be positive, got {self.tau0}")

    def to_dict(self) -> dict:
        return asdict(self)


PRESETS: dict[str, AcoParams] = {
    "exploitation": AcoParams(alpha=2.5, beta=1.0, rho=0.1, q0=0.9, iterations=150, ants=40),
    "exploration": AcoParams(alpha=0.2, beta=3.0, rho=0.7, q0=0.1, iterations=150, ants=40),
}
EXPLOITATION = PRESETS["exploitation"]
EXPLORATION = PRESETS["exploration"]


def preset(name: str, **overrides) -> AcoParams:
    try:
        base = PRESETS[name.lower()]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    return replace(base, **overrides)


class PheromoneMatrix:
    """Per-arc trail intensities, clamped from below at ``tau_min``."""

    def __init__(self, n: int, tau0: float, *, symmetric: bool = False, tau_min: float = TAU_MIN):
        if not tau0 > 0:
            raise ValueError("tau0 must be positive")
        self.tau0 = float(tau0)
        self.tau_min = float(tau_min)
        self.symmetric = symmetric
        self.values = np.full((n, n), self.tau0)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def evaporate(self, rho: float) -> None:
        np.maximum(self.values * (1.0 - rho), self.tau_min, out=self.values)

    def deposit(self, solutions: Iterable[tuple[Solution, float]]) -> None:
        rows: list[int] = []
        cols: list[int] = []
        amounts: list[float] = []
        for solution, cost in solutions:
            if not cost > 0:
                raise InvalidCost(f"deposit needs a positive solution cost, got {cost}")
            amount = 1.0 / cost
            for i, j in solution.arcs():
                rows.append(i)
                cols.append(j)
                amounts.append(amount)
        if not rows:
            return
        np.add.at(self.values, (rows, cols), amounts)
        if self.symmetric:
            np.add.at(self.values, (cols, rows), amounts)

    def reset(self, keep: Iterable[tuple[int, int]] = ()) -> None:
        """Set every trail back to tau0 except the arcs in ``keep``."""
        arcs = list(keep)
        if self.symmetric:
            arcs += [(j, i) for i, j in arcs]
        kept = {arc: self.values[arc] for arc in arcs}
        self.values.fill(self.tau0)
        for arc, value in kept.items():
            self.values[arc] = value


def evaporate(pher: PheromoneMatrix, rho: float) -> None:
    pher.evaporate(rho)


def deposit(pher: PheromoneMatrix, solutions: Iterable[tuple[Solution, float]]) -> None:
    pher.deposit(solutions)


def heuristic_matrix(instance: Instance) -> np.ndarray:
    """eta = 1/d, with zero-length arcs treated as MIN_ARC_KM long."""
    return 1.0 / np.maximum(instance.matrix.values, MIN_ARC_KM)


def attractiveness(pher: PheromoneMatrix, eta: np.ndarray, alpha: float, beta: float) -> list[list[float]]:
    return (pher.values**alpha * eta**beta).tolist()


class Signal(enum.Enum):
    NEW_ROUTE = "new_route"
    COMPLETE = "complete"


@dataclass
class AntState:
    demands: Sequence[float]
    capacities: Sequence[float]
    unvisited: list[int]  # kept sorted so argmax ties go to the lowest index
    current: int = DEPOT
    vehicle: int = 0
    remaining_capacity: float = 0.0
    routes: Optional[list[list[int]]] = None

    @classmethod
    def start(cls, instance: Instance) -> "AntState":
        return cls(
            demands=instance.demands,
            capacities=instance.capacities,
            unvisited=list(instance.customers),
            remaining_capacity=instance.capacities[0],
            routes=[[]],
        )

    def feasible(self) -> list[int]:
        limit = self.remaining_capacity + EPS
        dem = self.demands
        return [j for j in self.unvisited if dem[j] <= limit]

    def visit(self, j: int) -> None:
        self.unvisited.remove(j)
        self.routes[-1].append(j)
        self.remaining_capacity -= self.demands[j]
        self.current = j

    def open_route(self) -> None:
        if self.vehicle + 1 >= len(self.capacities):
            raise InfeasibleConstruction(
                f"{len(self.unvisited)} customers left but all {len(self.capacities)} vehicles used"
            )
        self.vehicle += 1
        self.remaining_capacity = self.capacities[self.vehicle]
        self.current = DEPOT
        self.routes.append([])


def transition_probabilities(weights: Sequence[float]) -> list[float]:
    """Normalise candidate weights into the sampling distribution.

    Degenerate weight vectors (all zero or overflowing) fall back to uniform.
    """
    total = math.fsum(weights)
    if not (total > 0 and math.isfinite(total)):
        return [1.0 / len(weights)] * len(weights)
    probs = [w / total for w in weights]
    assert abs(math.fsum(probs) - 1.0) <= 1e-12
    return probs


def choose_next(
    state: AntState, weights: Sequence[Sequence[float]], q0: float, rng: random.Random
) -> int | Signal:
    """Next customer for the ant, or a NEW_ROUTE / COMPLETE signal.

    ``weights[i][j]`` must hold ``tau_ij**alpha * eta_ij**beta``.
    """
    if not state.unvisited:
        return Signal.COMPLETE
    cand = state.feasible()
    if not cand:
        return Signal.NEW_ROUTE
    row = weights[state.current]
    w = [row[j] for j in cand]
    if rng.random() < q0:
        best = 0
        best_w = w[0]
        for idx in range(1, len(w)):
            if w[idx] > best_w:
                best, best_w = idx, w[idx]
        return cand[best]
    probs = transition_probabilities(w)
    r = rng.random()
    acc = 0.0
    for j, p in zip(cand, probs):
        acc += p
        if r < acc:
            return j
    return cand[-1]


def _check_packable(instance: Instance) -> None:
    if not instance.capacity_sufficient:
        raise InfeasibleConstruction(
            f"total demand {instance.total_demand:g} exceeds fleet capacity {instance.total_capacity:g}"
        )
    biggest = max(instance.capacities)
    for c in instance.customers:
        if instance.demands[c] > biggest + EPS:
            raise InfeasibleConstruction(f"customer {c} does not fit in any vehicle")


def construct_solution(
    instance: Instance,
    weights: Sequence[Sequence[float]],
    params: AcoParams,
    rng: random.Random,
) -> Solution:
    """One ant's complete solution; restarts up to ``params.max_attempts`` times."""
    _check_packable(instance)
    last_error: Optional[InfeasibleConstruction] = None
    for _ in range(params.max_attempts):
        state = AntState.start(instance)
        try:
            while True:
                nxt = choose_next(state, weights, params.q0, rng)
                if nxt is Signal.COMPLETE:
                    break
                if nxt is Signal.NEW_ROUTE:
                    state.open_route()
                else:
                    state.visit(nxt)
        except InfeasibleConstruction as exc:
            last_error = exc
            continue
        return make_solution(instance, state.routes)
    raise InfeasibleConstruction(
        f"no feasible construction after {params.max_attempts} attempts: {last_error}"
    )


def nearest_neighbor_length(instance: Instance) -> float:
    """Length of the greedy nearest-feasible-neighbour open solution."""
    eta = heuristic_matrix(instance).tolist()
    greedy = AcoParams(alpha=0.0, beta=1.0, rho=1.0, q0=1.0, max_attempts=1)
    return construct_solution(instance, eta, greedy, random.Random(0)).total_distance


class AntColonySolver:
    """Holds the colony state for one solve; use :meth:`step` to advance it."""

    def __init__(self, instance: Instance, params: AcoParams):
        _check_packable(instance)
        self.instance = instance
        self.params = params
        self.eta = heuristic_matrix(instance)
        tau0 = params.tau0
        if tau0 is None:
            l_nn = nearest_neighbor_length(instance)
            tau0 = params.ants / l_nn if l_nn > 0 else 1.0
        self.pheromone = PheromoneMatrix(instance.n, tau0, symmetric=instance.matrix.symmetric)
        self.rng = random.Random(params.seed)
        self.best: Optional[Solution] = None
        self.iteration = 0
        self.stagnation = 0
        self.resets = 0

    def step(self) -> TraceRow:
        p = self.params
        weights = attractiveness(self.pheromone, self.eta, p.alpha, p.beta)
        colony = [
            improve_solution(self.instance, construct_solution(self.instance, weights, p, self.rng))
            for _ in range(p.ants)
        ]
        it_best = min(colony, key=lambda s: s.total_distance)

        self.pheromone.evaporate(p.rho)
        # zero-cost solutions (all customers on the depot) leave nothing to learn
        self.pheromone.deposit((s, s.total_distance) for s in colony if s.total_distance > 0)

        self.iteration += 1
        if self.best is None or it_best.total_distance < self.best.total_distance:
            self.best = it_best
            self.stagnation = 0
        else:
            self.stagnation += 1
            if self.stagnation >= p.stagnation_limit:
                self.pheromone.reset(keep=self.best.arcs() if p.keep_best_trails else ())
                self.stagnation = 0
                self.resets += 1
        return self.iteration, it_best.total_distance, self.best.total_distance

    def solve(self, trace_sink: Optional[TraceSink] = None) -> Solution:
        for _ in range(self.params.iterations - self.iteration):
            row = self.step()
            if trace_sink is not None:
                trace_sink(row)
        return self.best.with_meta(solver="aco", seed=self.params.seed, params=self.params.to_dict())


def solve_aco(
    instance: Instance, params: AcoParams, trace_sink: Optional[TraceSink] = None
) -> Solution:
    return AntColonySolver(instance, params).solve(trace_sink)
