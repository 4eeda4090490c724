"""Seeded multi-run experiments with wall-clock timing.

The timer covers the solve call only: loading the instance, building its
distance matrix and initialising the solver all happen before the clock
starts. Runs execute one after another in this process so every solve has
the machine to itself; ``parallel=True`` trades that guarantee for speed
and marks the resulting timings as off-protocol.
"""

from __future__ import annotations

import logging
import math
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Optional, Union

from ..aco import AcoParams, AntColonySolver
from ..baseline import BaselineParams, solve_baseline
from ..errors import Infeasible
from ..model import Instance, Solution
from . import instances

log = logging.getLogger(__name__)

SolverParams = Union[AcoParams, BaselineParams]
TraceRow = tuple[int, float, float]


class RunFailed(Infeasible):
    def __init__(self, run: int, cause: Exception):
        super().__init__(f"run {run} failed: {cause}")
        self.run = run
        self.cause = cause


@dataclass(frozen=True)
class ExperimentSpec:
    instance: Union[str, Path]
    solver: str  # "aco" or "baseline"
    params: SolverParams
    runs: int = 10
    seed_base: int = 0
    label: Optional[str] = None
    parallel: bool = False

    def __post_init__(self) -> None:
        if self.runs < 1:
            raise ValueError("runs must be at least 1")
        if self.solver not in ("aco", "baseline"):
            raise ValueError(f"unknown solver {self.solver!r}")
        expected = AcoParams if self.solver == "aco" else BaselineParams
        if not isinstance(self.params, expected):
            raise TypeError(f"{self.solver} needs {expected.__name__}")


@dataclass(frozen=True)
class RunRecord:
    run: int
    seed: int
    distance_km: float
    wall_time_s: float


def _mean_std(values: list[float]) -> tuple[float, float]:
    mean = statistics.fmean(values)
    std = statistics.stdev(values) if len(values) > 1 else 0.0
    return mean, std


@dataclass
class RunReport:
    label: str
    solver: str
    instance: str
    customers: int
    params: dict
    records: list[RunRecord] = field(default_factory=list)
    protocol: bool = True  # False when timings came from the parallel mode

    @property
    def runs(self) -> int:
        return len(self.records)

    @property
    def distance(self) -> tuple[float, float]:
        return _mean_std([r.distance_km for r in self.records])

    @property
    def wall_time(self) -> tuple[float, float]:
        return _mean_std([r.wall_time_s for r in self.records])

    @property
    def best_distance(self) -> float:
        return min(r.distance_km for r in self.records)

    def to_dict(self) -> dict:
        d_mean, d_std = self.distance
        t_mean, t_std = self.wall_time
        return {
            "label": self.label,
            "solver": self.solver,
            "instance": self.instance,
            "customers": self.customers,
            "params": self.params,
            "protocol_timing": self.protocol,
            "runs": [vars(r) for r in self.records],
            "n": self.runs,
            "distance_km": {"mean": d_mean, "std": d_std},
            "wall_time_s": {"mean": t_mean, "std": t_std},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RunReport":
        return cls(
            label=data["label"],
            solver=data["solver"],
            instance=data["instance"],
            customers=data["customers"],
            params=data["params"],
            records=[RunRecord(**r) for r in data["runs"]],
            protocol=data.get("protocol_timing", True),
        )


@dataclass
class ConvergenceTrace:
    runs: dict[int, list[TraceRow]] = field(default_factory=dict)

    def sink(self, run: int) -> Callable[[TraceRow], None]:
        rows = self.runs.setdefault(run, [])
        return rows.append


def with_seed(params: SolverParams, seed: int) -> SolverParams:
    return replace(params, seed=seed)


def make_solver(instance: Instance, solver: str, params: SolverParams) -> Callable[..., Solution]:
    """Do all solver initialisation up front; return the callable that is timed."""
    if solver == "aco":
        colony = AntColonySolver(instance, params)
        return colony.solve
    return lambda trace_sink=None: solve_baseline(instance, params, trace_sink)


def timed_solve(
    instance: Instance,
    solver: str,
    params: SolverParams,
    trace_sink: Optional[Callable[[TraceRow], None]] = None,
    clock: Callable[[], float] = time.perf_counter,
) -> Solution:
    run = make_solver(instance, solver, params)
    start = clock()
    solution = run(trace_sink)
    elapsed = clock() - start
    return solution.with_meta(wall_time=elapsed, instance=instance.name)


def _worker(args) -> tuple[Solution, list[TraceRow]]:
    path, solver, params = args
    instance = instances.load_instance(path)
    rows: list[TraceRow] = []
    return timed_solve(instance, solver, params, rows.append), rows


def run_experiment(
    spec: ExperimentSpec,
    *,
    clock: Callable[[], float] = time.perf_counter,
    on_solution: Optional[Callable[[int, Solution], None]] = None,
) -> tuple[RunReport, ConvergenceTrace]:
    instance = instances.load_instance(spec.instance)
    label = spec.label or spec.solver
    report = RunReport(
        label=label,
        solver=spec.solver,
        instance=instance.name,
        customers=instance.n - 1,
        params={k: v for k, v in spec.params.to_dict().items() if k != "seed"},
        protocol=not spec.parallel,
    )
    trace = ConvergenceTrace()
    seeds = [spec.seed_base + r for r in range(spec.runs)]

    if spec.parallel:
        jobs = [(str(spec.instance), spec.solver, with_seed(spec.params, s)) for s in seeds]
        with ProcessPoolExecutor() as pool:
            futures = [pool.submit(_worker, job) for job in jobs]
            outcomes = []
            for r, fut in enumerate(futures):
                try:
                    outcomes.append(fut.result())
                except Infeasible as exc:
                    raise RunFailed(r, exc) from exc
        for r, (solution, rows) in enumerate(outcomes):
            trace.runs[r] = rows
            _record(report, r, seeds[r], solution, on_solution)
        return report, trace

    for r, seed in enumerate(seeds):
        try:
            solution = timed_solve(instance, spec.solver, with_seed(spec.params, seed), trace.sink(r), clock)
        except Infeasible as exc:
            raise RunFailed(r, exc) from exc
        _record(report, r, seed, solution, on_solution)
        log.info("%s run %d/%d: %.3f km in %.2f s", label, r + 1, spec.runs,
                 solution.total_distance, solution.meta["wall_time"])
    return report, trace


def _record(report: RunReport, r: int, seed: int, solution: Solution, on_solution) -> None:
    report.records.append(RunRecord(r, seed, solution.total_distance, solution.meta["wall_time"]))
    if on_solution is not None:
        on_solution(r, solution)


def aggregates_consistent(report: RunReport, tol: float = 1e-9) -> bool:
    """True when the reported mean/std recompute from the per-run rows."""
    data = report.to_dict()
    for key, attr in (("distance_km", "distance_km"), ("wall_time_s", "wall_time_s")):
        values = [getattr(r, attr) for r in report.records]
        mean = math.fsum(values) / len(values)
        var = math.fsum((v - mean) ** 2 for v in values) / (len(values) - 1) if len(values) > 1 else 0.0
        if abs(data[key]["mean"] - mean) > tol * max(1.0, abs(mean)):
            return False
        if abs(data[key]["std"] - math.sqrt(var)) > tol * max(1.0, math.sqrt(var)):
            return False
    return True
