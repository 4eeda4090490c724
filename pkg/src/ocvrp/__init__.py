"""Open capacitated vehicle routing: ant colony solver, native baseline, benchmark harness."""

from .aco import AcoParams, AntColonySolver, preset, solve_aco
from .baseline import BaselineParams, FirstSolutionStrategy, solve_baseline
from .errors import (
    ConsistencyError,
    CorruptMatrix,
    FormatError,
    Infeasible,
    InfeasibleConstruction,
    OcvrpError,
)
from .matrix import DistanceMatrix, build_matrix, haversine_km, load_matrix, save_matrix
from .model import Instance, Location, Route, Solution, Vehicle, route_distance, utilization, validate_solution

__version__ = "0.1.0"
