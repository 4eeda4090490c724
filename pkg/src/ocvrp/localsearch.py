"""2-opt for open routes.

A route is the path ``0 -> s[0] -> ... -> s[L-1]`` with no closing arc.
Reversing ``s[i..k]`` replaces the entry arc ``prev -> s[i]`` by
``prev -> s[k]`` (``prev`` is the depot when ``i == 0``), replaces the exit
arc ``s[k] -> s[k+1]`` by ``s[i] -> s[k+1]`` when a successor exists, and
flips the direction of every arc inside the segment. The last part is free
on symmetric matrices but must be paid for exactly on asymmetric ones.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .model import DEPOT, Instance, Solution, make_route

IMPROVEMENT_TOL = 1e-9


@dataclass(frozen=True)
class TwoOptMove:
    i: int
    k: int
    delta: float

    def apply(self, stops: Sequence[int]) -> list[int]:
        s = list(stops)
        s[self.i : self.k + 1] = s[self.i : self.k + 1][::-1]
        return s


def two_opt_delta(rows: Sequence[Sequence[float]], stops: Sequence[int], i: int, k: int) -> float:
    """Exact change in path length from reversing ``stops[i..k]`` (any matrix)."""
    if not 0 <= i <= k < len(stops):
        raise IndexError(f"invalid segment ({i}, {k}) for route of length {len(stops)}")
    if i == k:
        return 0.0
    prev = stops[i - 1] if i > 0 else DEPOT
    a, b = stops[i], stops[k]
    delta = rows[prev][b] - rows[prev][a]
    if k + 1 < len(stops):
        nxt = stops[k + 1]
        delta += rows[a][nxt] - rows[b][nxt]
    for m in range(i, k):
        u, v = stops[m], stops[m + 1]
        delta += rows[v][u] - rows[u][v]
    return delta


def best_two_opt_move(
    rows: Sequence[Sequence[float]], stops: Sequence[int], symmetric: bool = False
) -> Optional[TwoOptMove]:
    """Most improving segment reversal, or None if nothing beats the tolerance.

    Ties keep the first (i, k) in lexicographic order.
    """
    L = len(stops)
    if L < 2:
        return None
    # prefix sums of forward and backward internal arcs
    fwd = [0.0] * L
    bwd = [0.0] * L
    if not symmetric:
        for m in range(L - 1):
            u, v = stops[m], stops[m + 1]
            fwd[m + 1] = fwd[m] + rows[u][v]
            bwd[m + 1] = bwd[m] + rows[v][u]

    best_delta = -IMPROVEMENT_TOL
    best: Optional[tuple[int, int]] = None
    for i in range(L - 1):
        prev = stops[i - 1] if i > 0 else DEPOT
        row_prev = rows[prev]
        a = stops[i]
        row_a = rows[a]
        base = row_prev[a]
        for k in range(i + 1, L):
            b = stops[k]
            delta = row_prev[b] - base
            if k + 1 < L:
                nxt = stops[k + 1]
                delta += row_a[nxt] - rows[b][nxt]
            if not symmetric:
                delta += (bwd[k] - bwd[i]) - (fwd[k] - fwd[i])
            if delta < best_delta:
                best_delta = delta
                best = (i, k)
    if best is None:
        return None
    return TwoOptMove(best[0], best[1], best_delta)


def two_opt_path(
    rows: Sequence[Sequence[float]], stops: Sequence[int], symmetric: bool = False
) -> list[int]:
    """Best-improvement 2-opt to a local optimum under an arbitrary cost matrix."""
    current = list(stops)
    while True:
        move = best_two_opt_move(rows, current, symmetric)
        if move is None:
            return current
        current = move.apply(current)


def two_opt_route(instance: Instance, stops: Sequence[int]) -> list[int]:
    m = instance.matrix
    return two_opt_path(m.rows, stops, m.symmetric)


def improve_solution(instance: Instance, solution: Solution) -> Solution:
    """Apply 2-opt to each route on its own; loads and the assignment are untouched."""
    routes = []
    changed = False
    for route in solution.routes:
        improved = two_opt_route(instance, route.stops)
        if tuple(improved) != route.stops:
            routes.append(make_route(instance, route.vehicle_id, improved))
            changed = True
        else:
            routes.append(route)
    if not changed:
        return solution
    return Solution(tuple(routes), sum(r.distance for r in routes), dict(solution.meta))
