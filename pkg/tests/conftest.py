import random

import numpy as np
import pytest

from ocvrp.matrix import DistanceMatrix, build_matrix
from ocvrp.model import Instance, Location, Vehicle

D, A, B, C = 0, 1, 2, 3


def tri3(capacities=(3,), demands=(1.0, 1.0, 1.0)) -> Instance:
    """Depot (0,0), A (0,3), B (4,0), C (4,3) as planar km: a 3-4-5 layout."""
    locs = [
        Location(0, 0.0, 0.0, 0.0),
        Location(1, 0.0, 3.0, demands[0]),
        Location(2, 4.0, 0.0, demands[1]),
        Location(3, 4.0, 3.0, demands[2]),
    ]
    vehicles = [Vehicle(i, float(c)) for i, c in enumerate(capacities)]
    return Instance("tri3", locs, vehicles, build_matrix(locs, "euclidean_plane"))


def random_instance(
    rng: random.Random, n_customers: int, capacities, demands=None, asymmetric: bool = False
) -> Instance:
    locs = [Location(0, 50.0, 50.0, 0.0)]
    for i in range(1, n_customers + 1):
        dem = 1.0 if demands is None else float(demands[i - 1])
        locs.append(Location(i, rng.uniform(0, 100), rng.uniform(0, 100), dem))
    vehicles = [Vehicle(i, float(c)) for i, c in enumerate(capacities)]
    matrix = build_matrix(locs, "euclidean_plane")
    if asymmetric:
        noise = np.array([[rng.uniform(1.0, 1.3) for _ in locs] for _ in locs])
        values = matrix.values * noise
        np.fill_diagonal(values, 0.0)
        matrix = DistanceMatrix(values)
    return Instance(f"rand{n_customers}", locs, vehicles, matrix)


def tight_small_instance(rng: random.Random) -> Instance:
    """<= 7 unit-demand customers, <= 2 vehicles, total capacity equal to demand."""
    n = rng.randint(2, 7)
    if n >= 2 and rng.random() < 0.7:
        first = rng.randint(1, n - 1)
        caps = (first, n - first)
    else:
        caps = (n,)
    return random_instance(rng, n, caps)


@pytest.fixture
def tri():
    return tri3
