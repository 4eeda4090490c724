import random
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ocvrp.aco import (
    EXPLOITATION,
    EXPLORATION,
    TAU_MIN,
    AcoParams,
    AntColonySolver,
    AntState,
    PheromoneMatrix,
    Signal,
    attractiveness,
    choose_next,
    construct_solution,
    deposit,
    evaporate,
    heuristic_matrix,
    nearest_neighbor_length,
    preset,
    solve_aco,
    transition_probabilities,
)
from ocvrp.errors import InfeasibleConstruction, InvalidCost
from ocvrp.model import make_solution, validate_solution

from conftest import A, B, C, random_instance, tri3
from oracles import brute_force_optimum, greedy_chain, path_length


def two_candidate_state():
    inst = tri3((3,))
    return inst, AntState(inst.demands, inst.capacities, [A, B], remaining_capacity=3.0, routes=[[]])


def unit_weights(inst, alpha=1.0, beta=1.0):
    pher = PheromoneMatrix(inst.n, 1.0)
    return attractiveness(pher, heuristic_matrix(inst), alpha, beta)


def test_presets_exact():
    assert (EXPLOITATION.alpha, EXPLOITATION.beta, EXPLOITATION.rho, EXPLOITATION.q0) == (2.5, 1.0, 0.1, 0.9)
    assert (EXPLORATION.alpha, EXPLORATION.beta, EXPLORATION.rho, EXPLORATION.q0) == (0.2, 3.0, 0.7, 0.1)
    for p in (EXPLOITATION, EXPLORATION):
        assert (p.iterations, p.ants, p.stagnation_limit) == (150, 40, 20)
    assert preset("Exploration", seed=3).seed == 3
    with pytest.raises(ValueError):
        preset("greedy")


@pytest.mark.parametrize(
    "kwargs",
    [dict(rho=0.0), dict(rho=1.5), dict(q0=-0.1), dict(q0=1.1), dict(ants=0), dict(iterations=0), dict(tau0=0.0)],
)
def test_param_validation(kwargs):
    base = dict(alpha=1.0, beta=1.0, rho=0.5, q0=0.5)
    with pytest.raises(ValueError):
        AcoParams(**{**base, **kwargs})


def test_greedy_rule_picks_a():
    inst, state = two_candidate_state()
    assert choose_next(state, unit_weights(inst), 1.0, random.Random(0)) == A


def test_probabilistic_rule_values():
    probs = transition_probabilities([1 / 3, 1 / 4])
    assert probs[0] == pytest.approx(4 / 7, abs=1e-12)
    assert probs[1] == pytest.approx(3 / 7, abs=1e-12)


def test_zero_exponents_uniform():
    inst = tri3((3,))
    w = unit_weights(inst, alpha=0.0, beta=0.0)
    probs = transition_probabilities([w[0][j] for j in (A, B, C)])
    assert probs == pytest.approx([1 / 3] * 3, abs=1e-12)


def test_greedy_tie_goes_to_lowest_index():
    inst = tri3((3,))
    state = AntState(inst.demands, inst.capacities, [A, B, C], remaining_capacity=3.0, routes=[[]])
    w = unit_weights(inst, alpha=0.0, beta=0.0)
    assert choose_next(state, w, 1.0, random.Random(0)) == A


def test_sampling_frequencies_quick():
    inst, state = two_candidate_state()
    w = unit_weights(inst)
    rng = random.Random(1)
    counts = Counter(choose_next(state, w, 0.0, rng) for _ in range(20_000))
    assert counts[A] / 20_000 == pytest.approx(4 / 7, abs=0.02)


@settings(max_examples=50)
@given(st.lists(st.floats(1e-30, 1e30), min_size=1, max_size=60))
def test_distribution_sums_to_one(weights):
    assert abs(sum(transition_probabilities(weights)) - 1.0) <= 1e-12


def test_degenerate_weights_fall_back_to_uniform():
    assert transition_probabilities([0.0, 0.0]) == [0.5, 0.5]


def test_signals():
    inst = tri3((1, 1, 1))
    state = AntState.start(inst)
    w = unit_weights(inst)
    state.visit(A)
    assert choose_next(state, w, 1.0, random.Random(0)) is Signal.NEW_ROUTE
    state.open_route()
    state.visit(B)
    state.open_route()
    state.visit(C)
    assert choose_next(state, w, 1.0, random.Random(0)) is Signal.COMPLETE


def test_new_route_without_vehicles():
    inst = tri3((2,))
    state = AntState.start(inst)
    state.visit(A)
    state.visit(B)
    with pytest.raises(InfeasibleConstruction):
        state.open_route()


@pytest.mark.parametrize("tau, rho, expected", [(2.0, 0.7, 0.6), (1.0, 0.1, 0.9), (TAU_MIN, 0.5, TAU_MIN)])
def test_evaporation(tau, rho, expected):
    pher = PheromoneMatrix(3, tau)
    evaporate(pher, rho)
    assert np.max(np.abs(pher.values - expected)) <= 1e-12


def test_evaporation_exact_formula():
    pher = PheromoneMatrix(4, 1.0)
    rng = np.random.default_rng(0)
    pher.values[:] = rng.uniform(1e-13, 5, (4, 4))
    before = pher.values.copy()
    evaporate(pher, 0.7)
    assert np.max(np.abs(pher.values - np.maximum(TAU_MIN, 0.3 * before))) <= 1e-12


def test_deposit_single_ant():
    inst = tri3((3,))
    pher = PheromoneMatrix(inst.n, 0.9)
    sol = make_solution(inst, [[A, C, B]])
    deposit(pher, [(sol, 10.0)])
    for i, j in [(0, A), (A, C), (C, B)]:
        assert abs(pher.values[i, j] - 1.0) <= 1e-12
    assert pher.values[B, 0] == 0.9  # no return arc
    assert pher.values[0, B] == 0.9


def test_deposit_two_ants_same_arc():
    inst = tri3((3,))
    pher = PheromoneMatrix(inst.n, 1.0)
    s1 = make_solution(inst, [[A, C, B]])
    s2 = make_solution(inst, [[A, B, C]])
    deposit(pher, [(s1, 10.0), (s2, 20.0)])
    assert abs(pher.values[0, A] - 1.15) <= 1e-12
    assert abs(pher.values[A, C] - 1.1) <= 1e-12
    assert pher.values[B, A] == 1.0


def test_deposit_mirrors_when_symmetric():
    inst = tri3((3,))
    pher = PheromoneMatrix(inst.n, 1.0, symmetric=True)
    deposit(pher, [(make_solution(inst, [[A, C, B]]), 10.0)])
    assert abs(pher.values[C, A] - 1.1) <= 1e-12


def test_deposit_rejects_nonpositive_cost():
    inst = tri3((3,))
    with pytest.raises(InvalidCost):
        deposit(PheromoneMatrix(inst.n, 1.0), [(make_solution(inst, [[A]]), 0.0)])


def test_construct_greedy_chain_tri3():
    inst = tri3((3,))
    params = AcoParams(alpha=1.0, beta=1.0, rho=0.5, q0=1.0)
    sol = construct_solution(inst, unit_weights(inst), params, random.Random(0))
    assert [r.stops for r in sol.routes] == [(A, C, B)]
    assert sol.total_distance == pytest.approx(10.0)


@pytest.mark.parametrize("seed", range(10))
def test_construct_two_vehicles_cap_two(seed):
    inst = tri3((2, 2))
    params = AcoParams(alpha=1.0, beta=1.0, rho=0.5, q0=0.0)
    sol = construct_solution(inst, unit_weights(inst), params, random.Random(seed))
    assert sorted(len(r.stops) for r in sol.routes) == [1, 2]
    assert validate_solution(inst, sol).ok


def test_construct_infeasible():
    inst = tri3((1, 1))
    params = AcoParams(alpha=1.0, beta=1.0, rho=0.5, q0=0.5)
    with pytest.raises(InfeasibleConstruction):
        construct_solution(inst, unit_weights(inst), params, random.Random(0))


def test_construct_retries_then_gives_up():
    # total capacity 6 covers demand 6, but no vehicle can carry two customers
    inst = tri3((3, 3), demands=(2.0, 2.0, 2.0))
    params = AcoParams(alpha=1.0, beta=1.0, rho=0.5, q0=0.0, max_attempts=3)
    with pytest.raises(InfeasibleConstruction):
        construct_solution(inst, unit_weights(inst), params, random.Random(0))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 100_000))
def test_greedy_construction_matches_independent_chain(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 15)
    demands = [rng.choice([1, 1, 2]) for _ in range(n)]
    caps = [max(demands) + rng.randint(0, 4) for _ in range(n)]
    inst = random_instance(rng, n, caps, demands=demands, asymmetric=seed % 3 == 0)
    params = AcoParams(alpha=1.0, beta=1.0, rho=0.5, q0=1.0)
    sol = construct_solution(inst, unit_weights(inst), params, random.Random(seed))
    want = [r for r in greedy_chain(inst.matrix.values, inst.demands, inst.capacities) if r]
    assert [list(r.stops) for r in sol.routes] == want


def test_tau0_default_is_ants_over_nn_length():
    inst = tri3((3,))
    solver = AntColonySolver(inst, preset("exploitation"))
    assert nearest_neighbor_length(inst) == pytest.approx(10.0)
    assert solver.pheromone.tau0 == pytest.approx(40 / 10.0)
    assert AntColonySolver(inst, preset("exploitation", tau0=0.5)).pheromone.tau0 == 0.5


@pytest.mark.parametrize("name", ["exploitation", "exploration"])
@pytest.mark.parametrize("seed", [0, 1, 7])
def test_solve_tri3_reaches_optimum(name, seed):
    inst = tri3((3,))
    assert brute_force_optimum(inst.matrix.values, inst.demands, inst.capacities) == pytest.approx(10.0)
    sol = solve_aco(inst, preset(name, seed=seed, iterations=15, ants=10))
    assert sol.total_distance == pytest.approx(10.0)
    assert validate_solution(inst, sol).ok


def test_single_customer():
    inst = tri3((3,))
    from ocvrp.model import Instance

    small = Instance("one", inst.locations[:2], inst.vehicles, type(inst.matrix)(inst.matrix.values[:2, :2]))
    rows = []
    sol = solve_aco(small, preset("exploitation", iterations=1), rows.append)
    assert [r.stops for r in sol.routes] == [(A,)]
    assert sol.total_distance == pytest.approx(3.0)
    assert rows == [(1, 3.0, 3.0)]


def test_deterministic_for_seed():
    rng = random.Random(4)
    inst = random_instance(rng, 12, [4, 4, 4])
    t1, t2 = [], []
    s1 = solve_aco(inst, preset("exploration", seed=42, iterations=20, ants=8), t1.append)
    s2 = solve_aco(inst, preset("exploration", seed=42, iterations=20, ants=8), t2.append)
    assert s1 == s2 and t1 == t2


def test_trace_monotone_and_solutions_valid():
    rng = random.Random(9)
    inst = random_instance(rng, 15, [5, 5, 5])
    solver = AntColonySolver(inst, preset("exploitation", seed=3, iterations=30, ants=10))
    rows = []
    for _ in range(30):
        rows.append(solver.step())
        assert validate_solution(inst, solver.best).ok
    g = [r[2] for r in rows]
    assert all(b <= a for a, b in zip(g, g[1:]))
    assert all(r[1] >= r[2] - 1e-12 for r in rows)


def _stagnation_run(keep_best_trails):
    inst = tri3((3,))
    solver = AntColonySolver(
        inst, preset("exploitation", seed=0, ants=5, keep_best_trails=keep_best_trails)
    )
    solver.step()  # finds the optimum, nothing can improve afterwards
    assert solver.best.total_distance == pytest.approx(10.0)
    for k in range(1, 20):
        solver.step()
        assert solver.stagnation == k
        assert solver.resets == 0
    before = solver.pheromone.values.copy()
    solver.step()  # 20th non-improving iteration
    return inst, solver, before


def test_stagnation_full_reset_after_exactly_20():
    inst, solver, _ = _stagnation_run(False)
    assert solver.resets == 1 and solver.stagnation == 0
    assert np.all(solver.pheromone.values == solver.pheromone.tau0)
    assert solver.best.total_distance == pytest.approx(10.0)


def test_stagnation_keep_best_trails_variant():
    inst, solver, _ = _stagnation_run(True)
    best_arcs = set(solver.best.arcs()) | {(j, i) for i, j in solver.best.arcs()}
    vals = solver.pheromone.values
    tau0 = solver.pheromone.tau0
    for i in range(inst.n):
        for j in range(inst.n):
            if (i, j) not in best_arcs:
                assert vals[i, j] == tau0
    assert all(vals[a] != tau0 for a in best_arcs)


def test_infeasible_instance_raises():
    with pytest.raises(InfeasibleConstruction):
        solve_aco(tri3((1, 1)), preset("exploitation", iterations=1))


def test_zero_distance_arcs_are_legal():
    from ocvrp.matrix import build_matrix
    from ocvrp.model import Instance, Location, Vehicle

    locs = [Location(0, 0, 0), Location(1, 1, 1, 1.0), Location(2, 1, 1, 1.0)]
    inst = Instance("dup", locs, [Vehicle(0, 2)], build_matrix(locs, "euclidean_plane"))
    sol = solve_aco(inst, preset("exploration", iterations=3, ants=3))
    assert sol.total_distance == pytest.approx(path_length(inst.matrix.values, [1, 2]))
