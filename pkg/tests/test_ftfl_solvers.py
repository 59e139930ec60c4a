"""Exact branch-and-bound and ratio-greedy solvers for the capped problem."""

from __future__ import annotations

import numpy as np
import pytest

from conftest import random_instance
from oracles import enumerate_optimum, matching_assignment_cost

from ftfp.ftfl_bridge import to_capped
from ftfp.ftfl_solvers import (
    DEFAULT_NODE_BUDGET,
    NODE_BUDGET_ENV,
    BudgetExceededError,
    InfeasibleError,
    optimal_assignment,
    node_budget,
    solution_cost,
    solve_exact,
    solve_greedy,
    subroutine,
)
from ftfp.instance import Instance


def caps_for(inst: Instance, k: int | None = None) -> np.ndarray:
    """Uniform caps that keep every instance feasible."""
    return np.full(inst.n, k if k is not None else max(inst.max_demand, 1), dtype=np.int64)


# ---------------------------------------------------------------------------
# assignment for a fixed opening vector


def test_assignment_on_fixture(instance_a):
    x, conn = optimal_assignment(np.array([2, 0]), instance_a)
    assert np.array_equal(x, [[2], [0]])
    assert conn == 2.0


def test_assignment_spills_to_second_site(instance_a):
    # only one facility at the cheap site: the second unit pays d = 2
    x, conn = optimal_assignment(np.array([1, 1]), instance_a)
    assert np.array_equal(x, [[1], [1]])
    assert conn == 3.0


def test_assignment_requires_enough_facilities(instance_a):
    with pytest.raises(InfeasibleError, match="client 0"):
        optimal_assignment(np.array([1, 0]), instance_a)


@pytest.mark.parametrize("seed", range(40))
def test_assignment_matches_bipartite_matching(seed):
    rng = np.random.default_rng(11000 + seed)
    n, m = int(rng.integers(1, 5)), int(rng.integers(1, 5))
    inst = random_instance(11000 + seed, sites=n, clients=m, demand_min=0, demand_max=4)
    y = rng.integers(0, 4, n)
    if int(y.sum()) < inst.max_demand:
        y[int(rng.integers(n))] += inst.max_demand - int(y.sum())
    x, conn = optimal_assignment(y, inst)
    # feasibility of the assignment itself
    assert np.array_equal(x.sum(axis=0), inst.demands)
    assert np.all(x <= y[:, None])
    # optimality against an independent matching formulation
    want = matching_assignment_cost(inst, y)
    assert abs(conn - want) <= 1e-9 * (1.0 + want), (conn, want)


# ---------------------------------------------------------------------------
# exact solver


def test_exact_on_fixture_a(instance_a):
    sol = solve_exact(to_capped(instance_a, caps_for(instance_a)))
    assert sol.cost == 8.0
    assert np.array_equal(sol.y, [2, 0])
    assert np.array_equal(sol.x, [[2], [0]])


def test_exact_on_fixture_b(instance_b):
    sol = solve_exact(to_capped(instance_b, caps_for(instance_b)))
    assert sol.cost == 2.0
    assert np.array_equal(sol.y, [1, 1])


def test_exact_matches_cost_field(instance_b):
    sol = solve_exact(to_capped(instance_b, caps_for(instance_b)))
    assert sol.cost == solution_cost(instance_b, sol.y, sol.x)


@pytest.mark.parametrize("seed", range(60))
def test_exact_matches_enumeration(seed):
    rng = np.random.default_rng(12000 + seed)
    n, m = int(rng.integers(1, 4)), int(rng.integers(1, 5))
    inst = random_instance(12000 + seed, sites=n, clients=m, demand_min=0, demand_max=3)
    caps = rng.integers(max(inst.max_demand, 1), inst.max_demand + 3, n)
    got = solve_exact(to_capped(inst, caps))
    want_cost, want_y = enumerate_optimum(to_capped(inst, caps))
    assert abs(got.cost - want_cost) <= 1e-9 * (1.0 + want_cost)
    assert np.array_equal(got.y, want_y)  # both searches keep the lexicographically first optimum
    assert np.all(got.y <= caps)
    assert np.array_equal(got.x.sum(axis=0), inst.demands)


def test_exact_prefers_lexicographically_smallest_optimum():
    # two identical sites: (0, 1) and (1, 0) tie, the smaller vector wins
    inst = Instance(np.array([1.0, 1.0]), np.array([1]), np.array([[1.0], [1.0]]))
    sol = solve_exact(to_capped(inst, np.array([1, 1])))
    assert np.array_equal(sol.y, [0, 1])
    assert sol.cost == 2.0


def test_exact_infeasible_caps(instance_a):
    with pytest.raises(InfeasibleError, match="caps sum"):
        solve_exact(to_capped(instance_a, np.array([1, 0])))


# ---------------------------------------------------------------------------
# node budget


def test_node_budget_default_and_override(monkeypatch):
    monkeypatch.delenv(NODE_BUDGET_ENV, raising=False)
    assert node_budget() == DEFAULT_NODE_BUDGET
    monkeypatch.setenv(NODE_BUDGET_ENV, "12345")
    assert node_budget() == 12345


@pytest.mark.parametrize("raw", ["zero", "", "0", "-5"])
def test_node_budget_rejects_bad_values(monkeypatch, raw):
    monkeypatch.setenv(NODE_BUDGET_ENV, raw)
    with pytest.raises(ValueError, match=NODE_BUDGET_ENV):
        node_budget()


def test_exact_static_budget_check(monkeypatch, instance_a):
    # the opening-vector space (2+1)*(2+1) = 9 exceeds a budget of 8
    monkeypatch.setenv(NODE_BUDGET_ENV, "8")
    with pytest.raises(BudgetExceededError, match="space"):
        solve_exact(to_capped(instance_a, np.array([2, 2])))


def test_exact_dynamic_budget_check(monkeypatch):
    # all-zero costs disable pruning, so the full tree of 15 nodes is walked;
    # the space (1+1)^3 = 8 passes the static check but the walk overruns
    monkeypatch.setenv(NODE_BUDGET_ENV, "8")
    inst = Instance(np.zeros(3), np.array([1]), np.zeros((3, 1)))
    with pytest.raises(BudgetExceededError, match="nodes"):
        solve_exact(to_capped(inst, np.array([1, 1, 1])))
    # with the budget just high enough the same search finishes
    monkeypatch.setenv(NODE_BUDGET_ENV, "15")
    sol = solve_exact(to_capped(inst, np.array([1, 1, 1])))
    assert sol.cost == 0.0


# ---------------------------------------------------------------------------
# greedy solver


def test_greedy_on_fixture_b(instance_b):
    sol = solve_greedy(to_capped(instance_b, np.array([1, 1])))
    assert sol.cost == 2.0
    assert np.array_equal(sol.y, [1, 1])


def test_greedy_reuses_spare_capacity():
    # one site, two co-located clients with different prices: after opening
    # for the near client, the far one connects to the same facility's spare
    # slot instead of paying the opening cost again
    inst = Instance(np.array([0.1]), np.array([1, 1]), np.array([[0.0, 1.0]]))
    sol = solve_greedy(to_capped(inst, np.array([2])))
    assert np.array_equal(sol.y, [1])
    assert abs(sol.cost - 1.1) <= 1e-12


def test_greedy_opens_batch_when_cheaper():
    # expensive site, cheap connections: one opening should grab both clients
    inst = Instance(np.array([10.0]), np.array([1, 1]), np.array([[0.0, 0.1]]))
    sol = solve_greedy(to_capped(inst, np.array([2])))
    assert np.array_equal(sol.y, [1])
    assert abs(sol.cost - 10.1) <= 1e-12


def test_greedy_handles_zero_demand():
    inst = Instance(np.array([1.0]), np.array([0]), np.array([[1.0]]))
    sol = solve_greedy(to_capped(inst, np.array([1])))
    assert sol.cost == 0.0
    assert np.array_equal(sol.y, [0])


def test_greedy_infeasible_caps(instance_a):
    with pytest.raises(InfeasibleError, match="caps sum"):
        solve_greedy(to_capped(instance_a, np.array([0, 1])))


@pytest.mark.parametrize("seed", range(50))
def test_greedy_is_feasible_and_bounded_below_by_exact(seed):
    rng = np.random.default_rng(13000 + seed)
    n, m = int(rng.integers(1, 5)), int(rng.integers(1, 5))
    inst = random_instance(13000 + seed, sites=n, clients=m, demand_min=0, demand_max=4)
    caps = rng.integers(max(inst.max_demand, 1), inst.max_demand + 2, n)
    greedy = solve_greedy(to_capped(inst, caps))
    assert np.all(greedy.y <= caps)
    assert np.all(greedy.x <= greedy.y[:, None])
    assert np.array_equal(greedy.x.sum(axis=0), inst.demands)
    assert greedy.cost == solution_cost(inst, greedy.y, greedy.x)
    exact = solve_exact(to_capped(inst, caps))
    assert greedy.cost >= exact.cost - 1e-9 * (1.0 + exact.cost)


# ---------------------------------------------------------------------------
# subroutine registry


def test_subroutine_lookup(instance_b):
    ex = subroutine("exact")
    assert ex.kind == "exact"
    sol = ex.solve(to_capped(instance_b, np.array([1, 1])))
    assert sol.cost == 2.0
    assert subroutine("greedy").kind == "greedy"
    with pytest.raises(ValueError, match="unknown subroutine"):
        subroutine("annealing")
