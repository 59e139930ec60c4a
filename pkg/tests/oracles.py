"""Independent reference implementations used to cross-check the package.

Everything in this module is deliberately written with a different toolchain
(scipy) or a different algorithmic shape (plain loops, exhaustive search,
bipartite matching) than the code under test, so agreement between the two is
meaningful evidence rather than a tautology.
"""

from __future__ import annotations

import itertools

import numpy as np
from scipy.optimize import linear_sum_assignment, linprog

from ftfp.ftfl_bridge import CappedInstance
from ftfp.instance import Instance


def lp_oracle(inst: Instance, caps: np.ndarray | None = None) -> float:
    """LP optimum via scipy's HiGHS backend.

    Variables are ordered [y_0..y_{n-1}, x_00, x_01, ..] with x in site-major
    order.  Constraints: x_ij <= y_i, sum_i x_ij >= r_j, optional y_i <= cap_i.
    """
    n, m = inst.n, inst.m
    nv = n + n * m
    c = np.concatenate([inst.site_costs, inst.dist.ravel()])

    rows = []
    rhs = []
    for i in range(n):
        for j in range(m):
            row = np.zeros(nv)
            row[n + i * m + j] = 1.0
            row[i] = -1.0
            rows.append(row)
            rhs.append(0.0)
    for j in range(m):
        row = np.zeros(nv)
        for i in range(n):
            row[n + i * m + j] = -1.0
        rows.append(row)
        rhs.append(-float(inst.demands[j]))
    if caps is not None:
        for i in range(n):
            row = np.zeros(nv)
            row[i] = 1.0
            rows.append(row)
            rhs.append(float(caps[i]))

    res = linprog(c, A_ub=np.array(rows), b_ub=np.array(rhs), bounds=(0, None), method="highs")
    if not res.success:
        raise ValueError(f"oracle LP did not solve: {res.message}")
    return float(res.fun)


def cheapest_fill_cost(ci: CappedInstance, y: np.ndarray) -> float | None:
    """Connection cost of an opening vector, or None if some client cannot be served.

    Each client takes units from its cheapest sites first, at most y_i units
    per site.  Written with plain python loops on purpose.
    """
    total = 0.0
    for j in range(ci.base.m):
        need = int(ci.base.demands[j])
        by_price = sorted(range(ci.base.n), key=lambda i: (ci.base.dist[i, j], i))
        for i in by_price:
            take = min(int(y[i]), need)
            total += take * float(ci.base.dist[i, j])
            need -= take
            if need == 0:
                break
        if need > 0:
            return None
    return total


def enumerate_optimum(ci: CappedInstance) -> tuple[float, np.ndarray]:
    """Exhaustive optimum over all opening vectors 0 <= y_i <= cap_i.

    Returns (cost, y) with y the lexicographically smallest vector attaining
    the optimum.  Only usable when prod(cap_i + 1) is small.
    """
    best_cost = None
    best_y = None
    ranges = [range(int(c) + 1) for c in ci.caps]
    for combo in itertools.product(*ranges):
        y = np.array(combo, dtype=np.int64)
        conn = cheapest_fill_cost(ci, y)
        if conn is None:
            continue
        cost = float(ci.base.site_costs @ y) + conn
        if best_cost is None or cost < best_cost - 1e-12:
            best_cost = cost
            best_y = y
    if best_cost is None:
        raise ValueError("no feasible opening vector")
    return best_cost, best_y


def matching_assignment_cost(inst: Instance, y: np.ndarray) -> float:
    """Connection cost via per-client bipartite matching (Hungarian method).

    Client j's demand units are matched to distinct facility slots; site i
    contributes y_i identical slots at price d_ij.  Optimal per client because
    clients do not compete for slots.
    """
    slots = np.repeat(np.arange(inst.n), y.astype(int))
    total = 0.0
    for j in range(inst.m):
        r = int(inst.demands[j])
        if r == 0:
            continue
        if slots.size < r:
            raise ValueError(f"client {j} cannot reach {r} facilities")
        cost = np.tile(inst.dist[slots, j], (r, 1))
        rows, cols = linear_sum_assignment(cost)
        total += float(cost[rows, cols].sum())
    return total


def metric_violation(dist: np.ndarray) -> float:
    """Worst violation of d_ij <= d_il + d_kl + d_kj over all (i, j, k, l).

    Quadruple loop on purpose; the package uses a vectorized min-reduction.
    """
    n, m = dist.shape
    worst = 0.0
    for i in range(n):
        for j in range(m):
            for k in range(n):
                for l in range(m):
                    worst = max(worst, dist[i, j] - (dist[i, l] + dist[k, l] + dist[k, j]))
    return worst
