"""Independent reference computations used by the tests.

Nothing here calls into the package's solvers: LPs are checked by vertex
enumeration, MILPs by exhaustive enumeration, and the small networks are
wired by hand.
"""

from __future__ import annotations

import itertools

import numpy as np

from relayhub.network import Arc, CostTable, Horizon, Network, Node, NodeKind
from relayhub.scenarios import Scenario, ScenarioSet


def random_standard_lp(rng: np.random.Generator, m: int, n: int):
    """Feasible, bounded LP ``min c'x, A x = b, x >= 0``.

    Feasibility comes from ``b = A x0`` with ``x0 >= 0``; boundedness from
    ``c = A'y + s`` with ``s >= 0`` (a dual-feasible point exists).
    """
    A = np.round(rng.uniform(-5, 5, (m, n)), 2)
    x0 = np.where(rng.random(n) < 0.5, 0.0, rng.uniform(0, 4, n))
    b = A @ x0
    y = rng.uniform(-2, 2, m)
    s = rng.uniform(0, 3, n)
    c = A.T @ y + s
    return c, A, b


def vertex_enumeration(c, A, b, tol=1e-9):
    """Optimal value of ``min c'x, A x = b, x >= 0`` over basic feasible
    solutions. ``A`` must have full row rank."""
    m, n = A.shape
    best = np.inf
    for basis in itertools.combinations(range(n), m):
        B = A[:, basis]
        if abs(np.linalg.det(B)) < 1e-10:
            continue
        xb = np.linalg.solve(B, b)
        if np.all(xb >= -tol * max(1.0, np.abs(xb).max())):
            best = min(best, float(c[list(basis)] @ xb))
    return best


def brute_force_binary(c, A, senses, rhs, tol=1e-9):
    """Exhaustive minimum over {0,1}^n for a pure binary program."""
    n = len(c)
    best, arg = np.inf, None
    for bits in itertools.product((0.0, 1.0), repeat=n):
        x = np.array(bits)
        ax = A @ x
        ok = all(
            (s == "L" and v <= r + tol) or (s == "G" and v >= r - tol) or (s == "E" and abs(v - r) <= tol)
            for s, v, r in zip(senses, ax, rhs)
        )
        if ok and c @ x < best:
            best, arg = float(c @ x), x
    return best, arg


def two_route_network(hours_a=(1.0, 1.0), hours_b=(1.5, 1.5)) -> Network:
    """Origin 0 and destination 1 linked through hub 2 (route A) or hub 3
    (route B); no hub-hub arcs."""
    nodes = (
        Node(0, NodeKind.ORIGIN),
        Node(1, NodeKind.DESTINATION),
        Node(2, NodeKind.HUB),
        Node(3, NodeKind.HUB),
    )
    arcs = (
        Arc(0, 2, hours_a[0], hours_a[0] * 50),
        Arc(2, 1, hours_a[1], hours_a[1] * 50),
        Arc(0, 3, hours_b[0], hours_b[0] * 50),
        Arc(3, 1, hours_b[1], hours_b[1] * 50),
    )
    return Network(nodes, arcs, ((0, 1),), (1.0,))


def two_route_costs(penalty: float, cap_a: float = 1.0, cap_b: float = 10.0) -> CostTable:
    hub_cost = np.zeros((2, 2, 2))
    return CostTable(
        hub_cost=hub_cost,
        flow_unit_cost=1.0,
        extra_penalty=np.array([penalty, penalty]),
        level_capacity=np.array([[0.0, cap_a], [0.0, cap_b]]),
    )


def single_scenario_set(network: Network, demand, seasons: int = 1) -> ScenarioSet:
    """Deterministic scenario set: one scenario per season with the given
    (periods, n_od) demand and no disruption."""
    demand = np.asarray(demand, dtype=np.int64)
    Tt = demand.shape[0]
    scen = Scenario(
        1.0,
        demand,
        np.ones((Tt, len(network.arcs))),
        np.zeros((Tt, len(network.hubs)), dtype=bool),
    )
    return ScenarioSet(tuple((scen,) for _ in range(seasons)))


def unit_horizon(seasons: int = 1, periods: int = 1) -> Horizon:
    return Horizon(seasons, periods, days_per_period=1)


def sample_plans(n_hubs: int, n_levels: int, seasons: int, static: bool):
    """Every level assignment (H, T); static plans keep one level per hub."""
    if static:
        for levels in itertools.product(range(n_levels), repeat=n_hubs):
            yield np.repeat(np.array(levels)[:, None], seasons, axis=1)
    else:
        for flat in itertools.product(range(n_levels), repeat=n_hubs * seasons):
            yield np.array(flat).reshape(n_hubs, seasons)
