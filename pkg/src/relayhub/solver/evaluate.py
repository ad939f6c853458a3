"""Second-stage evaluation of a fixed capacity plan and plan enumeration."""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ..model import CapacityPlan, Mode, SecondStage, _block_template, flow_pairs
from ..network import CostTable, Horizon, Network
from ..scenarios import ScenarioSet
from .simplex import LpStatus, simplex


class PlanInfeasibleError(RuntimeError):
    def __init__(self, season, scenario, period, status):
        super().__init__(f"plan infeasible in season {season}, scenario {scenario}, period {period} ({status})")
        self.where = (season, scenario, period)


class EnumerationLimitError(ValueError):
    """Too many plans to enumerate."""


@dataclass
class FixedPlanResult:
    expected_cost: float
    period_costs: list[np.ndarray]  # [t] -> (n_scenarios, periods), unweighted
    second_stage: SecondStage


class _PeriodLp:
    """Routing LP of one operational period with capacities fixed."""

    def __init__(self, network: Network, costs: CostTable, m_days: int, prune: bool, lp_backend: str):
        self.network = network
        self.costs = costs
        self.m_days = m_days
        self.pairs = flow_pairs(network, prune)
        rows, cols, vals, n_rows, nf = _block_template(network, self.pairs)
        H = len(network.hubs)
        P = len(network.od_pairs)
        e_rows = 2 * P + H * P + np.arange(H)
        rows = np.concatenate([rows, e_rows])
        cols = np.concatenate([cols, nf + np.arange(H)])
        vals = np.concatenate([vals, np.full(H, -float(m_days))])
        self.A = sp.csr_matrix((vals, (rows, cols)), shape=(n_rows, nf + H))
        self.senses = np.array(["E"] * (2 * P + H * P) + ["L"] * H)
        self.nf, self.H, self.P = nf, H, P
        e_ub = np.inf if costs.extra_upper_bound is None else float(costs.extra_upper_bound)
        self.lb = np.zeros(nf + H)
        self.ub = np.concatenate([np.full(nf, np.inf), np.full(H, e_ub)])
        self.lp_backend = lp_backend

    def solve(self, demand, travel_times, capacity):
        """Returns (status, value, flows (P, A), extras (H,))."""
        q = np.asarray(demand, dtype=float)
        rhs = np.concatenate([q, q, np.zeros(self.H * self.P), self.m_days * capacity])
        c = np.concatenate(
            [self.costs.flow_unit_cost * travel_times[self.pairs[:, 1]], self.costs.extra_penalty]
        )
        if self.lp_backend == "highs":
            status, x = _highs_lp(c, self.A, self.senses, rhs, self.lb, self.ub)
        else:
            sol = simplex(c, self.A, self.senses, rhs, self.lb, self.ub)
            status, x = sol.status, sol.x
        if status is not LpStatus.OPTIMAL:
            return status, math.nan, None, None
        flows = np.zeros((self.P, len(self.network.arcs)))
        flows[self.pairs[:, 0], self.pairs[:, 1]] = x[: self.nf]
        return status, float(c @ x), flows, x[self.nf :].copy()


def _highs_lp(c, A, senses, rhs, lb, ub):
    from scipy.optimize import linprog

    eq = senses == "E"
    le = senses == "L"
    res = linprog(
        c,
        A_ub=A[le] if le.any() else None,
        b_ub=rhs[le] if le.any() else None,
        A_eq=A[eq] if eq.any() else None,
        b_eq=rhs[eq] if eq.any() else None,
        bounds=np.column_stack([lb, ub]),
        method="highs",
    )
    if res.status == 0:
        return LpStatus.OPTIMAL, res.x
    return (LpStatus.INFEASIBLE if res.status == 2 else LpStatus.UNBOUNDED), None


def evaluate_fixed_plan(
    plan: CapacityPlan,
    network: Network,
    scenarios: ScenarioSet,
    costs: CostTable,
    horizon: Horizon,
    prune: bool = True,
    lp_backend: str = "simplex",
    workers: int = 1,
) -> FixedPlanResult:
    """Expected routing-plus-penalty cost of ``plan``.

    Every (season, scenario, period) is an independent LP; results are
    gathered in canonical order so the sum does not depend on ``workers``.
    """
    lp = _PeriodLp(network, costs, horizon.days_per_period, prune, lp_backend)
    cap = plan.capacity(costs)
    Tt = horizon.periods_per_season
    tasks = [
        (t, w, phi)
        for t in range(horizon.seasons)
        for w in range(len(scenarios[t]))
        for phi in range(Tt)
    ]
    tt_cache = {}

    def run(task):
        t, w, phi = task
        scen = scenarios[t][w]
        if (t, w) not in tt_cache:
            tt_cache[(t, w)] = scen.travel_times(network)
        return lp.solve(scen.demand[phi], tt_cache[(t, w)][phi], cap[:, t])

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, tasks))
    else:
        results = [run(task) for task in tasks]

    period_costs = [np.zeros((len(scenarios[t]), Tt)) for t in range(horizon.seasons)]
    flows = [[np.zeros((Tt, len(network.od_pairs), len(network.arcs))) for _ in scenarios[t]] for t in range(horizon.seasons)]
    extras = [[np.zeros((Tt, len(network.hubs))) for _ in scenarios[t]] for t in range(horizon.seasons)]
    for (t, w, phi), (status, value, f, e) in zip(tasks, results):
        if status is not LpStatus.OPTIMAL:
            raise PlanInfeasibleError(t, w, phi, status.value)
        period_costs[t][w, phi] = value
        flows[t][w][phi] = f
        extras[t][w][phi] = e
    expected = 0.0
    for t in range(horizon.seasons):
        for w, scen in enumerate(scenarios[t]):
            expected += scen.probability * float(period_costs[t][w].sum())
    return FixedPlanResult(expected, period_costs, SecondStage(flows, extras))


def enumerate_plans(
    network: Network,
    scenarios: ScenarioSet,
    costs: CostTable,
    horizon: Horizon,
    caps: int = 10**6,
    mode: Mode | str = Mode.DYNAMIC,
    lp_backend: str = "simplex",
    prune: bool = True,
):
    """Brute-force the best capacity plan.

    Every level assignment is priced as hub cost plus expected second-stage
    cost. Second-stage costs depend only on a season's capacity vector, so
    they are memoized per (season, levels). Ties keep the lexicographically
    smallest plan (hub-major flattening).
    """
    mode = Mode(mode)
    H, T, L = len(network.hubs), horizon.seasons, costs.n_levels
    n_plans = L ** H if mode is Mode.STATIC else L ** (H * T)
    if n_plans > caps:
        raise EnumerationLimitError(f"{n_plans} plans exceed the enumeration cap {caps}")
    lp = _PeriodLp(network, costs, horizon.days_per_period, prune, lp_backend)
    season_cost: dict[tuple[int, tuple[int, ...]], float] = {}

    def second_stage(t, levels):
        key = (t, levels)
        if key not in season_cost:
            capv = costs.level_capacity[np.arange(H), list(levels)]
            total = 0.0
            for w, scen in enumerate(scenarios[t]):
                tt = scen.travel_times(network)
                for phi in range(horizon.periods_per_season):
                    status, value, _, _ = lp.solve(scen.demand[phi], tt[phi], capv)
                    if status is not LpStatus.OPTIMAL:
                        raise PlanInfeasibleError(t, w, phi, status.value)
                    total += scen.probability * value
            season_cost[key] = total
        return season_cost[key]

    best_plan, best_cost = None, math.inf
    if mode is Mode.STATIC:
        candidates = (np.repeat(np.array(v)[:, None], T, axis=1) for v in itertools.product(range(L), repeat=H))
    else:
        candidates = (np.array(v).reshape(H, T) for v in itertools.product(range(L), repeat=H * T))
    for levels in candidates:
        plan = CapacityPlan(levels)
        cost = plan.hub_cost(costs) + sum(second_stage(t, tuple(levels[:, t].tolist())) for t in range(T))
        if cost < best_cost - 1e-9 * max(1.0, abs(best_cost) if math.isfinite(best_cost) else 1.0):
            best_plan, best_cost = plan, cost
    return best_plan, best_cost
