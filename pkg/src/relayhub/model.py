"""Deterministic-equivalent MILP for multi-season hub capacity planning.

Columns are laid out as all capacity-transition binaries X first (season,
hub, from-level, to-level), then one block per (season, scenario, period)
holding that block's flow columns F (OD pair major, arc minor) followed by
its extra-capacity columns E (one per hub).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp

from .network import CostTable, Horizon, Network, NodeKind
from .scenarios import ScenarioSet


class ModelError(ValueError):
    """The instance cannot be built from the given data."""


class SolutionIntegrityError(ValueError):
    """Column values do not describe a valid capacity plan."""


class Mode(str, enum.Enum):
    DYNAMIC = "dynamic"
    STATIC = "static"


class XVar(NamedTuple):
    hub: int
    from_level: int
    to_level: int
    season: int


class FVar(NamedTuple):
    od: int
    arc: int
    period: int
    scenario: int
    season: int


class EVar(NamedTuple):
    hub: int
    period: int
    scenario: int
    season: int


@dataclass(frozen=True)
class PlanningData:
    network: Network
    scenarios: ScenarioSet
    costs: CostTable
    horizon: Horizon
    mode: Mode = Mode.DYNAMIC
    prune: bool = True


@dataclass
class BlockLayout:
    """Column/row positions of one (season, scenario, period) block."""

    season: int
    scenario: int
    period: int
    f_start: int
    e_start: int
    row_start: int


@dataclass
class MilpInstance:
    """Sparse MILP: ``min c'x`` subject to rows ``A x (L|E|G) rhs``."""

    c: np.ndarray
    A: sp.csr_matrix
    senses: np.ndarray
    rhs: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    integer: np.ndarray
    name: str = "MSHCRP"
    col_names: list[str] | None = None
    row_names: list[str] | None = None
    data: PlanningData | None = field(default=None, repr=False)
    x_cols: np.ndarray | None = field(default=None, repr=False)  # (T, H, L, L)
    f_pairs: np.ndarray | None = field(default=None, repr=False)  # (n_f_per_block, 2) od, arc
    blocks: list[BlockLayout] = field(default_factory=list, repr=False)

    def __post_init__(self):
        self.A = sp.csr_matrix(self.A)
        n = self.c.size
        if self.A.shape[1] != n:
            raise ModelError("constraint matrix column count differs from objective length")
        if not (self.lb.size == self.ub.size == self.integer.size == n):
            raise ModelError("bound and integrality arrays must match the column count")
        if self.col_names is None:
            self.col_names = [f"C{j:07d}" for j in range(n)]
        if self.row_names is None:
            self.row_names = [f"R{i:07d}" for i in range(self.A.shape[0])]

    @property
    def n_cols(self) -> int:
        return self.c.size

    @property
    def n_rows(self) -> int:
        return self.A.shape[0]

    @property
    def nnz(self) -> int:
        return self.A.nnz

    def summary(self) -> str:
        return (
            f"{self.name}: rows={self.n_rows} cols={self.n_cols} "
            f"int={int(self.integer.sum())} nnz={self.nnz}"
        )

    def var_key(self, j: int):
        """Decode column ``j`` back into its X/F/E meaning."""
        if self.x_cols is None:
            raise ModelError("instance carries no variable map")
        T, H, L, _ = self.x_cols.shape
        nx = T * H * L * L
        if j < nx:
            t, h, l1, l2 = np.unravel_index(j, self.x_cols.shape)
            return XVar(int(h), int(l1), int(l2), int(t))
        nf = len(self.f_pairs)
        for blk in self.blocks:
            if blk.f_start <= j < blk.f_start + nf:
                od, a = self.f_pairs[j - blk.f_start]
                return FVar(int(od), int(a), blk.period, blk.scenario, blk.season)
            if blk.e_start <= j < blk.e_start + H:
                return EVar(j - blk.e_start, blk.period, blk.scenario, blk.season)
        raise IndexError(j)

    def column_of(self, key) -> int:
        if isinstance(key, XVar):
            return int(self.x_cols[key.season, key.hub, key.from_level, key.to_level])
        blk = self.block(key.season, key.scenario, key.period)
        if isinstance(key, EVar):
            return blk.e_start + key.hub
        hit = np.flatnonzero((self.f_pairs[:, 0] == key.od) & (self.f_pairs[:, 1] == key.arc))
        if hit.size == 0:
            raise KeyError(key)
        return blk.f_start + int(hit[0])

    def block(self, t: int, w: int, phi: int) -> BlockLayout:
        return self._block_map[(t, w, phi)]

    @property
    def _block_map(self):
        cached = getattr(self, "_bm", None)
        if cached is None:
            cached = {(b.season, b.scenario, b.period): b for b in self.blocks}
            self._bm = cached
        return cached


def flow_pairs(network: Network, prune: bool) -> np.ndarray:
    """(od, arc) index pairs that get a flow column in every block.

    With ``prune`` an OD pair gets no column on arcs leaving other origins or
    entering other destinations. That is the same as requiring conservation
    at foreign origin and destination nodes. Without it the source and sink
    rows only constrain a pair's own terminals, so a pair can enter the
    network at a co-located foreign origin and leave at a foreign
    destination, skipping the hubs it would otherwise have to pass.
    """
    pairs = []
    for k, (o, d) in enumerate(network.od_pairs):
        for a, arc in enumerate(network.arcs):
            if prune:
                tail_kind = network.kind(arc.tail)
                head_kind = network.kind(arc.head)
                if tail_kind is NodeKind.ORIGIN and arc.tail != o:
                    continue
                if head_kind is NodeKind.DESTINATION and arc.head != d:
                    continue
            pairs.append((k, a))
    return np.array(pairs, dtype=np.int64).reshape(-1, 2)


def _block_template(network: Network, pairs: np.ndarray):
    """COO entries of the source, sink, hub balance and capacity rows of one
    block, in local coordinates.

    Local columns: flow pairs then hubs (E). Local rows: source rows (P),
    sink rows (P), hub balance rows (H*P, hub major), capacity rows (H).
    """
    P = len(network.od_pairs)
    H = len(network.hubs)
    nf = len(pairs)
    rows, cols, vals = [], [], []
    for j, (k, a) in enumerate(pairs):
        arc = network.arcs[a]
        o, d = network.od_pairs[k]
        if arc.tail == o:
            rows.append(k); cols.append(j); vals.append(1.0)
        if arc.head == d:
            rows.append(P + k); cols.append(j); vals.append(1.0)
        ht = network.hub_index.get(arc.tail)
        hh = network.hub_index.get(arc.head)
        if ht is not None:
            rows.append(2 * P + ht * P + k); cols.append(j); vals.append(1.0)
        if hh is not None:
            rows.append(2 * P + hh * P + k); cols.append(j); vals.append(-1.0)
            rows.append(2 * P + H * P + hh); cols.append(j); vals.append(1.0)
    n_rows = 2 * P + H * P + H
    return np.array(rows, dtype=np.int64), np.array(cols, dtype=np.int64), np.array(vals), n_rows, nf


def build_deterministic_equivalent(
    network: Network,
    scenarios: ScenarioSet,
    costs: CostTable,
    horizon: Horizon,
    mode: Mode | str = Mode.DYNAMIC,
    prune: bool = True,
) -> MilpInstance:
    mode = Mode(mode)
    T = horizon.seasons
    H = len(network.hubs)
    P = len(network.od_pairs)
    if len(scenarios) != T:
        raise ModelError(f"scenario set has {len(scenarios)} seasons, horizon has {T}")
    if costs.n_hubs != H:
        raise ModelError(f"cost table covers {costs.n_hubs} hubs, network has {H}")
    L = costs.n_levels
    for t in range(T):
        if not scenarios[t]:
            raise ModelError(f"season {t} has an empty scenario set")
        for w, s in enumerate(scenarios[t]):
            if s.n_periods != horizon.periods_per_season:
                raise ModelError(f"scenario {w} of season {t} has {s.n_periods} periods")
            if s.demand.shape[1] != P or s.multipliers.shape[1] != len(network.arcs):
                raise ModelError(f"scenario {w} of season {t} does not match the network")
    m_days = horizon.days_per_period

    # --- capacity-transition binaries
    nx = T * H * L * L
    x_cols = np.arange(nx).reshape(T, H, L, L)
    c_parts = [np.tile(costs.hub_cost.reshape(-1), T)]
    lb_parts = [np.zeros(nx)]
    ub_x = np.ones((T, H, L, L))
    ub_x[0, :, 1:, :] = 0.0  # start from the empty level
    if mode is Mode.STATIC:
        off = ~np.eye(L, dtype=bool)
        ub_x[1:, :, off] = 0.0
    ub_parts = [ub_x.reshape(-1)]
    int_parts = [np.ones(nx, dtype=bool)]

    rows, cols, vals = [], [], []
    senses, rhs = [], []
    row = 0
    # one transition per hub and season
    for t in range(T):
        for h in range(H):
            idx = x_cols[t, h].reshape(-1)
            rows.append(np.full(idx.size, row)); cols.append(idx); vals.append(np.ones(idx.size))
            senses.append("E"); rhs.append(1.0)
            row += 1
    # chain: level reached at t-1 is the level left at t
    for t in range(1, T):
        for h in range(H):
            for l in range(L):
                into = x_cols[t - 1, h, :, l]
                out = x_cols[t, h, l, :]
                rows.append(np.full(2 * L, row))
                cols.append(np.concatenate([into, out]))
                vals.append(np.concatenate([np.ones(L), -np.ones(L)]))
                senses.append("E"); rhs.append(0.0)
                row += 1

    pairs = flow_pairs(network, prune)
    trow, tcol, tval, n_brows, nf = _block_template(network, pairs)
    base = network.base_hours
    col = nx
    blocks = []
    cap = costs.level_capacity  # (H, L)
    sense_block = np.array(["E"] * (2 * P + H * P) + ["L"] * H)
    x_cap_rows, x_cap_cols, x_cap_vals = [], [], []
    for t in range(T):
        # -m * u[h, l2] on every X(h, l1, l2, t)
        xc = x_cols[t].reshape(H, L * L)
        xv = -m_days * np.broadcast_to(cap[:, None, :], (H, L, L)).reshape(H, L * L)
        for w, scen in enumerate(scenarios[t]):
            tt = scen.travel_times(network)
            for phi in range(horizon.periods_per_season):
                blk = BlockLayout(t, w, phi, col, col + nf, row)
                blocks.append(blk)
                rows.append(trow + row); cols.append(tcol + col); vals.append(tval)
                cap_row0 = row + 2 * P + H * P
                # E columns in capacity rows
                rows.append(cap_row0 + np.arange(H)); cols.append(col + nf + np.arange(H)); vals.append(np.full(H, -float(m_days)))
                x_cap_rows.append(np.repeat(cap_row0 + np.arange(H), L * L))
                x_cap_cols.append(xc.reshape(-1))
                x_cap_vals.append(xv.reshape(-1))
                q = scen.demand[phi].astype(float)
                rhs.extend(q.tolist()); rhs.extend(q.tolist())
                rhs.extend([0.0] * (H * P + H))
                senses.extend(sense_block.tolist())
                c_parts.append(scen.probability * costs.flow_unit_cost * tt[phi, pairs[:, 1]])
                c_parts.append(scen.probability * costs.extra_penalty)
                lb_parts.append(np.zeros(nf + H))
                e_ub = np.inf if costs.extra_upper_bound is None else float(costs.extra_upper_bound)
                ub_parts.append(np.concatenate([np.full(nf, np.inf), np.full(H, e_ub)]))
                int_parts.append(np.zeros(nf + H, dtype=bool))
                col += nf + H
                row += n_brows

    rows += x_cap_rows
    cols += x_cap_cols
    vals += x_cap_vals
    A = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(row, col)
    )
    A.eliminate_zeros()
    return MilpInstance(
        c=np.concatenate(c_parts),
        A=A,
        senses=np.array(senses),
        rhs=np.array(rhs, dtype=float),
        lb=np.concatenate(lb_parts),
        ub=np.concatenate(ub_parts),
        integer=np.concatenate(int_parts),
        name=f"MSHCRP-{mode.value}",
        data=PlanningData(network, scenarios, costs, horizon, mode, prune),
        x_cols=x_cols,
        f_pairs=pairs,
        blocks=blocks,
    )


@dataclass(frozen=True)
class CapacityPlan:
    """Contracted level per hub (rows) and season (columns)."""

    levels: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "levels", np.asarray(self.levels, dtype=np.int64))

    def level(self, h: int, t: int) -> int:
        return int(self.levels[h, t])

    def from_level(self, h: int, t: int) -> int:
        return 0 if t == 0 else int(self.levels[h, t - 1])

    def capacity(self, costs: CostTable) -> np.ndarray:
        """Contracted units/day, shape (hubs, seasons)."""
        H = self.levels.shape[0]
        return costs.level_capacity[np.arange(H)[:, None], self.levels]

    def hub_cost(self, costs: CostTable) -> float:
        H, T = self.levels.shape
        prev = np.concatenate([np.zeros((H, 1), dtype=np.int64), self.levels[:, :-1]], axis=1)
        return float(costs.hub_cost[np.arange(H)[:, None], prev, self.levels].sum())

    def is_static(self) -> bool:
        return bool((self.levels == self.levels[:, :1]).all())

    def x_values(self, n_levels: int) -> np.ndarray:
        """Binary transition array shaped (T, H, L, L)."""
        H, T = self.levels.shape
        x = np.zeros((T, H, n_levels, n_levels))
        for h in range(H):
            for t in range(T):
                x[t, h, self.from_level(h, t), self.level(h, t)] = 1.0
        return x

    def to_dict(self, costs: CostTable | None = None) -> dict:
        doc = {"levels": self.levels.tolist()}
        if costs is not None:
            doc["capacity"] = self.capacity(costs).tolist()
        return doc


@dataclass
class SecondStage:
    """Flows ``flows[t][w]`` shaped (periods, n_od, n_arcs) and extras
    ``extras[t][w]`` shaped (periods, n_hubs)."""

    flows: list[list[np.ndarray]]
    extras: list[list[np.ndarray]]

    def scaled(self, factor: float) -> "SecondStage":
        return SecondStage(
            [[f * factor for f in season] for season in self.flows],
            [[e * factor for e in season] for season in self.extras],
        )


def extract_solution(instance: MilpInstance, values, int_tol: float = 1e-6):
    """Map column values back to (CapacityPlan, SecondStage)."""
    if instance.data is None or instance.x_cols is None:
        raise ModelError("instance carries no variable map (built elsewhere or imported)")
    data = instance.data
    x = np.asarray(values, dtype=float)
    T, H, L, _ = instance.x_cols.shape
    xv = x[instance.x_cols]
    if np.any(np.abs(xv - np.round(xv)) > int_tol):
        bad = np.argwhere(np.abs(xv - np.round(xv)) > int_tol)[0]
        raise SolutionIntegrityError(
            f"fractional capacity decision X(h={bad[1]}, {bad[2]}->{bad[3]}, t={bad[0]}) = {xv[tuple(bad)]:.6g}"
        )
    xb = np.round(xv).astype(np.int64)
    levels = np.zeros((H, T), dtype=np.int64)
    for t in range(T):
        for h in range(H):
            ones = np.argwhere(xb[t, h] == 1)
            if len(ones) != 1 or xb[t, h].sum() != 1:
                raise SolutionIntegrityError(f"hub {h} season {t}: expected one active transition, found {len(ones)}")
            l1, l2 = ones[0]
            expected_from = 0 if t == 0 else levels[h, t - 1]
            if l1 != expected_from:
                raise SolutionIntegrityError(
                    f"hub {h} season {t}: transition leaves level {l1} but previous level is {expected_from}"
                )
            levels[h, t] = l2
    plan = CapacityPlan(levels)

    net = data.network
    P, A = len(net.od_pairs), len(net.arcs)
    nf = len(instance.f_pairs)
    Tt = data.horizon.periods_per_season
    flows = [[np.zeros((Tt, P, A)) for _ in data.scenarios[t]] for t in range(T)]
    extras = [[np.zeros((Tt, H)) for _ in data.scenarios[t]] for t in range(T)]
    for blk in instance.blocks:
        f = flows[blk.season][blk.scenario]
        f[blk.period, instance.f_pairs[:, 0], instance.f_pairs[:, 1]] = x[blk.f_start : blk.f_start + nf]
        extras[blk.season][blk.scenario][blk.period] = x[blk.e_start : blk.e_start + H]
    return plan, SecondStage(flows, extras)


def plan_columns(instance: MilpInstance, plan: CapacityPlan, second: SecondStage) -> np.ndarray:
    """Inverse of extract_solution: the column vector for a plan and its flows."""
    x = np.zeros(instance.n_cols)
    T, H, L, _ = instance.x_cols.shape
    x[instance.x_cols.reshape(-1)] = plan.x_values(L).reshape(-1)
    nf = len(instance.f_pairs)
    for blk in instance.blocks:
        f = second.flows[blk.season][blk.scenario][blk.period]
        x[blk.f_start : blk.f_start + nf] = f[instance.f_pairs[:, 0], instance.f_pairs[:, 1]]
        x[blk.e_start : blk.e_start + H] = second.extras[blk.season][blk.scenario][blk.period]
    return x


def expected_costs(data: PlanningData, plan: CapacityPlan, second: SecondStage) -> dict[str, float]:
    """Hub, transport and penalty parts of the expected total cost,
    recomputed directly from domain objects."""
    net, costs = data.network, data.costs
    transport = 0.0
    penalty = 0.0
    for t, season in enumerate(data.scenarios.seasons):
        for w, scen in enumerate(season):
            tt = scen.travel_times(net)  # (periods, arcs)
            f = second.flows[t][w]
            transport += scen.probability * costs.flow_unit_cost * float((f.sum(axis=1) * tt).sum())
            penalty += scen.probability * float((second.extras[t][w] * costs.extra_penalty[None, :]).sum())
    hub = plan.hub_cost(costs)
    return {"hub": hub, "transport": transport, "penalty": penalty, "total": hub + transport + penalty}


def audit_solution(data: PlanningData, plan: CapacityPlan, second: SecondStage, tol: float = 1e-6) -> list[str]:
    """Re-check routing, hub balance, capacity and plan-structure rules
    directly on domain objects. Returns one message per violation."""
    net, costs, hz = data.network, data.costs, data.horizon
    problems = []
    H, T = plan.levels.shape
    L = costs.n_levels
    if (plan.levels < 0).any() or (plan.levels >= L).any():
        problems.append("plan uses a level outside the level set")
        return problems
    if data.mode is Mode.STATIC and not plan.is_static():
        problems.append("static plan changes level after the first season")
    cap = plan.capacity(costs)
    P = len(net.od_pairs)
    out_of = {h: list(net.out_arcs[h]) for h in net.hubs}
    in_of = {h: list(net.in_arcs[h]) for h in net.hubs}
    # arcs a pair may not use: out of another origin or into another destination
    foreign = np.ones((P, len(net.arcs)), dtype=bool)
    foreign[tuple(flow_pairs(net, prune=True).T)] = False
    for t, season in enumerate(data.scenarios.seasons):
        for w, scen in enumerate(season):
            f = second.flows[t][w]
            e = second.extras[t][w]
            if (f < -tol).any():
                problems.append(f"negative flow in season {t} scenario {w}")
            if (e < -tol).any():
                problems.append(f"negative extra capacity in season {t} scenario {w}")
            if (f[:, foreign] > tol).any():
                problems.append(f"flow through a foreign origin or destination in season {t} scenario {w}")
            for phi in range(hz.periods_per_season):
                for k, (o, d) in enumerate(net.od_pairs):
                    q = scen.demand[phi, k]
                    sent = f[phi, k, list(net.out_arcs[o])].sum()
                    got = f[phi, k, list(net.in_arcs[d])].sum()
                    if abs(sent - q) > tol * max(1.0, q):
                        problems.append(f"source imbalance {o}→{d} t={t} w={w} φ={phi}: {sent} vs {q}")
                    if abs(got - q) > tol * max(1.0, q):
                        problems.append(f"sink imbalance {o}→{d} t={t} w={w} φ={phi}: {got} vs {q}")
                for hi, h in enumerate(net.hubs):
                    bal = f[phi, :, out_of[h]].sum(axis=0) - f[phi, :, in_of[h]].sum(axis=0)
                    if np.abs(bal).max(initial=0.0) > tol * max(1.0, np.abs(scen.demand[phi]).max(initial=0)):
                        problems.append(f"hub {h} balance t={t} w={w} φ={phi}: residual {np.abs(bal).max():.3g}")
                    inflow = f[phi, :, in_of[h]].sum()
                    limit = hz.days_per_period * (cap[hi, t] + e[phi, hi])
                    if inflow > limit + tol * max(1.0, limit):
                        problems.append(f"hub {h} capacity t={t} w={w} φ={phi}: {inflow} > {limit}")
    return problems
