"""Economic, operational and environmental metrics of a solved plan."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, fields
from typing import Sequence

import numpy as np

from .model import CapacityPlan, SecondStage
from .network import CostTable, Horizon, Network
from .scenarios import ScenarioSet

FLOW_EPS = 1e-9


@dataclass(frozen=True)
class EnvFactors:
    vehicles_per_truck: float = 8.0
    mpg: float = 6.0
    diesel_kg_per_gal: float = 3.22
    co2_kg_per_gal: float = 10.21


def fuel_and_co2(truck_miles: float, env: EnvFactors = EnvFactors()) -> tuple[float, float, float]:
    """(gallons, fuel metric tons, CO2 metric tons) for loaded truck-miles."""
    gallons = truck_miles / env.mpg
    return gallons, gallons * env.diesel_kg_per_gal / 1000.0, gallons * env.co2_kg_per_gal / 1000.0


@dataclass(frozen=True)
class PlanReport:
    total_contracted_capacity: float
    avg_hub_capacity: float
    avg_num_hubs: float
    avg_hub_connectivity: float
    hub_costs: float
    extra_capacity_usage_pct: float
    extra_capacity_usage_freq_pct: float
    transportation_costs: float
    disruption_time_pct: float
    disrupted_edge_usage_freq_pct: float
    fuel_tons: float
    co2_metric_tons: float
    total_costs: float
    penalty_costs: float
    truck_miles: float
    fuel_gallons: float

    def to_dict(self) -> dict:
        return asdict(self)

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_dict(cls, doc: dict) -> "PlanReport":
        return cls(**{f.name: float(doc[f.name]) for f in fields(cls)})

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["metric", "value"])
        for key, label, kind in TABLE_ROWS:
            wr.writerow([label, format_value(getattr(self, key), kind)])
        return buf.getvalue()


# (field, row label, format kind) in the order of the published results table
TABLE_ROWS = [
    ("total_contracted_capacity", "Total Contracted Throughput Capacity", "int"),
    ("avg_hub_capacity", "Average Hub Throughput Capacity", "2f"),
    ("avg_num_hubs", "Average Number of Hubs", "2f"),
    ("avg_hub_connectivity", "Average Hub Network Connectivity", "2f"),
    ("hub_costs", "Hub Costs ($)", "money"),
    ("extra_capacity_usage_pct", "Extra Capacity Usage Percentage (%)", "2f"),
    ("extra_capacity_usage_freq_pct", "Extra Capacity Usage Frequency (%)", "2f"),
    ("transportation_costs", "Transportation Costs ($)", "money"),
    ("disruption_time_pct", "Disruption Time Percentage (%)", "2f"),
    ("disrupted_edge_usage_freq_pct", "Disrupted Edge Usage Frequency (%)", "2f"),
    ("fuel_tons", "Fuel Consumption (tons)", "int"),
    ("co2_metric_tons", "CO2 Emissions (metric tons)", "int"),
    ("total_costs", "Total Costs ($)", "money"),
]


def format_value(v: float, kind: str) -> str:
    if kind == "2f":
        return f"{v:,.2f}"
    if kind == "money":
        return f"{v:,.0f}"
    return f"{v:,.0f}"


def _pct(num: float, den: float) -> float:
    if den <= 0:
        return 0.0 if num <= 0 else 100.0
    return 100.0 * num / den


def compute_metrics(
    plan: CapacityPlan,
    second: SecondStage,
    scenarios: ScenarioSet,
    network: Network,
    costs: CostTable,
    horizon: Horizon,
    env: EnvFactors = EnvFactors(),
) -> PlanReport:
    H, T = plan.levels.shape
    if H != len(network.hubs) or T != horizon.seasons or len(scenarios) != T:
        raise ValueError("plan, network, horizon and scenario set disagree on hubs or seasons")
    P, A = len(network.od_pairs), len(network.arcs)
    Tt = horizon.periods_per_season
    for t in range(T):
        if len(second.flows[t]) != len(scenarios[t]) or len(second.extras[t]) != len(scenarios[t]):
            raise ValueError(f"season {t}: second-stage results do not match the scenario count")
        for f, e in zip(second.flows[t], second.extras[t]):
            if f.shape != (Tt, P, A) or e.shape != (Tt, H):
                raise ValueError(f"season {t}: flow/extra arrays have the wrong shape")

    cap = plan.capacity(costs)  # (H, T)
    active = plan.levels > 0
    total_cap = float(cap.sum())
    avg_cap = float(cap[active].mean()) if active.any() else 0.0
    avg_hubs = float(active.sum(axis=0).mean())

    nbrs = network.hub_neighbors()
    conn = []
    for t in range(T):
        on = {h for i, h in enumerate(network.hubs) if active[i, t]}
        conn.append(float(np.mean([len(nbrs[h] & on) for h in on])) if on else 0.0)
    avg_conn = float(np.mean(conn))

    incidence = network.hub_incidence().astype(np.int64)  # (A, H)
    miles = network.miles
    transport = penalty = 0.0
    extra_total = extra_count = 0.0
    flow_hours = disrupted_hours = 0.0
    used_disrupted = n_disrupted = 0.0
    loaded_miles = 0.0
    for t in range(T):
        for w, scen in enumerate(scenarios[t]):
            p = scen.probability
            f_arc = second.flows[t][w].sum(axis=1)  # (periods, arcs)
            e = second.extras[t][w]
            tt = scen.travel_times(network)
            hours = f_arc * tt
            transport += p * costs.flow_unit_cost * float(hours.sum())
            penalty += p * float((e * costs.extra_penalty[None, :]).sum())
            extra_total += p * float(e.sum())
            extra_count += p * float((e > FLOW_EPS).sum())
            hit = (scen.disrupted.astype(np.int64) @ incidence.T) > 0  # (periods, arcs)
            flow_hours += p * float(hours.sum())
            disrupted_hours += p * float(hours[hit].sum())
            n_disrupted += p * float(hit.sum())
            used_disrupted += p * float((hit & (f_arc > FLOW_EPS)).sum())
            loaded_miles += p * float((f_arc * miles[None, :]).sum())

    hub = plan.hub_cost(costs)
    truck_miles = loaded_miles / env.vehicles_per_truck
    gallons, fuel_t, co2_t = fuel_and_co2(truck_miles, env)
    return PlanReport(
        total_contracted_capacity=total_cap,
        avg_hub_capacity=avg_cap,
        avg_num_hubs=avg_hubs,
        avg_hub_connectivity=avg_conn,
        hub_costs=hub,
        extra_capacity_usage_pct=_pct(extra_total, float(cap.sum()) * Tt),
        extra_capacity_usage_freq_pct=_pct(extra_count, H * T * Tt),
        transportation_costs=transport,
        disruption_time_pct=_pct(disrupted_hours, flow_hours) if disrupted_hours > 0 else 0.0,
        disrupted_edge_usage_freq_pct=_pct(used_disrupted, n_disrupted) if n_disrupted > 0 else 0.0,
        fuel_tons=fuel_t,
        co2_metric_tons=co2_t,
        total_costs=hub + transport + penalty,
        penalty_costs=penalty,
        truck_miles=truck_miles,
        fuel_gallons=gallons,
    )


@dataclass
class Comparison:
    labels: list[str]
    reports: list[PlanReport]

    def rows(self):
        for f in fields(PlanReport):
            vals = [getattr(r, f.name) for r in self.reports]
            yield f.name, vals, [v - vals[0] for v in vals[1:]]

    def to_dict(self) -> dict:
        return {
            "runs": self.labels,
            "metrics": {
                name: {
                    "values": dict(zip(self.labels, vals)),
                    "delta_vs_first": dict(zip(self.labels[1:], deltas)),
                }
                for name, vals, deltas in self.rows()
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["metric", *self.labels, *(f"delta:{lab}" for lab in self.labels[1:])])
        for name, vals, deltas in self.rows():
            wr.writerow([name, *(repr(float(v)) for v in vals), *(repr(float(d)) for d in deltas)])
        return buf.getvalue()


def compare_runs(runs: Sequence[tuple[str, PlanReport]]) -> Comparison:
    if len(runs) < 2:
        raise ValueError("comparison needs at least two reports")
    labels = [lab for lab, _ in runs]
    if len(set(labels)) != len(labels):
        raise ValueError("run labels must be unique")
    return Comparison(labels, [rep for _, rep in runs])


def plot_data_csv(levels: Sequence[str], reports: Sequence[PlanReport], metrics: Sequence[str] | None = None) -> str:
    """Long-form (level, metric, value) table for external plotting."""
    names = list(metrics) if metrics else [f.name for f in fields(PlanReport)]
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["level", "metric", "value"])
    for lev, rep in zip(levels, reports):
        for name in names:
            wr.writerow([lev, name, repr(float(getattr(rep, name)))])
    return buf.getvalue()
