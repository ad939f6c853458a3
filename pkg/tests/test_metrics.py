import json

import numpy as np
import pytest
from oracles import single_scenario_set, two_route_costs, two_route_network, unit_horizon

from relayhub.metrics import EnvFactors, PlanReport, compare_runs, compute_metrics, fuel_and_co2, plot_data_csv
from relayhub.model import CapacityPlan, Mode, build_deterministic_equivalent, extract_solution
from relayhub.solver import evaluate_fixed_plan, solve_milp
from relayhub.synthetic import tiny_instance


def solved(inst, mode=Mode.DYNAMIC):
    mi = build_deterministic_equivalent(inst.network, inst.scenarios, inst.costs, inst.horizon, mode)
    rep, x = solve_milp(mi)
    plan, second = extract_solution(mi, x)
    return rep, plan, second


def test_fuel_and_co2_arithmetic():
    gallons, fuel, co2 = fuel_and_co2(100.0)
    assert gallons == pytest.approx(16.6667, abs=1e-4)
    assert fuel == pytest.approx(0.0537, abs=5e-5)
    assert co2 == pytest.approx(0.1702, abs=5e-5)


def test_zero_demand_report():
    inst = tiny_instance(0)
    zero = np.zeros((inst.horizon.periods_per_season, 1))
    sset = single_scenario_set(inst.network, zero, seasons=2)
    plan = CapacityPlan(np.array([[1, 1], [0, 2]]))
    second = evaluate_fixed_plan(plan, inst.network, sset, inst.costs, inst.horizon).second_stage
    rep = compute_metrics(plan, second, sset, inst.network, inst.costs, inst.horizon)
    assert rep.transportation_costs == rep.penalty_costs == rep.fuel_tons == rep.co2_metric_tons == 0
    assert rep.extra_capacity_usage_pct == 0
    assert rep.hub_costs == pytest.approx(plan.hub_cost(inst.costs))
    assert rep.total_costs == pytest.approx(rep.hub_costs)


def test_extra_usage_hand_slice():
    # 1 period, hub A contracted at 1 unit/day, E = 1 there
    net = two_route_network()
    costs = two_route_costs(0.5, cap_a=1.0, cap_b=10.0)
    sset = single_scenario_set(net, [[2]])
    plan = CapacityPlan(np.array([[1], [0]]))
    res = evaluate_fixed_plan(plan, net, sset, costs, unit_horizon())
    np.testing.assert_allclose(res.second_stage.extras[0][0], [[1.0, 0.0]])
    rep = compute_metrics(plan, res.second_stage, sset, net, costs, unit_horizon())
    assert rep.extra_capacity_usage_pct == pytest.approx(100.0)
    assert rep.extra_capacity_usage_freq_pct == pytest.approx(50.0)  # 1 of 2 hub-periods
    assert rep.total_contracted_capacity == 1.0
    assert rep.avg_num_hubs == 1.0


def test_total_cost_identity_and_objective():
    inst = tiny_instance(3, n_hubs=3, n_od=2, rate=0.4)
    bnb, plan, second = solved(inst)
    rep = compute_metrics(plan, second, inst.scenarios, inst.network, inst.costs, inst.horizon)
    assert rep.total_costs == pytest.approx(rep.hub_costs + rep.transportation_costs + rep.penalty_costs, rel=1e-12)
    assert rep.total_costs == pytest.approx(bnb.incumbent, rel=1e-6)
    for name in ("disruption_time_pct", "disrupted_edge_usage_freq_pct", "extra_capacity_usage_freq_pct"):
        assert 0.0 <= getattr(rep, name) <= 100.0


def test_zero_rate_gives_zero_disruption_metrics():
    inst = tiny_instance(4, n_hubs=3, rate=0.0)
    _, plan, second = solved(inst)
    rep = compute_metrics(plan, second, inst.scenarios, inst.network, inst.costs, inst.horizon)
    assert rep.disruption_time_pct == 0.0
    assert rep.disrupted_edge_usage_freq_pct == 0.0


def test_fuel_linear_in_flows():
    inst = tiny_instance(5, n_hubs=2)
    _, plan, second = solved(inst)
    args = (inst.scenarios, inst.network, inst.costs, inst.horizon)
    one = compute_metrics(plan, second, *args)
    two = compute_metrics(plan, second.scaled(2.0), *args)
    assert two.fuel_tons == pytest.approx(2 * one.fuel_tons, rel=1e-12)
    assert two.co2_metric_tons == pytest.approx(2 * one.co2_metric_tons, rel=1e-12)


def test_truck_miles_hand_computed():
    inst = tiny_instance(6, n_hubs=2)
    _, plan, second = solved(inst)
    env = EnvFactors(vehicles_per_truck=4.0)
    rep = compute_metrics(plan, second, inst.scenarios, inst.network, inst.costs, inst.horizon, env)
    miles = np.array([a.miles for a in inst.network.arcs])
    loaded = sum(
        s.probability * float((second.flows[t][w].sum(axis=1) * miles).sum())
        for t, season in enumerate(inst.scenarios.seasons)
        for w, s in enumerate(season)
    )
    assert rep.truck_miles == pytest.approx(loaded / 4.0)


def test_shape_mismatch_rejected():
    inst = tiny_instance(0)
    _, plan, second = solved(inst)
    other = tiny_instance(0, n_hubs=3)
    with pytest.raises(ValueError):
        compute_metrics(plan, second, inst.scenarios, other.network, inst.costs, inst.horizon)


def test_report_serialization():
    inst = tiny_instance(2)
    _, plan, second = solved(inst)
    rep = compute_metrics(plan, second, inst.scenarios, inst.network, inst.costs, inst.horizon)
    assert PlanReport.from_dict(json.loads(rep.dumps())) == rep
    lines = rep.to_csv().splitlines()
    assert lines[0] == "metric,value"
    assert lines[1].startswith("Total Contracted Throughput Capacity,")
    assert any(ln.startswith('"CO2 Emissions (metric tons)"') or ln.startswith("CO2 Emissions") for ln in lines)


def test_compare_runs():
    inst = tiny_instance(8, n_hubs=3, n_od=2)
    reports = {}
    for mode in Mode:
        _, plan, second = solved(inst, mode)
        reports[mode.value] = compute_metrics(plan, second, inst.scenarios, inst.network, inst.costs, inst.horizon)
    same = compare_runs([("a", reports["dynamic"]), ("b", reports["dynamic"])])
    assert all(d == [0.0] for _, _, d in same.rows())
    cmp = compare_runs([("dynamic", reports["dynamic"]), ("static", reports["static"])])
    assert reports["dynamic"].total_costs <= reports["static"].total_costs + 1e-6
    doc = cmp.to_dict()
    assert doc["metrics"]["total_costs"]["delta_vs_first"]["static"] >= -1e-6
    assert cmp.to_csv().splitlines()[0] == "metric,dynamic,static,delta:static"
    with pytest.raises(ValueError):
        compare_runs([("only", reports["dynamic"])])


def test_plot_data_long_form():
    inst = tiny_instance(1)
    _, plan, second = solved(inst)
    rep = compute_metrics(plan, second, inst.scenarios, inst.network, inst.costs, inst.horizon)
    text = plot_data_csv(["low", "high"], [rep, rep], ["total_costs", "fuel_tons"])
    assert text.splitlines() == [
        "level,metric,value",
        f"low,total_costs,{rep.total_costs!r}",
        f"low,fuel_tons,{rep.fuel_tons!r}",
        f"high,total_costs,{rep.total_costs!r}",
        f"high,fuel_tons,{rep.fuel_tons!r}",
    ]
