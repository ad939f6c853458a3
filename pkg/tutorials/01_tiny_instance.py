# %% [markdown]
# # A tiny relay network, solved two ways
#
# Two hubs, three capacity levels, two seasons. We build the deterministic
# equivalent, solve it with the bundled branch and bound, and check the
# answer against brute-force enumeration of every capacity plan.

# %%
import numpy as np

from relayhub import build_deterministic_equivalent, enumerate_plans, extract_solution, solve_milp
from relayhub.model import audit_solution, expected_costs
from relayhub.synthetic import tiny_instance

inst = tiny_instance(seed=3, n_hubs=2, n_levels=3, n_scenarios=2, periods=2, seasons=2, n_od=1)
net = inst.network
print("hubs:", net.hubs)
print("arcs:", [(a.tail, a.head, a.base_travel_hours) for a in net.arcs])
print("capacity per level (units/day):", inst.costs.level_capacity[0])

# %% [markdown]
# The model has one binary per (hub, from-level, to-level, season) and one
# flow and extra-capacity column per scenario period.

# %%
mi = build_deterministic_equivalent(net, inst.scenarios, inst.costs, inst.horizon, mode="dynamic")
print(mi.summary())

report, x = solve_milp(mi)
print(report.status, report.incumbent, "nodes:", report.nodes)
for line in report.lines[-3:]:
    print(line)

# %% [markdown]
# Decode the column vector into a capacity plan and second-stage flows,
# then re-check every constraint independently of the matrix.

# %%
plan, second = extract_solution(mi, x)
print("levels (hub x season):\n", plan.levels)
print("audit problems:", audit_solution(mi.data, plan, second))
print("cost split:", expected_costs(mi.data, plan, second))

# %% [markdown]
# Brute force: price every chain-feasible plan with the per-period routing
# LPs and keep the cheapest.

# %%
best_plan, best_cost = enumerate_plans(net, inst.scenarios, inst.costs, inst.horizon)
print("enumeration:", best_cost, "\n", best_plan.levels)
assert np.isclose(best_cost, report.incumbent, rtol=1e-6)
