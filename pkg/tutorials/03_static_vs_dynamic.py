# %% [markdown]
# # Static versus dynamic capacity plans
#
# A static plan keeps each hub's level for the whole horizon; a dynamic plan
# may change it every season at a transition cost. The static feasible set
# is a subset of the dynamic one, so the dynamic optimum can only be lower.

# %%
from relayhub import build_deterministic_equivalent, compare_runs, compute_metrics, extract_solution, solve_milp
from relayhub.synthetic import tiny_instance

inst = tiny_instance(seed=8, n_hubs=3, n_levels=3, n_scenarios=2, periods=2, seasons=2, n_od=2, rate=0.3)

runs = []
for mode in ("dynamic", "static"):
    mi = build_deterministic_equivalent(inst.network, inst.scenarios, inst.costs, inst.horizon, mode)
    rep, x = solve_milp(mi)
    plan, second = extract_solution(mi, x)
    print(mode, rep.incumbent, "\n", plan.levels)
    runs.append((mode, compute_metrics(plan, second, inst.scenarios, inst.network, inst.costs, inst.horizon)))

# %% [markdown]
# The comparison table has one column per run plus deltas against the
# first run.

# %%
table = compare_runs(runs)
print(table.to_csv())

# %% [markdown]
# The same report in the row layout of the published results table:

# %%
print(runs[0][1].to_csv())
