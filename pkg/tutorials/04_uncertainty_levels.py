# %% [markdown]
# # Three uncertainty levels
#
# Low uncertainty has no disruptions; medium uses rate 0.05 and intensity
# 1.5; high keeps the rate and raises the intensity to 15. With the seed
# fixed, the disruption pattern is identical across levels and only the
# slowdown factor changes, so the optimal cost cannot fall.

# %%
from relayhub import build_deterministic_equivalent, compute_metrics, extract_solution, solve_milp
from relayhub.metrics import plot_data_csv
from relayhub.synthetic import tiny_instance

levels = {"low": (0.0, 1.0), "medium": (0.3, 1.5), "high": (0.3, 15.0)}
reports = []
for name, (rate, intensity) in levels.items():
    inst = tiny_instance(seed=4, n_hubs=3, n_od=2, rate=rate, intensity=intensity)
    mi = build_deterministic_equivalent(inst.network, inst.scenarios, inst.costs, inst.horizon)
    rep, x = solve_milp(mi)
    plan, second = extract_solution(mi, x)
    m = compute_metrics(plan, second, inst.scenarios, inst.network, inst.costs, inst.horizon)
    reports.append(m)
    print(f"{name:>6}: total {m.total_costs:10.2f}  disruption time {m.disruption_time_pct:6.2f}%")

# %% [markdown]
# Long-form rows for any plotting tool:

# %%
print(plot_data_csv(list(levels), reports, ["total_costs", "transportation_costs", "co2_metric_tons"]))
