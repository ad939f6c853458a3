# %% [markdown]
# # The 22-hub demo
#
# 22 hub sites on a lattice over the Southeast plus 22 region centers, legs
# of at most 5.5 hours at 50 mph. This builds the full deterministic
# equivalent (4 seasons x 13 weeks x 10 reduced scenarios) and solves it
# with HiGHS to a 1% gap. Expect several minutes per mode.
#
# The command-line route is equivalent:
#
#     relayhub demo --out demo --run

# %%
import time

from relayhub import Horizon, build_deterministic_equivalent, generate_scenario_set, reduce_scenario_set, solve_milp
from relayhub.synthetic import DEMO_SHARES, demo_costs, demo_network

net = demo_network(n_od=4)
costs = demo_costs(net)
raw = generate_scenario_set(net, Horizon(), DEMO_SHARES, 50, rate=0.05, intensity=1.5, seed=1)
scen, _ = reduce_scenario_set(raw, net, k=10)

# %%
for mode in ("static", "dynamic"):
    mi = build_deterministic_equivalent(net, scen, costs, Horizon(), mode, prune=True)
    print(mi.summary())
    t0 = time.perf_counter()
    rep, _ = solve_milp(mi, rel_gap=0.01, backend="highs", time_limit=1500)
    print(f"{mode}: {rep.incumbent:,.0f}  gap {rep.gap:.4f}  {time.perf_counter() - t0:.0f}s")
