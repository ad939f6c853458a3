# %% [markdown]
# # Scenarios and fast forward selection
#
# Weekly demand is Poisson with a rate taken from the monthly share of
# annual demand. Each hub is disrupted independently in each week; arcs
# touching a disrupted hub are slowed. We draw 50 season-long scenarios and
# keep 10 per season.

# %%
import numpy as np

from relayhub import Horizon, generate_scenario_set, reduce_scenario_set
from relayhub.reduction import distance_matrix, ffs_reduce, transport_distance
from relayhub.scenarios import weekly_demand_rates
from relayhub.synthetic import DEMO_SHARES, demo_network

net = demo_network(n_od=4)
horizon = Horizon()
rates = weekly_demand_rates(net.annual_demand, DEMO_SHARES, horizon)
print("weekly rates, first season, first OD:", np.round(rates[:13, 0], 1))

sset = generate_scenario_set(net, horizon, DEMO_SHARES, n_scenarios=50, rate=0.05, intensity=1.5, seed=1)
hits = np.mean([s.disrupted.mean() for s in sset[0]])
print(f"share of hub-weeks disrupted in season 0: {hits:.3f}")

# %% [markdown]
# Reduction works season by season. The achieved Kantorovich distance
# shrinks with every pick.

# %%
reduced, reports = reduce_scenario_set(sset, net, k=10)
for t, rep in enumerate(reports):
    print(f"season {t}: kept {sorted(rep.selected)}  distance {rep.distance:.3f}")
print("path for season 0:", np.round(reports[0].path, 3))

# %% [markdown]
# The subset formula agrees with the full transportation LP between the
# original measure and the redistributed one.

# %%
c = distance_matrix(sset[0], net)
p = np.array([s.probability for s in sset[0]])
red = ffs_reduce(p, 10, c)
print("subset formula:", red.distance)
print("transport LP:  ", transport_distance(p, red.reduced_measure(len(p)), c))
