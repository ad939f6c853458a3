"""Synthetic instances: randomized tiny cases and a Southeast-US demo."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .network import Arc, CostTable, Horizon, Network, Node, NodeKind, build_relay_network, great_circle_miles
from .scenarios import ScenarioSet, generate_scenario_set

UNIFORM_SHARES = np.full(12, 1.0 / 12.0)


@dataclass
class Instance:
    network: Network
    costs: CostTable
    horizon: Horizon
    scenarios: ScenarioSet
    monthly_shares: np.ndarray


def tiny_instance(
    seed: int,
    n_hubs: int = 2,
    n_levels: int = 3,
    n_scenarios: int = 2,
    periods: int = 2,
    seasons: int = 2,
    n_od: int = 1,
    rate: float = 0.3,
    intensity: float = 1.5,
) -> Instance:
    """Random small instance with origins and destinations wired to every hub
    and a complete hub-hub graph. Arc hours are random in [1, 4]."""
    rng = np.random.default_rng(seed)
    n_orig = n_dest = max(1, n_od)
    nodes = [Node(i, NodeKind.ORIGIN) for i in range(n_orig)]
    nodes += [Node(n_orig + i, NodeKind.DESTINATION) for i in range(n_dest)]
    hubs = [n_orig + n_dest + i for i in range(n_hubs)]
    nodes += [Node(h, NodeKind.HUB) for h in hubs]
    arcs = []

    def add(i, j):
        hours = float(np.round(rng.uniform(1.0, 4.0), 2))
        arcs.append(Arc(i, j, hours, hours * 50.0))

    for o in range(n_orig):
        for h in hubs:
            add(o, h)
    for h in hubs:
        for g in hubs:
            if h != g:
                add(h, g)
    for h in hubs:
        for d in range(n_orig, n_orig + n_dest):
            add(h, d)
    ods = [(k, n_orig + k) for k in range(n_od)]
    annual = rng.integers(24, 120, size=n_od).astype(float)
    net = Network(tuple(nodes), tuple(arcs), tuple(ods), tuple(annual))

    step = np.sort(rng.integers(1, 6, size=n_levels - 1)).cumsum()
    capacities = np.concatenate([[0.0], step.astype(float)])
    operate = np.concatenate([[0.0], np.round(rng.uniform(2.0, 6.0, n_levels - 1) * np.arange(1, n_levels), 2)])
    costs = CostTable.from_levels(
        capacities,
        operate,
        change_cost=float(np.round(rng.uniform(0.2, 1.0), 2)),
        n_hubs=n_hubs,
        flow_unit_cost=1.0,
        extra_penalty=float(np.round(rng.uniform(2.0, 8.0), 2)),
        hub_scale=np.round(rng.uniform(0.8, 1.2, n_hubs), 2),
    )
    horizon = Horizon(seasons, periods, days_per_period=1)
    scen = generate_scenario_set(net, horizon, UNIFORM_SHARES, n_scenarios, rate, intensity, seed)
    return Instance(net, costs, horizon, scen, UNIFORM_SHARES)


# (name, lat, lon) for 22 region centers across the Southeast US
REGION_CENTERS = [
    ("Atlanta", 33.75, -84.39),
    ("Birmingham", 33.52, -86.80),
    ("Montgomery", 32.38, -86.30),
    ("Mobile", 30.69, -88.04),
    ("Jackson", 32.30, -90.18),
    ("New Orleans", 29.95, -90.07),
    ("Baton Rouge", 30.45, -91.15),
    ("Memphis", 35.15, -90.05),
    ("Nashville", 36.16, -86.78),
    ("Knoxville", 35.96, -83.92),
    ("Chattanooga", 35.05, -85.31),
    ("Charlotte", 35.23, -80.84),
    ("Raleigh", 35.78, -78.64),
    ("Greenville", 34.85, -82.40),
    ("Columbia", 34.00, -81.03),
    ("Charleston", 32.78, -79.93),
    ("Savannah", 32.08, -81.09),
    ("Jacksonville", 30.33, -81.66),
    ("Tallahassee", 30.44, -84.28),
    ("Orlando", 28.54, -81.38),
    ("Tampa", 27.95, -82.46),
    ("Miami", 25.76, -80.19),
]

# seasonal freight profile, Jan..Dec
_PROFILE = np.array([70, 72, 85, 86, 88, 87, 80, 84, 85, 90, 82, 71], dtype=float)
DEMO_SHARES = _PROFILE / _PROFILE.sum()


HUB_LATS = (26.5, 29.5, 32.5, 35.5)
HUB_LONS = (-94.0, -90.5, -87.0, -83.5, -80.0, -76.5)


def hub_lattice(rng: np.random.Generator, jitter: float = 0.12) -> list[tuple[float, float]]:
    """22 hub sites on a ~200-mile lattice over the Southeast; the two
    south-western sites (open Gulf) are dropped. Lattice neighbours are one
    leg apart, diagonals are not."""
    sites = [(lat, lon) for lat in HUB_LATS for lon in HUB_LONS if not (lat == 26.5 and lon < -90)]
    return [
        (round(lat + rng.uniform(-jitter, jitter), 4), round(lon + rng.uniform(-jitter, jitter), 4))
        for lat, lon in sites
    ]


def demo_network(
    seed: int = 7,
    n_od: int = 4,
    max_leg_hours: float = 5.5,
    speed_mph: float = 50.0,
) -> Network:
    """22 lattice hubs plus 22 region centers (each split into an origin and
    a destination node). The ``n_od`` OD pairs are drawn among center pairs
    farther apart than one leg."""
    rng = np.random.default_rng(seed)
    n = len(REGION_CENTERS)
    nodes = []
    for i, (name, lat, lon) in enumerate(REGION_CENTERS):
        nodes.append(Node(i, NodeKind.ORIGIN, lat, lon, f"{name} (out)"))
    for i, (name, lat, lon) in enumerate(REGION_CENTERS):
        nodes.append(Node(n + i, NodeKind.DESTINATION, lat, lon, f"{name} (in)"))
    for i, (lat, lon) in enumerate(hub_lattice(rng)):
        nodes.append(Node(2 * n + i, NodeKind.HUB, lat, lon, f"Hub {i:02d}"))

    candidates = []
    for a in range(n):
        for b in range(n):
            _, la, lo = REGION_CENTERS[a]
            _, lb, lob = REGION_CENTERS[b]
            if a != b and great_circle_miles(la, lo, lb, lob) > max_leg_hours * speed_mph:
                candidates.append((a, b))
    pick = np.sort(rng.choice(len(candidates), size=n_od, replace=False))
    ods = [(candidates[k][0], n + candidates[k][1]) for k in pick]
    annual = np.round(rng.uniform(1500.0, 6000.0, size=n_od))
    return build_relay_network(nodes, ods, annual, max_leg_hours=max_leg_hours, speed_mph=speed_mph)


def demo_costs(network: Network, seed: int = 7) -> CostTable:
    """Four levels (0, 15, 30, 45 units/day) with lease costs per season."""
    rng = np.random.default_rng(seed + 1)
    H = len(network.hubs)
    capacities = [0.0, 15.0, 30.0, 45.0]
    operate = [0.0, 40_000.0, 70_000.0, 95_000.0]
    return CostTable.from_levels(
        capacities,
        operate,
        change_cost=400.0,
        n_hubs=H,
        flow_unit_cost=45.0,
        extra_penalty=900.0,
        hub_scale=np.round(rng.uniform(0.85, 1.15, H), 3),
    )
