"""Relay network, planning horizon and cost tables."""

from __future__ import annotations

import enum
import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

EARTH_RADIUS_MILES = 3958.8


class NetworkError(ValueError):
    """Raised when a network cannot be built or fails validation."""


class NodeKind(str, enum.Enum):
    ORIGIN = "origin"
    DESTINATION = "destination"
    HUB = "hub"


@dataclass(frozen=True)
class Node:
    id: int
    kind: NodeKind
    lat: float | None = None
    lon: float | None = None
    name: str = ""


@dataclass(frozen=True)
class Arc:
    tail: int
    head: int
    base_travel_hours: float
    miles: float


_ALLOWED_SHAPES = {
    (NodeKind.ORIGIN, NodeKind.HUB),
    (NodeKind.HUB, NodeKind.HUB),
    (NodeKind.HUB, NodeKind.DESTINATION),
}


@dataclass(frozen=True)
class Network:
    """Directed relay graph with its demand OD pairs.

    Nodes and arcs keep the order they were given in; hub order and arc
    order define the column layout of every array keyed by hub or arc.
    """

    nodes: tuple[Node, ...]
    arcs: tuple[Arc, ...]
    od_pairs: tuple[tuple[int, int], ...]
    annual_demand: tuple[float, ...] = ()
    allow_direct: bool = False

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "arcs", tuple(self.arcs))
        object.__setattr__(self, "od_pairs", tuple((int(o), int(d)) for o, d in self.od_pairs))
        demand = tuple(float(q) for q in self.annual_demand)
        if not demand:
            demand = (0.0,) * len(self.od_pairs)
        if len(demand) != len(self.od_pairs):
            raise NetworkError("annual_demand must have one entry per OD pair")
        object.__setattr__(self, "annual_demand", demand)

    @cached_property
    def node_by_id(self) -> dict[int, Node]:
        return {n.id: n for n in self.nodes}

    @cached_property
    def hubs(self) -> tuple[int, ...]:
        return tuple(n.id for n in self.nodes if n.kind is NodeKind.HUB)

    @cached_property
    def hub_index(self) -> dict[int, int]:
        return {h: i for i, h in enumerate(self.hubs)}

    @cached_property
    def arc_index(self) -> dict[tuple[int, int], int]:
        return {(a.tail, a.head): i for i, a in enumerate(self.arcs)}

    @cached_property
    def out_arcs(self) -> dict[int, tuple[int, ...]]:
        """delta+(i): indices of arcs leaving each node."""
        out: dict[int, list[int]] = {n.id: [] for n in self.nodes}
        for k, a in enumerate(self.arcs):
            out.setdefault(a.tail, []).append(k)
        return {i: tuple(v) for i, v in out.items()}

    @cached_property
    def in_arcs(self) -> dict[int, tuple[int, ...]]:
        """delta-(i): indices of arcs entering each node."""
        inc: dict[int, list[int]] = {n.id: [] for n in self.nodes}
        for k, a in enumerate(self.arcs):
            inc.setdefault(a.head, []).append(k)
        return {i: tuple(v) for i, v in inc.items()}

    @property
    def base_hours(self) -> np.ndarray:
        return np.array([a.base_travel_hours for a in self.arcs], dtype=float)

    @property
    def miles(self) -> np.ndarray:
        return np.array([a.miles for a in self.arcs], dtype=float)

    def kind(self, node_id: int) -> NodeKind:
        return self.node_by_id[node_id].kind

    def arcs_from_adjacency(self) -> tuple[Arc, ...]:
        """Rebuild the arc list from delta+ (must reproduce ``arcs``)."""
        ids = sorted({k for ks in self.out_arcs.values() for k in ks})
        return tuple(self.arcs[k] for k in ids)

    def hub_incidence(self) -> np.ndarray:
        """Boolean (n_arcs, n_hubs) matrix: arc touches hub."""
        inc = np.zeros((len(self.arcs), len(self.hubs)), dtype=bool)
        for k, a in enumerate(self.arcs):
            for end in (a.tail, a.head):
                j = self.hub_index.get(end)
                if j is not None:
                    inc[k, j] = True
        return inc

    def hub_neighbors(self) -> dict[int, set[int]]:
        nbrs: dict[int, set[int]] = {h: set() for h in self.hubs}
        for a in self.arcs:
            if a.tail in nbrs and a.head in nbrs:
                nbrs[a.tail].add(a.head)
                nbrs[a.head].add(a.tail)
        return nbrs

    def has_path(self, source: int, target: int) -> bool:
        seen = {source}
        queue = deque([source])
        while queue:
            i = queue.popleft()
            if i == target:
                return True
            for k in self.out_arcs.get(i, ()):
                j = self.arcs[k].head
                if j not in seen:
                    seen.add(j)
                    queue.append(j)
        return False

    def to_dict(self) -> dict:
        nodes = []
        for n in self.nodes:
            entry = {"id": n.id, "kind": n.kind.value}
            if n.lat is not None:
                entry["lat"] = n.lat
                entry["lon"] = n.lon
            if n.name:
                entry["name"] = n.name
            nodes.append(entry)
        return {
            "nodes": nodes,
            "arcs": [
                {"from": a.tail, "to": a.head, "hours": a.base_travel_hours, "miles": a.miles}
                for a in self.arcs
            ],
            "od_pairs": [
                {"o": o, "d": d, "annual_demand": q}
                for (o, d), q in zip(self.od_pairs, self.annual_demand)
            ],
            "allow_direct": self.allow_direct,
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "Network":
        nodes = [
            Node(int(n["id"]), NodeKind(n["kind"]), n.get("lat"), n.get("lon"), n.get("name", ""))
            for n in doc["nodes"]
        ]
        arcs = [
            Arc(int(a["from"]), int(a["to"]), float(a["hours"]), float(a["miles"]))
            for a in doc["arcs"]
        ]
        ods = [(int(p["o"]), int(p["d"])) for p in doc["od_pairs"]]
        demand = [float(p.get("annual_demand", 0.0)) for p in doc["od_pairs"]]
        return cls(tuple(nodes), tuple(arcs), tuple(ods), tuple(demand), bool(doc.get("allow_direct", False)))


@dataclass(frozen=True)
class Horizon:
    seasons: int = 4
    periods_per_season: int = 13
    days_per_period: int = 7

    def __post_init__(self):
        if min(self.seasons, self.periods_per_season, self.days_per_period) < 1:
            raise ValueError("horizon counts must all be >= 1")

    @property
    def n_periods(self) -> int:
        return self.seasons * self.periods_per_season

    def season_periods(self, t: int) -> range:
        start = t * self.periods_per_season
        return range(start, start + self.periods_per_season)


@dataclass(frozen=True)
class CostTable:
    """Hub, flow and penalty costs.

    ``hub_cost[h, l1, l2]`` is charged per season for moving hub ``h`` from
    level ``l1`` to ``l2`` and operating it at ``l2``. ``level_capacity[h, l]``
    is throughput in units per day; level 0 must be the empty level.
    """

    hub_cost: np.ndarray
    flow_unit_cost: float
    extra_penalty: np.ndarray
    level_capacity: np.ndarray
    extra_upper_bound: float | None = None

    def __post_init__(self):
        hc = np.asarray(self.hub_cost, dtype=float)
        cap = np.asarray(self.level_capacity, dtype=float)
        pen = np.asarray(self.extra_penalty, dtype=float)
        object.__setattr__(self, "hub_cost", hc)
        object.__setattr__(self, "level_capacity", cap)
        object.__setattr__(self, "extra_penalty", pen)
        object.__setattr__(self, "flow_unit_cost", float(self.flow_unit_cost))
        if hc.ndim != 3 or hc.shape[1] != hc.shape[2]:
            raise ValueError("hub_cost must have shape (hubs, levels, levels)")
        if cap.shape != hc.shape[:2]:
            raise ValueError("level_capacity must have shape (hubs, levels)")
        if pen.shape != (hc.shape[0],):
            raise ValueError("extra_penalty must have one entry per hub")
        if np.isnan(hc).any() or np.isnan(cap).any() or np.isnan(pen).any():
            raise ValueError("cost table has missing (NaN) entries")
        if (hc < 0).any() or (pen < 0).any() or self.flow_unit_cost < 0 or (cap < 0).any():
            raise ValueError("costs and capacities must be non-negative")
        if np.any(cap[:, 0] != 0):
            raise ValueError("level 0 must have zero capacity at every hub")
        if np.any(np.diff(cap, axis=1) < 0):
            raise ValueError("level_capacity must be non-decreasing in the level")

    @property
    def n_hubs(self) -> int:
        return self.hub_cost.shape[0]

    @property
    def n_levels(self) -> int:
        return self.hub_cost.shape[1]

    @classmethod
    def from_levels(
        cls,
        capacities: Sequence[float],
        operate_cost: Sequence[float],
        change_cost: float,
        n_hubs: int,
        flow_unit_cost: float,
        extra_penalty: float,
        hub_scale: Sequence[float] | None = None,
    ) -> "CostTable":
        """Build a table where moving l1 -> l2 costs
        ``scale_h * (operate_cost[l2] + change_cost * |cap[l2] - cap[l1]|)``."""
        cap = np.asarray(capacities, dtype=float)
        op = np.asarray(operate_cost, dtype=float)
        scale = np.ones(n_hubs) if hub_scale is None else np.asarray(hub_scale, dtype=float)
        step = change_cost * np.abs(cap[None, :] - cap[:, None])
        per_level = op[None, :] + step
        hub_cost = scale[:, None, None] * per_level[None, :, :]
        return cls(
            hub_cost=hub_cost,
            flow_unit_cost=flow_unit_cost,
            extra_penalty=np.full(n_hubs, float(extra_penalty)),
            level_capacity=np.tile(cap, (n_hubs, 1)),
        )

    def to_dict(self) -> dict:
        return {
            "hub_cost": self.hub_cost.tolist(),
            "flow_unit_cost": self.flow_unit_cost,
            "extra_penalty": self.extra_penalty.tolist(),
            "level_capacity": self.level_capacity.tolist(),
            "extra_upper_bound": self.extra_upper_bound,
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "CostTable":
        missing = [k for k in ("hub_cost", "flow_unit_cost", "extra_penalty", "level_capacity") if k not in doc]
        if missing:
            raise ValueError(f"cost table missing entries: {', '.join(missing)}")
        return cls(
            hub_cost=np.array(doc["hub_cost"], dtype=float),
            flow_unit_cost=doc["flow_unit_cost"],
            extra_penalty=np.array(doc["extra_penalty"], dtype=float),
            level_capacity=np.array(doc["level_capacity"], dtype=float),
            extra_upper_bound=doc.get("extra_upper_bound"),
        )


def great_circle_miles(lat1, lon1, lat2, lon2) -> float:
    p1, p2 = math.radians(lat1), math.radians(lat2)
    dp = p2 - p1
    dl = math.radians(lon2 - lon1)
    s = math.sin(dp / 2) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dl / 2) ** 2
    return 2 * EARTH_RADIUS_MILES * math.asin(min(1.0, math.sqrt(s)))


def distance_matrix_from_coords(nodes: Sequence[Node]) -> np.ndarray:
    n = len(nodes)
    dist = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            a, b = nodes[i], nodes[j]
            if a.lat is None or b.lat is None:
                raise NetworkError(f"node {a.id if a.lat is None else b.id} has no coordinates")
            dist[i, j] = dist[j, i] = great_circle_miles(a.lat, a.lon, b.lat, b.lon)
    return dist


def _shape_allowed(kind_from: NodeKind, kind_to: NodeKind, allow_direct: bool) -> bool:
    if (kind_from, kind_to) in _ALLOWED_SHAPES:
        return True
    return allow_direct and (kind_from, kind_to) == (NodeKind.ORIGIN, NodeKind.DESTINATION)


def build_relay_network(
    nodes: Sequence[Node],
    od_pairs: Iterable[tuple[int, int]],
    annual_demand: Sequence[float] | None = None,
    *,
    distances: np.ndarray | None = None,
    max_leg_hours: float = 5.5,
    speed_mph: float = 50.0,
    allow_direct: bool = False,
) -> Network:
    """Connect every permitted node pair whose leg fits within ``max_leg_hours``.

    ``distances`` (miles, indexed like ``nodes``) takes precedence over node
    coordinates. Raises NetworkError naming the first OD pair left without a
    path.
    """
    if max_leg_hours <= 0 or speed_mph <= 0:
        raise ValueError("max_leg_hours and speed_mph must be positive")
    nodes = tuple(nodes)
    if distances is None:
        dist = distance_matrix_from_coords(nodes)
    else:
        dist = np.asarray(distances, dtype=float)
        if dist.shape != (len(nodes), len(nodes)):
            raise NetworkError("distance matrix shape does not match node count")
        if (dist < 0).any() or not np.allclose(dist, dist.T):
            raise NetworkError("distance matrix must be symmetric and non-negative")

    arcs = []
    for i, a in enumerate(nodes):
        for j, b in enumerate(nodes):
            if i == j or not _shape_allowed(a.kind, b.kind, allow_direct):
                continue
            hours = dist[i, j] / speed_mph
            if hours <= max_leg_hours:
                arcs.append(Arc(a.id, b.id, float(hours), float(dist[i, j])))

    ods = tuple(od_pairs)
    demand = () if annual_demand is None else tuple(annual_demand)
    net = Network(nodes, tuple(arcs), ods, demand, allow_direct)
    problems = validate_network(net)
    if problems:
        raise NetworkError("; ".join(problems))
    return net


def validate_network(net: Network) -> list[str]:
    """One diagnostic string per violated network invariant; empty if valid."""
    diags = []
    ids = [n.id for n in net.nodes]
    if len(ids) != len(set(ids)):
        diags.append("duplicate node ids")
    kinds = net.node_by_id
    seen_pairs = set()
    for a in net.arcs:
        if a.tail not in kinds or a.head not in kinds:
            diags.append(f"arc {a.tail}→{a.head} references unknown node")
            continue
        if a.tail == a.head:
            diags.append(f"self-loop at {a.tail}")
        elif not _shape_allowed(kinds[a.tail].kind, kinds[a.head].kind, net.allow_direct):
            diags.append(f"forbidden arc shape {a.tail}→{a.head}")
        if (a.tail, a.head) in seen_pairs:
            diags.append(f"duplicate arc {a.tail}→{a.head}")
        seen_pairs.add((a.tail, a.head))
        if a.base_travel_hours < 0 or a.miles < 0:
            diags.append(f"negative length on arc {a.tail}→{a.head}")
    for o, d in net.od_pairs:
        if kinds.get(o) is None or kinds[o].kind is not NodeKind.ORIGIN:
            diags.append(f"od pair {o}→{d}: {o} is not an origin")
            continue
        if kinds.get(d) is None or kinds[d].kind is not NodeKind.DESTINATION:
            diags.append(f"od pair {o}→{d}: {d} is not a destination")
            continue
        if not net.has_path(o, d):
            diags.append(f"no path {o}→{d}")
    if any(q < 0 for q in net.annual_demand):
        diags.append("negative annual demand")
    return diags
