import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from relayhub.network import (
    Arc,
    CostTable,
    Horizon,
    Network,
    NetworkError,
    Node,
    NodeKind,
    build_relay_network,
    great_circle_miles,
    validate_network,
)
from relayhub.synthetic import demo_network


def hubs_with_od(dist_hubs):
    """Origin 0, destination 1, hubs 2 and 3. Origin and destination sit
    next to hubs 2 and 3 respectively."""
    nodes = [Node(0, NodeKind.ORIGIN), Node(1, NodeKind.DESTINATION), Node(2, NodeKind.HUB), Node(3, NodeKind.HUB)]
    d = np.array(
        [
            [0, 900, 50, 900],
            [900, 0, 900, 50],
            [50, 900, 0, dist_hubs],
            [900, 50, dist_hubs, 0],
        ],
        dtype=float,
    )
    return nodes, d


def test_hub_pair_within_leg_limit_gets_two_hour_arcs():
    nodes, d = hubs_with_od(100.0)
    net = build_relay_network(nodes, [(0, 1)], [10.0], distances=d, max_leg_hours=5.5, speed_mph=50)
    idx = net.arc_index
    assert net.arcs[idx[(2, 3)]].base_travel_hours == 2.0
    assert net.arcs[idx[(3, 2)]].base_travel_hours == 2.0


def test_hub_pair_beyond_leg_limit_has_no_arc():
    nodes, d = hubs_with_od(300.0)
    nodes = nodes + [Node(4, NodeKind.HUB)]
    # a third hub keeps the OD pair connected without the 300-mile leg
    d2 = np.full((5, 5), 900.0)
    d2[:4, :4] = d
    d2[4, 4] = 0
    d2[2, 4] = d2[4, 2] = 150
    d2[3, 4] = d2[4, 3] = 150
    net = build_relay_network(nodes, [(0, 1)], [10.0], distances=d2, max_leg_hours=5.5, speed_mph=50)
    assert (2, 3) not in net.arc_index and (3, 2) not in net.arc_index
    assert (2, 4) in net.arc_index


def test_unreachable_pair_raises_naming_the_pair():
    nodes, d = hubs_with_od(300.0)
    with pytest.raises(NetworkError, match="0→1"):
        build_relay_network(nodes, [(0, 1)], [10.0], distances=d)


def test_direct_arcs_only_when_allowed():
    nodes, d = hubs_with_od(100.0)
    d[0, 1] = d[1, 0] = 120.0
    net = build_relay_network(nodes, [(0, 1)], [1.0], distances=d)
    assert (0, 1) not in net.arc_index
    net = build_relay_network(nodes, [(0, 1)], [1.0], distances=d, allow_direct=True)
    assert (0, 1) in net.arc_index
    assert (1, 0) not in net.arc_index


def test_validate_triangle_is_clean():
    nodes = (Node(0, NodeKind.ORIGIN), Node(1, NodeKind.DESTINATION), Node(2, NodeKind.HUB))
    arcs = (Arc(0, 2, 1.0, 50.0), Arc(2, 1, 1.0, 50.0))
    assert validate_network(Network(nodes, arcs, ((0, 1),), (5.0,))) == []


def test_validate_reports_unreachable_pair():
    nodes = (Node(0, NodeKind.ORIGIN), Node(1, NodeKind.DESTINATION), Node(2, NodeKind.HUB))
    arcs = (Arc(0, 2, 1.0, 50.0),)
    problems = validate_network(Network(nodes, arcs, ((0, 1),), (5.0,)))
    assert any("no path 0→1" in p for p in problems)


def test_validate_reports_forbidden_shape():
    nodes = (Node(0, NodeKind.ORIGIN), Node(1, NodeKind.DESTINATION), Node(2, NodeKind.HUB), Node(3, NodeKind.ORIGIN))
    arcs = (Arc(0, 2, 1.0, 50.0), Arc(2, 1, 1.0, 50.0), Arc(0, 3, 1.0, 50.0))
    problems = validate_network(Network(nodes, arcs, ((0, 1),), (5.0,)))
    assert any("forbidden arc shape" in p for p in problems)


def test_validate_reports_self_loop_and_duplicate():
    nodes = (Node(0, NodeKind.ORIGIN), Node(1, NodeKind.DESTINATION), Node(2, NodeKind.HUB))
    arcs = (Arc(0, 2, 1.0, 50.0), Arc(0, 2, 1.0, 50.0), Arc(2, 2, 0.0, 0.0), Arc(2, 1, 1.0, 50.0))
    problems = validate_network(Network(nodes, arcs, ((0, 1),), (5.0,)))
    assert any("self-loop" in p for p in problems)
    assert any("duplicate" in p for p in problems)


def test_demo_network_legs_within_limit():
    net = demo_network()
    assert len(net.hubs) == 22
    assert sum(1 for n in net.nodes if n.kind is NodeKind.ORIGIN) == 22
    assert max(a.base_travel_hours for a in net.arcs) <= 5.5
    assert validate_network(net) == []


def test_adjacency_round_trip():
    net = demo_network()
    assert set(net.arcs_from_adjacency()) == set(net.arcs)
    for i, outs in net.out_arcs.items():
        assert all(net.arcs[k].tail == i for k in outs)
    for i, ins in net.in_arcs.items():
        assert all(net.arcs[k].head == i for k in ins)


def test_network_dict_round_trip():
    net = demo_network(n_od=2)
    assert Network.from_dict(net.to_dict()) == net


def test_great_circle_known_distance():
    # Atlanta to Charlotte is roughly 227 statute miles
    assert 220 < great_circle_miles(33.75, -84.39, 35.23, -80.84) < 235


def test_horizon_rejects_zero():
    with pytest.raises(ValueError):
        Horizon(0, 13, 7)
    assert Horizon().n_periods == 52
    assert list(Horizon(2, 3, 1).season_periods(1)) == [3, 4, 5]


@pytest.mark.parametrize(
    "cap, msg",
    [([[1.0, 2.0]], "level 0"), ([[0.0, 3.0, 2.0]], "non-decreasing")],
)
def test_cost_table_rejects_bad_capacity(cap, msg):
    L = len(cap[0])
    with pytest.raises(ValueError, match=msg):
        CostTable(np.zeros((1, L, L)), 1.0, np.zeros(1), np.array(cap))


def test_cost_table_rejects_nan_and_negative():
    with pytest.raises(ValueError, match="missing"):
        CostTable(np.full((1, 2, 2), np.nan), 1.0, np.zeros(1), np.array([[0.0, 1.0]]))
    with pytest.raises(ValueError, match="non-negative"):
        CostTable(-np.ones((1, 2, 2)), 1.0, np.zeros(1), np.array([[0.0, 1.0]]))


def test_cost_table_from_levels_and_dict():
    ct = CostTable.from_levels([0, 10, 20], [0, 5, 8], 0.5, 2, 1.0, 3.0, hub_scale=[1.0, 2.0])
    assert ct.hub_cost[0, 0, 2] == 8 + 0.5 * 20
    assert ct.hub_cost[1, 2, 1] == 2 * (5 + 0.5 * 10)
    back = CostTable.from_dict(ct.to_dict())
    np.testing.assert_array_equal(back.hub_cost, ct.hub_cost)
    np.testing.assert_array_equal(back.level_capacity, ct.level_capacity)


@settings(max_examples=30, deadline=None)
@given(
    st.lists(st.tuples(st.floats(25, 37), st.floats(-95, -76)), min_size=2, max_size=6),
    st.floats(1.0, 8.0),
)
def test_every_built_arc_respects_leg_limit(hub_coords, max_leg):
    nodes = [Node(0, NodeKind.ORIGIN, 33.0, -84.0), Node(1, NodeKind.DESTINATION, 33.2, -84.1)]
    nodes += [Node(2 + i, NodeKind.HUB, lat, lon) for i, (lat, lon) in enumerate(hub_coords)]
    try:
        net = build_relay_network(nodes, [(0, 1)], [1.0], max_leg_hours=max_leg)
    except NetworkError:
        return
    assert all(a.base_travel_hours <= max_leg for a in net.arcs)
    hub_ids = set(net.hubs)
    for a in net.arcs:
        if a.tail in hub_ids and a.head in hub_ids:
            assert (a.head, a.tail) in net.arc_index
