import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from relayhub.reduction import (
    DistanceWeights,
    distance_matrix,
    ffs_reduce,
    kantorovich_subset_distance,
    reduce_scenario_set,
    reduction_report_csv,
    scenario_distance,
    transport_distance,
)
from relayhub.scenarios import Scenario
from relayhub.synthetic import tiny_instance


def random_metric(rng, n):
    pts = rng.uniform(0, 10, (n, 3))
    return np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)


def test_distance_identity_and_single_coordinate():
    inst = tiny_instance(0)
    s = inst.scenarios[0][0]
    assert scenario_distance(s, s, inst.network) == 0.0
    dem = s.demand.copy()
    dem[0, 0] += 3
    s2 = Scenario(s.probability, dem, s.multipliers, s.disrupted)
    assert scenario_distance(s, s2, inst.network, DistanceWeights(1.0, 1.0)) == 3.0


def test_distance_hand_arithmetic():
    inst = tiny_instance(0)
    net = inst.network
    A = len(net.arcs)
    s1 = Scenario(1.0, np.array([[1], [2]]), np.ones((2, A)), np.zeros((2, 2), bool))
    mult = np.ones((2, A))
    mult[1, 0] = 2.0
    s2 = Scenario(1.0, np.array([[4], [2]]), mult, np.zeros((2, 2), bool))
    w = DistanceWeights(0.5, 2.0)
    dt = net.base_hours[0]  # base * (2 - 1)
    expected = np.sqrt((0.5 * 3) ** 2 + (2.0 * dt) ** 2)
    assert scenario_distance(s1, s2, net, w) == pytest.approx(expected, rel=1e-12)


def test_distance_shape_mismatch():
    inst = tiny_instance(0)
    a = inst.scenarios[0][0]
    b = Scenario(1.0, a.demand[:1], a.multipliers[:1], a.disrupted[:1])
    with pytest.raises(ValueError):
        scenario_distance(a, b, inst.network)


def test_distance_matrix_properties_and_workers():
    inst = tiny_instance(3, n_scenarios=6, rate=0.5)
    scen = inst.scenarios[0]
    c1 = distance_matrix(scen, inst.network)
    c4 = distance_matrix(scen, inst.network, workers=4)
    np.testing.assert_array_equal(c1, c4)
    np.testing.assert_allclose(c1, c1.T)
    assert np.all(np.diag(c1) == 0) and np.all(c1 >= 0)


def test_subset_distance_examples():
    c = np.array([[0.0, 7.0], [7.0, 0.0]])
    assert kantorovich_subset_distance([0.5, 0.5], [0, 1], c) == 0.0
    assert kantorovich_subset_distance([0.5, 0.5], [0], c) == 3.5
    with pytest.raises(ValueError):
        kantorovich_subset_distance([0.5, 0.5], [], c)


def test_transport_examples():
    c = np.array([[0.0, 4.0], [4.0, 0.0]])
    assert transport_distance([0.5, 0.5], [0.5, 0.5], c) == pytest.approx(0.0, abs=1e-12)
    assert transport_distance([0.5, 0.5], [1.0, 0.0], c) == pytest.approx(2.0, abs=1e-12)
    with pytest.raises(ValueError):
        transport_distance([0.5, 0.5], [0.7, 0.7], c)


def brute_force_transport(mu, nu, c):
    """Vertex enumeration of the transportation polytope (tiny sizes)."""
    n = len(mu)
    m_rows = 2 * n - 1
    A = np.zeros((2 * n, n * n))
    for i in range(n):
        A[i, i * n : (i + 1) * n] = 1
        A[n + i, i::n] = 1
    A, b = A[:m_rows], np.concatenate([mu, nu])[:m_rows]
    cost = c.ravel()
    best = np.inf
    for basis in itertools.combinations(range(n * n), m_rows):
        B = A[:, basis]
        if abs(np.linalg.det(B)) < 1e-10:
            continue
        xb = np.linalg.solve(B, b)
        if np.all(xb >= -1e-12):
            best = min(best, float(cost[list(basis)] @ xb))
    return best


def test_transport_matches_vertex_enumeration():
    rng = np.random.default_rng(5)
    for _ in range(3):
        n = 3
        mu = rng.dirichlet(np.ones(n))
        nu = rng.dirichlet(np.ones(n))
        c = random_metric(rng, n)
        assert transport_distance(mu, nu, c) == pytest.approx(brute_force_transport(mu, nu, c), abs=1e-8)


def test_subset_formula_equals_transport_lp_on_four_points():
    c = np.array(
        [
            [0.0, 2.0, 5.0, 6.0],
            [2.0, 0.0, 4.0, 3.0],
            [5.0, 4.0, 0.0, 1.5],
            [6.0, 3.0, 1.5, 0.0],
        ]
    )
    p = np.array([0.1, 0.4, 0.3, 0.2])
    red = ffs_reduce(p, 2, c)
    lp = transport_distance(p, red.reduced_measure(4), c)
    assert red.distance == pytest.approx(lp, abs=1e-8)


def test_ffs_full_selection_is_identity():
    rng = np.random.default_rng(0)
    c = random_metric(rng, 5)
    p = np.full(5, 0.2)
    red = ffs_reduce(p, 5, c)
    assert sorted(red.selected) == list(range(5))
    np.testing.assert_allclose(red.reduced_measure(5), p)
    assert red.distance == 0.0


def test_ffs_colinear_example():
    pos = np.array([0.0, 1.0, 10.0])
    c = np.abs(pos[:, None] - pos[None, :])
    red = ffs_reduce(np.full(3, 1 / 3), 1, c)
    assert red.selected == [1]
    np.testing.assert_allclose(red.probabilities, [1.0])
    assert red.distance == pytest.approx(10 / 3)


def test_ffs_ties_go_to_lowest_index():
    c = np.ones((4, 4)) - np.eye(4)
    red = ffs_reduce(np.full(4, 0.25), 2, c)
    assert red.selected == [0, 1]
    # dropped mass goes to the lowest kept index on ties
    np.testing.assert_allclose(red.probabilities, [0.75, 0.25])


def test_ffs_k_out_of_range():
    c = np.zeros((2, 2))
    for k in (0, 3):
        with pytest.raises(ValueError):
            ffs_reduce([0.5, 0.5], k, c)


def test_ffs_beats_random_subsets():
    rng = np.random.default_rng(17)
    c = random_metric(rng, 8)
    p = rng.dirichlet(np.ones(8))
    red = ffs_reduce(p, 3, c)
    random_best = min(
        kantorovich_subset_distance(p, rng.choice(8, 3, replace=False), c) for _ in range(100)
    )
    assert red.distance <= random_best + 1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 8), st.integers(0, 2**32 - 1))
def test_ffs_invariants(n, seed):
    rng = np.random.default_rng(seed)
    c = random_metric(rng, n)
    p = rng.dirichlet(np.ones(n))
    prev = np.inf
    for k in range(1, n + 1):
        red = ffs_reduce(p, k, c)
        assert red.probabilities.sum() == pytest.approx(1.0, abs=1e-9)
        assert np.all(red.probabilities >= p[red.selected] - 1e-15)
        assert red.distance <= prev + 1e-12
        prev = red.distance
        assert ffs_reduce(p, k, c).selected == red.selected


def test_reduce_scenario_set_per_season():
    inst = tiny_instance(4, n_scenarios=6, rate=0.5)
    reduced, reports = reduce_scenario_set(inst.scenarios, inst.network, 2)
    assert len(reduced) == len(inst.scenarios)
    for season, rep in zip(reduced.seasons, reports):
        assert len(season) == 2
        labels = [s.label for s in season]
        assert labels == sorted(labels) and labels == sorted(rep.selected)
        assert sum(s.probability for s in season) == pytest.approx(1.0, abs=1e-12)
        assert rep.distance >= 0
    csv_text = reduction_report_csv(reports, inst.scenarios)
    assert csv_text.splitlines()[0] == "season,selected,probabilities,distance"
    assert len(csv_text.splitlines()) == 1 + len(reports)
