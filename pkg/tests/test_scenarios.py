import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from relayhub.network import Horizon
from relayhub.scenarios import (
    DisruptionRealization,
    ScenarioSet,
    assemble_scenarios,
    gen_demand_scenarios,
    gen_disruption_scenarios,
    generate_scenario_set,
    period_months,
    poisson_sample,
    scenario_rng,
    weekly_demand_rates,
)
from relayhub.synthetic import UNIFORM_SHARES, demo_network, tiny_instance


def test_poisson_zero_rate_is_zero():
    rng = np.random.default_rng(0)
    assert all(poisson_sample(0.0, rng) == 0 for _ in range(100))


def test_poisson_negative_rate_rejected():
    with pytest.raises(ValueError):
        poisson_sample(-0.1, np.random.default_rng(0))


def test_poisson_moments_at_four():
    rng = np.random.default_rng(11)
    draws = np.array([poisson_sample(4.0, rng) for _ in range(100_000)])
    assert 3.94 <= draws.mean() <= 4.06
    assert 3.8 <= draws.var(ddof=1) <= 4.2


def test_period_months_blocks():
    months = period_months(Horizon())
    assert months.size == 52
    np.testing.assert_array_equal(np.bincount(months[:13], minlength=12)[:3], [4, 4, 5])
    assert months[-1] == 11
    assert sorted(set(months.tolist())) == list(range(12))


def test_uniform_weekly_rate():
    rates = weekly_demand_rates([480.0], UNIFORM_SHARES, Horizon())
    np.testing.assert_allclose(rates, 10.0)


def test_zero_annual_demand_gives_zero_rates():
    assert not weekly_demand_rates([0.0], UNIFORM_SHARES, Horizon()).any()


def test_month_share_scaling():
    shares = np.full(12, 0.8 / 11)
    shares[0] = 0.2
    rates = weekly_demand_rates([1200.0], shares, Horizon())
    months = period_months(Horizon())
    np.testing.assert_allclose(rates[months == 0, 0], 60.0)


def test_shares_must_sum_to_one():
    with pytest.raises(ValueError):
        weekly_demand_rates([1.0], np.full(12, 0.08), Horizon())


def test_demand_scenarios_count_zero_and_determinism():
    rates = np.full((4, 2), 3.0)
    a = gen_demand_scenarios(rates, 50, seed=5)
    b = gen_demand_scenarios(rates, 50, seed=5)
    assert len(a) == 50
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    zeros = gen_demand_scenarios(np.zeros((4, 2)), 7, seed=5)
    assert all(not z.any() for z in zeros)


def test_demand_streams_independent_of_workers():
    rates = np.full((13, 3), 7.5)
    a = gen_demand_scenarios(rates, 20, seed=9, workers=1)
    b = gen_demand_scenarios(rates, 20, seed=9, workers=4)
    assert all(np.array_equal(x, y) for x, y in zip(a, b))


def test_scenario_index_stream_is_order_free():
    rates = np.full((3, 1), 2.0)
    full = gen_demand_scenarios(rates, 10, seed=3)
    alone = scenario_rng(3, 0, 7).poisson(rates)
    np.testing.assert_array_equal(full[7], alone)


def test_no_disruption_at_rate_zero():
    net = demo_network(n_od=2)
    dis = gen_disruption_scenarios(net, 0.0, 1.5, 5, 13, seed=1)
    assert all(not d.disrupted.any() for d in dis)
    assert all(np.all(d.multipliers(net) == 1.0) for d in dis)


def test_rate_one_slows_every_hub_arc():
    net = demo_network(n_od=2)
    dis = gen_disruption_scenarios(net, 1.0, 15.0, 2, 3, seed=1)
    mult = dis[0].multipliers(net)
    touches = net.hub_incidence().any(axis=1)
    assert np.all(mult[:, touches] == 15.0)
    assert np.all(mult[:, ~touches] == 1.0)


def test_intensity_below_one_rejected():
    net = demo_network(n_od=2)
    with pytest.raises(ValueError):
        gen_disruption_scenarios(net, 0.1, 0.9, 2, 3, seed=1)


def test_both_endpoints_disrupted_applies_intensity_once():
    net = tiny_instance(0, n_hubs=2).network
    disrupted = np.ones((1, 2), dtype=bool)
    mult = DisruptionRealization(disrupted, 2.0).multipliers(net)
    assert mult.max() == 2.0


def test_disruption_frequency_matches_rate():
    net = demo_network(n_od=2)
    rate = 0.05
    dis = gen_disruption_scenarios(net, rate, 1.5, 500, 20, seed=4)
    hits = np.concatenate([d.disrupted.ravel() for d in dis])
    sigma = np.sqrt(rate * (1 - rate) / hits.size)
    assert abs(hits.mean() - rate) <= 3 * sigma


def test_assemble_uniform_weights_and_mismatch():
    net = tiny_instance(0).network
    hz = Horizon(2, 2, 1)
    dem = gen_demand_scenarios(np.ones((4, 1)), 50, 0)
    dis = gen_disruption_scenarios(net, 0.2, 1.5, 50, 4, 0)
    sset = assemble_scenarios(dem, dis, hz, net)
    assert len(sset) == 2
    assert all(s.probability == 0.02 for s in sset[0])
    one = assemble_scenarios(dem[:1], dis[:1], hz, net)
    assert one[1][0].probability == 1.0
    with pytest.raises(ValueError):
        assemble_scenarios(dem[:3], dis[:2], hz, net)


def test_scenario_season_slices():
    net = tiny_instance(0).network
    hz = Horizon(2, 2, 1)
    dem = gen_demand_scenarios(np.arange(4.0)[:, None] + 1, 3, 0)
    dis = gen_disruption_scenarios(net, 0.5, 2.0, 3, 4, 0)
    sset = assemble_scenarios(dem, dis, hz, net)
    np.testing.assert_array_equal(sset[1][2].demand, dem[2][2:4])
    np.testing.assert_array_equal(sset[1][2].disrupted, dis[2].disrupted[2:4])


def test_travel_times_follow_disruption():
    inst = tiny_instance(2, rate=0.5, intensity=3.0)
    net = inst.network
    inc = net.hub_incidence()
    for season in inst.scenarios.seasons:
        for s in season:
            tt = s.travel_times(net)
            hit = (s.disrupted.astype(int) @ inc.T.astype(int)) > 0
            np.testing.assert_allclose(tt, np.where(hit, 3.0, 1.0) * net.base_hours)


def test_probabilities_must_sum_to_one():
    inst = tiny_instance(0)
    bad = inst.scenarios[0][0].with_probability(0.7)
    with pytest.raises(ValueError):
        ScenarioSet(((bad,),))


def test_json_round_trip_is_exact():
    inst = tiny_instance(1, rate=0.4)
    text = inst.scenarios.dumps()
    back = ScenarioSet.loads(text)
    assert back.dumps() == text
    for a, b in zip(back[0], inst.scenarios[0]):
        np.testing.assert_array_equal(a.multipliers, b.multipliers)
        np.testing.assert_array_equal(a.demand, b.demand)


def test_same_seed_same_document():
    net = demo_network(n_od=2)
    a = generate_scenario_set(net, Horizon(), UNIFORM_SHARES, 5, 0.05, 1.5, seed=1)
    b = generate_scenario_set(net, Horizon(), UNIFORM_SHARES, 5, 0.05, 1.5, seed=1, workers=3)
    assert a.dumps() == b.dumps()


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31), st.floats(0, 1), st.floats(1, 20))
def test_multipliers_two_valued(seed, rate, intensity):
    net = tiny_instance(0, n_hubs=3).network
    for d in gen_disruption_scenarios(net, rate, intensity, 2, 3, seed):
        m = d.multipliers(net)
        assert np.all((m == 1.0) | (m == intensity))
