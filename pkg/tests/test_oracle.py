import random

import pytest

from expressnet import oracle
from expressnet.network import (
    BlockSwapPlan,
    Demand,
    ExpressService,
    GlobalParams,
    Mode,
    Network,
    ServiceArc,
    ServicePlan,
    Station,
    TariffTable,
    TrainClass,
)
from expressnet.sndet import SearchConfig, enumerate_pareto_exact
from instances import random_network

FLAT = TariffTable(rail_per_km=1.0, rail_handling=0.0, rail_swap_charge=0.0, highway_per_km=1.0)


def _pair(size=50.0, volume=30.0):
    arcs = [
        ServiceArc("e", "A", "B", Mode.RAIL_EXPRESS, 100.0, 2.0),
        ServiceArc("h", "A", "B", Mode.HIGHWAY, 300.0, 4.0),
    ]
    svc = ExpressService("X", "A", "B", "K", BlockSwapPlan(("e",)), 100.0, 24.0, size)
    return Network.build(
        [Station("A"), Station("B")], arcs, [TrainClass("K", 120, 1.0)], [svc],
        [Demand("A", "B", volume, 10.0)], GlobalParams(), FLAT,
    )


def test_single_demand_takes_cheaper_rail():
    n = _pair()
    sol = oracle.brute_force_lm(n, n.demands, ServicePlan.of(["X"]))
    (dec,) = sol.decisions
    assert dec.mode == "rail" and dec.rail_volume == 30.0
    assert sol.total_cost == 30.0 * 100.0


def test_zero_room_forces_highway():
    n = _pair(size=10.0)
    sol = oracle.brute_force_lm(n, n.demands, ServicePlan.of(["X"]))
    assert sol.decisions[0].mode == "highway"
    assert sol.total_cost == 30.0 * 300.0


def test_inactive_service_leaves_only_highway():
    n = _pair()
    sol = oracle.brute_force_lm(n, n.demands, ServicePlan())
    assert sol.decisions[0].mode == "highway"


def test_three_demands_three_options_hand_checked():
    # express A->B holds 40; a regular A->B detour costs 200; highway costs 300
    arcs = [
        ServiceArc("e", "A", "B", Mode.RAIL_EXPRESS, 100.0, 2.0),
        ServiceArc("r", "A", "B", Mode.RAIL_REGULAR, 200.0, 5.0),
        ServiceArc("h", "A", "B", Mode.HIGHWAY, 300.0, 4.0),
        ServiceArc("h2", "B", "A", Mode.HIGHWAY, 300.0, 4.0),
        ServiceArc("h3", "A", "A2", Mode.HIGHWAY, 10.0, 2.0),
        ServiceArc("h4", "A2", "A", Mode.HIGHWAY, 10.0, 2.0),
    ]
    svc = ExpressService("X", "A", "B", "K", BlockSwapPlan(("e",)), 100.0, 24.0, 40.0)
    demands = [Demand("A", "B", 30.0, 20.0), Demand("A", "B", 20.0, 20.0), Demand("A", "B", 10.0, 20.0)]
    n = Network.build(
        [Station(s) for s in ("A", "B", "A2")], arcs, [TrainClass("K", 120, 1.0)], [svc], [], GlobalParams(), FLAT
    )
    plan = ServicePlan.of(["X"])
    sol = oracle.brute_force_lm(n, demands, plan)
    # best: 30 + 10 on the express (40), 20 on the regular detour
    assert sol.total_cost == pytest.approx(40 * 100.0 + 20 * 200.0)
    assert sol.arc_loads["e"] == 40.0


def test_brute_force_um_without_candidates(net):
    n = net.replace(candidate_services=())
    (only,) = oracle.brute_force_um(n)
    assert only.plan == ServicePlan() and only.z1 == 0


EXACT = SearchConfig(assignment_rule="lm_exact")


def test_brute_force_um_two_candidates(net):
    n = net.replace(candidate_services=[net.services["S1"], net.services["S3"]])
    got = [p.plan_id for p in oracle.brute_force_um(n, EXACT)]
    assert got == [p.plan_id for p in enumerate_pareto_exact(n, EXACT)]
    assert "(none)" in got


def test_fixture_frontier_agrees_with_fast_enumeration(net):
    # capacity binds on the fixture, so the comparison uses the exact lower level
    fast = [(p.plan_id, round(p.z1, 6), round(p.z2, 6)) for p in enumerate_pareto_exact(net, EXACT)]
    slow = [(p.plan_id, round(p.z1, 6), round(p.z2, 6)) for p in oracle.brute_force_um(net, EXACT)]
    assert fast == slow


def test_fixture_aon_frontier_with_roomy_trains(net):
    import dataclasses

    n = net.replace(candidate_services=[dataclasses.replace(s, train_size=1000.0) for s in net.candidate_services])
    fast = [(p.plan_id, round(p.z1, 6), round(p.z2, 6)) for p in enumerate_pareto_exact(n)]
    assert fast == [(p.plan_id, round(p.z1, 6), round(p.z2, 6)) for p in oracle.brute_force_um(n)]


def test_oracle_aon_refuses_binding_capacity():
    n = _pair(size=10.0)
    with pytest.raises(oracle.OracleLimit):
        oracle.oracle_aon(n, ServicePlan.of(["X"]))


def test_combination_limit():
    rng = random.Random(1)
    n = random_network(rng, n_stations=6, n_demands=5)
    too_many = {d.key: [None] * 20 for d in n.demands}
    with pytest.raises(oracle.OracleLimit):
        oracle.brute_force_lm(n, n.demands, ServicePlan(), too_many)


def test_highway_route_listing_matches_fixture(net):
    assert oracle.highway_path(net, Demand("N07", "N03", 1, 99)).travel_time == 21.0
    assert oracle.highway_path(net, Demand("N07", "N02", 1, 99)).travel_time == 15.0
