import dataclasses
import random

import pytest

from expressnet import oracle
from expressnet.network import (
    BlockSwapPlan,
    ExpressService,
    Mode,
    Network,
    ServiceArc,
    ServicePlan,
    Station,
    TrainClass,
)
from expressnet.sndet import (
    PlanError,
    SearchConfig,
    ThresholdExceeded,
    dominates,
    enumerate_pareto_exact,
    evaluate_plan,
    nondominated,
    rail_revenue,
    search_services,
    upper_cost,
)
from expressnet.assignment import DemandDecision, LMSolution
from expressnet.network import Demand
from instances import random_network, random_plan


def _one_arc_network(swap=False, tau=150.0, period=24.0):
    stations = [Station("A"), Station("K", block_swap_cost=tau), Station("B")]
    arcs = [
        ServiceArc("e1", "A", "K", Mode.RAIL_EXPRESS, 120.0, 2.0),
        ServiceArc("e2", "K", "B", Mode.RAIL_EXPRESS, 80.0, 2.0),
    ]
    plan = BlockSwapPlan(("e1", "e2"), ("K",) if swap else ())
    svc = ExpressService("X", "A", "B", "K", plan, 1000.0, period, 50.0)
    return Network.build(stations, arcs, [TrainClass("K", 120, 2.0)], [svc])


def test_upper_cost_examples():
    assert upper_cost(ServicePlan(), _one_arc_network()) == 0
    # 1 train/day * (1000 + 2 CNY/km * 200 km)
    assert upper_cost(ServicePlan.of(["X"]), _one_arc_network()) == pytest.approx(1400.0, abs=1e-9)
    assert upper_cost(ServicePlan.of(["X"]), _one_arc_network(swap=True)) == pytest.approx(1550.0, abs=1e-9)


def test_upper_cost_fractional_frequency_matches_oracle():
    n = _one_arc_network(period=36.0)
    got = upper_cost(ServicePlan.of(["X"]), n)
    assert got == pytest.approx(24 / 36 * 1400.0, rel=1e-12)
    assert got == pytest.approx(oracle._z1(n, ServicePlan.of(["X"])), rel=1e-12)


def test_upper_cost_additive_and_homogeneous():
    rng = random.Random(2)
    for _ in range(50):
        n = random_network(rng, n_candidates=6)
        ids = sorted(n.services)
        rng.shuffle(ids)
        a, b = ServicePlan.of(ids[:3]), ServicePlan.of(ids[3:])
        both = ServicePlan(a.active | b.active)
        assert upper_cost(both, n) == pytest.approx(upper_cost(a, n) + upper_cost(b, n), rel=1e-12)
        halved = n.replace(candidate_services=[dataclasses.replace(s, period=s.period / 2) for s in n.candidate_services])
        assert upper_cost(both, halved) == pytest.approx(2 * upper_cost(both, n), rel=1e-12)


def _lm(*decisions):
    return LMSolution("aon", tuple(decisions), {}, 0.0)


def test_rail_revenue_examples():
    d = Demand("A", "B", 100.0, 10.0)
    assert rail_revenue(ServicePlan(), _lm(DemandDecision(d, "highway", None, 0.0, 0.0))) == 0
    assert rail_revenue(ServicePlan(), _lm(DemandDecision(d, "rail", None, 300.0, 100.0))) == 30000
    assert rail_revenue(ServicePlan(), _lm(DemandDecision(d, "split", None, 300.0, 50.0, 0.5))) == 15000


def test_evaluate_fixture_both_services(net):
    empty = evaluate_plan(ServicePlan(), net)
    both = evaluate_plan(ServicePlan.of(["S1", "S3"]), net)
    assert empty.z1 == 0
    assert both.z2 > empty.z2
    assert both.lm.decision("N07", "N03").mode == "rail"
    assert both.z2 == sum(d.rail_unit_cost * d.rail_volume for d in both.lm.decisions)


def test_empty_plan_revenue_counts_regular_feasible_demands_only(net):
    pt = evaluate_plan(ServicePlan(), net)
    bf = oracle.oracle_aon(net, ServicePlan())
    assert pt.z2 == pytest.approx(sum(d.rail_unit_cost * d.rail_volume for d in bf.decisions))
    assert pt.lm.rail_demands() == {("N01", "N03")}


def test_idle_service_adds_cost_but_no_revenue(net):
    idle_arc = ServiceArc("E08-09", "N08", "N09", Mode.RAIL_EXPRESS, 540.0, 6.0)
    idle = ExpressService("S9", "N08", "N09", "X120", BlockSwapPlan(("E08-09",)), 900.0, 24.0, 50.0)
    n = net.replace(arcs=list(net.arcs.values()) + [idle_arc], candidate_services=net.candidate_services + (idle,))
    base = evaluate_plan(ServicePlan(), n)
    pt = evaluate_plan(ServicePlan.of(["S9"]), n)
    assert pt.z1 > 0
    assert pt.z2 == base.z2


def test_plan_with_two_plans_of_one_relation_rejected(net):
    with pytest.raises(PlanError):
        evaluate_plan(ServicePlan.of(["S1", "S2"]), net)
    evaluate_plan(ServicePlan.of(["S1", "S2"]), net, SearchConfig(allow_multiple_plans=True))


def test_exact_frontier_small_cases(net):
    none = net.replace(candidate_services=())
    (only,) = enumerate_pareto_exact(none)
    assert only.plan == ServicePlan()
    one = net.replace(candidate_services=net.candidate_services[:1])
    front = enumerate_pareto_exact(one)
    plans = {p.plan.active for p in front}
    assert plans <= {frozenset(), frozenset({"S1"})}
    assert len(plans) == 2  # S1 costs more and earns more


def test_exact_frontier_fixture_golden(net):
    front = enumerate_pareto_exact(net)
    got = [(p.plan_id, round(p.z1, 6), round(p.z2, 6)) for p in front]
    assert got == [
        ("(none)", 0.0, 16560.0),
        ("S3", 3420.0, 51920.0),
        ("S1+S3", 7580.0, 70420.0),
        ("S4", 13580.0, 73000.0),
    ]
    assert all(not dominates(a, b) for a in front for b in front)


def test_exact_threshold_refuses(net):
    with pytest.raises(ThresholdExceeded):
        enumerate_pareto_exact(net, SearchConfig(exact_threshold=3))


def test_search_zero_demand_prefers_empty_plan(net):
    n = net.replace(demands=())
    (best,) = search_services(n, SearchConfig(weights=(1.0, 1.0)))
    assert best.plan == ServicePlan()


def test_identical_services_never_both_active(net):
    # with ample train size a twin only adds cost; when capacity binds the
    # summed capacity of twins can carry more revenue, so size is raised here
    roomy = [dataclasses.replace(s, train_size=1000.0) for s in net.candidate_services]
    twin = dataclasses.replace(roomy[2], id="S3b")
    n = net.replace(candidate_services=roomy + [twin])
    for cfg in (SearchConfig(), SearchConfig(allow_multiple_plans=True)):
        for p in enumerate_pareto_exact(n, cfg):
            assert not {"S3", "S3b"} <= p.plan.active
        for p in search_services(n, cfg):
            assert not {"S3", "S3b"} <= p.plan.active


@pytest.mark.parametrize("weights", [(1.0, 1.0), (1.0, 0.2), (0.1, 1.0)])
def test_scalarized_search_finds_exact_optimum(net, weights):
    cfg = SearchConfig(weights=weights, seed=3)
    got = search_services(net, cfg)
    w1, w2 = weights
    from expressnet.sndet import feasible_plans

    values = [w1 * p.z1 - w2 * p.z2 for p in (evaluate_plan(pl, net, cfg) for pl in feasible_plans(net))]
    assert w1 * got[0].z1 - w2 * got[0].z2 == pytest.approx(min(values))


def test_search_is_seed_deterministic(net):
    a = search_services(net, SearchConfig(seed=5))
    b = search_services(net, SearchConfig(seed=5))
    assert [(p.plan_id, p.z1, p.z2) for p in a] == [(p.plan_id, p.z1, p.z2) for p in b]


def test_nondominated_keeps_ties():
    from expressnet.sndet import ObjectivePoint

    lm = LMSolution("aon", (), {}, 0.0)
    pts = [
        ObjectivePoint(1.0, 5.0, ServicePlan.of(["a"]), lm),
        ObjectivePoint(1.0, 5.0, ServicePlan.of(["b"]), lm),
        ObjectivePoint(2.0, 5.0, ServicePlan.of(["c"]), lm),
    ]
    assert [p.plan_id for p in nondominated(pts)] == ["a", "b"]


def test_more_services_never_reduce_rail_eligible_demands_under_aon():
    rng = random.Random(6)
    for _ in range(40):
        n = random_network(rng, train_size=(10000, 10000))
        plan = random_plan(rng, n)
        base = evaluate_plan(plan, n).lm.rail_demands()
        for sid in n.services:
            bigger = plan.with_(sid)
            try:
                pt = evaluate_plan(bigger, n)
            except PlanError:
                continue
            assert base <= pt.lm.rail_demands()
