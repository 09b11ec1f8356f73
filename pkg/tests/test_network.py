import dataclasses
import random

import pytest
from hypothesis import given, strategies as st

from expressnet.network import (
    BlockSwapPlan,
    ExpressService,
    Mode,
    ServiceArc,
    ServicePlan,
    arc_capacity,
    train_frequency,
    validate_network,
)
from instances import random_network, random_plan


def _svc(period=24.0, size=50.0, arcs=("E01-02", "E02-03"), sid="T"):
    return ExpressService(sid, "N01", "N03", "X120", BlockSwapPlan(arcs), 1000.0, period, size)


def test_fixture_is_valid(net):
    assert validate_network(net) == []
    assert len(net.stations) == 11


def test_regular_rail_only_between_adjacent_nodes(net):
    # every regular arc has a highway segment on the same station pair
    for arc in net.arcs.values():
        if arc.mode is Mode.RAIL_REGULAR:
            assert net.find_arc(arc.origin, arc.destination, Mode.HIGHWAY) is not None


def test_unknown_endpoint_is_one_violation(net):
    bad = ServiceArc("Rxx", "N01", "N99", Mode.RAIL_REGULAR, 10.0, 1.0)
    got = validate_network(net.replace(arcs=list(net.arcs.values()) + [bad]))
    assert len(got) == 1
    assert "Rxx" in got[0].entity and "N99" in got[0].rule


def test_zero_train_size_is_one_violation(net):
    svc = dataclasses.replace(net.candidate_services[0], train_size=0.0)
    got = validate_network(net.replace(candidate_services=(svc,) + net.candidate_services[1:]))
    assert len(got) == 1
    assert "train_size" in got[0].rule


@pytest.mark.parametrize(
    "mutate, rule",
    [
        (lambda s: dataclasses.replace(s, plan=BlockSwapPlan(("E02-03", "E01-02"))), "not connected"),
        (lambda s: dataclasses.replace(s, plan=BlockSwapPlan(("E01-02", "E02-03"), ("N01",))), "not interior"),
        (lambda s: dataclasses.replace(s, plan=BlockSwapPlan(("H01-02",))), "not a rail arc"),
        (lambda s: dataclasses.replace(s, period=-1.0), "period"),
    ],
)
def test_plan_violations(net, mutate, rule):
    svc = mutate(net.candidate_services[0])
    got = validate_network(net.replace(candidate_services=(svc,) + net.candidate_services[1:]))
    assert any(rule in v.rule for v in got)


def test_duplicate_station_id_flagged(net):
    stations = list(net.stations.values())
    got = validate_network(net.replace(stations=stations + [stations[0]]))
    assert any("duplicate station" in v.rule for v in got)


def test_validate_is_idempotent(net):
    assert validate_network(net) == validate_network(net)


@pytest.mark.parametrize("period, expected", [(24, 1.0), (12, 2.0), (36, 24 / 36)])
def test_train_frequency(period, expected):
    assert train_frequency(_svc(period=period)) == pytest.approx(expected, rel=1e-15)


def test_train_frequency_rejects_nonpositive_period():
    with pytest.raises(ValueError):
        train_frequency(_svc(period=0.0))


@given(st.floats(min_value=1e-3, max_value=1e4), st.floats(min_value=1e-3, max_value=1e4))
def test_frequency_identity_and_monotonic(p, q):
    f = train_frequency(_svc(period=p))
    assert abs(f * p - 24.0) <= 1e-12 * 24
    if p < q:
        assert f > train_frequency(_svc(period=q))


def test_arc_capacity_cases(net):
    svc = _svc(period=24, size=50, sid="A")
    other = _svc(period=24, size=40, sid="B")
    net2 = net.replace(candidate_services=(svc, other))
    e = net2.arcs["E01-02"]
    assert arc_capacity(e, ServicePlan.of(["A"]), net2) == 50
    assert arc_capacity(e, ServicePlan(), net2) == net2.big_m
    assert arc_capacity(e, ServicePlan.of(["A", "B"]), net2) == 90


def test_big_m_default_is_ten_times_total_volume(net):
    assert net.big_m == 10 * sum(d.volume for d in net.demands)


def test_non_express_arcs_always_big_m():
    rng = random.Random(3)
    for _ in range(30):
        n = random_network(rng)
        plan = random_plan(rng, n)
        for arc in n.arcs.values():
            if arc.mode is not Mode.RAIL_EXPRESS:
                assert arc_capacity(arc, plan, n) == n.big_m
