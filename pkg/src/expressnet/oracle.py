"""Brute-force reference implementations.

Everything here is recomputed from the raw network with plain enumeration:
its own leg construction, depth-first path listing, highway route listing,
capacity arithmetic and objective sums. Nothing is shared with the fast
code paths except the data types, so the two can check each other.
"""
from __future__ import annotations

import itertools
import math

from .assignment import DemandDecision, LMSolution
from .network import Mode, Network, ServicePlan
from .pathgen import Path
from .sndet import ObjectivePoint, SearchConfig

MAX_COMBINATIONS = 10**6
MAX_CANDIDATES = 14


class OracleLimit(RuntimeError):
    pass


def _legs(network: Network, plan: ServicePlan):
    legs = []
    for arc in network.arcs.values():
        if arc.mode == Mode.RAIL_REGULAR:
            legs.append((arc.origin, arc.destination, [arc.id], None))
    for sid in plan.active:
        svc = network.services[sid]
        seq = [network.arcs[a] for a in svc.plan.arcs]
        stations = [seq[0].origin] + [a.destination for a in seq]
        stop_idx = [
            i for i, s in enumerate(stations) if i in (0, len(stations) - 1) or s in svc.plan.swap_stations
        ]
        for x in range(len(stop_idx)):
            for y in range(x + 1, len(stop_idx)):
                p, q = stop_idx[x], stop_idx[y]
                legs.append((stations[p], stations[q], [a.id for a in seq[p:q]], sid))
    return legs


def all_rail_paths(network: Network, demand, plan: ServicePlan) -> list[Path]:
    """Every station-simple rail path meeting the due time, sorted like R_st."""
    legs = _legs(network, plan)
    p, tar = network.params, network.tariffs
    found = []

    def dfs(node, visited, chosen):
        if node == demand.destination:
            found.append(list(chosen))
            return
        for leg in legs:
            if leg[0] != node:
                continue
            passed = [network.arcs[a].destination for a in leg[2]]
            if any(x in visited for x in passed):
                continue
            chosen.append(leg)
            visited.update(passed)
            dfs(leg[1], visited, chosen)
            visited.difference_update(passed)
            chosen.pop()

    dfs(demand.origin, {demand.origin}, [])
    out = []
    for chosen in found:
        arcs = [a for leg in chosen for a in leg[2]]
        n_transfer = len(chosen) - 1
        time = sum(network.arcs[a].travel_time for a in arcs) + p.dwell_hours * n_transfer
        if time > demand.due_time + 1e-9:
            continue
        dist = sum(network.arcs[a].distance for a in arcs)
        cost = tar.rail_per_km * dist + tar.rail_handling + tar.rail_swap_charge * n_transfer
        stations = [demand.origin] + [network.arcs[a].destination for a in arcs]
        out.append(
            Path(
                demand=demand.key,
                index=0,
                mode="rail",
                arcs=tuple(arcs),
                stations=tuple(stations),
                services=tuple(leg[3] for leg in chosen),
                leg_arc_counts=tuple(len(leg[2]) for leg in chosen),
                travel_time=time,
                distance=dist,
                unit_cost=cost,
            )
        )
    out.sort(
        key=lambda q: (
            round(p.gamma * q.travel_time + q.unit_cost, 9),
            round(q.travel_time, 9),
            q.arcs,
            tuple(s or "" for s in q.services),
        )
    )
    return [Path(**{**q.__dict__, "index": i}) for i, q in enumerate(out)]


def rail_path_set(network: Network, demand, plan: ServicePlan, k_max: int | None = None) -> list[Path]:
    k = network.params.k_max if k_max is None else k_max
    return all_rail_paths(network, demand, plan)[:k]


def highway_path(network: Network, demand) -> Path:
    """Direct highway option by listing every simple highway route."""
    s, t = demand.origin, demand.destination
    direct = [a for a in network.arcs.values() if a.mode == Mode.HIGHWAY and (a.origin, a.destination) == (s, t)]
    if direct:
        a = direct[0]
        time, dist, aid = a.travel_time, a.distance, a.id
    else:
        best_t, best_d = math.inf, math.inf
        hwy = [a for a in network.arcs.values() if a.mode == Mode.HIGHWAY]

        def dfs(node, visited, t_sum, d_sum, n):
            nonlocal best_t, best_d
            if node == t:
                best_t = min(best_t, t_sum - (n - 1))
                best_d = min(best_d, d_sum)
                return
            for a in hwy:
                if a.origin == node and a.destination not in visited:
                    visited.add(a.destination)
                    dfs(a.destination, visited, t_sum + a.travel_time, d_sum + a.distance, n + 1)
                    visited.remove(a.destination)

        dfs(s, {s}, 0.0, 0.0, 0)
        if math.isinf(best_t):
            raise OracleLimit(f"no highway route {s}->{t}")
        time, dist, aid = best_t, best_d, f"hw:{s}>{t}"
    return Path(demand.key, 0, "highway", (aid,), (s, t), (), (1,), time, dist, network.tariffs.highway_per_km * dist)


def _capacity(network: Network, plan: ServicePlan, arc_id: str) -> float:
    arc = network.arcs.get(arc_id)
    if arc is None or arc.mode != Mode.RAIL_EXPRESS:
        return network.big_m
    using = [network.services[s] for s in plan.active if arc_id in network.services[s].plan.arcs]
    if using:
        return sum(24.0 / s.period * s.train_size for s in using)
    return arc.capacity if arc.capacity is not None else network.big_m


def _solution(rule, network, plan, demands, picks, hw_paths, probs=None) -> LMSolution:
    decisions, loads, total = [], {}, 0.0
    for d, pick in zip(demands, picks):
        hw = hw_paths[d.key]
        prob = None if probs is None else probs[d.key]
        if probs is not None:
            vol = d.volume * prob if pick is not None else 0.0
            mode = "split"
        else:
            vol = d.volume if pick is not None else 0.0
            mode = "rail" if pick is not None else "highway"
        for a in pick.arcs if pick is not None else ():
            loads[a] = loads.get(a, 0.0) + vol
        c_rail = pick.unit_cost if pick is not None else 0.0
        total += vol * c_rail + (d.volume - vol) * hw.unit_cost
        decisions.append(DemandDecision(d, mode, pick if vol > 0 else None, c_rail if vol > 0 else 0.0, vol, prob, hw))
    caps = {a: _capacity(network, plan, a) for a in loads}
    loads = {a: v for a, v in sorted(loads.items()) if v > 1e-12}
    return LMSolution(rule, tuple(decisions), loads, total, False, {a: c for a, c in caps.items() if c < network.big_m})


def brute_force_lm(network: Network, demands, plan: ServicePlan, paths_per_demand=None) -> LMSolution:
    """Exhaustive minimum of total expense over every highway / rail-path combination."""
    demands = list(demands)
    hw_paths = {d.key: highway_path(network, d) for d in demands}
    if paths_per_demand is None:
        paths_per_demand = {d.key: rail_path_set(network, d, plan) for d in demands}
    options = [[None] + list(paths_per_demand.get(d.key, ())) for d in demands]
    n = math.prod(len(o) for o in options)
    if n > MAX_COMBINATIONS:
        raise OracleLimit(f"{n} combinations exceed {MAX_COMBINATIONS}")
    cap_cache: dict[str, float] = {}
    best, best_cost = None, math.inf
    for combo in itertools.product(*options):
        loads: dict[str, float] = {}
        cost = 0.0
        for d, pick in zip(demands, combo):
            if pick is None:
                cost += hw_paths[d.key].unit_cost * d.volume
            else:
                cost += pick.unit_cost * d.volume
                for a in pick.arcs:
                    loads[a] = loads.get(a, 0.0) + d.volume
        if cost >= best_cost - 1e-9:
            continue
        ok = True
        for a, v in loads.items():
            if a not in cap_cache:
                cap_cache[a] = _capacity(network, plan, a)
            if v > cap_cache[a] + 1e-9:
                ok = False
                break
        if ok:
            best, best_cost = combo, cost
    return _solution("lm", network, plan, demands, best, hw_paths)


def _general(network, path):
    return network.params.gamma * path.travel_time + path.unit_cost


def _check_capacity(network, plan, demands, picks, probs=None) -> None:
    loads: dict[str, float] = {}
    for d, pick in zip(demands, picks):
        share = 1.0 if probs is None else probs[d.key]
        for a in pick.arcs if pick is not None else ():
            loads[a] = loads.get(a, 0.0) + d.volume * share
    for a, v in loads.items():
        if v > _capacity(network, plan, a) + 1e-6:
            raise OracleLimit("oracle aon/logit rules only cover instances with nonbinding capacity")


def oracle_aon(network: Network, plan: ServicePlan) -> LMSolution:
    picks, hw_paths = [], {}
    for d in network.demands:
        hw = hw_paths[d.key] = highway_path(network, d)
        paths = rail_path_set(network, d, plan)
        best = min(paths, key=lambda q: _general(network, q), default=None)
        ok = best is not None and _general(network, best) < _general(network, hw) - network.params.delta
        picks.append(best if ok else None)
    _check_capacity(network, plan, network.demands, picks)
    return _solution("aon", network, plan, network.demands, picks, hw_paths)


def oracle_logit(network: Network, plan: ServicePlan) -> LMSolution:
    picks, hw_paths, probs = [], {}, {}
    theta = network.params.theta
    for d in network.demands:
        hw = hw_paths[d.key] = highway_path(network, d)
        paths = rail_path_set(network, d, plan)
        best = min(paths, key=lambda q: _general(network, q), default=None)
        if best is None:
            probs[d.key] = 0.0
        else:
            # logistic form, deliberately different from the softmax in assignment
            diff = theta * (_general(network, best) - _general(network, hw))
            probs[d.key] = 1.0 / (1.0 + math.exp(diff)) if diff < 700 else 0.0
        picks.append(best)
    _check_capacity(network, plan, network.demands, picks, probs)
    return _solution("logit", network, plan, network.demands, picks, hw_paths, probs)


def _z1(network: Network, plan: ServicePlan) -> float:
    total = 0.0
    for sid in plan.active:
        s = network.services[sid]
        km = sum(network.arcs[a].distance for a in s.plan.arcs)
        tau = sum(network.stations[k].block_swap_cost for k in s.plan.swap_stations)
        total += 24.0 / s.period * (s.fixed_cost + network.classes[s.train_class].unit_km_cost * km + tau)
    return total


def brute_force_um(network: Network, config: SearchConfig | None = None) -> list[ObjectivePoint]:
    """Evaluate every admissible plan and keep the nondominated (min z1, max z2) points."""
    config = config or SearchConfig()
    ids = [s.id for s in network.candidate_services]
    if len(ids) > MAX_CANDIDATES:
        raise OracleLimit(f"{len(ids)} candidates exceed {MAX_CANDIDATES}")
    rule = {"aon": oracle_aon, "logit": oracle_logit}.get(config.assignment_rule)
    points = []
    for mask in range(2 ** len(ids)):
        active = [ids[i] for i in range(len(ids)) if mask >> i & 1]
        relations = [network.services[s].relation for s in active]
        if not config.allow_multiple_plans and len(set(relations)) < len(relations):
            continue
        plan = ServicePlan.of(active)
        lm = rule(network, plan) if rule else brute_force_lm(network, network.demands, plan)
        z2 = sum(d.rail_unit_cost * d.rail_volume for d in lm.decisions)
        points.append(ObjectivePoint(_z1(network, plan), z2, plan, lm))

    def tol(a, b):
        return 1e-9 * max(1.0, abs(a), abs(b))

    def beats(a, b):
        t1, t2 = tol(a.z1, b.z1), tol(a.z2, b.z2)
        return (a.z1 <= b.z1 + t1 and a.z2 >= b.z2 - t2) and (a.z1 < b.z1 - t1 or a.z2 > b.z2 + t2)

    front = [p for p in points if not any(beats(q, p) for q in points)]
    return sorted(front, key=lambda p: (p.z1, -p.z2, p.plan_id))
