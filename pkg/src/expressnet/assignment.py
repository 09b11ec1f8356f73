"""Lower-level freight assignment: rail path vs. highway for every demand.

Three rules share one result type:

* :func:`solve_lower` minimises total shipping expense (integral choice,
  capacity-aware).
* :func:`assign_aon` sends a demand to rail iff its rail general cost beats
  the highway general cost by more than ``delta``.
* :func:`assign_logit` splits each demand with a binary logit on negative
  general costs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from .network import Demand, Network, ServicePlan, arc_capacity
from .pathgen import Path, highway_option

INFEASIBLE = None  # rail general cost when R_st is empty
CAPACITY_TOL = 1e-9
# callables run on every LMSolution at construction (used by the test suite)
SOLUTION_HOOKS: list = []


@dataclass(frozen=True)
class GeneralCost:
    time_component: float
    expense_component: float
    total: float

    @property
    def utility(self) -> float:
        return -self.total


def general_cost(time: float, expense: float, gamma: float) -> GeneralCost:
    """gamma * time + expense, keeping both components."""
    return GeneralCost(time, expense, gamma * time + expense)


@dataclass(frozen=True)
class DemandDecision:
    demand: Demand
    mode: str  # "rail" | "highway" | "split"
    rail_path: Optional[Path]
    rail_unit_cost: float  # C^Rail_st
    rail_volume: float  # f^Rail_st
    rail_probability: Optional[float] = None
    highway_path: Optional[Path] = None

    @property
    def highway_volume(self) -> float:
        return self.demand.volume - self.rail_volume


@dataclass(frozen=True)
class LMSolution:
    rule: str
    decisions: tuple[DemandDecision, ...]
    arc_loads: Mapping[str, float]
    total_cost: float
    heuristic: bool = False
    capacities: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        for hook in SOLUTION_HOOKS:
            hook(self)

    def decision(self, origin: str, destination: str) -> DemandDecision:
        for d in self.decisions:
            if d.demand.key == (origin, destination):
                return d
        raise KeyError((origin, destination))

    def rail_demands(self) -> set[tuple[str, str]]:
        return {d.demand.key for d in self.decisions if d.rail_volume > 0}

    def capacity_ok(self, tol: float = 1e-6) -> bool:
        return all(load <= self.capacities.get(a, math.inf) + tol for a, load in self.arc_loads.items())


def rail_general_cost(paths: Sequence[Path], gamma: float) -> Optional[GeneralCost]:
    """Cheapest general cost over R_st; INFEASIBLE (None) if R_st is empty.

    ``paths`` is expected in enumeration order, so the first of several equal
    minima wins.
    """
    best = None
    for p in paths:
        gc = general_cost(p.travel_time, p.unit_cost, gamma)
        if best is None or gc.total < best.total:
            best = gc
    return best


def logit_probability(rail: Optional[GeneralCost], highway: GeneralCost, theta: float) -> float:
    """Binary logit share of rail with utilities ``-theta * total``."""
    if not theta > 0:
        raise ValueError(f"theta must be > 0, got {theta}")
    if rail is None or math.isinf(rail.total):
        return 0.0
    u_rail = theta * rail.utility
    u_hw = theta * highway.utility
    top = max(u_rail, u_hw)
    e_rail = math.exp(u_rail - top)
    e_hw = math.exp(u_hw - top)
    return e_rail / (e_rail + e_hw)


class _Capacity:
    def __init__(self, network: Network, plan: ServicePlan):
        self.network = network
        self.plan = plan
        self.caps: dict[str, float] = {}
        self.loads: dict[str, float] = {}

    def cap(self, arc_id: str) -> float:
        if arc_id not in self.caps:
            arc = self.network.arcs.get(arc_id)
            self.caps[arc_id] = arc_capacity(arc, self.plan, self.network) if arc else self.network.big_m
        return self.caps[arc_id]

    def fits(self, path: Path, volume: float) -> bool:
        return all(self.loads.get(a, 0.0) + volume <= self.cap(a) + CAPACITY_TOL for a in path.arcs)

    def room(self, path: Path) -> float:
        return min(self.cap(a) - self.loads.get(a, 0.0) for a in path.arcs)

    def add(self, path: Path, volume: float) -> None:
        for a in path.arcs:
            self.cap(a)
            self.loads[a] = self.loads.get(a, 0.0) + volume

    def binding_possible(self, paths_per_demand, demands) -> bool:
        # total rail-eligible volume per arc cannot exceed its capacity -> separable
        worst: dict[str, float] = {}
        for d in demands:
            arcs = set()
            for p in paths_per_demand.get(d.key, ()):
                arcs.update(p.arcs)
            for a in arcs:
                worst[a] = worst.get(a, 0.0) + d.volume
        return any(v > self.cap(a) + CAPACITY_TOL for a, v in worst.items())

    def bounded(self) -> dict[str, float]:
        return {a: c for a, c in self.caps.items() if c < self.network.big_m}


def _finish(rule, decisions, cap: _Capacity, heuristic=False) -> LMSolution:
    total = 0.0
    for dec in decisions:
        hw = dec.highway_path.unit_cost if dec.highway_path else 0.0
        total += dec.rail_volume * dec.rail_unit_cost + dec.highway_volume * hw
    loads = {a: v for a, v in sorted(cap.loads.items()) if v > 1e-12}
    return LMSolution(rule, tuple(decisions), loads, total, heuristic, cap.bounded())


def _rail_decision(dem: Demand, path: Path, hw: Path, volume: float | None = None, prob=None) -> DemandDecision:
    volume = dem.volume if volume is None else volume
    mode = "rail" if prob is None else "split"
    return DemandDecision(dem, mode, path, path.unit_cost, volume, prob, hw)


def _highway_decision(dem: Demand, hw: Path, prob=None) -> DemandDecision:
    return DemandDecision(dem, "highway" if prob is None else "split", None, 0.0, 0.0, prob, hw)


def _ordered(demands, keyfun):
    return sorted(demands, key=lambda d: (-keyfun(d), d.key))


def assign_aon(
    network: Network,
    demands: Sequence[Demand],
    plan: ServicePlan,
    paths_per_demand: Mapping[tuple[str, str], Sequence[Path]],
    gamma: float | None = None,
    delta: float | None = None,
) -> LMSolution:
    """All-or-nothing on general cost with switching margin ``delta``.

    A demand goes wholly to rail iff ``rail < highway - delta`` (ties stay on
    highway). Rail candidates are tried cheapest first; a path without spare
    capacity is skipped, demands with the largest volume-weighted savings
    claim capacity first.
    """
    gamma = network.params.gamma if gamma is None else gamma
    delta = network.params.delta if delta is None else delta
    if delta < 0:
        raise ValueError("delta must be >= 0")
    cap = _Capacity(network, plan)
    hw = {d.key: highway_option(network, d) for d in demands}

    def eligible(d):
        h = hw[d.key].general_cost(gamma)
        paths = sorted(paths_per_demand.get(d.key, ()), key=lambda p: p.general_cost(gamma))
        return [p for p in paths if p.general_cost(gamma) < h - delta]

    def saving(d):
        el = eligible(d)
        return (hw[d.key].general_cost(gamma) - el[0].general_cost(gamma)) * d.volume if el else -math.inf

    binding = cap.binding_possible(paths_per_demand, demands)
    order = _ordered(demands, saving) if binding else list(demands)
    chosen = {}
    diverted = False
    for d in order:
        el = eligible(d)
        pick = next((p for p in el if cap.fits(p, d.volume)), None)
        if el and pick is not el[0]:
            diverted = True
        if pick is None:
            chosen[d.key] = _highway_decision(d, hw[d.key])
        else:
            cap.add(pick, d.volume)
            chosen[d.key] = _rail_decision(d, pick, hw[d.key])
    return _finish("aon", [chosen[d.key] for d in demands], cap, diverted)


def assign_logit(
    network: Network,
    demands: Sequence[Demand],
    plan: ServicePlan,
    paths_per_demand: Mapping[tuple[str, str], Sequence[Path]],
    gamma: float | None = None,
    theta: float | None = None,
) -> LMSolution:
    """Binary logit split; rail share rides the cheapest rail path.

    If that share does not fit the remaining capacity it moves to the next
    path with room; failing that, rail volume is cut to the best available
    room and the decision's probability reports the realised share.
    """
    gamma = network.params.gamma if gamma is None else gamma
    theta = network.params.theta if theta is None else theta
    if not theta > 0:
        raise ValueError("theta must be > 0")
    cap = _Capacity(network, plan)
    hw = {d.key: highway_option(network, d) for d in demands}
    probs = {}
    for d in demands:
        paths = paths_per_demand.get(d.key, ())
        h = general_cost(hw[d.key].travel_time, hw[d.key].unit_cost, gamma)
        probs[d.key] = logit_probability(rail_general_cost(paths, gamma), h, theta)

    binding = cap.binding_possible(paths_per_demand, demands)
    order = _ordered(demands, lambda d: probs[d.key] * d.volume) if binding else list(demands)
    chosen = {}
    heuristic = False
    for d in order:
        prob = probs[d.key]
        volume = prob * d.volume
        if volume <= 0:
            chosen[d.key] = _highway_decision(d, hw[d.key], prob)
            continue
        paths = sorted(paths_per_demand.get(d.key, ()), key=lambda p: p.general_cost(gamma))
        pick = next((p for p in paths if cap.fits(p, volume)), None)
        if pick is not paths[0]:
            heuristic = True
        if pick is None:
            pick = max(paths, key=cap.room)
            volume = max(cap.room(pick), 0.0)
            prob = volume / d.volume
        if volume <= 0:
            chosen[d.key] = _highway_decision(d, hw[d.key], 0.0)
            continue
        cap.add(pick, volume)
        chosen[d.key] = _rail_decision(d, pick, hw[d.key], volume, prob)
    return _finish("logit", [chosen[d.key] for d in demands], cap, heuristic)


def solve_lower(
    network: Network,
    demands: Sequence[Demand],
    plan: ServicePlan,
    paths_per_demand: Mapping[tuple[str, str], Sequence[Path]],
) -> LMSolution:
    """Expense-minimising integral assignment (min sum of c * x * F).

    Separable unless capacities can bind. When they can, demands with the
    largest volume-weighted saving go first and overflow falls to the next
    cheaper rail path or highway; a single-demand reroute pass then removes
    obvious regret. ``heuristic`` is set whenever a diversion occurred.
    """
    cap = _Capacity(network, plan)
    hw = {d.key: highway_option(network, d) for d in demands}

    def options(d):
        paths = sorted(paths_per_demand.get(d.key, ()), key=lambda p: (p.unit_cost, p.index))
        return [p for p in paths if p.unit_cost < hw[d.key].unit_cost]

    if not cap.binding_possible(paths_per_demand, demands):
        decisions = []
        for d in demands:
            opts = options(d)
            if opts:
                cap.add(opts[0], d.volume)
                decisions.append(_rail_decision(d, opts[0], hw[d.key]))
            else:
                decisions.append(_highway_decision(d, hw[d.key]))
        return _finish("lm", decisions, cap)

    def saving(d):
        opts = options(d)
        return (hw[d.key].unit_cost - opts[0].unit_cost) * d.volume if opts else -math.inf

    choice: dict[tuple[str, str], Optional[Path]] = {}
    diverted = False
    for d in _ordered(demands, saving):
        opts = options(d)
        pick = next((p for p in opts if cap.fits(p, d.volume)), None)
        if opts and pick is not opts[0]:
            diverted = True
        choice[d.key] = pick
        if pick is not None:
            cap.add(pick, d.volume)

    if diverted:
        _improve(demands, choice, options, hw, cap)

    decisions = []
    for d in demands:
        p = choice[d.key]
        decisions.append(_rail_decision(d, p, hw[d.key]) if p else _highway_decision(d, hw[d.key]))
    return _finish("lm", decisions, cap, diverted)


def _cost_of(d, p, hw):
    return (p.unit_cost if p else hw[d.key].unit_cost) * d.volume


def _improve(demands, choice, options, hw, cap: _Capacity, rounds: int = 10) -> None:
    # single reroutes, then pairwise exchanges that free capacity for a bigger saving
    for _ in range(rounds):
        improved = False
        for d in demands:
            cur = choice[d.key]
            if cur is not None:
                cap.add(cur, -d.volume)
            best, best_cost = cur, _cost_of(d, cur, hw)
            for p in options(d):
                if _cost_of(d, p, hw) < best_cost - 1e-9 and cap.fits(p, d.volume):
                    best, best_cost = p, _cost_of(d, p, hw)
            if best is not None:
                cap.add(best, d.volume)
            if best is not cur:
                choice[d.key] = best
                improved = True
        for a in demands:
            for b in demands:
                if a is b:
                    continue
                if _pair_move(a, b, choice, options, hw, cap):
                    improved = True
        if not improved:
            return


def _pair_move(a, b, choice, options, hw, cap: _Capacity) -> bool:
    ca, cb = choice[a.key], choice[b.key]
    before = _cost_of(a, ca, hw) + _cost_of(b, cb, hw)
    if ca is not None:
        cap.add(ca, -a.volume)
    if cb is not None:
        cap.add(cb, -b.volume)
    best = None
    for pa in [None] + options(a):
        if pa is not None and not cap.fits(pa, a.volume):
            continue
        if pa is not None:
            cap.add(pa, a.volume)
        for pb in [None] + options(b):
            cost = _cost_of(a, pa, hw) + _cost_of(b, pb, hw)
            if cost < before - 1e-9 and (pb is None or cap.fits(pb, b.volume)):
                if best is None or cost < best[0] - 1e-12:
                    best = (cost, pa, pb)
        if pa is not None:
            cap.add(pa, -a.volume)
    if best is None:
        if ca is not None:
            cap.add(ca, a.volume)
        if cb is not None:
            cap.add(cb, b.volume)
        return False
    _, pa, pb = best
    for d, p in ((a, pa), (b, pb)):
        choice[d.key] = p
        if p is not None:
            cap.add(p, d.volume)
    return True
