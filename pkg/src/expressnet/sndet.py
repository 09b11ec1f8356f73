"""Upper level: which express services to run.

Objectives per day: ``z1`` is train operating cost (minimise), ``z2`` is the
rail revenue captured by the lower-level assignment (maximise).
"""
from __future__ import annotations

import itertools
import math
import random
import statistics
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional

from .assignment import LMSolution, assign_aon, assign_logit, solve_lower
from .network import Network, ServicePlan, train_frequency
from .pathgen import rail_paths_for

RULES = ("aon", "logit", "lm_exact")
NEIGHBORHOODS = ("add_drop", "add_drop_swap")
DOMINANCE_RTOL = 1e-9


class PlanError(ValueError):
    pass


class ThresholdExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class SearchConfig:
    assignment_rule: str = "aon"
    weights: Optional[tuple[float, float]] = None  # None -> Pareto sweep
    max_iterations: int = 1500
    neighborhood: str = "add_drop_swap"
    seed: int = 0
    exact_threshold: int = 14
    weight_steps: int = 11
    allow_multiple_plans: bool = False

    def __post_init__(self):
        if self.assignment_rule not in RULES:
            raise ValueError(f"assignment_rule must be one of {RULES}")
        if self.neighborhood not in NEIGHBORHOODS:
            raise ValueError(f"neighborhood must be one of {NEIGHBORHOODS}")
        if self.weights is not None:
            w1, w2 = self.weights
            if w1 < 0 or w2 < 0 or w1 + w2 <= 0:
                raise ValueError("weights must be >= 0 with a positive sum")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.weight_steps < 2:
            raise ValueError("weight_steps must be >= 2")

    @property
    def pareto(self) -> bool:
        return self.weights is None


@dataclass(frozen=True)
class ObjectivePoint:
    z1: float
    z2: float
    plan: ServicePlan
    lm: LMSolution = field(compare=False, repr=False)

    @property
    def profit(self) -> float:
        return self.z2 - self.z1

    @property
    def plan_id(self) -> str:
        return self.plan.label


def check_plan(plan: ServicePlan, network: Network, allow_multiple: bool = False) -> None:
    unknown = [s for s in plan.active if s not in network.services]
    if unknown:
        raise PlanError(f"unknown services in plan: {sorted(unknown)}")
    if allow_multiple:
        return
    seen = {}
    for sid in sorted(plan.active):
        rel = network.services[sid].relation
        if rel in seen:
            raise PlanError(f"services {seen[rel]} and {sid} share relation {rel}")
        seen[rel] = sid


def service_daily_cost(service, network: Network) -> float:
    lam = network.classes[service.train_class].unit_km_cost
    dist = sum(network.arcs[a].distance for a in service.plan.arcs)
    swaps = sum(network.stations[k].block_swap_cost for k in service.plan.swap_stations)
    return train_frequency(service) * (service.fixed_cost + lam * dist + swaps)


def upper_cost(plan: ServicePlan, network: Network) -> float:
    """z1: frequency-scaled fixed, distance and block-swap cost of the active services."""
    return sum(service_daily_cost(network.services[sid], network) for sid in sorted(plan.active))


def rail_revenue(plan: ServicePlan, lm: LMSolution) -> float:
    """z2: sum of C_rail * f_rail (expected volumes under logit)."""
    return sum(d.rail_unit_cost * d.rail_volume for d in lm.decisions)


def run_assignment(network: Network, plan: ServicePlan, rule: str, paths=None) -> LMSolution:
    paths = rail_paths_for(network, plan) if paths is None else paths
    demands = network.demands
    if rule == "aon":
        return assign_aon(network, demands, plan, paths)
    if rule == "logit":
        return assign_logit(network, demands, plan, paths)
    if rule in ("lm_exact", "lm"):
        return solve_lower(network, demands, plan, paths)
    raise ValueError(f"unknown assignment rule {rule!r}")


def evaluate_plan(plan: ServicePlan, network: Network, config: SearchConfig | None = None) -> ObjectivePoint:
    config = config or SearchConfig()
    check_plan(plan, network, config.allow_multiple_plans)
    lm = run_assignment(network, plan, config.assignment_rule)
    return ObjectivePoint(upper_cost(plan, network), rail_revenue(plan, lm), plan, lm)


def _tol(a: float, b: float) -> float:
    return DOMINANCE_RTOL * max(1.0, abs(a), abs(b))


def dominates(a: ObjectivePoint, b: ObjectivePoint) -> bool:
    """a is no worse in both objectives and strictly better in one (with relative tolerance)."""
    t1, t2 = _tol(a.z1, b.z1), _tol(a.z2, b.z2)
    no_worse = a.z1 <= b.z1 + t1 and a.z2 >= b.z2 - t2
    better = a.z1 < b.z1 - t1 or a.z2 > b.z2 + t2
    return no_worse and better


def nondominated(points: Iterable[ObjectivePoint]) -> list[ObjectivePoint]:
    pts = list(points)
    keep = [p for p in pts if not any(dominates(q, p) for q in pts if q is not p)]
    return sorted(keep, key=lambda p: (p.z1, -p.z2, p.plan_id))


def feasible_plans(network: Network, allow_multiple: bool = False) -> Iterator[ServicePlan]:
    ids = sorted(network.services)
    if allow_multiple:
        for mask in itertools.product((False, True), repeat=len(ids)):
            yield ServicePlan.of(i for i, on in zip(ids, mask) if on)
        return
    groups = [sorted(s.id for s in g) for _, g in sorted(network.relation_groups().items())]
    for combo in itertools.product(*[[None] + g for g in groups]):
        yield ServicePlan.of(s for s in combo if s is not None)


class _Evaluator:
    def __init__(self, network: Network, config: SearchConfig):
        self.network = network
        self.config = config
        self.cache: dict[frozenset, ObjectivePoint] = {}

    def __call__(self, plan: ServicePlan) -> ObjectivePoint:
        pt = self.cache.get(plan.active)
        if pt is None:
            pt = evaluate_plan(plan, self.network, self.config)
            self.cache[plan.active] = pt
        return pt


def enumerate_pareto_exact(network: Network, config: SearchConfig | None = None) -> list[ObjectivePoint]:
    config = config or SearchConfig()
    n = len(network.candidate_services)
    if n > config.exact_threshold:
        raise ThresholdExceeded(f"{n} candidate services exceed exact_threshold={config.exact_threshold}")
    evaluate = _Evaluator(network, config)
    return nondominated(evaluate(p) for p in feasible_plans(network, config.allow_multiple_plans))


# --------------------------------------------------------------------------- annealing


def _neighbor(plan: ServicePlan, network: Network, config: SearchConfig, rng: random.Random) -> ServicePlan:
    ids = sorted(network.services)
    by_rel = {}
    for sid in plan.active:
        by_rel.setdefault(network.services[sid].relation, []).append(sid)
    for _ in range(4 * len(ids)):
        sid = rng.choice(ids)
        if sid in plan:
            return plan.without(sid)
        clash = [] if config.allow_multiple_plans else by_rel.get(network.services[sid].relation, [])
        if not clash:
            return plan.with_(sid)
        if config.neighborhood == "add_drop_swap":
            return ServicePlan(plan.active - set(clash) | {sid})
    return plan.without(rng.choice(sorted(plan.active))) if plan.active else plan


def _anneal(
    evaluate: _Evaluator,
    objective,
    start: ServicePlan,
    config: SearchConfig,
    rng: random.Random,
    t0: float,
) -> tuple[ServicePlan, float]:
    network = evaluate.network
    current = start
    cur_val = objective(evaluate(current))
    best, best_val = current, cur_val
    n = config.max_iterations
    alpha = (1e-3) ** (1.0 / n)
    temp = t0
    for _ in range(n):
        cand = _neighbor(current, network, config, rng)
        val = objective(evaluate(cand))
        delta = val - cur_val
        if delta <= 0 or (temp > 0 and rng.random() < math.exp(-delta / temp)):
            current, cur_val = cand, val
            if (val, cand.label) < (best_val, best.label):
                best, best_val = cand, val
        temp *= alpha
    return best, best_val


def _initial_temperature(samples, objective) -> float:
    deltas = [objective(b) - objective(a) for a, b in samples]
    return statistics.pstdev(deltas) if len(deltas) > 1 else 0.0


def search_services(network: Network, config: SearchConfig | None = None) -> list[ObjectivePoint]:
    """Simulated annealing over add/drop(/swap) moves.

    With weights, minimises ``w1 * z1 - w2 * z2`` and returns the best
    point(s). Without weights, sweeps normalised weights from pure revenue
    to pure cost and returns the nondominated set of everything evaluated.
    """
    config = config or SearchConfig()
    if not network.candidate_services:
        return [evaluate_plan(ServicePlan(), network, config)]
    rng = random.Random(config.seed)
    evaluate = _Evaluator(network, config)

    # 50 random neighbor pairs along a random walk calibrate temperature and scales
    samples = []
    walk = ServicePlan()
    for _ in range(50):
        nxt = _neighbor(walk, network, config, rng)
        samples.append((evaluate(walk), evaluate(nxt)))
        walk = nxt
    sampled = [p for pair in samples for p in pair]

    if not config.pareto:
        w1, w2 = config.weights

        def objective(pt):
            return w1 * pt.z1 - w2 * pt.z2

        best, best_val = _anneal(evaluate, objective, ServicePlan(), config, rng, _initial_temperature(samples, objective))
        tied = [p for p in evaluate.cache.values() if objective(p) <= best_val + _tol(best_val, best_val)]
        return sorted(tied, key=lambda p: (p.z1, -p.z2, p.plan_id))

    s1 = max((abs(p.z1) for p in sampled), default=0.0) or 1.0
    s2 = max((abs(p.z2) for p in sampled), default=0.0) or 1.0
    start = ServicePlan()
    steps = config.weight_steps
    for i in range(steps):
        w = i / (steps - 1)

        def objective(pt, w=w):
            return w * pt.z1 / s1 - (1.0 - w) * pt.z2 / s2

        start, _ = _anneal(evaluate, objective, start, config, rng, _initial_temperature(samples, objective))
    return nondominated(evaluate.cache.values())


def merge_frontiers(*frontiers: Iterable[ObjectivePoint]) -> list[ObjectivePoint]:
    pool = {}
    for fr in frontiers:
        for p in fr:
            pool.setdefault(p.plan.active, p)
    return nondominated(pool.values())
