"""Candidate routing options for each demand.

Rail routing works on a *leg graph*. A leg is either one regular rail arc
(its own adjacent-station train) or a contiguous stretch of an active express
service between two of its stops (origin, swap stations, destination). Cars
board and leave express trains only at such stops. A rail path is a
station-simple sequence of legs; every change of leg is a train-to-train
transfer.

Highway routing follows the through-node rule: passing a station without
stopping saves one hour compared with stopping there.
"""
from __future__ import annotations

import heapq
import itertools
import logging
import re
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .network import (
    BlockSwapPlan,
    Demand,
    ExpressService,
    Mode,
    Network,
    ServiceArc,
    ServicePlan,
    TariffTable,
    service_stations,
    service_stops,
)

logger = logging.getLogger(__name__)

THROUGH_DISCOUNT_HOURS = 1.0
RAIL_MODES = (Mode.RAIL_REGULAR, Mode.RAIL_EXPRESS)
# hard stop for the deviation search on pathological instances
MAX_GENERATED_PATHS = 20000


class MissingSegmentError(KeyError):
    pass


@dataclass(frozen=True)
class RouteSpec:
    """Station sequence with a stop pattern for each interior station."""

    stations: tuple[str, ...]
    stop_pattern: tuple[str, ...] = ()  # "through" | "transfer", one per interior station

    def __post_init__(self):
        if len(self.stations) < 2:
            raise ValueError("a route needs at least two stations")
        if not self.stop_pattern:
            object.__setattr__(self, "stop_pattern", ("through",) * (len(self.stations) - 2))
        if len(self.stop_pattern) != len(self.stations) - 2:
            raise ValueError("stop_pattern must have one entry per interior station")
        for p in self.stop_pattern:
            if p not in ("through", "transfer"):
                raise ValueError(f"unknown stop kind {p!r}")

    @classmethod
    def parse(cls, text: str) -> "RouteSpec":
        """Parse ``"N07→(N06)→N11→N03"``; parenthesised interior stations are through nodes."""
        parts = [p.strip() for p in re.split(r"→|->", text) if p.strip()]
        stations, pattern = [], []
        for i, p in enumerate(parts):
            through = p.startswith("(") and p.endswith(")")
            stations.append(p.strip("()"))
            if 0 < i < len(parts) - 1:
                pattern.append("through" if through else "transfer")
        return cls(tuple(stations), tuple(pattern))

    @property
    def through_count(self) -> int:
        return sum(1 for p in self.stop_pattern if p == "through")


@dataclass(frozen=True)
class Leg:
    origin: str
    destination: str
    arcs: tuple[str, ...]
    service: Optional[str]  # None for a regular train
    time: float
    distance: float

    interior: tuple[str, ...] = ()  # stations passed without stopping

    @property
    def key(self) -> tuple:
        return (self.arcs, self.service or "")


@dataclass(frozen=True)
class Path:
    """One routing option of a demand: a rail path in R_st or the highway option."""

    demand: tuple[str, str]
    index: int
    mode: str  # "rail" | "highway"
    arcs: tuple[str, ...]
    stations: tuple[str, ...]
    services: tuple[Optional[str], ...]  # carrying train per leg (rail only)
    leg_arc_counts: tuple[int, ...]
    travel_time: float
    distance: float
    unit_cost: float

    @property
    def transfers(self) -> int:
        return max(len(self.leg_arc_counts) - 1, 0)

    def general_cost(self, gamma: float) -> float:
        return gamma * self.travel_time + self.unit_cost

    def incidence(self, arc_id: str) -> int:
        return 1 if arc_id in self.arcs else 0


# --------------------------------------------------------------------------- highway


def _highway_segment(network: Network, a: str, b: str) -> ServiceArc:
    arc = network.find_arc(a, b, Mode.HIGHWAY)
    if arc is None:
        raise MissingSegmentError(f"no highway segment {a}->{b}")
    return arc


def highway_travel_time(route: RouteSpec, network: Network) -> float:
    """Highway time of ``route``: segment sum minus one hour per through node."""
    total = 0.0
    for a, b in zip(route.stations, route.stations[1:]):
        total += _highway_segment(network, a, b).travel_time
    return total - THROUGH_DISCOUNT_HOURS * route.through_count


def highway_distance(route: RouteSpec, network: Network) -> float:
    return sum(_highway_segment(network, a, b).distance for a, b in zip(route.stations, route.stations[1:]))


def _dijkstra(network: Network, source: str, weight) -> tuple[dict[str, float], dict[str, str]]:
    dist = {source: 0.0}
    prev: dict[str, str] = {}
    heap = [(0.0, source)]
    done = set()
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        for arc in network.arcs_from(u, Mode.HIGHWAY):
            nd = d + weight(arc)
            if nd < dist.get(arc.destination, float("inf")) - 1e-12:
                dist[arc.destination] = nd
                prev[arc.destination] = u
                heapq.heappush(heap, (nd, arc.destination))
    return dist, prev


def _highway_tables(network: Network, source: str):
    cache = network.__dict__.setdefault("_highway_tables", {})
    if source not in cache:
        # through-node time of a k-segment route is sum(t) - (k - 1) = 1 + sum(t - 1)
        times, prev = _dijkstra(network, source, lambda a: a.travel_time - THROUGH_DISCOUNT_HOURS)
        dists, _ = _dijkstra(network, source, lambda a: a.distance)
        cache[source] = (times, prev, dists)
    return cache[source]


def fastest_highway_route(network: Network, s: str, t: str) -> RouteSpec:
    times, prev, _ = _highway_tables(network, s)
    if t not in times:
        raise MissingSegmentError(f"no highway route {s}->{t}")
    seq = [t]
    while seq[-1] != s:
        seq.append(prev[seq[-1]])
    return RouteSpec(tuple(reversed(seq)))


def highway_arc(network: Network, s: str, t: str) -> ServiceArc:
    """Direct highway service s->t, explicit or synthesised over the all-through fastest route."""
    explicit = network.find_arc(s, t, Mode.HIGHWAY)
    if explicit is not None:
        return explicit
    times, _, dists = _highway_tables(network, s)
    if t not in times:
        raise MissingSegmentError(f"no highway route {s}->{t}")
    return ServiceArc(
        id=f"hw:{s}>{t}",
        origin=s,
        destination=t,
        mode=Mode.HIGHWAY,
        distance=dists[t],
        travel_time=times[t] + THROUGH_DISCOUNT_HOURS,
    )


def highway_option(network: Network, demand: Demand, tariffs: TariffTable | None = None) -> Path:
    tariffs = tariffs or network.tariffs
    arc = highway_arc(network, demand.origin, demand.destination)
    path = Path(
        demand=demand.key,
        index=0,
        mode="highway",
        arcs=(arc.id,),
        stations=(arc.origin, arc.destination),
        services=(),
        leg_arc_counts=(1,),
        travel_time=arc.travel_time,
        distance=arc.distance,
        unit_cost=0.0,
    )
    return _replace_cost(path, path_unit_cost(path, network, tariffs))


# --------------------------------------------------------------------------- rail legs


def rail_legs(network: Network, plan: ServicePlan) -> list[Leg]:
    """Every boardable leg under ``plan``: regular arcs plus stop-to-stop express stretches."""
    legs = []
    for arc in sorted(network.arcs.values(), key=lambda a: a.id):
        if arc.mode is Mode.RAIL_REGULAR:
            legs.append(Leg(arc.origin, arc.destination, (arc.id,), None, arc.travel_time, arc.distance))
    for sid in sorted(plan.active):
        legs.extend(service_legs(network.services[sid], network))
    return legs


def service_legs(service: ExpressService, network: Network) -> list[Leg]:
    stations = service_stations(service, network)
    stops = set(service_stops(service, network))
    idx = [i for i, s in enumerate(stations) if s in stops]
    arcs = [network.arcs[a] for a in service.plan.arcs]
    legs = []
    for p, q in itertools.combinations(idx, 2):
        seg = arcs[p:q]
        legs.append(
            Leg(
                stations[p],
                stations[q],
                tuple(a.id for a in seg),
                service.id,
                sum(a.travel_time for a in seg),
                sum(a.distance for a in seg),
                tuple(stations[p + 1 : q]),
            )
        )
    return legs


def _assemble(demand: Demand, legs: Sequence[Leg], network: Network, tariffs: TariffTable) -> Path:
    arcs = tuple(a for leg in legs for a in leg.arcs)
    stations = (legs[0].origin,) + tuple(network.arcs[a].destination for a in arcs)
    path = Path(
        demand=demand.key,
        index=0,
        mode="rail",
        arcs=arcs,
        stations=stations,
        services=tuple(leg.service for leg in legs),
        leg_arc_counts=tuple(len(leg.arcs) for leg in legs),
        travel_time=0.0,
        distance=sum(network.arcs[a].distance for a in arcs),
        unit_cost=0.0,
    )
    path = Path(**{**path.__dict__, "travel_time": path_time(path, network)})
    return _replace_cost(path, path_unit_cost(path, network, tariffs))


def _replace_cost(path: Path, unit_cost: float) -> Path:
    return Path(**{**path.__dict__, "unit_cost": unit_cost})


def path_time(path: Path, network: Network) -> float:
    """t^l: arc times plus dwell per transfer (rail) or the highway through-node rule."""
    if path.mode == "highway":
        if len(path.arcs) == 1:
            arc = network.arcs.get(path.arcs[0])
            if arc is None:
                arc = highway_arc(network, *path.stations)
            return arc.travel_time
        return highway_travel_time(RouteSpec(path.stations), network)
    arc_time = sum(network.arcs[a].travel_time for a in path.arcs)
    return arc_time + network.params.dwell_hours * path.transfers


def path_unit_cost(path: Path, network: Network, tariffs: TariffTable | None = None) -> float:
    """Per-car expense from the linear tariff."""
    tariffs = tariffs or network.tariffs
    if tariffs is None:
        raise ValueError("no tariff table available")
    if path.mode == "highway":
        return tariffs.highway_per_km * path.distance
    return tariffs.rail_per_km * path.distance + tariffs.rail_handling + tariffs.rail_swap_charge * path.transfers


def path_sort_key(path: Path, gamma: float) -> tuple:
    return (
        round(path.general_cost(gamma), 9),
        round(path.travel_time, 9),
        path.arcs,
        tuple(s or "" for s in path.services),
    )


# --------------------------------------------------------------------------- rail path enumeration


class _LegGraph:
    def __init__(self, legs: Iterable[Leg], gamma: float, dwell: float, tariffs: TariffTable):
        self.out: dict[str, list[Leg]] = {}
        self.into: dict[str, list[Leg]] = {}
        for leg in legs:
            self.out.setdefault(leg.origin, []).append(leg)
            self.into.setdefault(leg.destination, []).append(leg)
        self.gamma = gamma
        self.dwell = dwell
        self.tariffs = tariffs

    def weight(self, leg: Leg) -> float:
        # constant per-path offsets (handling, first-leg dwell/swap) cancel in comparisons
        return self.gamma * (leg.time + self.dwell) + self.tariffs.rail_per_km * leg.distance + self.tariffs.rail_swap_charge

    def min_time_to(self, target: str) -> dict[str, float]:
        dist = {target: 0.0}
        heap = [(0.0, target)]
        done = set()
        while heap:
            d, v = heapq.heappop(heap)
            if v in done:
                continue
            done.add(v)
            for leg in self.into.get(v, ()):
                nd = d + leg.time
                if nd < dist.get(leg.origin, float("inf")):
                    dist[leg.origin] = nd
                    heapq.heappush(heap, (nd, leg.origin))
        return dist

    def cheapest(self, source: str, target: str, banned_nodes: set, banned_legs: set) -> Optional[tuple[Leg, ...]]:
        counter = itertools.count()
        heap = [(0.0, (), next(counter), source, ())]
        done = set()
        while heap:
            cost, keyseq, _, node, legs = heapq.heappop(heap)
            if node in done:
                continue
            done.add(node)
            if node == target:
                return legs
            for leg in self.out.get(node, ()):
                nxt = leg.destination
                if nxt in done or nxt in banned_nodes or leg.key in banned_legs:
                    continue
                if leg.interior and (source in leg.interior or not banned_nodes.isdisjoint(leg.interior)):
                    continue
                heapq.heappush(
                    heap, (cost + self.weight(leg), keyseq + (leg.key,), next(counter), nxt, legs + (leg,))
                )
        return None

    def cost(self, legs: Sequence[Leg]) -> float:
        return sum(self.weight(leg) for leg in legs)


def enumerate_rail_paths(
    network: Network,
    demand: Demand,
    plan: ServicePlan,
    k_max: int | None = None,
    legs: Sequence[Leg] | None = None,
) -> list[Path]:
    """R_st: up to ``k_max`` cheapest time-feasible loop-free rail paths.

    Deviation-based k-shortest paths on general cost, with a spur-level time
    bound: a spur whose root plus the fastest possible completion already
    exceeds the due time is never expanded.
    """
    k_max = network.params.k_max if k_max is None else k_max
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    for end in (demand.origin, demand.destination):
        if end not in network.stations:
            raise KeyError(f"unknown station {end!r} in demand {demand.origin}->{demand.destination}")
    p = network.params
    graph = _LegGraph(rail_legs(network, plan) if legs is None else legs, p.gamma, p.dwell_hours, network.tariffs)
    s, t, due = demand.origin, demand.destination, demand.due_time
    lb = graph.min_time_to(t)
    if s not in lb or lb[s] > due + 1e-9:
        return []

    def path_time_of(legs: Sequence[Leg]) -> float:
        return sum(l.time for l in legs) + p.dwell_hours * max(len(legs) - 1, 0)

    first = graph.cheapest(s, t, set(), set())
    if first is None:
        return []
    found: list[tuple[Leg, ...]] = [first]
    seen = {tuple(l.key for l in first)}
    candidates: list = []
    counter = itertools.count()
    feasible = []
    kth_cost = None

    def simple(legs) -> bool:
        stations = [s] + [x for l in legs for x in l.interior + (l.destination,)]
        return len(set(stations)) == len(stations)

    def consider(legs):
        nonlocal kth_cost
        if path_time_of(legs) <= due + 1e-9 and simple(legs):
            feasible.append(legs)
            if len(feasible) == k_max:
                kth_cost = graph.cost(legs)

    consider(first)
    while len(found) < MAX_GENERATED_PATHS:
        last = found[-1]
        for i in range(len(last)):
            root = last[:i]
            spur = last[i].origin
            root_time = path_time_of(root) + (p.dwell_hours if root else 0.0)
            if root_time + lb.get(spur, float("inf")) > due + 1e-9:
                continue
            root_keys = tuple(l.key for l in root)
            banned_legs = {
                path[i].key for path in found if len(path) > i and tuple(l.key for l in path[:i]) == root_keys
            }
            banned_nodes = {x for l in root for x in (l.origin,) + l.interior}
            tail = graph.cheapest(spur, t, banned_nodes, banned_legs)
            if tail is None:
                continue
            total = root + tail
            keys = tuple(l.key for l in total)
            if keys in seen:
                continue
            seen.add(keys)
            heapq.heappush(candidates, (round(graph.cost(total), 9), keys, next(counter), total))
        if not candidates:
            break
        cost, _, _, nxt = heapq.heappop(candidates)
        if kth_cost is not None and cost > round(kth_cost, 9):
            break
        found.append(nxt)
        consider(nxt)
    else:
        logger.warning("path search for %s->%s stopped after %d paths", s, t, MAX_GENERATED_PATHS)

    paths = [_assemble(demand, legs, network, network.tariffs) for legs in feasible]
    paths.sort(key=lambda q: path_sort_key(q, p.gamma))
    return [Path(**{**q.__dict__, "index": i}) for i, q in enumerate(paths[:k_max])]


def rail_paths_for(network: Network, plan: ServicePlan, k_max: int | None = None) -> dict[tuple[str, str], list[Path]]:
    legs = rail_legs(network, plan)
    return {d.key: enumerate_rail_paths(network, d, plan, k_max, legs=legs) for d in network.demands}


# --------------------------------------------------------------------------- block-swap plans


def _rail_routes(network: Network, i: str, j: str, modes: Sequence[Mode]) -> list[tuple[ServiceArc, ...]]:
    routes = []

    def walk(node, visited, arcs):
        if node == j:
            routes.append(tuple(arcs))
            return
        for arc in network.arcs_from(node, *modes):
            if arc.destination not in visited:
                visited.add(arc.destination)
                arcs.append(arc)
                walk(arc.destination, visited, arcs)
                arcs.pop()
                visited.discard(arc.destination)

    walk(i, {i}, [])
    return routes


def enumerate_block_swap_plans(
    i: str,
    j: str,
    d: str,
    network: Network,
    max_swaps: int = 1,
    modes: Sequence[Mode] = RAIL_MODES,
) -> list[BlockSwapPlan]:
    """Ser(i, j, d): every loop-free rail route i->j with every swap subset of size <= max_swaps.

    Routes do not depend on the train class ``d``; it is accepted so callers
    can build services per class directly from the result.
    """
    if i == j:
        raise ValueError("origin and destination must differ")
    plans = set()
    for route in _rail_routes(network, i, j, modes):
        interior = [a.destination for a in route[:-1]]
        for r in range(min(max_swaps, len(interior)) + 1):
            for subset in itertools.combinations(interior, r):
                plans.add(BlockSwapPlan(tuple(a.id for a in route), tuple(subset)))
    return sorted(plans, key=lambda pl: (len(pl.arcs), pl.arcs, len(pl.swap_stations), pl.swap_stations))
