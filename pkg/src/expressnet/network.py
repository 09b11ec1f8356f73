"""Multimodal network data model: stations, service arcs, express services, demands.

All domain objects are frozen dataclasses; a :class:`Network` is immutable once
built and can be shared freely between threads.

Units are fixed throughout the package: money in CNY, time in hours, distance
in km and flow in cars.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Iterable, Mapping, Optional

HOURS_PER_DAY = 24.0
SPEED_TIERS = (160, 120, 80)


class Mode(str, Enum):
    RAIL_REGULAR = "rail_regular"
    RAIL_EXPRESS = "rail_express"
    HIGHWAY = "highway"

    @property
    def is_rail(self) -> bool:
        return self is not Mode.HIGHWAY


@dataclass(frozen=True)
class Station:
    id: str
    name: str = ""
    block_swap_cost: float = 0.0


@dataclass(frozen=True)
class ServiceArc:
    """Directed service arc. ``capacity`` of ``None`` means unbounded (big-M)."""

    id: str
    origin: str
    destination: str
    mode: Mode
    distance: float
    travel_time: float
    capacity: Optional[float] = None


@dataclass(frozen=True)
class TrainClass:
    id: str
    speed_tier: int
    unit_km_cost: float


@dataclass(frozen=True)
class BlockSwapPlan:
    arcs: tuple[str, ...]
    swap_stations: tuple[str, ...] = ()


@dataclass(frozen=True)
class ExpressService:
    """A candidate express train service, i.e. one upper-level binary variable."""

    id: str
    origin: str
    destination: str
    train_class: str
    plan: BlockSwapPlan
    fixed_cost: float
    period: float
    train_size: float

    @property
    def relation(self) -> tuple[str, str, str]:
        return (self.origin, self.destination, self.train_class)


@dataclass(frozen=True)
class Demand:
    origin: str
    destination: str
    volume: float
    due_time: float

    @property
    def key(self) -> tuple[str, str]:
        return (self.origin, self.destination)


@dataclass(frozen=True)
class TariffTable:
    """Linear tariff used to price one car on a path."""

    rail_per_km: float = 0.4
    rail_handling: float = 100.0
    rail_swap_charge: float = 20.0
    highway_per_km: float = 1.0


@dataclass(frozen=True)
class GlobalParams:
    gamma: float = 10.0
    delta: float = 0.0
    theta: float = 1.0
    big_m: Optional[float] = None  # None -> 10 x total demand volume
    dwell_hours: float = 0.0
    k_max: int = 8
    hours_per_day: float = HOURS_PER_DAY


@dataclass(frozen=True)
class ServicePlan:
    """Upper-level decision: the ids of services with y = 1."""

    active: frozenset[str] = frozenset()

    @classmethod
    def of(cls, ids: Iterable[str]) -> "ServicePlan":
        return cls(frozenset(ids))

    def __iter__(self):
        return iter(sorted(self.active))

    def __len__(self) -> int:
        return len(self.active)

    def __contains__(self, service_id: object) -> bool:
        return service_id in self.active

    def with_(self, service_id: str) -> "ServicePlan":
        return ServicePlan(self.active | {service_id})

    def without(self, service_id: str) -> "ServicePlan":
        return ServicePlan(self.active - {service_id})

    @property
    def label(self) -> str:
        return "+".join(sorted(self.active)) or "(none)"


@dataclass(frozen=True)
class Violation:
    entity: str
    rule: str

    def __str__(self) -> str:
        return f"{self.entity}: {self.rule}"


@dataclass(frozen=True)
class Network:
    stations: Mapping[str, Station]
    arcs: Mapping[str, ServiceArc]
    classes: Mapping[str, TrainClass]
    candidate_services: tuple[ExpressService, ...] = ()
    demands: tuple[Demand, ...] = ()
    params: GlobalParams = field(default_factory=GlobalParams)
    tariffs: TariffTable = field(default_factory=TariffTable)

    @classmethod
    def build(
        cls,
        stations: Iterable[Station],
        arcs: Iterable[ServiceArc],
        classes: Iterable[TrainClass] = (),
        candidate_services: Iterable[ExpressService] = (),
        demands: Iterable[Demand] = (),
        params: GlobalParams | None = None,
        tariffs: TariffTable | None = None,
    ) -> "Network":
        # duplicates are kept out of the mappings silently; the list form is
        # what validate_network inspects for id uniqueness
        stations = list(stations)
        arcs = list(arcs)
        net = cls(
            stations={s.id: s for s in stations},
            arcs={a.id: a for a in arcs},
            classes={c.id: c for c in classes},
            candidate_services=tuple(candidate_services),
            demands=tuple(demands),
            params=params or GlobalParams(),
            tariffs=tariffs or TariffTable(),
        )
        object.__setattr__(net, "_raw_station_ids", tuple(s.id for s in stations))
        object.__setattr__(net, "_raw_arc_ids", tuple(a.id for a in arcs))
        return net

    def __hash__(self) -> int:
        return id(self)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Network):
            return NotImplemented
        return (
            dict(self.stations) == dict(other.stations)
            and dict(self.arcs) == dict(other.arcs)
            and dict(self.classes) == dict(other.classes)
            and self.candidate_services == other.candidate_services
            and self.demands == other.demands
            and self.params == other.params
            and self.tariffs == other.tariffs
        )

    @cached_property
    def services(self) -> dict[str, ExpressService]:
        return {s.id: s for s in self.candidate_services}

    @cached_property
    def big_m(self) -> float:
        if self.params.big_m is not None:
            return float(self.params.big_m)
        total = sum(d.volume for d in self.demands)
        return 10.0 * total if total > 0 else 1e6

    @cached_property
    def adjacency(self) -> dict[str, dict[Mode, list[ServiceArc]]]:
        out: dict[str, dict[Mode, list[ServiceArc]]] = {s: {m: [] for m in Mode} for s in self.stations}
        for arc in sorted(self.arcs.values(), key=lambda a: a.id):
            if arc.origin in out:
                out[arc.origin][arc.mode].append(arc)
        return out

    def arcs_from(self, station: str, *modes: Mode) -> list[ServiceArc]:
        by_mode = self.adjacency.get(station, {})
        return [a for m in modes for a in by_mode.get(m, [])]

    def find_arc(self, origin: str, destination: str, mode: Mode) -> Optional[ServiceArc]:
        for arc in self.arcs_from(origin, mode):
            if arc.destination == destination:
                return arc
        return None

    def demand(self, origin: str, destination: str) -> Demand:
        for d in self.demands:
            if d.key == (origin, destination):
                return d
        raise KeyError(f"no demand {origin}->{destination}")

    def plan_from_ids(self, ids: Iterable[str]) -> ServicePlan:
        ids = list(ids)
        unknown = [i for i in ids if i not in self.services]
        if unknown:
            raise KeyError(f"unknown service ids: {', '.join(sorted(unknown))}")
        return ServicePlan.of(ids)

    def relation_groups(self) -> dict[tuple[str, str, str], list[ExpressService]]:
        groups: dict[tuple[str, str, str], list[ExpressService]] = {}
        for svc in self.candidate_services:
            groups.setdefault(svc.relation, []).append(svc)
        return groups

    def replace(self, **changes) -> "Network":
        kw = dict(
            stations=self.stations.values(),
            arcs=self.arcs.values(),
            classes=self.classes.values(),
            candidate_services=self.candidate_services,
            demands=self.demands,
            params=self.params,
            tariffs=self.tariffs,
        )
        kw.update(changes)
        return Network.build(**kw)


def service_stations(service: ExpressService, network: Network) -> list[str]:
    """Station sequence traversed by a service's block-swap plan."""
    arcs = [network.arcs[a] for a in service.plan.arcs]
    return [arcs[0].origin] + [a.destination for a in arcs]


def service_stops(service: ExpressService, network: Network) -> list[str]:
    """Stations where cars may join or leave the train: origin, swap stations, destination."""
    stations = service_stations(service, network)
    swaps = set(service.plan.swap_stations)
    return [s for i, s in enumerate(stations) if i == 0 or i == len(stations) - 1 or s in swaps]


def validate_network(network: Network) -> list[Violation]:
    """Check every structural invariant; returns violations, never raises."""
    out: list[Violation] = []

    def bad(entity: str, rule: str) -> None:
        out.append(Violation(entity, rule))

    raw_stations = getattr(network, "_raw_station_ids", tuple(network.stations))
    seen: set[str] = set()
    for sid in raw_stations:
        if sid in seen:
            bad(f"station {sid}", "duplicate station id")
        seen.add(sid)
    raw_arcs = getattr(network, "_raw_arc_ids", tuple(network.arcs))
    seen = set()
    for aid in raw_arcs:
        if aid in seen:
            bad(f"arc {aid}", "duplicate arc id")
        seen.add(aid)

    for st in network.stations.values():
        if not st.block_swap_cost >= 0:
            bad(f"station {st.id}", "block_swap_cost must be >= 0")

    for arc in network.arcs.values():
        ent = f"arc {arc.id}"
        for end in (arc.origin, arc.destination):
            if end not in network.stations:
                bad(ent, f"endpoint {end!r} is not a known station")
        if arc.origin == arc.destination:
            bad(ent, "origin equals destination")
        if not arc.distance > 0:
            bad(ent, "distance must be > 0")
        if not arc.travel_time > 0:
            bad(ent, "travel_time must be > 0")
        if arc.capacity is not None:
            if not arc.capacity > 0:
                bad(ent, "bounded capacity must be > 0")
            if arc.mode is not Mode.RAIL_EXPRESS:
                bad(ent, "only rail_express arcs may carry a bounded capacity")
        if arc.mode is Mode.HIGHWAY and arc.travel_time <= 1.0:
            # the through-node discount of 1 h would make composed times degenerate
            bad(ent, "highway travel_time must exceed 1 h")

    for cls in network.classes.values():
        ent = f"class {cls.id}"
        if cls.speed_tier not in SPEED_TIERS:
            bad(ent, f"speed_tier must be one of {SPEED_TIERS}")
        if not cls.unit_km_cost > 0:
            bad(ent, "unit_km_cost must be > 0")

    seen = set()
    for svc in network.candidate_services:
        ent = f"service {svc.id}"
        if svc.id in seen:
            bad(ent, "duplicate service id")
        seen.add(svc.id)
        if svc.train_class not in network.classes:
            bad(ent, f"unknown train class {svc.train_class!r}")
        if not svc.period > 0:
            bad(ent, "period must be > 0")
        if not svc.train_size > 0:
            bad(ent, "train_size must be > 0")
        if not svc.fixed_cost >= 0:
            bad(ent, "fixed_cost must be >= 0")
        if svc.origin == svc.destination:
            bad(ent, "origin equals destination")
        out.extend(_check_plan(svc, network))

    seen_keys: set[tuple[str, str]] = set()
    for dem in network.demands:
        ent = f"demand {dem.origin}->{dem.destination}"
        for end in (dem.origin, dem.destination):
            if end not in network.stations:
                bad(ent, f"endpoint {end!r} is not a known station")
        if dem.origin == dem.destination:
            bad(ent, "origin equals destination")
        if not dem.volume > 0:
            bad(ent, "volume must be > 0")
        if not dem.due_time > 0:
            bad(ent, "due_time must be > 0")
        if dem.key in seen_keys:
            bad(ent, "duplicate O-D pair")
        seen_keys.add(dem.key)

    p = network.params
    if not p.gamma >= 0:
        bad("params", "gamma must be >= 0")
    if not p.delta >= 0:
        bad("params", "delta must be >= 0")
    if not p.theta > 0:
        bad("params", "theta must be > 0")
    if not p.dwell_hours >= 0:
        bad("params", "dwell_hours must be >= 0")
    if p.k_max < 1:
        bad("params", "k_max must be >= 1")
    total = sum(d.volume for d in network.demands)
    if p.big_m is not None and not p.big_m > total:
        bad("params", "big_m must exceed total demand volume")
    t = network.tariffs
    for name in ("rail_per_km", "rail_handling", "rail_swap_charge", "highway_per_km"):
        if not getattr(t, name) >= 0:
            bad("tariffs", f"{name} must be >= 0")
    return out


def _check_plan(svc: ExpressService, network: Network) -> list[Violation]:
    ent = f"service {svc.id}"
    plan = svc.plan
    if not plan.arcs:
        return [Violation(ent, "block-swap plan has no arcs")]
    out = []
    arcs = []
    for aid in plan.arcs:
        arc = network.arcs.get(aid)
        if arc is None:
            out.append(Violation(ent, f"plan arc {aid!r} does not exist"))
        elif not arc.mode.is_rail:
            out.append(Violation(ent, f"plan arc {aid!r} is not a rail arc"))
        else:
            arcs.append(arc)
    if out:
        return out
    for prev, nxt in zip(arcs, arcs[1:]):
        if prev.destination != nxt.origin:
            out.append(Violation(ent, f"plan arcs {prev.id!r} and {nxt.id!r} are not connected"))
    if arcs[0].origin != svc.origin:
        out.append(Violation(ent, "plan does not start at the service origin"))
    if arcs[-1].destination != svc.destination:
        out.append(Violation(ent, "plan does not end at the service destination"))
    stations = [arcs[0].origin] + [a.destination for a in arcs]
    if len(set(stations)) != len(stations):
        out.append(Violation(ent, "plan revisits a station"))
    interior = set(stations[1:-1])
    for k in plan.swap_stations:
        if k not in interior:
            out.append(Violation(ent, f"swap station {k!r} is not interior to the plan"))
    if len(set(plan.swap_stations)) != len(plan.swap_stations):
        out.append(Violation(ent, "swap stations repeat"))
    return out


def train_frequency(service: ExpressService) -> float:
    """Trains per day, ``24 / period``, kept fractional."""
    if not service.period > 0:
        raise ValueError(f"service {service.id}: period must be > 0, got {service.period}")
    return HOURS_PER_DAY / service.period


def arc_capacity(arc: ServiceArc, plan: ServicePlan, network: Network) -> float:
    """Daily car capacity of ``arc`` under ``plan``.

    Express arcs traversed by active services get the summed daily train
    capacity of those services. Everything else is big-M unless an explicit
    express-arc capacity was given.
    """
    if arc.mode is not Mode.RAIL_EXPRESS:
        return network.big_m
    total = 0.0
    served = False
    for sid in plan.active:
        svc = network.services[sid]
        if arc.id in svc.plan.arcs:
            total += train_frequency(svc) * svc.train_size
            served = True
    if served:
        return total
    return arc.capacity if arc.capacity is not None else network.big_m


def capacities(plan: ServicePlan, network: Network) -> dict[str, float]:
    """Capacities of every arc whose bound differs from big-M."""
    out = {}
    for arc in network.arcs.values():
        cap = arc_capacity(arc, plan, network)
        if cap < network.big_m or not math.isfinite(cap):
            out[arc.id] = cap
    return out
