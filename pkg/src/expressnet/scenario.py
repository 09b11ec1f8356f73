"""Scenario files (JSON) and plan files.

A scenario bundles the network, tariffs, global parameters and the search
configuration. Loading reports three distinct failure kinds, each carrying
JSON-pointer locations: unparsable input, schema violations and model
validation violations.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path as FsPath
from typing import Any, Union

import jsonschema

from .network import (
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
    validate_network,
)
from .sndet import SearchConfig, check_plan

SCHEMA_VERSION = 1
FIXTURES = FsPath(__file__).parent / "fixtures"

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_nonneg = {"type": "number", "minimum": 0}
_id = {"type": "string", "minLength": 1}

SCENARIO_SCHEMA: dict[str, Any] = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "required": ["schema", "stations", "arcs", "demands"],
    "additionalProperties": False,
    "properties": {
        "schema": {"const": SCHEMA_VERSION},
        "metadata": {"type": "object"},
        "stations": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["id"],
                "additionalProperties": False,
                "properties": {"id": _id, "name": {"type": "string"}, "block_swap_cost": _num},
            },
        },
        "arcs": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "from", "to", "mode", "distance", "travel_time"],
                "additionalProperties": False,
                "properties": {
                    "id": _id,
                    "from": _id,
                    "to": _id,
                    "mode": {"enum": [m.value for m in Mode]},
                    "distance": _num,
                    "travel_time": _num,
                    "capacity": {"type": ["number", "null"]},
                },
            },
        },
        "classes": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "speed_tier", "unit_km_cost"],
                "additionalProperties": False,
                "properties": {"id": _id, "speed_tier": {"type": "integer"}, "unit_km_cost": _num},
            },
        },
        "candidate_services": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "origin", "destination", "class", "plan", "fixed_cost", "period", "train_size"],
                "additionalProperties": False,
                "properties": {
                    "id": _id,
                    "origin": _id,
                    "destination": _id,
                    "class": _id,
                    "fixed_cost": _num,
                    "period": _num,
                    "train_size": _num,
                    "plan": {
                        "type": "object",
                        "required": ["arcs"],
                        "additionalProperties": False,
                        "properties": {
                            "arcs": {"type": "array", "items": _id},
                            "swap_stations": {"type": "array", "items": _id},
                        },
                    },
                },
            },
        },
        "demands": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["origin", "destination", "volume", "due_time"],
                "additionalProperties": False,
                "properties": {"origin": _id, "destination": _id, "volume": _num, "due_time": _num},
            },
        },
        "tariffs": {
            "type": "object",
            "additionalProperties": False,
            "properties": {k: _nonneg for k in ("rail_per_km", "rail_handling", "rail_swap_charge", "highway_per_km")},
        },
        "params": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "gamma": _num,
                "delta": _num,
                "theta": _num,
                "big_m": {"type": ["number", "null"]},
                "dwell_hours": _num,
                "k_max": {"type": "integer"},
            },
        },
        "search": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "assignment_rule": {"enum": ["aon", "logit", "lm_exact"]},
                "weights": {
                    "oneOf": [
                        {"type": "null"},
                        {"type": "array", "items": _nonneg, "minItems": 2, "maxItems": 2},
                    ]
                },
                "max_iterations": {"type": "integer", "minimum": 1},
                "neighborhood": {"enum": ["add_drop", "add_drop_swap"]},
                "seed": {"type": "integer"},
                "exact_threshold": {"type": "integer", "minimum": 0},
                "weight_steps": {"type": "integer", "minimum": 2},
                "allow_multiple_plans": {"type": "boolean"},
            },
        },
    },
}

PLAN_SCHEMA = {
    "type": "object",
    "required": ["schema", "services"],
    "properties": {"schema": {"const": SCHEMA_VERSION}, "services": {"type": "array", "items": _id}},
}


class ScenarioError(Exception):
    kind = "error"

    def __init__(self, message: str, errors: list[tuple[str, str]] | None = None):
        super().__init__(message)
        self.errors = errors or []

    def to_dict(self) -> dict:
        return {"kind": self.kind, "message": str(self), "errors": [{"pointer": p, "message": m} for p, m in self.errors]}


class ScenarioParseError(ScenarioError):
    kind = "parse_error"


class SchemaViolation(ScenarioError):
    kind = "schema_violation"


class ValidationFailure(ScenarioError):
    kind = "validation_violation"


@dataclass(frozen=True)
class Scenario:
    network: Network
    search: SearchConfig = field(default_factory=SearchConfig)
    metadata: dict = field(default_factory=dict)

    @property
    def tariffs(self) -> TariffTable:
        return self.network.tariffs

    @property
    def params(self) -> GlobalParams:
        return self.network.params


def _pointer(path) -> str:
    return "/" + "/".join(str(p) for p in path) if path else ""


def check_schema(doc: Any) -> list[tuple[str, str]]:
    validator = jsonschema.Draft7Validator(SCENARIO_SCHEMA)
    errs = sorted(validator.iter_errors(doc), key=lambda e: (list(map(str, e.absolute_path)), e.message))
    return [(_pointer(e.absolute_path), e.message) for e in errs]


def _pick(cls, data: dict | None):
    names = {f.name for f in fields(cls)}
    return cls(**{k: v for k, v in (data or {}).items() if k in names})


def scenario_from_dict(doc: dict, validate: bool = True) -> Scenario:
    problems = check_schema(doc)
    if problems:
        raise SchemaViolation(f"{len(problems)} schema violation(s)", problems)
    stations = [Station(s["id"], s.get("name", ""), s.get("block_swap_cost", 0.0)) for s in doc["stations"]]
    arcs = [
        ServiceArc(a["id"], a["from"], a["to"], Mode(a["mode"]), a["distance"], a["travel_time"], a.get("capacity"))
        for a in doc["arcs"]
    ]
    classes = [TrainClass(c["id"], c["speed_tier"], c["unit_km_cost"]) for c in doc.get("classes", [])]
    services = [
        ExpressService(
            id=s["id"],
            origin=s["origin"],
            destination=s["destination"],
            train_class=s["class"],
            plan=BlockSwapPlan(tuple(s["plan"]["arcs"]), tuple(s["plan"].get("swap_stations", []))),
            fixed_cost=s["fixed_cost"],
            period=s["period"],
            train_size=s["train_size"],
        )
        for s in doc.get("candidate_services", [])
    ]
    demands = [Demand(d["origin"], d["destination"], d["volume"], d["due_time"]) for d in doc["demands"]]
    search_doc = dict(doc.get("search", {}))
    if search_doc.get("weights") is not None:
        search_doc["weights"] = tuple(search_doc["weights"])
    try:
        search = _pick(SearchConfig, search_doc)
    except ValueError as exc:
        raise SchemaViolation(str(exc), [("/search", str(exc))]) from None
    network = Network.build(
        stations, arcs, classes, services, demands, _pick(GlobalParams, doc.get("params")), _pick(TariffTable, doc.get("tariffs"))
    )
    scenario = Scenario(network, search, dict(doc.get("metadata", {})))
    if validate:
        violations = validate_network(network)
        if violations:
            errors = [(_locate(str(v.entity), doc), v.rule) for v in violations]
            raise ValidationFailure(f"{len(violations)} validation violation(s)", errors)
    return scenario


def _locate(entity: str, doc: dict) -> str:
    kind, _, ident = entity.partition(" ")
    table = {"station": "stations", "arc": "arcs", "class": "classes", "service": "candidate_services"}
    if kind in table:
        for i, item in enumerate(doc.get(table[kind], [])):
            if item.get("id") == ident:
                return f"/{table[kind]}/{i}"
    if kind == "demand":
        s, _, t = ident.partition("->")
        for i, item in enumerate(doc.get("demands", [])):
            if (item.get("origin"), item.get("destination")) == (s, t):
                return f"/demands/{i}"
    if kind in ("params", "tariffs"):
        return f"/{kind}"
    return ""


def load_scenario(path: Union[str, FsPath], validate: bool = True) -> Scenario:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ScenarioParseError(f"{path}: {exc.msg}", [("", f"line {exc.lineno} column {exc.colno}: {exc.msg}")]) from None
    return scenario_from_dict(doc, validate)


def scenario_to_dict(scenario: Scenario) -> dict:
    net = scenario.network
    search = asdict(scenario.search)
    if search["weights"] is not None:
        search["weights"] = list(search["weights"])
    return {
        "schema": SCHEMA_VERSION,
        "metadata": scenario.metadata,
        "stations": [{"id": s.id, "name": s.name, "block_swap_cost": s.block_swap_cost} for s in net.stations.values()],
        "arcs": [
            {
                "id": a.id,
                "from": a.origin,
                "to": a.destination,
                "mode": a.mode.value,
                "distance": a.distance,
                "travel_time": a.travel_time,
                "capacity": a.capacity,
            }
            for a in net.arcs.values()
        ],
        "classes": [{"id": c.id, "speed_tier": c.speed_tier, "unit_km_cost": c.unit_km_cost} for c in net.classes.values()],
        "candidate_services": [
            {
                "id": s.id,
                "origin": s.origin,
                "destination": s.destination,
                "class": s.train_class,
                "fixed_cost": s.fixed_cost,
                "period": s.period,
                "train_size": s.train_size,
                "plan": {"arcs": list(s.plan.arcs), "swap_stations": list(s.plan.swap_stations)},
            }
            for s in net.candidate_services
        ],
        "demands": [
            {"origin": d.origin, "destination": d.destination, "volume": d.volume, "due_time": d.due_time}
            for d in net.demands
        ],
        "tariffs": asdict(net.tariffs),
        "params": {k: v for k, v in asdict(net.params).items() if k != "hours_per_day"},
        "search": search,
    }


def save_scenario(scenario: Scenario, path: Union[str, FsPath]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(scenario_to_dict(scenario), fh, indent=2)
        fh.write("\n")


def effective_config(scenario: Scenario) -> dict:
    net = scenario.network
    params = {k: v for k, v in asdict(net.params).items()}
    params["big_m_effective"] = net.big_m
    search = asdict(scenario.search)
    return {"params": params, "tariffs": asdict(net.tariffs), "search": search}


def plan_to_dict(plan: ServicePlan) -> dict:
    return {"schema": SCHEMA_VERSION, "services": sorted(plan.active)}


def load_plan(path: Union[str, FsPath], network: Network, allow_multiple: bool = False) -> ServicePlan:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ScenarioParseError(f"{path}: {exc.msg}", [("", exc.msg)]) from None
    errs = [(_pointer(e.absolute_path), e.message) for e in jsonschema.Draft7Validator(PLAN_SCHEMA).iter_errors(doc)]
    if errs:
        raise SchemaViolation("plan file schema violation", errs)
    plan = ServicePlan.of(doc["services"])
    try:
        check_plan(plan, network, allow_multiple)
    except ValueError as exc:
        raise ValidationFailure(str(exc), [("/services", str(exc))]) from None
    return plan


def fixture_path(name: str = "eleven_station.json") -> FsPath:
    return FIXTURES / name
