"""Command line entry point: ``expressnet <command> <scenario> [options]``.

Exit codes: 0 success, 2 invalid input (parse, schema or model validation),
1 any other runtime error.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys

from . import oracle
from .network import ServicePlan, validate_network
from .report import write_report
from .scenario import ScenarioError, effective_config, load_plan, load_scenario
from .sndet import (
    ObjectivePoint,
    ThresholdExceeded,
    enumerate_pareto_exact,
    evaluate_plan,
    search_services,
    upper_cost,
    rail_revenue,
)

log = logging.getLogger("expressnet")

RULE_ALIASES = {"aon": "aon", "logit": "logit", "lm": "lm_exact", "lm_exact": "lm_exact"}


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("scenario", help="scenario JSON file")
    p.add_argument("--out", default="report", help="output directory (default: ./report)")
    p.add_argument("--no-figures", action="store_true", help="skip PNG figures")
    p.add_argument("--print-config", action="store_true", help="echo the effective configuration as JSON")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="expressnet", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a scenario file")
    p.add_argument("scenario")
    p.add_argument("--print-config", action="store_true")

    p = sub.add_parser("assign", help="run one assignment rule under a fixed plan")
    _common(p)
    p.add_argument("--rule", choices=["aon", "logit", "lm"], default="aon")
    p.add_argument("--plan", default="none", help="plan.json file, 'all' or 'none'")
    p.add_argument("--oracle", action="store_true", help="use the brute-force lower level")

    p = sub.add_parser("evaluate", help="evaluate both objectives of a plan file")
    _common(p)
    p.add_argument("--plan", required=True)
    p.add_argument("--rule", choices=["aon", "logit", "lm"])

    p = sub.add_parser("solve", help="annealing search over service plans")
    _common(p)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--weights", help="w1,w2 for min w1*z1 - w2*z2")
    g.add_argument("--pareto", action="store_true", help="weight sweep, nondominated union (default)")
    p.add_argument("--seed", type=int)
    p.add_argument("--max-iterations", type=int)
    p.add_argument("--rule", choices=["aon", "logit", "lm"])

    p = sub.add_parser("pareto-exact", help="exhaustive frontier for small candidate sets")
    _common(p)
    p.add_argument("--oracle", action="store_true", help="use the independent brute-force enumeration")
    p.add_argument("--rule", choices=["aon", "logit", "lm"])
    return parser


def _resolve_plan(arg: str, scenario) -> ServicePlan:
    net = scenario.network
    if arg == "none":
        return ServicePlan()
    if arg == "all":
        if scenario.search.allow_multiple_plans:
            return ServicePlan.of(net.services)
        # first candidate of each relation
        return ServicePlan.of(sorted(g, key=lambda s: s.id)[0].id for g in net.relation_groups().values())
    return load_plan(arg, net, scenario.search.allow_multiple_plans)


def _print_frontier(points) -> None:
    print("plan_id,z1,z2,z2_minus_z1")
    for p in points:
        print(f"{p.plan_id},{p.z1:.6f},{p.z2:.6f},{p.profit:.6f}")


def _finish(points, scenario, args) -> int:
    written = write_report(points, args.out, scenario.network, figures=not args.no_figures)
    _print_frontier(points)
    for path in written:
        log.info("wrote %s", path)
    return 0


def cmd_validate(args) -> int:
    scenario = load_scenario(args.scenario, validate=False)
    violations = validate_network(scenario.network)
    if args.print_config:
        print(json.dumps(effective_config(scenario), indent=2, sort_keys=True))
    if violations:
        for v in violations:
            print(v, file=sys.stderr)
        return 2
    print(f"ok: {len(scenario.network.stations)} stations, {len(scenario.network.arcs)} arcs, "
          f"{len(scenario.network.candidate_services)} candidate services, {len(scenario.network.demands)} demands")
    return 0


def _with_rule(scenario, rule):
    if rule:
        return dataclasses.replace(scenario.search, assignment_rule=RULE_ALIASES[rule])
    return scenario.search


def cmd_assign(args) -> int:
    scenario = load_scenario(args.scenario)
    config = _with_rule(scenario, args.rule)
    if args.print_config:
        print(json.dumps(effective_config(dataclasses.replace(scenario, search=config)), indent=2, sort_keys=True))
    plan = _resolve_plan(args.plan, scenario)
    net = scenario.network
    if args.oracle:
        if config.assignment_rule == "lm_exact":
            lm = oracle.brute_force_lm(net, net.demands, plan)
        elif config.assignment_rule == "aon":
            lm = oracle.oracle_aon(net, plan)
        else:
            lm = oracle.oracle_logit(net, plan)
        point = ObjectivePoint(upper_cost(plan, net), rail_revenue(plan, lm), plan, lm)
    else:
        point = evaluate_plan(plan, net, config)
    if point.lm.heuristic:
        log.warning("capacity bound: assignment used the priority heuristic")
    return _finish([point], scenario, args)


def cmd_evaluate(args) -> int:
    scenario = load_scenario(args.scenario)
    config = _with_rule(scenario, args.rule)
    if args.print_config:
        print(json.dumps(effective_config(dataclasses.replace(scenario, search=config)), indent=2, sort_keys=True))
    plan = load_plan(args.plan, scenario.network, config.allow_multiple_plans)
    return _finish([evaluate_plan(plan, scenario.network, config)], scenario, args)


def cmd_solve(args) -> int:
    scenario = load_scenario(args.scenario)
    config = _with_rule(scenario, args.rule)
    changes = {}
    if args.weights:
        w1, w2 = (float(x) for x in args.weights.split(","))
        changes["weights"] = (w1, w2)
    elif args.pareto:
        changes["weights"] = None
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.max_iterations is not None:
        changes["max_iterations"] = args.max_iterations
    config = dataclasses.replace(config, **changes)
    if args.print_config:
        print(json.dumps(effective_config(dataclasses.replace(scenario, search=config)), indent=2, sort_keys=True))
    return _finish(search_services(scenario.network, config), scenario, args)


def cmd_pareto_exact(args) -> int:
    scenario = load_scenario(args.scenario)
    config = _with_rule(scenario, args.rule)
    if args.print_config:
        print(json.dumps(effective_config(dataclasses.replace(scenario, search=config)), indent=2, sort_keys=True))
    if args.oracle:
        points = oracle.brute_force_um(scenario.network, config)
    else:
        points = enumerate_pareto_exact(scenario.network, config)
    return _finish(points, scenario, args)


COMMANDS = {
    "validate": cmd_validate,
    "assign": cmd_assign,
    "evaluate": cmd_evaluate,
    "solve": cmd_solve,
    "pareto-exact": cmd_pareto_exact,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ScenarioError as exc:
        print(json.dumps(exc.to_dict(), indent=2), file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ThresholdExceeded, oracle.OracleLimit, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
