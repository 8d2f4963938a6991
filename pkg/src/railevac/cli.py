"""Command-line front end.

    railevac generate   --out-dir DIR [--seed 42 --n-stations N --n-lines L]
    railevac build-cost --stations S --lines L --passengers P --out cost.json
    railevac simulate   --stations S --lines L --passengers P --blocked ID [...] --out plan.json
    railevac report     --stations S --lines L --passengers P --blocked ID --plan plan.json

Exit status: 0 success, 2 invalid input, 3 infeasible scenario.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
from pathlib import Path

from . import __version__
from .cost import CostParams, build_cost_matrix
from .errors import InfeasiblePrecheck, RailEvacError, ValidationError
from .generate import generate
from .network import load_network
from .report import FORMATS, emit, format_table, plan_from_dict, plan_to_dict, summarize
from .scenario import (DEFAULT_CAPACITY_RATIO, DEFAULT_OPERATING_HOURS, DEFAULT_T_LM,
                       Scenario, build_solver_inputs)
from .solver import PlanStatus, solve

log = logging.getLogger("railevac")

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_INFEASIBLE = 3


class _Infeasible(Exception):
    def __init__(self, message: str, lines: list[str]):
        super().__init__(message)
        self.lines = lines


def write_atomic(path, text: str) -> None:
    """Write ``text`` to ``path`` via a temp file in the same directory."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(text.encode("utf-8"))
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def _add_network_args(p):
    g = p.add_argument_group("network data")
    g.add_argument("--stations", required=True, type=Path, help="stations.csv")
    g.add_argument("--lines", required=True, type=Path, help="lines.csv")
    g.add_argument("--passengers", required=True, type=Path, help="passengers.csv")


def _add_cost_args(p):
    g = p.add_argument_group("cost matrix")
    g.add_argument("--tlm", type=float, default=None,
                   help=f"disruption window in minutes (default {DEFAULT_T_LM:g})")
    g.add_argument("--walk-speed", type=float, default=5.0, help="km/h (default 5)")
    g.add_argument("--hop-time", type=float, default=2.0,
                   help="minutes per adjacent rail hop (default 2)")
    g.add_argument("--one-transfer", action="store_true",
                   help="allow one intermediate station when computing costs")


def _add_scenario_args(p):
    g = p.add_argument_group("scenario (file or inline flags, not both)")
    g.add_argument("--scenario", type=Path, help="scenario.json")
    g.add_argument("--blocked", action="append", metavar="STATION_ID",
                   help="blocked station; repeat for several")
    g.add_argument("--capacity-ratio", type=float, default=None,
                   help=f"capacity multiplier > 1 (default {DEFAULT_CAPACITY_RATIO:g})")
    g.add_argument("--operating-hours", type=float, default=None,
                   help=f"daily operating hours (default {DEFAULT_OPERATING_HOURS:g})")


def _add_output_args(p, out_help):
    p.add_argument("--out", required=True, type=Path, help=out_help)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="railevac",
        description="Optimal passenger evacuation plans for disrupted railway stations.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("generate", help="write a seeded synthetic network")
    p.add_argument("--out-dir", required=True, type=Path)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--n-stations", type=int, default=10)
    p.add_argument("--n-lines", type=int, default=2)
    p.add_argument("--n-operators", type=int, default=None)

    p = sub.add_parser("build-cost", help="write the fused cost matrix as JSON")
    _add_network_args(p)
    _add_cost_args(p)
    _add_output_args(p, "cost.json")

    p = sub.add_parser("simulate", help="solve an evacuation scenario")
    _add_network_args(p)
    _add_cost_args(p)
    _add_scenario_args(p)
    _add_output_args(p, "plan.json")
    p.add_argument("--report", type=Path, help="also write a report to this path")
    p.add_argument("--format", choices=FORMATS, default="csv", help="report format")
    p.add_argument("--top-k", type=int, default=None)

    p = sub.add_parser("report", help="summarize a saved plan")
    _add_network_args(p)
    _add_cost_args(p)
    _add_scenario_args(p)
    p.add_argument("--plan", required=True, type=Path, help="plan.json from simulate")
    _add_output_args(p, "report file")
    p.add_argument("--format", choices=FORMATS, default="csv")
    p.add_argument("--top-k", type=int, default=None)
    return parser


def _scenario_from_args(args) -> Scenario:
    inline = [name for name in ("blocked", "capacity_ratio", "operating_hours")
              if getattr(args, name) is not None]
    if args.scenario is not None:
        if inline:
            flags = ", ".join("--" + n.replace("_", "-") for n in inline)
            raise ValidationError(f"--scenario cannot be combined with {flags}")
        scenario = Scenario.from_json(args.scenario)
        if args.tlm is not None and args.tlm != scenario.t_lm:
            raise ValidationError(
                f"--tlm {args.tlm:g} contradicts t_lm_minutes {scenario.t_lm:g} "
                f"in {args.scenario}")
        return scenario
    if not args.blocked:
        raise ValidationError("give --scenario or at least one --blocked station")
    try:
        return Scenario(
            blocked=frozenset(args.blocked),
            t_lm=args.tlm if args.tlm is not None else DEFAULT_T_LM,
            capacity_ratio=(args.capacity_ratio if args.capacity_ratio is not None
                            else DEFAULT_CAPACITY_RATIO),
            operating_hours=(args.operating_hours if args.operating_hours is not None
                             else DEFAULT_OPERATING_HOURS),
        )
    except ValidationError as exc:
        flag = "--capacity-ratio" if "capacity ratio" in str(exc) else None
        raise ValidationError(f"{flag}: {exc}" if flag else str(exc)) from None


def _cost_params(args, t_lm: float) -> CostParams:
    return CostParams(t_lm=t_lm, walk_speed_s=args.walk_speed, hop_time=args.hop_time,
                      one_transfer_refinement=args.one_transfer)


def _prepare(args):
    """Load network, scenario and cost model; build the solver instance."""
    scenario = _scenario_from_args(args)
    network = load_network(args.stations, args.lines, args.passengers)
    for w in network.summary.warnings:
        print(f"warning: {w}", file=sys.stderr)
    scenario.validate(network)
    cost = build_cost_matrix(network, _cost_params(args, scenario.t_lm))
    try:
        instance = build_solver_inputs(network, cost, scenario)
    except InfeasiblePrecheck as exc:
        lines = [f"  {sid}: load {d['load']:.6g}, {d['candidates']} candidate(s), "
                 f"reachable capacity {d['reachable_capacity']:.6g}"
                 for sid, d in exc.diagnostics.items()]
        raise _Infeasible(f"{exc.code}: {exc}", lines) from None
    return network, instance


def _cmd_generate(args) -> int:
    paths = generate(args.out_dir, seed=args.seed, n_stations=args.n_stations,
                     n_lines=args.n_lines, n_operators=args.n_operators)
    for p in paths.values():
        print(p)
    return EXIT_OK


def _cmd_build_cost(args) -> int:
    network = load_network(args.stations, args.lines, args.passengers)
    t_lm = args.tlm if args.tlm is not None else DEFAULT_T_LM
    cost = build_cost_matrix(network, _cost_params(args, t_lm))
    write_atomic(args.out, cost.to_json(network.station_ids))
    log.info("wrote %s (n=%d)", args.out, network.n)
    return EXIT_OK


def _cmd_simulate(args) -> int:
    network, instance = _prepare(args)
    plan = solve(instance)
    if plan.status is PlanStatus.INFEASIBLE:
        ids = network.station_ids
        raise _Infeasible("INFEASIBLE: solver could not route all evacuees",
                          [f"  {ids[i]}: shortfall {x:.6g}"
                           for i, x in sorted(plan.shortfall.items())])
    write_atomic(args.out, json.dumps(plan_to_dict(plan, network), indent=2) + "\n")
    report = summarize(plan, instance, network)
    if args.report is not None:
        write_atomic(args.report, emit(report, args.format, args.top_k))
    print(format_table(report, args.top_k if args.top_k is not None else 10))
    return EXIT_OK


def _cmd_report(args) -> int:
    network, instance = _prepare(args)
    try:
        data = json.loads(args.plan.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ValidationError("file not found", path=args.plan) from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"invalid JSON: {exc.msg}", path=args.plan,
                              line=exc.lineno) from None
    plan = plan_from_dict(data, network)
    if plan.status is not PlanStatus.OPTIMAL:
        raise _Infeasible(f"{args.plan}: plan status is {plan.status.value}", [])
    for f in plan.flows:
        if f.origin not in instance.demands or f.destination not in instance.capacities:
            raise ValidationError(
                f"flow {network.stations[f.origin].station_id} -> "
                f"{network.stations[f.destination].station_id} does not fit the scenario",
                path=args.plan)
    report = summarize(plan, instance, network)
    write_atomic(args.out, emit(report, args.format, args.top_k))
    return EXIT_OK


COMMANDS = {
    "generate": _cmd_generate,
    "build-cost": _cmd_build_cost,
    "simulate": _cmd_simulate,
    "report": _cmd_report,
}


def run(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    level = os.environ.get("RAIL_EVAC_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.subcommand](args)
    except _Infeasible as exc:
        print(f"error: {exc}", file=sys.stderr)
        for line in exc.lines:
            print(line, file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ValidationError, RailEvacError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
