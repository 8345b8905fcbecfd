"""Command line front end: run, compare, fleet, report, validate.

Every verb exits nonzero on error. A run that hits its duration limit
still writes whatever outputs were produced, then exits with the timeout
code so batch sweeps can tell truncated runs from finished ones.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import sys
from dataclasses import replace
from pathlib import Path

import yaml

from .dispersal import DispersalMode
from .errors import ReefSeedError
from .metrics import format_table
from .scenario import PRESET_NAMES, Scenario, load_scenario, validate_scenario_dict
from .simulator import (
    SimulationResult,
    compare_modes,
    read_event_log,
    report_from_log,
    run_scenario,
    write_event_log,
    write_report_json,
    write_trajectory_csv,
)

EXIT_OK = 0
EXIT_ERROR = 2
EXIT_TIMEOUT = 3


def _load(args) -> Scenario:
    scenario = load_scenario(args.scenario)
    if args.seed is not None:
        scenario = replace(scenario, seed=args.seed)
    if getattr(args, "tick_rate", None) is not None:
        scenario = replace(scenario, tick_rate=args.tick_rate)
    return scenario


def _write_outputs(result: SimulationResult, out_dir: str, stem: str) -> list[Path]:
    base = Path(out_dir)
    base.mkdir(parents=True, exist_ok=True)
    paths = [
        base / ("%s.events.ndjson" % stem),
        base / ("%s.trajectory.csv" % stem),
        base / ("%s.report.json" % stem),
    ]
    write_event_log(result, str(paths[0]))
    write_trajectory_csv(result, str(paths[1]))
    write_report_json(result, str(paths[2]))
    return paths


def _print_result(result: SimulationResult) -> None:
    print(format_table([result.report]))
    print(
        "end: %s after %.1f s (%d events, %d frames off map)"
        % (result.end_reason, result.elapsed, len(result.events), result.skipped_frames)
    )
    if result.report.bladder_exhausted:
        print("bladder ran dry at t=%.1f s" % result.exhausted_at)


def _cmd_run(args) -> int:
    scenario = _load(args)
    mode = None if args.mode is None else DispersalMode(args.mode)
    result = run_scenario(scenario, mode=mode)
    _print_result(result)
    if args.out is not None:
        stem = scenario.name if mode is None else "%s.%s" % (scenario.name, mode.value)
        for path in _write_outputs(result, args.out, stem):
            print("wrote %s" % path)
    if result.timed_out:
        print("error: duration limit hit with the mission incomplete", file=sys.stderr)
        return EXIT_TIMEOUT
    return EXIT_OK


def _cmd_compare(args) -> int:
    scenario = _load(args)
    cmp = compare_modes(scenario)
    print(format_table([cmp.gated.report, cmp.constant.report]))
    print(
        "constant pump wastes %.2f more points of covered area than gated dispersal"
        % cmp.wasted_delta
    )
    if args.out is not None:
        for result, mode in ((cmp.gated, "gated"), (cmp.constant, "constant")):
            for path in _write_outputs(result, args.out, "%s.%s" % (scenario.name, mode)):
                print("wrote %s" % path)
    if cmp.gated.timed_out or cmp.constant.timed_out:
        print("error: duration limit hit with the mission incomplete", file=sys.stderr)
        return EXIT_TIMEOUT
    return EXIT_OK


def _cmd_report(args) -> int:
    log = read_event_log(args.log)
    report = report_from_log(log)
    print(format_table([report]))
    if args.json is not None:
        payload = report.to_dict() | {
            "scenario": log.header.get("scenario"),
            "seed": log.header.get("seed"),
            "end_reason": log.end.get("reason"),
        }
        with open(args.json, "w", encoding="utf-8") as stream:
            json.dump(payload, stream, indent=2, sort_keys=True)
            stream.write("\n")
        print("wrote %s" % args.json)
    return EXIT_OK


def _cmd_validate(args) -> int:
    if args.scenario in PRESET_NAMES:
        load_scenario(args.scenario)
        print("OK: preset %s" % args.scenario)
        return EXIT_OK
    with open(args.scenario, "r", encoding="utf-8") as stream:
        data = yaml.safe_load(stream)
    problems = validate_scenario_dict(data)
    if problems:
        for line in problems:
            print(line, file=sys.stderr)
        return EXIT_ERROR
    print("OK: %s" % (data.get("name", args.scenario)))
    return EXIT_OK


def _cmd_fleet(args) -> int:
    from .fleetlink.service import run_fleet

    scenario = _load(args)
    counts = asyncio.run(
        run_fleet(
            scenario,
            vehicle_count=args.vehicles,
            host=args.host,
            vehicle_port=args.port,
            console_port=args.console_port,
            static_root=args.static,
            pace=args.pace,
            linger=args.linger,
        )
    )
    for i, count in enumerate(counts):
        print("asv-%d streamed %d frames" % (i + 1, count))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reefseed",
        description="Coral reseeding ASV simulator and fleet service.",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    def scenario_arg(p):
        p.add_argument(
            "scenario",
            help="scenario YAML path or preset name (%s)" % ", ".join(PRESET_NAMES),
        )
        p.add_argument("--seed", type=int, default=None, help="override the scenario seed")

    run = sub.add_parser("run", help="run one scenario and print its report")
    scenario_arg(run)
    run.add_argument("--tick-rate", type=float, default=None, dest="tick_rate",
                     help="override decisions per second")
    run.add_argument("--mode", choices=[m.value for m in DispersalMode], default=None,
                     help="override the dispersal mode")
    run.add_argument("--out", default=None, help="directory for event/trajectory/report files")
    run.set_defaults(func=_cmd_run)

    compare = sub.add_parser("compare", help="run both dispersal modes on one scenario")
    scenario_arg(compare)
    compare.add_argument("--tick-rate", type=float, default=None, dest="tick_rate")
    compare.add_argument("--out", default=None)
    compare.set_defaults(func=_cmd_compare)

    fleet = sub.add_parser("fleet", help="serve the fleet service with simulated vehicles")
    scenario_arg(fleet)
    fleet.add_argument("--vehicles", type=int, default=3)
    fleet.add_argument("--host", default="127.0.0.1")
    fleet.add_argument("--port", type=int, default=7077, help="vehicle wire-protocol port")
    fleet.add_argument("--console-port", type=int, default=7078, dest="console_port",
                       help="console websocket + bundle port")
    fleet.add_argument("--static", default=None, help="console bundle directory to serve")
    fleet.add_argument("--pace", type=float, default=10.0,
                       help="playback speed multiple of real time")
    fleet.add_argument("--linger", type=float, default=0.0,
                       help="keep serving this many seconds after vehicles finish")
    fleet.set_defaults(func=_cmd_fleet)

    report = sub.add_parser("report", help="recompute metrics from an event log")
    report.add_argument("log", help="events.ndjson path")
    report.add_argument("--json", default=None, help="also write the report as JSON")
    report.set_defaults(func=_cmd_report)

    validate = sub.add_parser("validate", help="lint a scenario file")
    validate.add_argument("scenario")
    validate.set_defaults(func=_cmd_validate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ReefSeedError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_ERROR
    except KeyboardInterrupt:
        return 130


if __name__ == "__main__":
    sys.exit(main())
