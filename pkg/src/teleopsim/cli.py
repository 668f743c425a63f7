"""Command-line interface: run, validate, serve, report.

Exit codes: 0 success, 2 configuration error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import sys
from pathlib import Path

from . import runner
from .scenario import ScenarioError, load_scenario

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _print_block(name: str, block) -> None:
    if block is None:
        print(f"{name}: (no samples)")
        return
    if "mean_us" in block:
        print(f"{name}: n={block['n']} mean={block['mean_us'] / 1000:.2f}ms "
              f"std={block['std_us'] / 1000:.2f}ms "
              f"min={block['min_us'] / 1000:.2f}ms "
              f"max={block['max_us'] / 1000:.2f}ms")
    else:
        print(f"{name}: {json.dumps(block)}")


def _print_report(report: dict) -> None:
    print(f"scenario {report['name']!r} seed={report['seed']}")
    _print_block("rtt", report.get("rtt"))
    _print_block("g2g", report.get("g2g"))
    jitter = report.get("jitter")
    if jitter:
        print(f"jitter: {jitter['jitter_us'] / 1000:.3f}ms over n={jitter['n']}")
    for channel, block in sorted(report.get("loss", {}).items()):
        print(f"loss[{channel}]: {block['dropped']}/{block['sent']} "
              f"(rate {block['rate']:.4f})")
    lag = report.get("steering_lag")
    if lag:
        print(f"steering_lag: {lag['lag_us'] / 1000:.1f}ms "
              f"(peak {lag['correlation_peak']:.3f}, grid {lag['grid_us']}µs)")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="teleopsim",
        description="Desk-scale teleoperated-driving latency testbed")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a virtual-clock scenario")
    p_run.add_argument("scenario")
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--out", default=None)

    p_val = sub.add_parser("validate", help="check a scenario file")
    p_val.add_argument("scenario")

    p_serve = sub.add_parser("serve", help="serve a live cockpit session")
    p_serve.add_argument("scenario")
    p_serve.add_argument("--port", type=int, required=True)
    p_serve.add_argument("--duration", type=float, default=None,
                         help="session length in seconds (default: scenario "
                              "duration; 0 = until interrupted)")
    p_serve.add_argument("--seed", type=int, default=None)
    p_serve.add_argument("--out", default=None)
    p_serve.add_argument("--host", default="127.0.0.1")

    p_rep = sub.add_parser("report", help="re-summarize an output directory")
    p_rep.add_argument("dir")

    args = parser.parse_args(argv)

    try:
        if args.command == "run":
            scenario, warnings = load_scenario(args.scenario)
            for w in warnings:
                print(f"warning: {w}", file=sys.stderr)
            report = runner.run(scenario, out_dir=args.out, seed=args.seed)
            _print_report(report)
            return EXIT_OK
        if args.command == "validate":
            scenario, warnings = load_scenario(args.scenario)
            for w in warnings:
                print(f"warning: {w}", file=sys.stderr)
            print(f"ok: scenario {scenario.name!r} is valid")
            return EXIT_OK
        if args.command == "serve":
            from . import bridge  # websockets import deferred to use

            scenario, warnings = load_scenario(args.scenario)
            for w in warnings:
                print(f"warning: {w}", file=sys.stderr)
            duration = args.duration
            if duration is None:
                duration = scenario.duration_s
            print(f"serving {scenario.name!r} on ws://{args.host}:{args.port} "
                  f"(duration: {duration or 'until interrupted'})", flush=True)
            try:
                report = asyncio.run(bridge.serve(
                    scenario, args.port, duration_s=duration,
                    out_dir=args.out, seed=args.seed, host=args.host))
            except KeyboardInterrupt:
                # the session finalizes on cancellation, outputs are on disk
                print("session interrupted; outputs written", file=sys.stderr)
                return EXIT_OK
            _print_report(report)
            return EXIT_OK
        if args.command == "report":
            if not Path(args.dir).is_dir():
                print(f"error: {args.dir} is not a directory", file=sys.stderr)
                return EXIT_CONFIG
            report = runner.summarize_dir(args.dir)
            _print_report(report)
            return EXIT_OK
    except ScenarioError as exc:
        for err in exc.errors:
            print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
