"""Command-line entry point.

Verbs:
  run             execute one scenario file
  sweep           run a scenario template across one axis
  check           run the acceptance suite
  list-scenarios  show the bundled scenario files

Exit codes: 0 success, 2 scenario/schema error, 3 solver divergence,
4 acceptance failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from .harness import (
    ScenarioError,
    bundled_scenario_path,
    bundled_scenarios,
    default_workers,
    parse_time,
    run_scenario,
    sweep,
)
from .spectral_solver import DivergedError

EXIT_OK = 0
EXIT_SCHEMA = 2
EXIT_DIVERGED = 3
EXIT_ACCEPTANCE = 4


def _parse_overrides(pairs):
    out = {}
    for pair in pairs or ():
        if "=" not in pair:
            raise ScenarioError(f"override '{pair}' is not key=value")
        key, _, raw = pair.partition("=")
        try:
            out[key] = json.loads(raw)
        except json.JSONDecodeError:
            out[key] = raw
    return out


def _resolve_scenario(name: str) -> str:
    from pathlib import Path

    if Path(name).exists():
        return name
    if name in bundled_scenarios():
        return str(bundled_scenario_path(name))
    if name + ".json" in bundled_scenarios():
        return str(bundled_scenario_path(name + ".json"))
    raise ScenarioError(f"scenario '{name}' not found on disk or among bundled scenarios")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="talbot",
        description="Dispersive quantization and fractalization experiments on the torus",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    p_run = sub.add_parser("run", help="execute one scenario")
    p_run.add_argument("--scenario", required=True, help="path or bundled scenario name")
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.add_argument("--override", action="append", default=[],
                       help="dot-path override, e.g. solver.M=1024 (repeatable)")

    p_sweep = sub.add_parser("sweep", help="sweep one axis of a scenario template")
    p_sweep.add_argument("--scenario", required=True)
    p_sweep.add_argument("--out", required=True)
    p_sweep.add_argument("--axis", required=True, choices=["time", "N", "dt", "M"])
    p_sweep.add_argument("--values", required=True,
                         help="JSON list, e.g. '[0.3, 0.31]' or '[{\"p\":1,\"q\":10}]'")
    p_sweep.add_argument("--workers", type=int, default=None,
                         help="worker pool size (default: TALBOT_WORKERS or 1)")
    p_sweep.add_argument("--override", action="append", default=[])

    p_check = sub.add_parser("check", help="run the acceptance suite")
    p_check.add_argument("--only", help="comma-separated criterion numbers, e.g. 1,3,11")
    p_check.add_argument("--out", help="write a JSON report here")

    sub.add_parser("list-scenarios", help="list bundled scenario files")

    args = parser.parse_args(argv)
    try:
        if args.verb == "run":
            manifest = run_scenario(
                _resolve_scenario(args.scenario), args.out,
                overrides=_parse_overrides(args.override),
            )
            print(f"wrote {len(manifest.outputs)} outputs to {args.out}")
            return EXIT_OK
        if args.verb == "sweep":
            import json as _json
            from pathlib import Path

            doc = _json.loads(Path(_resolve_scenario(args.scenario)).read_text())
            for key, value in _parse_overrides(args.override).items():
                from .harness import _apply_override

                _apply_override(doc, key, value)
            try:
                values = _json.loads(args.values)
            except _json.JSONDecodeError as err:
                raise ScenarioError(f"--values is not valid JSON: {err}") from None
            if not isinstance(values, list):
                raise ScenarioError("--values must be a JSON list")
            path = sweep(doc, args.axis, values, args.out, workers=args.workers)
            print(f"wrote {path}")
            return EXIT_OK
        if args.verb == "check":
            from . import acceptance

            only = None
            if args.only:
                only = [int(s) for s in args.only.split(",")]
            results = acceptance.run(only=only, verbose=True)
            if args.out:
                from pathlib import Path

                Path(args.out).write_text(
                    json.dumps([r.to_dict() for r in results], indent=2) + "\n"
                )
            return EXIT_OK if all(r.passed for r in results) else EXIT_ACCEPTANCE
        if args.verb == "list-scenarios":
            for name in bundled_scenarios():
                print(name)
            return EXIT_OK
    except ScenarioError as err:
        print(f"scenario error: {err}", file=sys.stderr)
        return EXIT_SCHEMA
    except DivergedError as err:
        print(f"solver diverged: {err}", file=sys.stderr)
        return EXIT_DIVERGED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
