"""Command-line front end.

    hfeq run <scenario|config.toml> [--out DIR] [--seed N] [--grid N]
    hfeq list
    hfeq validate <config.toml>

Exit codes: 0 success, 2 configuration problems, 3 numeric-quality refusals
(grid too coarse, truncated mass), 4 violated physical preconditions.
"""

from __future__ import annotations

import argparse
import os
import sys

from .errors import ConfigError, NumericError, PreconditionError
from .scenarios import get_scenario, list_scenarios, load_config, run_scenario


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hfeq",
        description="simulate entangled-photon spectra and run the bundled analyses",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a named scenario or a TOML config")
    p_run.add_argument("target", help="scenario name or path to a config file")
    p_run.add_argument("--out", default=None, help="output directory (default hfeq-out/<scenario>)")
    p_run.add_argument("--seed", type=int, default=None, help="noise seed override")
    p_run.add_argument("--grid", type=int, default=None, help="grid points per axis override")

    sub.add_parser("list", help="list available scenarios")

    p_val = sub.add_parser("validate", help="check a config file without running it")
    p_val.add_argument("config", help="path to a TOML config file")
    return parser


def _cmd_run(args) -> int:
    manifest = None
    out = args.out
    if out is None:
        # resolve the scenario name first so the default directory is stable
        if args.target.endswith(".toml") or os.path.isfile(args.target):
            scenario, _, _, _ = load_config(args.target)
        else:
            scenario = get_scenario(args.target)
        out = os.path.join("hfeq-out", scenario.name)
    manifest = run_scenario(args.target, out, seed=args.seed, grid_n=args.grid)
    print(f"scenario: {manifest['scenario']}")
    print(f"output:   {out}")
    for entry in manifest["files"]:
        print(f"  wrote {entry['file']} [{entry['kind']}]")
    report = manifest["report"]
    for key in sorted(report):
        value = report[key]
        if isinstance(value, (int, float, bool, str)) or value is None:
            print(f"  {key} = {value}")
    print("  full numbers in manifest.json")
    return 0


def _cmd_list() -> int:
    for sc in list_scenarios():
        print(f"{sc.name:24s} {sc.description}")
    return 0


def _cmd_validate(args) -> int:
    scenario, params, seed, grid = load_config(args.config)
    print(f"OK: {args.config} -> scenario '{scenario.name}'")
    overrides = {
        k: v for k, v in params.items() if v != scenario.defaults.get(k)
    }
    if overrides:
        for key in sorted(overrides):
            print(f"  params.{key} = {overrides[key]}")
    if seed is not None:
        print(f"  seed = {seed}")
    if grid is not None:
        print(f"  grid = {grid}")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "list":
            return _cmd_list()
        return _cmd_validate(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 3
    except PreconditionError as exc:
        print(f"precondition error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
