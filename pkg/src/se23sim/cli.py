"""Command-line interface.

Subcommands: validate, bound, stabilize, all.  Exit codes: 0 success,
2 assertion failure (bound violation / agreement failure), 1 error.
"""

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__, runner
from ._backend import BACKEND
from .exceptions import BoundViolation, Se23Error
from .scenario import load_scenario

_MODES = ("validate", "bound", "stabilize")


def default_scenario_path():
    return Path(__file__).parent / "data" / "molniya.scenario"


def build_parser():
    ap = argparse.ArgumentParser(
        prog="se23sim",
        description="Spacecraft maneuver-tracking simulation on SE_2(3): "
                    "dual propagation, gravity-mismatch bound, and "
                    "dynamic-inversion stabilization.")
    ap.add_argument("--version", action="version",
                    version=f"%(prog)s {__version__} (backend: {BACKEND})")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in _MODES + ("all",):
        p = sub.add_parser(name, help=f"run the {name} mode" if name != "all"
                           else "run validate, bound, and stabilize")
        p.add_argument("--scenario", type=Path, default=None,
                       help="scenario file (default: shipped Molniya)")
        p.add_argument("--out", type=Path, default=Path("out"),
                       help="output directory (default: ./out)")
        p.add_argument("--format", choices=("csv", "json"), default="csv",
                       help="per-sample table format")
        p.add_argument("--no-plots", action="store_true",
                       help="skip SVG rendering")
    return ap


_RUNNERS = {
    "validate": runner.run_validate,
    "bound": runner.run_bound,
    "stabilize": runner.run_stabilize,
}


def _run_one(mode, sc, out_dir, fmt, plots_on):
    sc = replace(sc, mode=mode)
    summary = _RUNNERS[mode](sc, out_dir, fmt)
    if plots_on and fmt == "csv":
        from . import plots
        plots.emit_plots(out_dir, mode, seed=sc.seed)
    return summary


def main(argv=None):
    args = build_parser().parse_args(argv)
    path = args.scenario if args.scenario is not None else default_scenario_path()
    try:
        sc = load_scenario(path)
    except FileNotFoundError:
        print(f"error: scenario file not found: {path}", file=sys.stderr)
        return 1
    except (ValueError, Se23Error) as exc:
        print(f"error: invalid scenario: {exc}", file=sys.stderr)
        return 1

    modes = _MODES if args.command == "all" else (args.command,)
    status = 0
    for mode in modes:
        try:
            summary = _run_one(mode, sc, args.out, args.format,
                               not args.no_plots)
        except BoundViolation as exc:
            print(f"{mode}: ASSERTION FAILED: {exc}", file=sys.stderr)
            status = max(status, 2)
            continue
        except Se23Error as exc:
            print(f"{mode}: error: {exc}", file=sys.stderr)
            status = max(status, 1)
            continue
        print(f"{mode}: ok ({summary.wall_time_s:.1f} s)")
        for key, val in sorted(vars(summary).items()):
            if key in ("mode", "wall_time_s") or val == 0.0:
                continue
            if key.startswith("stabilize") and mode != "stabilize":
                continue
            print(f"  {key} = {val}")
    return status


if __name__ == "__main__":
    sys.exit(main())
