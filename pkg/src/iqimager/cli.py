"""Command-line entry point.

Exit codes: 0 success, 2 configuration or usage error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import from_dict, parse_config, with_overrides
from .exceptions import ConfigurationError
from .experiments import RECIPES, SWEEP_PARAMETERS, UsageError, recipe, run_analyze, run_simulate, run_sweep

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def u64(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError(f"seed must fit in an unsigned 64-bit integer: {text}")
    return v


def positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1: {text}")
    return v


def load_config(path=None, recipe_name=None):
    """Config from a TOML file, a run's manifest.json, or a built-in recipe."""
    if (path is None) == (recipe_name is None):
        raise UsageError("give exactly one of --config or --recipe")
    if recipe_name is not None:
        return recipe(recipe_name)
    p = Path(path)
    try:
        data = p.read_bytes()
    except OSError as e:
        raise ConfigurationError(f"cannot read config {p}: {e.strerror or e}") from None
    if p.suffix == ".json":
        try:
            doc = json.loads(data)
            return from_dict(doc["config"])
        except (ValueError, KeyError, TypeError) as e:
            raise ConfigurationError(f"{p}: not a manifest with a 'config' entry ({e})") from None
    return parse_config(data)


def _add_common(p: argparse.ArgumentParser, config_required: bool = True):
    src = p.add_mutually_exclusive_group(required=config_required)
    src.add_argument("--config", metavar="PATH", help="TOML config file or a previous run's manifest.json")
    src.add_argument("--recipe", metavar="NAME", help="built-in experiment (see 'recipes')")
    p.add_argument("--seed", type=u64, metavar="U64", help="override sampling.seed")
    p.add_argument("--out", metavar="DIR", help="override output.dir")
    p.add_argument("--threads", type=positive_int, default=1, metavar="K",
                   help="worker threads; never changes results (default 1)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="iqimager", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate frames and write depth maps, report and manifest")
    _add_common(p)

    p = sub.add_parser("sweep", help="sweep one parameter and tabulate accuracy, resolution and IRR")
    _add_common(p)
    p.add_argument("--parameter", required=True, help=f"one of {', '.join(SWEEP_PARAMETERS)}")
    p.add_argument("--values", required=True, help="comma-separated values, e.g. 10e9,100e9,600e9")

    p = sub.add_parser("analyze", help="recompute a depth map from a stored .iqtr trace file")
    _add_common(p)
    p.add_argument("--traces", required=True, metavar="FILE")

    p = sub.add_parser("recipes", help="list built-in experiments")
    p.add_argument("--show", metavar="NAME", help="print a recipe's config text")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "recipes":
            if args.show:
                if args.show not in RECIPES:
                    raise UsageError(f"unknown recipe {args.show!r}; choose from {sorted(RECIPES)}")
                sys.stdout.write(RECIPES[args.show][1])
            else:
                for name, (desc, _) in RECIPES.items():
                    print(f"{name:26s} {desc}")
            return EXIT_OK

        cfg = with_overrides(load_config(args.config, args.recipe), seed=args.seed, out=args.out)
        if args.command == "simulate":
            out = run_simulate(cfg, workers=args.threads)
        elif args.command == "sweep":
            out = run_sweep(cfg, args.parameter, args.values, workers=args.threads)
        else:
            out = run_analyze(args.traces, cfg, workers=args.threads)
        print(f"wrote {out}")
        return EXIT_OK
    except (ConfigurationError, UsageError) as e:
        print(f"iqimager: error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as e:  # noqa: BLE001 - every other failure maps to the runtime exit code
        print(f"iqimager: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    raise SystemExit(main())
