"""
modchip command-line entry point.

    modchip <command> --config <scenario> [--seed N] [--out DIR] [--force]
                      [--param KEY=VALUE ...] [--verbose | --quiet]

Exit status is 0 on success and the error class's exit code otherwise.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from .. import __version__
from ..errors import FILE_NOT_FOUND_EXIT_CODE, ModchipError
from .commands import execute
from .scenario import Command, load_scenario, parse_override

logger = logging.getLogger("modchip")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="modchip",
        description="Simulate, calibrate and benchmark a modular transmon device",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="command")
    for command in Command:
        sub = subparsers.add_parser(
            command.value, help=f"run a {command.value} scenario"
        )
        sub.add_argument("--config", required=True, type=Path, help="scenario file")
        sub.add_argument("--seed", type=int, help="root seed (overrides the scenario)")
        sub.add_argument("--out", type=Path, help="output directory")
        sub.add_argument(
            "--force", action="store_true", help="replace a non-empty output directory"
        )
        sub.add_argument(
            "--param",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="override a scenario parameter (repeatable; dotted keys for sections)",
        )
        verbosity = sub.add_mutually_exclusive_group()
        verbosity.add_argument("-v", "--verbose", action="store_true")
        verbosity.add_argument("-q", "--quiet", action="store_true")
    return parser


def configure_logging(verbose: bool = False, quiet: bool = False) -> None:
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(
        level=level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def overrides_from_args(args: argparse.Namespace) -> Dict[str, Any]:
    overrides: Dict[str, Any] = {}
    for item in args.param:
        overrides.update(parse_override(item))
    if args.seed is not None:
        overrides["seed"] = args.seed
    return overrides


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose, args.quiet)
    try:
        scenario = load_scenario(args.config, overrides_from_args(args), args.command)
        manifest = execute(scenario, args.out, args.force)
    except ModchipError as e:
        logger.error("%s failed (%s): %s", args.command, type(e).__name__, e)
        return e.exit_code
    except FileNotFoundError as e:
        logger.error("%s failed: %s", args.command, e)
        return FILE_NOT_FOUND_EXIT_CODE
    if not args.quiet:
        print(
            f"{args.command}: {len(manifest.artifacts)} artifacts, "
            f"{manifest.duration_s:.1f} s"
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())
