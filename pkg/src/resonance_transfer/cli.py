"""Command-line front end: ``scan``, ``report`` and ``constants``.

Exit status: 0 on success, 2 for bad input (config, files, flags),
3 when the physics breaks down (strong coupling, unstable oscillators).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict, replace
from pathlib import Path

from .config import load_config
from .constants import CONSTANTS
from .errors import ConfigError, DomainError, OscillatorInstabilityError, StrongCouplingError
from .scan import format_object, format_table, run_report, run_scan

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_PHYSICS = 3


def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="INI file with [scan], [atom], [dielectric], [tolerances]")
    common.add_argument("--output", type=Path, help="write here instead of stdout")
    common.add_argument("--format", choices=("table", "object"), default="table")
    common.add_argument("--workers", type=int, help="parallel worker processes (default from config, else 1)")
    common.add_argument("--preset", choices=("fig3", "fig4", "free", "free_space", "custom"))
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(
        prog="resonance-transfer",
        description="Resonance and Casimir-Polder interactions of atom pairs near a dielectric surface.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("scan", parents=[common], help="tabulate energies and rates over a separation range")
    sub.add_parser("report", parents=[common], help="power-law fits, sign crossovers and diagnostics")
    sub.add_parser("constants", parents=[common], help="print the physical constants in use")
    return parser


def _emit(text, output):
    if output is None:
        sys.stdout.write(text)
    else:
        output.write_text(text)


def main(argv=None):
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")

    if args.command == "constants":
        data = asdict(CONSTANTS)
        if args.format == "object":
            text = json.dumps(data, indent=2) + "\n"
        else:
            text = "".join(f"{k} = {v!r}\n" for k, v in data.items())
        _emit(text, args.output)
        return EXIT_OK

    try:
        config = load_config(args.config, preset=args.preset)
        if args.workers is not None:
            if args.workers < 1:
                raise ConfigError("--workers must be >= 1")
            config = replace(config, workers=args.workers)
        if args.command == "scan":
            result = run_scan(config)
            text = format_object(result) if args.format == "object" else format_table(result)
        else:
            text, report = run_report(config)
            if args.format == "object":
                text = json.dumps(report, indent=2) + "\n"
        _emit(text, args.output)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (StrongCouplingError, OscillatorInstabilityError) as exc:
        print(f"physics error: {exc}", file=sys.stderr)
        return EXIT_PHYSICS
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
