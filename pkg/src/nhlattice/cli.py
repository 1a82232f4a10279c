"""Command-line interface.

    nhlattice <subcommand> [--config FILE | --preset NAME] [--out DIR] [--workers N]

Subcommands: scatter, evolve, pt-spectrum, sweep, run.  The run command
dispatches on the config's experiment field; the others additionally check
that the config matches the subcommand family.  Default output root is
$NHLATTICE_OUT (or ./nhlattice_out).  Exit codes: 0 success, 2 config
error, 3 numerical failure, 4 boundary contamination.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .dynamics import BoundaryContaminationError, PlatformNotFoundError, StepSizeError
from .harness import (ConfigError, Experiment, RunConfig, load_config,
                      load_preset, preset_names, run)
from .spectral import NearEPError

_FAMILIES = {
    "scatter": {Experiment.SCATTER},
    "evolve": {Experiment.EMISSION, Experiment.ABSORPTION, Experiment.PT_TRACE,
               Experiment.DEVIATION},
    "pt-spectrum": {Experiment.SPECTRUM},
    "sweep": {Experiment.SCALING_SWEEP},
    "run": set(Experiment),
}


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON run configuration file")
    p.add_argument("--preset", help="named preset (see --list-presets)")
    p.add_argument("--out", help="output directory")
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1,
                   help="worker pool size for sweeps (default: cpu count)")


def _load(args) -> tuple[RunConfig, str | None]:
    if args.preset:
        return load_preset(args.preset), args.preset
    if args.config:
        return load_config(args.config), None
    raise ConfigError("one of --config or --preset is required")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="nhlattice",
        description="spectral-singularity lattice simulator")
    parser.add_argument("--list-presets", action="store_true",
                        help="list available presets and exit")
    sub = parser.add_subparsers(dest="command")
    for name in _FAMILIES:
        _add_common(sub.add_parser(name))
    args = parser.parse_args(argv)

    if args.list_presets:
        print("\n".join(preset_names()))
        return 0
    if args.command is None:
        parser.print_help()
        return 2

    try:
        config, preset_name = _load(args)
        allowed = _FAMILIES[args.command]
        if config.experiment not in allowed:
            raise ConfigError(
                f"experiment {config.experiment.value!r} not valid for "
                f"subcommand {args.command!r} (expected one of "
                f"{sorted(e.value for e in allowed)})")
        summary = run(config, out=args.out, workers=args.workers,
                      name=preset_name)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except BoundaryContaminationError as exc:
        print(f"boundary contamination: {exc}", file=sys.stderr)
        return 4
    except (StepSizeError, PlatformNotFoundError, NearEPError,
            np.linalg.LinAlgError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3

    for key, value in sorted(summary.items()):
        if not isinstance(value, (list, dict)):
            print(f"{key}: {value}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
