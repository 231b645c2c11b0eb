"""Command line front end.

    atomlaser analytic --preset decay-3d
    atomlaser gpe --preset flat-potential --out runs/flat
    atomlaser compare --config my.ini
    atomlaser sweep --preset sweep-rabi --jobs 3
    atomlaser chirp --preset decay-3d --dimension 3d

Exit codes: 0 success, 2 configuration error, 3 numerical failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import __version__
from .config import load_config, load_preset, preset_names
from .errors import AtomLaserError, ConfigError
from .runner import OUTPUT_ROOT_ENV, resolve_output_dir, run_experiment

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

log = logging.getLogger("atomlaser")

_COMMAND_MODES = {"gpe": "gpe-1d", "compare": "compare", "sweep": "sweep", "chirp": "chirp"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="atomlaser",
        description="Atom laser output coupling: analytic decay model and 1D GPE runs.",
        epilog=f"Default output root: ${OUTPUT_ROOT_ENV} (or ./runs).",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (
        ("analytic", "Thomas-Fermi decay model (1d or 3d)"),
        ("gpe", "1D Gross-Pitaevskii simulation"),
        ("compare", "GPE run vs 1D analytic model"),
        ("sweep", "repeat a run over a list of parameter values"),
        ("chirp", "constant-velocity output with a compensating rf chirp"),
    ):
        p = sub.add_parser(name, help=help_text)
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--config", help="INI experiment file or a run manifest.json")
        src.add_argument("--preset", help="bundled preset name (see 'atomlaser presets')")
        p.add_argument("--out", help="output directory")
        if name in ("analytic", "chirp"):
            p.add_argument("--dimension", choices=("1d", "3d"), help="model dimension (overrides the config)")
        if name == "sweep":
            p.add_argument("--jobs", type=int, help="worker processes (default: sweep.jobs)")
            p.add_argument("--serial", action="store_true", help="run sweep points one after another")

    sub.add_parser("presets", help="list bundled presets")
    return parser


def _resolve(args):
    cfg = load_config(args.config) if args.config else load_preset(args.preset)
    dimension = getattr(args, "dimension", None)
    if args.command == "analytic":
        dim = dimension or (cfg.dimension if not cfg.mode.startswith("analytic-") else cfg.mode[-2:])
        return cfg.with_mode(f"analytic-{dim}")
    return cfg.with_mode(_COMMAND_MODES[args.command], dimension)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "presets":
        print("\n".join(preset_names()))
        return 0
    try:
        cfg = _resolve(args)
        out_dir = resolve_output_dir(cfg, args.out)
        log.info("mode %s -> %s", cfg.mode, out_dir)
        jobs = None
        if args.command == "sweep":
            jobs = 1 if args.serial else args.jobs
        report = run_experiment(cfg, out_dir, jobs=jobs)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (AtomLaserError, ArithmeticError, ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    scalars = {k: v for k, v in report.summary.items() if not isinstance(v, (dict, list))}
    print(json.dumps(scalars, indent=2, sort_keys=True, default=str))
    print(f"wrote {out_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
