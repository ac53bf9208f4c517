#!/usr/bin/python3

import argparse
import json
import logging
import sys

from . import jobs
from .config import format_config, load_config, parse_assignments, resolve
from .emit import FORMATS, plain_value
from .errors import ConfigError, exit_code
from .presets import PRESETS, run_preset
from .sweep import DEFAULT_OUTPUTS, Axis

LOGGER = logging.getLogger("optobell")


def _jsonable(value):
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return plain_value(value)


def _print_json(doc):
    sys.stdout.write(json.dumps(_jsonable(doc), indent=2) + "\n")


def _add_common(parser):
    parser.add_argument("--config", dest="config", type=str, default=None, help="Path to a key = value configuration file.")
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="Override one configuration key. May be repeated.",
    )
    parser.add_argument(
        "--print-config",
        dest="print_config",
        action="store_true",
        help="Print the fully resolved configuration and exit.",
    )


def _add_output(parser, default):
    parser.add_argument("--output", dest="output", type=str, default=default, help="Output path stem, without extension.")
    parser.add_argument("--svg", dest="svg", action="store_true", help="Also render the result as SVG.")
    parser.add_argument(
        "--formats",
        dest="formats",
        type=str,
        default=",".join(FORMATS),
        help="Comma-separated tabular formats, from: " + ", ".join(FORMATS) + ".",
    )


def _add_axes(parser, required):
    parser.add_argument(
        "--axis",
        dest="axes",
        action="append",
        default=[],
        required=required,
        metavar="NAME:START:STOP:COUNT[:log]",
        help="Sweep axis. Give one or two; the first varies slowest.",
    )


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="optobell",
        description="""Computes the output fields of two cavities coupled to one mechanical resonator,
driven on the blue and red sidebands, and maps where their intensity correlations violate the CHSH inequality.""",
    )
    parser.add_argument("-v", "--verbose", dest="verbose", action="store_true", help="Log debugging detail.")
    parser.add_argument("-q", "--quiet", dest="quiet", action="store_true", help="Only log warnings and errors.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scatter", help="Dump the scattering matrix and coefficients at one point.")
    _add_common(p)

    p = sub.add_parser("bell", help="Correlators and CHSH metrics at one point.")
    _add_common(p)

    p = sub.add_parser("sweep", help="Evaluate outputs over a one- or two-axis grid.")
    _add_common(p)
    _add_axes(p, True)
    _add_output(p, "sweep")
    p.add_argument(
        "--outputs",
        dest="outputs",
        type=str,
        default=",".join(DEFAULT_OUTPUTS),
        help="Comma-separated outputs per grid point.",
    )

    p = sub.add_parser("contour", help="Extract the F = level boundary of a two-axis grid.")
    _add_common(p)
    _add_axes(p, True)
    _add_output(p, "contour")
    p.add_argument("--level", dest="level", type=float, default=0.5, help="Contour level.")
    p.add_argument(
        "--family",
        dest="family",
        type=str,
        default=None,
        metavar="KEY=V1,V2,...",
        help="Repeat the sweep for each value of a configuration key.",
    )

    p = sub.add_parser("noise", help="F against each bath occupation, with the linearized estimate.")
    _add_common(p)
    _add_output(p, "noise")
    p.add_argument("--baths", dest="baths", type=str, default="m,i,e", help="Comma-separated baths from m, i, e.")
    p.add_argument("--n-max", dest="n_max", type=float, default=0.05, help="Largest occupation.")
    p.add_argument("--n-count", dest="n_count", type=int, default=101, help="Number of occupations per curve.")
    p.add_argument(
        "--at-r",
        dest="at_r",
        type=float,
        default=None,
        help="Coupling ratio to use. Defaults to the optimal ratio for the configured r_e.",
    )

    p = sub.add_parser("compare-rwa", help="Violation regions of the exact and rotating-wave solutions.")
    _add_common(p)
    _add_axes(p, True)
    _add_output(p, "compare_rwa")
    p.add_argument("--kappas", dest="kappas", type=str, default="0.01,0.02,0.1", help="Comma-separated linewidths.")

    p = sub.add_parser("optimal-r", help="Coupling ratio that tolerates the most cavity noise.")
    _add_common(p)

    p = sub.add_parser("presets", help="List or run figure presets.")
    psub = p.add_subparsers(dest="preset_command", required=True)
    psub.add_parser("list", help="List the presets.")
    p = psub.add_parser("run", help="Run one or more presets.")
    p.add_argument("names", nargs="+", help="Preset names, or 'all'.")
    p.add_argument("--output", dest="output", type=str, default=".", help="Output directory.")
    p.add_argument("--workers", dest="workers", type=int, default=None, help="Number of worker processes.")
    p.add_argument("--resolution", dest="resolution", type=int, default=None, help="Points per axis or curve.")
    p.add_argument("--no-svg", dest="svg", action="store_false", help="Skip the SVG figures.")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE", help="Override one configuration key.")
    return parser


def _settings(args):
    file_layer = load_config(args.config) if args.config else None
    return resolve(file_layer, parse_assignments(args.overrides))


def _formats(args):
    return tuple(f.strip() for f in args.formats.split(",") if f.strip())


def _family(text):
    if "=" not in text:
        raise ConfigError("family '" + text + "' is not of the form KEY=V1,V2,...")
    key, values = text.split("=", 1)
    return key.strip(), tuple(jobs.float_list(values))


def _run(args):
    if args.command == "presets":
        if args.preset_command == "list":
            for preset in PRESETS.values():
                sys.stdout.write(preset.name + "\t" + preset.description + "\n")
            return
        names = list(PRESETS) if args.names == ["all"] else args.names
        overrides = parse_assignments(args.overrides)
        for name in names:
            run_preset(
                name,
                args.output,
                workers=args.workers or 1,
                resolution=args.resolution,
                overrides=overrides,
                svg=args.svg,
            )
        return

    settings = _settings(args)
    if args.print_config:
        sys.stdout.write(format_config(settings))
        return

    workers = settings["workers"]
    if args.command == "scatter":
        _print_json(jobs.scatter_job(settings))
    elif args.command == "bell":
        _print_json(jobs.bell_job(settings))
    elif args.command == "optimal-r":
        _print_json(jobs.optimal_r_job(settings["r_e"]))
    elif args.command == "sweep":
        outputs = tuple(o.strip() for o in args.outputs.split(",") if o.strip())
        axes = [Axis.parse(a) for a in args.axes]
        jobs.sweep_job(settings, axes, args.output, outputs, workers, _formats(args), args.svg)
    elif args.command == "contour":
        axes = [Axis.parse(a) for a in args.axes]
        family = _family(args.family) if args.family else None
        jobs.contour_job(settings, axes, args.output, family, args.level, workers, _formats(args), args.svg)
    elif args.command == "noise":
        baths = tuple(b.strip() for b in args.baths.split(",") if b.strip())
        if args.n_count < 2 or not args.n_max > 0:
            raise ConfigError("noise curves need --n-count >= 2 and a positive --n-max")
        n_values = [args.n_max * k / (args.n_count - 1) for k in range(args.n_count)]
        jobs.noise_job(settings, args.output, baths, n_values, args.at_r, workers, _formats(args), args.svg)
    elif args.command == "compare-rwa":
        axes = [Axis.parse(a) for a in args.axes]
        jobs.compare_rwa_job(settings, jobs.float_list(args.kappas), axes, args.output, workers, _formats(args))


def main(argv=None):
    args = _build_parser().parse_args(argv)

    level = logging.INFO
    if args.verbose:
        level = logging.DEBUG
    elif args.quiet:
        level = logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)

    try:
        _run(args)
    except Exception as exc:
        code = exit_code(exc)
        if code == 1:
            raise
        LOGGER.error("%s", exc)
        LOGGER.debug("traceback", exc_info=True)
        return code
    return 0


if __name__ == "__main__":
    sys.exit(main())
