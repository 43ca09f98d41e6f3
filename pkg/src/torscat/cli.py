"""Batch command-line front end.

Commands: enumerate, spectrum, classify, sweep, distribution,
dirichlet-sweep.  Exit codes: 0 success, 2 configuration error,
3 validation failure.  Report commands additionally render PNG figures
next to their CSV/JSON output unless --no-plots is given.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .config import RunConfig, load_config
from .errors import ConfigError, TorscatError, ValidationError, WindowError
from .lattice import class_table, window_arrays
from .moments import SPECTRUM_BUFFER
from .sieve import classify
from .sweep import (
    build_sequence,
    distribution_for_lambda,
    fmt,
    run_sweep,
    write_classification_csv,
    write_csv,
    write_histogram_csv,
    write_json,
    write_spectrum_csv,
    write_sweep_csv,
)

_CONFIG_FLAGS = [
    ("--a4", "a4", str, "a^4 as a decimal or 'golden'/'sqrt2'"),
    ("--generic", "generic", str, "irrationality assertion: auto/true/false"),
    ("--delta", "delta", float, "sieve exponent delta"),
    ("--theta", "theta", float, "circle-problem exponent theta"),
    ("--epsilon", "epsilon", float, "filter density budget"),
    ("--x-max", "x_max", float, "sweep upper bound"),
    ("--generator", "generator", str, "midpoint, secular, or a CSV path"),
    ("--coupling", "coupling", float, "secular coupling constant"),
    ("--regularization-scale", "regularization_scale", float, "secular regularization scale"),
    ("--boundary", "boundary", str, "torus or dirichlet"),
    ("--y1", "y1", float, "scatterer position y1 (dirichlet)"),
    ("--y2", "y2", float, "scatterer position y2 (dirichlet)"),
    ("--grid-n", "grid_n", int, "grid override (0 = automatic)"),
    ("--point-cap", "point_cap", int, "enumeration point cap"),
    ("--brute-cap", "brute_cap", int, "brute-force entry cap"),
    ("--grid-cap", "grid_cap", int, "quadrature grid cell cap"),
    ("--bins", "bins", int, "histogram bin count"),
    ("--output-dir", "output_dir", str, "output directory"),
    ("--seed", "seed", int, "rng seed (subset sampling only)"),
]


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key=value configuration file")
    p.add_argument("-v", "--verbose", action="store_true", help="info-level logging")
    for flag, dest, kind, help_text in _CONFIG_FLAGS:
        p.add_argument(flag, dest=dest, type=kind, default=None, help=help_text)
    p.add_argument(
        "--plots", dest="plots", action=argparse.BooleanOptionalAction, default=None,
        help="render figures next to the delimited output",
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="torscat",
        description="Spectral and moment statistics of point scatterers on flat tori",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enumerate", help="lattice vectors in a squared-norm window")
    _add_common(p)
    p.add_argument("--lo", type=float, required=True)
    p.add_argument("--hi", type=float, required=True)
    p.add_argument("--out", help="CSV path (default: stdout)")

    p = sub.add_parser("spectrum", help="distinct eigenvalues and the interlacing sequence")
    _add_common(p)

    p = sub.add_parser("classify", help="good/bad classification sweep")
    _add_common(p)

    p = sub.add_parser("sweep", help="full moment sweep with summary")
    _add_common(p)

    p = sub.add_parser("distribution", help="value distribution at one eigenvalue")
    _add_common(p)
    p.add_argument("--lam", type=float, required=True)

    p = sub.add_parser("dirichlet-sweep", help="moment sweep with Dirichlet walls")
    _add_common(p)
    return parser


def _config_from(args: argparse.Namespace) -> RunConfig:
    overrides = {}
    for _, dest, _, _ in _CONFIG_FLAGS:
        value = getattr(args, dest, None)
        if value is not None:
            overrides[dest] = value
    if getattr(args, "plots", None) is not None:
        overrides["plots"] = args.plots
    return load_config(args.config, overrides)


def _outdir(cfg: RunConfig) -> Path:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _cmd_enumerate(cfg: RunConfig, args) -> int:
    geom = cfg.geometry()
    m, n, nsq = window_arrays(geom, args.lo, args.hi, cfg.point_cap)
    rows = [[int(a), int(b), float(v)] for a, b, v in zip(m, n, nsq)]
    if args.out:
        write_csv(Path(args.out), ["m", "n", "norm_sq"], rows)
    else:
        sys.stdout.write("m,n,norm_sq\n")
        for row in rows:
            sys.stdout.write(",".join(fmt(v) for v in row) + "\n")
    return 0


def _cmd_spectrum(cfg: RunConfig) -> int:
    geom = cfg.geometry()
    table = class_table(geom, cfg.x_max + SPECTRUM_BUFFER, cfg.point_cap)
    norms, mult, seq = build_sequence(cfg, geom, table)
    out = _outdir(cfg)
    write_spectrum_csv(norms, mult, seq, out / "spectrum.csv")
    return 0


def _cmd_classify(cfg: RunConfig) -> int:
    geom = cfg.geometry()
    params = cfg.sieve_params()
    table = class_table(geom, cfg.x_max + SPECTRUM_BUFFER, cfg.point_cap)
    _, _, seq = build_sequence(cfg, geom, table)
    cls = [
        classify(geom, float(l), params, table)
        for l in seq.lambdas
        if 1.0 <= l <= cfg.x_max
    ]
    out = _outdir(cfg)
    write_classification_csv(cls, out / "classification.csv")
    return 0


def _cmd_sweep(cfg: RunConfig, prefix: str) -> int:
    result = run_sweep(cfg)
    out = _outdir(cfg)
    write_sweep_csv(result, out / f"{prefix}.csv")
    write_json(out / f"{prefix.replace('sweep', 'summary')}.json", result.summary)
    if cfg.plots:
        from .plots import render_sweep_figures

        render_sweep_figures(result, out, prefix=prefix)
    return 0


def _cmd_distribution(cfg: RunConfig, lam: float) -> int:
    dist, stats = distribution_for_lambda(cfg, lam)
    out = _outdir(cfg)
    write_histogram_csv(dist, out / "distribution.csv")
    write_json(out / "distribution_stats.json", stats)
    if cfg.plots:
        from .plots import render_distribution_figure

        render_distribution_figure(dist, stats, out / "distribution.png")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = _config_from(args)
        if args.command == "enumerate":
            return _cmd_enumerate(cfg, args)
        if args.command == "spectrum":
            return _cmd_spectrum(cfg)
        if args.command == "classify":
            return _cmd_classify(cfg)
        if args.command == "sweep":
            return _cmd_sweep(cfg, "sweep")
        if args.command == "distribution":
            return _cmd_distribution(cfg, args.lam)
        if args.command == "dirichlet-sweep":
            cfg = replace(cfg, boundary="dirichlet").validate()
            return _cmd_sweep(cfg, "dirichlet_sweep")
        raise ConfigError(f"unknown command {args.command!r}")
    except (ConfigError, WindowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except TorscatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
