"""Sweep orchestration and deterministic CSV/JSON emission.

Rows are emitted in eigenvalue order with floats printed as their shortest
round-trip decimals, so identical configurations produce byte-identical
outputs; every row is re-derivable by calling the library operations with
the row's lambda and the run parameters.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .config import RunConfig
from .dirichlet import (
    dirichlet_moment_report,
    dirichlet_value_distribution,
    coefficients_dirichlet,
    r_weighted_min_in_annulus,
)
from .errors import TorscatError, ValidationError
from .greens import coefficients_annulus
from .lattice import ClassTable, class_table
from .moments import (
    SPECTRUM_BUFFER,
    FilterResult,
    MomentReport,
    normalized_fourth_moment,
    report_from_map,
    subsequence_filter,
    value_distribution,
)
from .sieve import Classification, classify, half_width
from .spectrum import (
    InterlacingSequence,
    load_interlacing_csv,
    midpoint_interlacing,
    secular_interlacing,
    verify_interlacing,
)

logger = logging.getLogger(__name__)


def fmt(value) -> str:
    """Shortest round-trip decimal for floats; plain text otherwise."""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")


def _json_safe(obj):
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return None if math.isnan(v) or math.isinf(v) else v
    if isinstance(obj, np.ndarray):
        return [_json_safe(v) for v in obj.tolist()]
    return obj


def write_json(path: Path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_json_safe(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# sequence construction


def build_sequence(
    config: RunConfig, geom, table: ClassTable
) -> tuple[np.ndarray, np.ndarray, InterlacingSequence]:
    """Distinct spectrum up to x_max and the configured interlacing sequence."""
    upper = int(np.searchsorted(table.values, config.x_max, side="right"))
    norms = table.values[:upper]
    mult = table.mult[:upper]
    if len(norms) < 2:
        raise ValidationError("x_max admits fewer than two distinct eigenvalues")
    if config.generator == "midpoint":
        seq = midpoint_interlacing(norms, geom)
    elif config.generator == "secular":
        seq = secular_interlacing(
            geom, float(config.x_max), config.coupling, config.regularization_scale
        )
    else:
        seq = load_interlacing_csv(config.generator, norms, geom)
    check = verify_interlacing(seq.lambdas, norms)
    if not check:
        raise ValidationError(
            f"generated sequence fails interlacing at index {check.first_violation}: {check.reason}"
        )
    return norms, mult, seq


# ---------------------------------------------------------------------------
# the sweep


@dataclass(frozen=True)
class SweepRow:
    lam: float
    good: bool
    annulus_size: int
    l2_sq: float
    l4_brute: float
    l4_corrected: float
    l4_paper: float
    l4_quadrature: float
    peak_ratio: float
    normalized_fourth: float
    in_filter: bool
    r_weighted_min: float = math.nan  # dirichlet sweeps only


@dataclass
class SweepResult:
    config: RunConfig
    lambdas: np.ndarray
    classifications: list[Classification]
    reports: list[MomentReport]
    filter_result: FilterResult
    rows: list[SweepRow]
    summary: dict


_HIST_BINS = np.linspace(1.0, 3.0, 41)


def _moment_histogram(values: np.ndarray) -> dict:
    counts, edges = np.histogram(values, bins=_HIST_BINS)
    return {
        "bin_lo": edges[:-1].tolist(),
        "bin_hi": edges[1:].tolist(),
        "count": counts.tolist(),
    }


def run_sweep(config: RunConfig) -> SweepResult:
    """Classify, build moment reports, and filter every lambda up to x_max."""
    geom = config.geometry()
    params = config.sieve_params()
    dirichlet = config.boundary == "dirichlet"
    y = (config.y1, config.y2) if dirichlet else None
    table = class_table(geom, config.x_max + SPECTRUM_BUFFER, config.point_cap)
    _, _, seq = build_sequence(config, geom, table)
    lam = np.asarray([l for l in seq.lambdas if 1.0 <= l <= config.x_max])
    skipped = len(seq.lambdas) - len(lam)
    if skipped:
        logger.info("skipping %d lambdas below 1", skipped)

    classifications: list[Classification] = []
    reports: list[MomentReport] = []
    r_w_min: list[float] = []
    for l in lam:
        l = float(l)
        cls = classify(geom, l, params, table)
        classifications.append(cls)
        try:
            if dirichlet:
                rep = dirichlet_moment_report(geom, l, params, y, table, config.brute_cap)
                r_w_min.append(r_weighted_min_in_annulus(geom, l, params, y, table))
            else:
                rep = normalized_fourth_moment(geom, l, params, table, config.brute_cap)
                r_w_min.append(math.nan)
        except TorscatError as exc:
            logger.warning("lambda=%r: %s", l, exc)
            nan = math.nan
            rep = MomentReport(l, 0, True, nan, nan, nan, nan, nan, nan, nan, nan)
            r_w_min.append(math.nan)
        reports.append(rep)

    filt = subsequence_filter(geom, lam, config.x_max, config.epsilon, table)
    rows = [
        SweepRow(
            lam=rep.lam,
            good=cls.good,
            annulus_size=rep.annulus_size,
            l2_sq=rep.l2_sq,
            l4_brute=rep.l4_brute,
            l4_corrected=rep.l4_corrected,
            l4_paper=rep.l4_paper,
            l4_quadrature=rep.l4_quadrature,
            peak_ratio=rep.peak_ratio,
            normalized_fourth=rep.normalized_fourth,
            in_filter=bool(f),
            r_weighted_min=rw,
        )
        for cls, rep, f, rw in zip(classifications, reports, filt.mask, r_w_min)
    ]

    good = np.asarray([c.good for c in classifications])
    nonempty = np.asarray([not r.empty for r in reports])
    sel = filt.mask & good & nonempty
    norm4 = np.asarray([r.normalized_fourth for r in reports])
    peak = np.asarray([r.peak_ratio for r in reports])
    c_eps = float(np.min(peak[sel])) if np.any(sel) else math.nan
    max_n4 = float(np.max(norm4[sel])) if np.any(sel) else math.nan
    min_n4 = float(np.min(norm4[sel])) if np.any(sel) else math.nan
    summary = {
        "boundary": config.boundary,
        "a4": config.a4,
        "delta": config.delta,
        "theta": config.theta,
        "epsilon": config.epsilon,
        "x_max": config.x_max,
        "generator": config.generator,
        "lambda_count": int(len(lam)),
        "good_count": int(good.sum()),
        "good_fraction": float(good.mean()) if len(good) else math.nan,
        "filtered_count": int(filt.mask.sum()),
        "filtered_fraction": filt.fraction,
        "filter_thresholds": {
            "near_count_E": filt.thresholds[0],
            "tail_F": filt.thresholds[1],
            "gap_G": filt.thresholds[2],
        },
        "nonempty_annuli": int(nonempty.sum()),
        "filter_good_nonempty_count": int(sel.sum()),
        "c_epsilon_empirical": c_eps,
        "max_normalized_fourth_on_filter": max_n4,
        "min_normalized_fourth_on_filter": min_n4,
        "gaussian_fourth_moment": 3.0,
        "margin_below_gaussian": 3.0 - max_n4 if not math.isnan(max_n4) else math.nan,
        "normalized_fourth_histogram": _moment_histogram(norm4[sel]),
    }
    if dirichlet:
        summary["y1"] = config.y1
        summary["y2"] = config.y2
    return SweepResult(config, lam, classifications, reports, filt, rows, summary)


_SWEEP_HEADER = [
    "lambda", "good", "annulus_size", "l2_sq", "l4_brute", "l4_corrected",
    "l4_paper", "l4_quadrature", "peak_ratio", "normalized_fourth", "in_filter",
]


def write_sweep_csv(result: SweepResult, path: Path) -> None:
    dirichlet = result.config.boundary == "dirichlet"
    header = list(_SWEEP_HEADER) + (["y1", "y2", "r_weighted_min"] if dirichlet else [])
    rows = []
    for r in result.rows:
        row = [
            r.lam, r.good, r.annulus_size, r.l2_sq, r.l4_brute, r.l4_corrected,
            r.l4_paper, r.l4_quadrature, r.peak_ratio, r.normalized_fourth, r.in_filter,
        ]
        if dirichlet:
            row += [result.config.y1, result.config.y2, r.r_weighted_min]
        rows.append(row)
    write_csv(path, header, rows)


def write_classification_csv(classifications: Sequence[Classification], path: Path) -> None:
    header = [
        "lambda", "good", "witness_zeta_m", "witness_zeta_n",
        "witness_eta_m", "witness_eta_n", "annulus_size",
    ]
    rows = []
    for c in classifications:
        if c.witness is None:
            w = ["", "", "", ""]
        else:
            zeta, eta = c.witness
            w = [zeta.m, zeta.n, eta.m, eta.n]
        rows.append([c.lam, c.good, *w, c.annulus_size])
    write_csv(path, header, rows)


def write_spectrum_csv(
    norms: np.ndarray, mult: np.ndarray, seq: InterlacingSequence, path: Path
) -> None:
    header = ["j", "n_j", "r", "lambda_j", "generator"]
    rows = [
        [j, float(norms[j]), int(mult[j]), float(seq.lambdas[j]), seq.generator]
        for j in range(len(seq.lambdas))
    ]
    write_csv(path, header, rows)


def write_histogram_csv(dist, path: Path) -> None:
    header = ["bin_lo", "bin_hi", "mass"]
    rows = [
        [float(lo), float(hi), float(mass)]
        for lo, hi, mass in zip(dist.bin_lo, dist.bin_hi, dist.mass)
    ]
    write_csv(path, header, rows)


def distribution_for_lambda(config: RunConfig, lam: float):
    """Value distribution of the annulus field at one eigenvalue."""
    geom = config.geometry()
    params = config.sieve_params()
    if config.boundary == "dirichlet":
        dmap = coefficients_dirichlet(
            geom, lam, half_width(geom, lam, params.delta), (config.y1, config.y2)
        )
        if dmap.degenerate:
            raise ValidationError(f"lambda={lam!r} has a degenerate Dirichlet annulus map")
        dist = dirichlet_value_distribution(dmap, config.bins)
        l2 = float(math.fsum((dmap.exponential_form().c ** 2).tolist()))
        size = dmap.entry_count
    else:
        cmap = coefficients_annulus(geom, lam, half_width(geom, lam, params.delta))
        if cmap.entry_count == 0:
            raise ValidationError(f"lambda={lam!r} has an empty annulus")
        dist = value_distribution(cmap, config.bins)
        l2 = float(math.fsum((cmap.c ** 2).tolist()))
        size = cmap.entry_count
    stats = {
        "lambda": lam,
        "boundary": config.boundary,
        "annulus_size": size,
        "l2_sq": l2,
        "m1": dist.m1,
        "m2": dist.m2,
        "m3": dist.m3,
        "m4": dist.m4,
        "kolmogorov_distance": dist.kolmogorov,
        "grid_n": dist.grid_n,
        "gaussian_moments": [0.0, 1.0, 0.0, 3.0],
    }
    return dist, stats
