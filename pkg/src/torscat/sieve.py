"""Diophantine sieve: classify new eigenvalues as good or bad.

A new eigenvalue is bad when its spectral annulus contains a lattice point
nearly orthogonal to some short nonzero lattice vector; good annuli have
well-spaced points and only trivial additive quadruples, which is what the
closed-form fourth moment relies on.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import InsufficientSampleError, PreconditionError
from .lattice import (
    ClassTable,
    LatticeVector,
    TorusGeometry,
    inner,
    norm_sq,
    window_arrays,
)

logger = logging.getLogger(__name__)

#: relative closeness to the sieve threshold that gets logged as marginal
MARGINAL_RTOL = 1e-9


@dataclass(frozen=True)
class SieveParams:
    """Sieve exponents delta < (2/3)(1/2 - theta), with theta < 1/2.

    delta0 = 1/2 - theta - (3/2) delta is the density-bound exponent: the
    bad set up to X should stay O(X^(1-delta0)).
    """

    delta: float = 0.1
    theta: float = 1.0 / 3.0

    def __post_init__(self):
        if not 0.0 < self.theta < 0.5:
            raise ValueError(f"theta must lie in (0, 1/2), got {self.theta}")
        ceiling = (2.0 / 3.0) * (0.5 - self.theta)
        if not 0.0 < self.delta < ceiling:
            raise ValueError(
                f"delta must lie in (0, {ceiling:.6g}) for theta={self.theta}, got {self.delta}"
            )

    @property
    def delta0(self) -> float:
        return 0.5 - self.theta - 1.5 * self.delta


@dataclass(frozen=True)
class Classification:
    lam: float
    good: bool
    witness: Optional[tuple[LatticeVector, LatticeVector]]  # (zeta, eta) when bad
    annulus_size: int


def half_width(geom: TorusGeometry, lam: float, delta: float) -> float:
    """Moment-annulus half width (1/20) min(a, 1/a) lam^(delta/2)."""
    if lam < 1.0:
        raise PreconditionError("half_width requires lam >= 1")
    return 0.05 * geom.min_aspect * lam ** (delta / 2.0)


def in_S_zeta(
    geom: TorusGeometry, eta: LatticeVector, zeta: LatticeVector, delta: float
) -> bool:
    """Near-orthogonality test |<eta, zeta>| <= (|eta|^2)^delta."""
    if zeta == (0, 0) or eta == (0, 0):
        raise PreconditionError("in_S_zeta requires nonzero eta and zeta")
    lhs = abs(inner(geom, eta, zeta))
    rhs = norm_sq(geom, eta) ** delta
    if abs(lhs - rhs) <= MARGINAL_RTOL * max(lhs, rhs):
        logger.debug(
            "marginal sieve comparison at eta=%s zeta=%s: |inner|=%r threshold=%r",
            tuple(eta), tuple(zeta), lhs, rhs,
        )
    return lhs <= rhs


def _point_list(m_arr: np.ndarray, n_arr: np.ndarray) -> list[LatticeVector]:
    return [LatticeVector(int(m), int(n)) for m, n in zip(m_arr, n_arr)]


def zeta_candidates(geom: TorusGeometry, lam: float, delta: float) -> list[LatticeVector]:
    """Nonzero lattice vectors with |zeta| < lam^(delta/2), in (norm, m, n) order."""
    w = lam**delta
    m_arr, n_arr, nsq = window_arrays(geom, 0.0, w)
    keep = (nsq < w) & ((m_arr != 0) | (n_arr != 0))
    return _point_list(m_arr[keep], n_arr[keep])


def _annulus(geom, lo, hi, table):
    if table is not None and hi <= table.limit:
        return table.window_points(lo, hi)
    return window_arrays(geom, lo, hi)


def classify(
    geom: TorusGeometry,
    lam: float,
    params: SieveParams,
    table: Optional[ClassTable] = None,
) -> Classification:
    """Exhaustive good/bad classification of one new eigenvalue.

    Scans every nonzero zeta below the cutoff and every annulus member eta
    in deterministic (norm, m, n) order; the first witnessing pair is
    recorded, so repeated runs agree bit for bit.
    """
    if lam < 1.0:
        raise PreconditionError("classify requires lam >= 1")
    w = lam**params.delta
    m_arr, n_arr, _ = _annulus(geom, lam - w, lam + w, table)
    keep = (m_arr != 0) | (n_arr != 0)
    etas = _point_list(m_arr[keep], n_arr[keep])
    size = len(etas)
    for zeta in zeta_candidates(geom, lam, params.delta):
        for eta in etas:
            if in_S_zeta(geom, eta, zeta, params.delta):
                return Classification(lam, False, (zeta, eta), size)
    return Classification(lam, True, None, size)


def classify_sweep(
    geom: TorusGeometry,
    lambdas: Sequence[float],
    params: SieveParams,
    table: Optional[ClassTable] = None,
) -> list[Classification]:
    """classify() applied to each lambda >= 1, sharing one class table."""
    return [classify(geom, float(l), params, table) for l in lambdas if l >= 1.0]


@dataclass(frozen=True)
class BadDensityReport:
    checkpoints: tuple[float, ...]
    bad_counts: tuple[int, ...]
    totals: tuple[int, ...]
    fitted_exponent: float
    ceiling: float


def bad_density(
    geom: TorusGeometry,
    lambdas: Sequence[float],
    X: float,
    params: SieveParams,
    table: Optional[ClassTable] = None,
    classifications: Optional[Sequence[Classification]] = None,
) -> BadDensityReport:
    """Bad-set counts at the dyadic checkpoints X/8 ... X with a slope fit.

    The fit is log(bad count) against log(checkpoint); an all-good sample
    reports -inf.  Counts are compared against the X^(1-delta0) ceiling by
    the caller.
    """
    lam = np.asarray([l for l in lambdas if 1.0 <= l <= X], dtype=float)
    if len(lam) < 100:
        raise InsufficientSampleError(f"need >= 100 eigenvalues in [1, X], got {len(lam)}")
    if classifications is None:
        classifications = classify_sweep(geom, lam, params, table)
    bad = np.asarray([not c.good for c in classifications])
    cls_lam = np.asarray([c.lam for c in classifications])
    checkpoints = tuple(X / f for f in (8.0, 4.0, 2.0, 1.0))
    bad_counts, totals = [], []
    for cp in checkpoints:
        sel = cls_lam <= cp
        bad_counts.append(int(np.count_nonzero(bad & sel)))
        totals.append(int(np.count_nonzero(sel)))
    pos = [(cp, bc) for cp, bc in zip(checkpoints, bad_counts) if bc > 0]
    if not pos:
        slope = -math.inf
    elif len(pos) == 1:
        slope = math.nan
    else:
        lx = np.log([p[0] for p in pos])
        ly = np.log([p[1] for p in pos])
        slope = float(np.polyfit(lx, ly, 1)[0])
    return BadDensityReport(
        checkpoints, tuple(bad_counts), tuple(totals), slope, 1.0 - params.delta0
    )


@dataclass(frozen=True)
class ZetaCountReport:
    zeta: LatticeVector
    count: int
    bound: float
    margin: float
    holds: bool


def bad_count_per_zeta(
    geom: TorusGeometry,
    lambdas: Sequence[float],
    zeta: LatticeVector,
    X: float,
    params: SieveParams,
    table: Optional[ClassTable] = None,
) -> ZetaCountReport:
    """Count lambdas <= X whose annulus meets S_zeta, against X^(1/2+theta+delta)/|zeta|."""
    if zeta == (0, 0):
        raise PreconditionError("zeta must be nonzero")
    count = 0
    for l in lambdas:
        lam = float(l)
        if lam < 1.0 or lam > X:
            continue
        w = lam**params.delta
        m_arr, n_arr, _ = _annulus(geom, lam - w, lam + w, table)
        hit = False
        for m, n in zip(m_arr, n_arr):
            if m == 0 and n == 0:
                continue
            if in_S_zeta(geom, LatticeVector(int(m), int(n)), zeta, params.delta):
                hit = True
                break
        count += hit
    bound = X ** (0.5 + params.theta + params.delta) / math.sqrt(norm_sq(geom, zeta))
    return ZetaCountReport(zeta, count, bound, bound - count, count <= bound)


def verify_spacing(
    geom: TorusGeometry,
    lam: float,
    params: SieveParams,
    table: Optional[ClassTable] = None,
) -> bool:
    """All pairs in the moment annulus are at distance >= lam^(delta/2)."""
    L = half_width(geom, lam, params.delta)
    m_arr, n_arr, _ = _annulus(geom, lam - L, lam + L, table)
    if len(m_arr) <= 1:
        return True
    x = geom.a * m_arr
    y = n_arr / geom.a
    dx = x[:, None] - x[None, :]
    dy = y[:, None] - y[None, :]
    dist_sq = dx * dx + dy * dy
    np.fill_diagonal(dist_sq, np.inf)
    return bool(dist_sq.min() >= lam**params.delta)


def trivial_solutions_only(points: Sequence[tuple[int, int]]) -> bool:
    """Check that x1 - y1 = y2 - x2 within the point set has only trivial solutions.

    For every nonzero difference beta, the ordered pairs (x, y) with
    y - x = beta must be exactly a pair {(x, y), (-y, -x)}, or a single
    self-paired (x, -x).
    """
    pts = [(int(m), int(n)) for m, n in points]
    groups: dict[tuple[int, int], list[tuple[tuple[int, int], tuple[int, int]]]] = {}
    for x in pts:
        for y in pts:
            if x == y:
                continue
            beta = (y[0] - x[0], y[1] - x[1])
            groups.setdefault(beta, []).append((x, y))
    for pairs in groups.values():
        if len(pairs) == 1:
            (x, y) = pairs[0]
            if y != (-x[0], -x[1]):
                return False
        elif len(pairs) == 2:
            (x1, y1), (x2, y2) = pairs
            if not (x2 == (-y1[0], -y1[1]) and y2 == (-x1[0], -x1[1])):
                return False
        else:
            return False
    return True


def trivial_solutions_check(
    geom: TorusGeometry,
    lam: float,
    params: SieveParams,
    table: Optional[ClassTable] = None,
) -> bool:
    """Trivial-solutions property of the moment annulus of lam."""
    L = half_width(geom, lam, params.delta)
    m_arr, n_arr, _ = _annulus(geom, lam - L, lam + L, table)
    return trivial_solutions_only(list(zip(m_arr.tolist(), n_arr.tolist())))
