"""Rectangle with Dirichlet walls and a scatterer at position y.

Modes are sin(pi m t1) sin(pi n t2) on the normalized rectangle (0,1)^2,
indexed by the positive quadrant m, n >= 1, with the same squared-norm
bookkeeping as the torus.  Every sine product expands into four signed
exponentials on the doubled torus, so the torus moment engines apply
verbatim to the signed exponential form; rectangle means of even powers
equal doubled-torus means by odd reflection symmetry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .errors import PreconditionError, SingularEigenvalue
from .greens import CoefficientMap, SINGULAR_RTOL
from .lattice import (
    ClassTable,
    LatticeVector,
    NormClass,
    TorusGeometry,
    class_table,
    window_arrays,
)
from .moments import (
    DEFAULT_BRUTE_CAP,
    MomentReport,
    ValueDistribution,
    _distribution_from_values,
    report_from_map,
)
from .sieve import SieveParams, half_width


@dataclass(frozen=True)
class ScattererPosition:
    """Strictly interior scatterer position in normalized coordinates.

    ``generic`` asserts that both coordinates are irrational, which keeps
    all mode weights eventually bounded away from zero.
    """

    y1: float
    y2: float
    generic: bool = False

    def __post_init__(self):
        if not (0.0 < self.y1 < 1.0 and 0.0 < self.y2 < 1.0):
            raise ValueError("scatterer position must be strictly interior")

    def as_tuple(self) -> tuple[float, float]:
        return (self.y1, self.y2)


PositionLike = Union[ScattererPosition, tuple[float, float]]


def default_position() -> ScattererPosition:
    """Irrational default position (sqrt(2) - 1, sqrt(3) - 1)."""
    return ScattererPosition(math.sqrt(2.0) - 1.0, math.sqrt(3.0) - 1.0, generic=True)


def _coords(y: PositionLike) -> tuple[float, float]:
    if isinstance(y, ScattererPosition):
        return y.as_tuple()
    y1, y2 = float(y[0]), float(y[1])
    if not (0.0 <= y1 <= 1.0 and 0.0 <= y2 <= 1.0):
        raise PreconditionError("position must lie in the closed unit square")
    return y1, y2


def psi(geom: TorusGeometry, v: LatticeVector, x: PositionLike) -> float:
    """Dirichlet mode sin(pi m x1) sin(pi n x2); vanishes on the walls."""
    m, n = int(v[0]), int(v[1])
    if m < 1 or n < 1:
        raise PreconditionError("Dirichlet modes require m, n >= 1")
    x1, x2 = _coords(x)
    return math.sin(math.pi * m * x1) * math.sin(math.pi * n * x2)


@dataclass(frozen=True)
class DirichletCoefficientMap:
    """Quadrant-mode map: entries (m, n >= 1) with weights c_lam * psi(y)."""

    geom: TorusGeometry
    lam: float
    m: np.ndarray
    n: np.ndarray
    norms_sq: np.ndarray
    weight: np.ndarray
    y: tuple[float, float]
    half_width: float

    @property
    def entry_count(self) -> int:
        return len(self.weight)

    @property
    def max_index(self) -> int:
        if len(self.m) == 0:
            return 0
        return int(max(self.m.max(), self.n.max()))

    @property
    def degenerate(self) -> bool:
        """True when there is nothing to normalize (no modes or all weights 0)."""
        return self.entry_count == 0 or bool(np.all(self.weight == 0.0))

    def exponential_form(self) -> CoefficientMap:
        """Signed full-lattice form -(1/4) sgn(k1) sgn(k2) w at (+-m, +-n).

        The four signed exponentials reproduce each sine product exactly, so
        pointwise values and all even-power means agree with the quadrant
        form; torus moment engines consume this map directly.
        """
        ms, ns, cs, vs = [], [], [], []
        for s1 in (1, -1):
            for s2 in (1, -1):
                ms.append(s1 * self.m)
                ns.append(s2 * self.n)
                cs.append(-0.25 * s1 * s2 * self.weight)
                vs.append(self.norms_sq)
        m_arr = np.concatenate(ms)
        n_arr = np.concatenate(ns)
        c_arr = np.concatenate(cs)
        nsq = np.concatenate(vs)
        order = np.lexsort((n_arr, m_arr, nsq))
        return CoefficientMap(
            self.geom, self.lam, m_arr[order], n_arr[order], nsq[order],
            c_arr[order], "annulus", half_width=self.half_width,
        )


def coefficients_dirichlet(
    geom: TorusGeometry,
    lam: float,
    half_width: float,
    y: PositionLike,
    table: Optional[ClassTable] = None,
) -> DirichletCoefficientMap:
    """Quadrant-restricted annulus entries weighted by the mode value at y."""
    if half_width < 0:
        raise PreconditionError("half_width must be >= 0")
    lo = max(0.0, lam - half_width)
    hi = lam + half_width
    if table is not None and hi <= table.limit:
        sel = slice(
            np.searchsorted(table.key_value, lo, side="left"),
            np.searchsorted(table.key_value, hi, side="right"),
        )
        m_arr, n_arr, nsq = table.key_m[sel], table.key_n[sel], table.key_value[sel]
    else:
        m_all, n_all, nsq_all = window_arrays(geom, lo, hi)
        keep = (m_all > 0) & (n_all > 0)
        m_arr, n_arr, nsq = m_all[keep], n_all[keep], nsq_all[keep]
    quad = (m_arr >= 1) & (n_arr >= 1)
    m_arr, n_arr, nsq = m_arr[quad], n_arr[quad], nsq[quad]
    if len(nsq) > 0:
        tol = SINGULAR_RTOL * max(1.0, abs(lam))
        if float(np.min(np.abs(nsq - lam))) <= tol:
            raise SingularEigenvalue(f"lambda={lam!r} collides with a squared norm")
    y1, y2 = _coords(y)
    w = (
        (1.0 / (nsq - lam))
        * np.sin(np.pi * m_arr * y1)
        * np.sin(np.pi * n_arr * y2)
    )
    order = np.lexsort((n_arr, m_arr, nsq))
    return DirichletCoefficientMap(
        geom, float(lam), m_arr[order], n_arr[order], nsq[order], w[order],
        (y1, y2), float(half_width),
    )


def evaluate_rect(
    dmap: DirichletCoefficientMap, x1: np.ndarray, x2: np.ndarray
) -> np.ndarray:
    """Field values sum_v w sin(pi m x1) sin(pi n x2) on the product grid."""
    x1 = np.atleast_1d(np.asarray(x1, dtype=float))
    x2 = np.atleast_1d(np.asarray(x2, dtype=float))
    out = np.zeros((len(x1), len(x2)))
    for m, n, w in zip(dmap.m, dmap.n, dmap.weight):
        out += w * np.outer(np.sin(np.pi * m * x1), np.sin(np.pi * n * x2))
    return out


def evaluate_rect_exponential(
    dmap: DirichletCoefficientMap, x1: np.ndarray, x2: np.ndarray
) -> np.ndarray:
    """Cross-validation route: same field summed over the signed exponentials."""
    x1 = np.atleast_1d(np.asarray(x1, dtype=float))
    x2 = np.atleast_1d(np.asarray(x2, dtype=float))
    emap = dmap.exponential_form()
    out = np.zeros((len(x1), len(x2)))
    t1 = np.pi * x1[:, None]
    t2 = np.pi * x2[None, :]
    for m, n, c in zip(emap.m, emap.n, emap.c):
        out += c * np.cos(m * t1 + n * t2)
    return out


def r_weighted(geom: TorusGeometry, n_class: NormClass, y: PositionLike) -> float:
    """Position-weighted multiplicity: sum of psi(y)^2 over quadrant members.

    Always between 0 and the plain multiplicity; classes without a quadrant
    representative (an axis index of 0) weigh nothing.
    """
    y1, y2 = _coords(y)
    total = 0.0
    for m, n in n_class.members:
        if m >= 1 and n >= 1:
            total += (math.sin(math.pi * m * y1) * math.sin(math.pi * n * y2)) ** 2
    return total


@dataclass(frozen=True)
class BadPositionReport:
    flagged: np.ndarray
    count: int
    total: int
    fraction: float
    threshold: float


def bad_positions(
    geom: TorusGeometry,
    lambdas: Sequence[float],
    X: float,
    y: PositionLike,
    threshold_delta: float,
    table: Optional[ClassTable] = None,
) -> BadPositionReport:
    """Eigenvalues whose near window holds a mode with |psi(y)| < threshold.

    The near window of a gap (m_-, m) is [m_- - 3, m + 3]; the flagged
    count should scale roughly linearly in the threshold.
    """
    if threshold_delta < 0:
        raise PreconditionError("threshold must be >= 0")
    y1, y2 = _coords(y)
    lam = np.asarray([l for l in lambdas if 1.0 <= l <= X], dtype=float)
    if table is None:
        table = class_table(geom, X + 10.0)
    values = table.values
    # per distinct value, the smallest |psi(y)| over quadrant members
    min_psi = np.full(len(values), np.inf)
    km, kn, kv = table.key_m, table.key_n, table.key_value
    quad = (km >= 1) & (kn >= 1)
    psi_abs = np.abs(np.sin(np.pi * km * y1) * np.sin(np.pi * kn * y2))
    cls_idx = np.searchsorted(values, kv, side="right") - 1
    np.minimum.at(min_psi, cls_idx[quad], psi_abs[quad])
    flagged_class = min_psi < threshold_delta
    prefix = np.concatenate([[0], np.cumsum(flagged_class)])
    j = np.searchsorted(values, lam, side="left")  # index of the upper endpoint m
    lo_val = values[np.maximum(j - 1, 0)] - 3.0
    hi_val = values[np.minimum(j, len(values) - 1)] + 3.0
    lo_idx = np.searchsorted(values, lo_val, side="left")
    hi_idx = np.searchsorted(values, hi_val, side="right")
    hit = (prefix[hi_idx] - prefix[lo_idx]) > 0
    flagged = lam[hit]
    total = len(lam)
    return BadPositionReport(
        flagged, int(hit.sum()), total,
        float(hit.sum()) / total if total else 0.0, threshold_delta,
    )


def dirichlet_moment_report(
    geom: TorusGeometry,
    lam: float,
    params: SieveParams,
    y: PositionLike,
    table: Optional[ClassTable] = None,
    brute_cap: int = DEFAULT_BRUTE_CAP,
) -> MomentReport:
    """Moment report of the Dirichlet annulus map via its exponential form.

    Both closed-form variants act on the signed exponential coefficients,
    where the doubled-torus quadrature measure matches honest rectangle
    integrals; the degenerate all-zero case yields the empty sentinel.
    """
    dmap = coefficients_dirichlet(geom, lam, half_width(geom, lam, params.delta), y, table)
    if dmap.degenerate:
        nan = math.nan
        return MomentReport(float(lam), 0, True, 0.0, nan, nan, nan, nan, nan, nan, nan)
    return report_from_map(dmap.exponential_form(), brute_cap)


def r_weighted_min_in_annulus(
    geom: TorusGeometry,
    lam: float,
    params: SieveParams,
    y: PositionLike,
    table: Optional[ClassTable] = None,
) -> float:
    """Smallest weighted multiplicity among annulus classes (nan when empty)."""
    L = half_width(geom, lam, params.delta)
    y1, y2 = _coords(y)
    if table is not None and lam + L <= table.limit:
        s = np.searchsorted(table.key_value, lam - L, side="left")
        e = np.searchsorted(table.key_value, lam + L, side="right")
        km, kn = table.key_m[s:e], table.key_n[s:e]
    else:
        m_all, n_all, _ = window_arrays(geom, max(0.0, lam - L), lam + L)
        keep = (m_all >= 0) & (n_all >= 0)
        km, kn = m_all[keep], n_all[keep]
    if len(km) == 0:
        return math.nan
    quad = (km >= 1) & (kn >= 1)
    vals = (np.sin(np.pi * km[quad] * y1) * np.sin(np.pi * kn[quad] * y2)) ** 2
    if len(vals) == 0:
        return 0.0
    return float(vals.min())


def dirichlet_value_distribution(
    dmap: DirichletCoefficientMap, bins: int = 120
) -> ValueDistribution:
    """Value distribution of the normalized field sampled on the rectangle.

    Uses the midpoint rule with enough points for exact fourth-power
    integration (per-axis frequencies of f^4 stay below twice the grid
    count).  The mean is generally nonzero for Dirichlet fields.
    """
    if dmap.degenerate:
        raise PreconditionError("value distribution of a degenerate map is undefined")
    M = dmap.max_index
    N = 2 * M + 1
    x = (np.arange(N) + 0.5) / N
    G = evaluate_rect(dmap, x, x)
    emap = dmap.exponential_form()
    s2 = math.fsum((emap.c * emap.c).tolist())
    g = (G / math.sqrt(s2)).ravel()
    return _distribution_from_values(g, bins, check_mean=False, grid_n=N)
