"""Truncated Green's-function coefficient maps and their L^2/L^4 machinery.

Coordinate convention: the torus is mapped to the standard square [0, 2pi)^2
by t1 = x1/a, t2 = a*x2, so the plane wave attached to v = (m, n) is
exp(i(m t1 + n t2)) with eigenvalue a^2 m^2 + n^2/a^2.  Integer frequencies
make exact quadrature of G^p a matter of picking a grid with no aliasing
collision among the p-fold frequency sums.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.fft as sfft

from .errors import CapExceededError, PreconditionError, SingularEigenvalue
from .lattice import (
    DEFAULT_POINT_CAP,
    ClassTable,
    LatticeVector,
    TorusGeometry,
    window_arrays,
)

#: relative closeness of lam to a norm value that counts as singular
SINGULAR_RTOL = 1e-12

#: grid cells above which evaluation switches from direct cosines to FFT
_FFT_SWITCH = 1 << 26

#: default ceiling on quadrature grid cells
DEFAULT_GRID_CAP = 1 << 27

#: pair-sum sets larger than this fall back to the 2pM+1 grid rule
_ADAPTIVE_PAIR_CAP = 2048


@dataclass(frozen=True)
class CoefficientMap:
    """Finite set of (vector, 1/(|v|^2 - lam)) pairs for one new eigenvalue."""

    geom: TorusGeometry
    lam: float
    m: np.ndarray
    n: np.ndarray
    norms_sq: np.ndarray
    c: np.ndarray
    truncation: str  # "annulus" | "disk" | "window"
    half_width: Optional[float] = None
    radius: Optional[float] = None

    @property
    def entry_count(self) -> int:
        return len(self.c)

    @property
    def max_index(self) -> int:
        if len(self.m) == 0:
            return 0
        return int(max(np.abs(self.m).max(), np.abs(self.n).max()))

    @property
    def entries(self) -> list[tuple[LatticeVector, float]]:
        return [
            (LatticeVector(int(mm), int(nn)), float(cc))
            for mm, nn, cc in zip(self.m, self.n, self.c)
        ]

    def abs_coeff_sum(self) -> float:
        return float(np.abs(self.c).sum())


def _check_not_singular(lam: float, nsq: np.ndarray) -> None:
    if len(nsq) == 0:
        return
    tol = SINGULAR_RTOL * max(1.0, abs(lam))
    closest = float(np.min(np.abs(nsq - lam)))
    if closest <= tol:
        raise SingularEigenvalue(
            f"lambda={lam!r} is within {closest!r} of a squared norm"
        )


def coefficients_annulus(
    geom: TorusGeometry,
    lam: float,
    half_width: float,
    table: Optional[ClassTable] = None,
    cap: int = DEFAULT_POINT_CAP,
) -> CoefficientMap:
    """Map truncated to the annulus |v|^2 in [lam - L, lam + L]."""
    if half_width < 0:
        raise PreconditionError("half_width must be >= 0")
    lo = max(0.0, lam - half_width)
    hi = lam + half_width
    if table is not None and hi <= table.limit:
        m_arr, n_arr, nsq = table.window_points(lo, hi)
    else:
        m_arr, n_arr, nsq = window_arrays(geom, lo, hi, cap)
    _check_not_singular(lam, nsq)
    return CoefficientMap(
        geom, float(lam), m_arr, n_arr, nsq, 1.0 / (nsq - lam), "annulus",
        half_width=float(half_width),
    )


def disk_radius(lam: float) -> float:
    """Default disk truncation radius 10 sqrt(lam)."""
    return 10.0 * math.sqrt(lam)


def coefficients_disk(
    geom: TorusGeometry,
    lam: float,
    cap: int = DEFAULT_POINT_CAP,
) -> CoefficientMap:
    """Map truncated to the disk |v| <= 10 sqrt(lam); entry count ~ 100 pi lam."""
    if lam < 1.0:
        raise PreconditionError("coefficients_disk requires lam >= 1")
    T = disk_radius(lam)
    m_arr, n_arr, nsq = window_arrays(geom, 0.0, T * T, cap)
    _check_not_singular(lam, nsq)
    return CoefficientMap(
        geom, float(lam), m_arr, n_arr, nsq, 1.0 / (nsq - lam), "disk", radius=T
    )


def custom_map(
    geom: TorusGeometry,
    lam: float,
    vectors: Sequence[tuple[int, int]],
    coeffs: Sequence[float],
    truncation: str = "window",
) -> CoefficientMap:
    """Synthetic map from explicit entries; must be closed under v -> -v."""
    if len(vectors) != len(coeffs):
        raise PreconditionError("vectors and coeffs must have equal length")
    cmap = {(int(m), int(n)): float(c) for (m, n), c in zip(vectors, coeffs)}
    if len(cmap) != len(vectors):
        raise PreconditionError("duplicate vectors in custom map")
    for (m, n), c in cmap.items():
        if cmap.get((-m, -n)) != c:
            raise PreconditionError("map must be symmetric: c(-v) = c(v)")
    m_arr = np.array([v[0] for v in cmap], dtype=np.int64)
    n_arr = np.array([v[1] for v in cmap], dtype=np.int64)
    c_arr = np.array(list(cmap.values()))
    nsq = geom.a_sq * (m_arr * m_arr) + (n_arr * n_arr) / geom.a_sq
    order = np.lexsort((n_arr, m_arr, nsq))
    return CoefficientMap(
        geom, float(lam), m_arr[order], n_arr[order], nsq[order], c_arr[order], truncation
    )


def l2_norm_sq(cmap: CoefficientMap) -> float:
    """Sum of squared coefficients, exactly-rounded compensated summation."""
    return math.fsum((cmap.c * cmap.c).tolist())


# ---------------------------------------------------------------------------
# grid selection and evaluation


def grid_size_for_power(cmap: CoefficientMap, p: int) -> int:
    """General sufficient grid size 2*p*M + 1 for exact integration of G^p."""
    return 2 * p * cmap.max_index + 1


def _pair_sums(m: np.ndarray, n: np.ndarray) -> np.ndarray:
    """Distinct two-fold frequency sums v_i + v_j as an (k, 2) int array."""
    sm = (m[:, None] + m[None, :]).ravel()
    sn = (n[:, None] + n[None, :]).ravel()
    return np.unique(np.column_stack([sm, sn]), axis=0)


def exact_grid_size(cmap: CoefficientMap, p: int) -> int:
    """Smallest verified aliasing-free grid size for integrating G^p.

    Checks candidate sizes N against the actual p-fold frequency sums of the
    map: the N-point rule is exact iff no nonzero sum is divisible by N in
    both coordinates.  Falls back to the 2*p*M + 1 bound when the pair-sum
    set is too large to check.
    """
    if p not in (2, 4):
        raise PreconditionError("only powers 2 and 4 are used")
    if cmap.entry_count == 0:
        return 1
    s2 = _pair_sums(cmap.m, cmap.n)
    if p == 2:
        sums = s2
    else:
        if len(s2) > _ADAPTIVE_PAIR_CAP:
            return grid_size_for_power(cmap, p)
        sums = np.unique(
            np.concatenate(
                [
                    (s2[:, None, 0] + s2[None, :, 0]).ravel()[:, None],
                    (s2[:, None, 1] + s2[None, :, 1]).ravel()[:, None],
                ],
                axis=1,
            ),
            axis=0,
        )
    nonzero = sums[(sums[:, 0] != 0) | (sums[:, 1] != 0)]
    if len(nonzero) == 0:
        return 1
    ceiling = grid_size_for_power(cmap, p)
    N = min(8, ceiling)
    while N < ceiling:
        if not np.any(((nonzero[:, 0] % N) == 0) & ((nonzero[:, 1] % N) == 0)):
            return N
        N += 1
    return ceiling


def evaluate_grid(cmap: CoefficientMap, grid_n: int) -> np.ndarray:
    """Field values sum_v c cos(m t1 + n t2) on the uniform grid_n^2 torus grid.

    Small maps are summed directly; large workloads go through an FFT
    synthesis of the identical trigonometric polynomial.  Output is real.
    """
    if grid_n < 1:
        raise PreconditionError("grid_n must be >= 1")
    N = int(grid_n)
    if cmap.entry_count == 0:
        return np.zeros((N, N))
    if cmap.entry_count * N * N <= _FFT_SWITCH:
        t = 2.0 * np.pi * np.arange(N) / N
        t1 = t[:, None]
        t2 = t[None, :]
        G = np.zeros((N, N))
        for mm, nn, cc in zip(cmap.m, cmap.n, cmap.c):
            G += cc * np.cos(mm * t1 + nn * t2)
        return G
    C = np.zeros((N, N), dtype=complex)
    np.add.at(C, (cmap.m % N, cmap.n % N), cmap.c)
    F = sfft.ifft2(C) * (N * N)
    imag_residue = float(np.abs(F.imag).max())
    if imag_residue > 1e-10 * cmap.abs_coeff_sum():
        raise AssertionError(
            f"imaginary residue {imag_residue} above tolerance for a symmetric map"
        )
    return np.ascontiguousarray(F.real)


def grid_mean_power(
    cmap: CoefficientMap,
    p: int,
    grid_n: Optional[int] = None,
    grid_cap: int = DEFAULT_GRID_CAP,
) -> float:
    """Exact grid mean of G^p on an aliasing-free grid.

    ``grid_n`` overrides the automatic choice and must then be at least the
    general bound 2*p*M + 1 (exactness is not monotone below it).
    """
    if grid_n is None:
        N = exact_grid_size(cmap, p)
    else:
        safe = grid_size_for_power(cmap, p)
        if grid_n < safe:
            raise PreconditionError(
                f"grid override {grid_n} below the sufficient bound {safe}"
            )
        N = int(grid_n)
    if N * N > grid_cap:
        raise CapExceededError(f"grid {N}x{N} exceeds the cap of {grid_cap} cells")
    G = evaluate_grid(cmap, N)
    return float(np.mean(G**p))


# ---------------------------------------------------------------------------
# large-map FFT quadrature (rectangular grids, used for disks and shells)


def _mean_sq_and_fourth_fft(
    m: np.ndarray, n: np.ndarray, c: np.ndarray, grid_cap: int = DEFAULT_GRID_CAP
) -> tuple[float, float]:
    """Exact grid means of f^2 and f^4 for f = sum c exp(i v t), +-symmetric c.

    Uses a rectangular grid with at least 4*M+2 points per axis (the fourth
    power has per-axis frequencies up to 4*M, so this rule is exact) and a
    hermitian inverse FFT, which keeps the synthesis real by construction.
    """
    if len(c) == 0:
        return 0.0, 0.0
    M1 = int(np.abs(m).max())
    M2 = int(np.abs(n).max())
    N1 = sfft.next_fast_len(4 * M1 + 2, real=True)
    N2 = sfft.next_fast_len(4 * M2 + 2, real=True)
    if N1 * N2 > grid_cap:
        raise CapExceededError(f"grid {N1}x{N2} exceeds the cap of {grid_cap} cells")
    H = np.zeros((N1, N2 // 2 + 1), dtype=complex)
    sel = n >= 0
    np.add.at(H, (m[sel] % N1, n[sel]), c[sel].astype(complex))
    f = sfft.irfft2(H, s=(N1, N2))
    del H
    f *= N1 * N2
    f *= f
    mean_sq = float(f.mean())
    f *= f
    mean_fourth = float(f.mean())
    return mean_sq, mean_fourth


# ---------------------------------------------------------------------------
# tail diagnostics


@dataclass(frozen=True)
class TailReport:
    window_sum: float
    integral_remainder: float

    @property
    def total(self) -> float:
        return self.window_sum + self.integral_remainder


def _quadrant_values(
    geom: TorusGeometry, limit: float, table: Optional[ClassTable], cap: int
) -> tuple[np.ndarray, np.ndarray]:
    if table is not None and table.limit >= limit:
        sel = table.key_value <= limit
        return table.key_value[sel], table.key_mult[sel].astype(float)
    t = ClassTable(geom, limit, cap)
    return t.key_value, t.key_mult.astype(float)


def l2_tail(
    geom: TorusGeometry,
    lam: float,
    half_width: float,
    table: Optional[ClassTable] = None,
    cap: int = DEFAULT_POINT_CAP,
) -> TailReport:
    """Squared L^2 distance between the full and annulus-truncated maps.

    Sums 1/(|v|^2 - lam)^2 over |v|^2 <= 100 lam with ||v|^2 - lam| > L
    exactly, and adds the integral estimate pi/(99 lam) for the rest.
    """
    if lam < 1.0:
        raise PreconditionError("l2_tail requires lam >= 1")
    limit = 100.0 * lam
    values, mult = _quadrant_values(geom, limit, table, cap)
    d = values - lam
    sel = np.abs(d) > half_width
    window_sum = float(np.sum(mult[sel] / (d[sel] * d[sel])))
    return TailReport(window_sum, math.pi / (99.0 * lam))


@dataclass(frozen=True)
class Tail43Report:
    upper_window: float
    upper_remainder: float
    lower_sum: float

    @property
    def upper_total(self) -> float:
        return self.upper_window + self.upper_remainder

    @property
    def total(self) -> float:
        return self.upper_total + self.lower_sum


def tail_exponent_43(
    geom: TorusGeometry,
    lam: float,
    half_width: float,
    table: Optional[ClassTable] = None,
    cap: int = DEFAULT_POINT_CAP,
) -> Tail43Report:
    """One-sided 4/3-power tail sums feeding the L^(-1/3) slope diagnostic.

    The upper sum runs over lam + L <= |v|^2 <= 2 lam exactly plus the
    integral remainder 3 pi lam^(-1/3); the lower sum over |v|^2 <= lam - L
    is finite and computed exactly.
    """
    if lam < 1.0:
        raise PreconditionError("tail_exponent_43 requires lam >= 1")
    values, mult = _quadrant_values(geom, 2.0 * lam, table, cap)
    d = values - lam
    up = d >= half_width
    down = d <= -half_width
    upper = float(np.sum(mult[up] * d[up] ** (-4.0 / 3.0)))
    lower = float(np.sum(mult[down] * (-d[down]) ** (-4.0 / 3.0)))
    return Tail43Report(upper, 3.0 * math.pi * lam ** (-1.0 / 3.0), lower)


# ---------------------------------------------------------------------------
# Cauchy rate of the disk truncation


@dataclass(frozen=True)
class CauchyRateReport:
    pairs: list[tuple[float, float]]  # (T_k, ||G^{2T_k} - G^{T_k}||_4)
    slope: float
    parseval_rel_errors: list[float]


def cauchy_l4_rate(
    geom: TorusGeometry,
    lam: float,
    dyadic_steps: int,
    cap: int = DEFAULT_POINT_CAP,
    grid_cap: int = DEFAULT_GRID_CAP,
) -> CauchyRateReport:
    """L^4 norms of dyadic shell differences of the disk truncation.

    For T_k = 2^k * 10 sqrt(lam), the difference of consecutive truncations
    is supported on the shell T_k <= |v| <= 2 T_k; its fourth moment is
    integrated exactly on an FFT grid.  The fitted log-log slope against
    T_k is reported (the expected rate is about -1/2).
    """
    if lam < 1.0 or dyadic_steps < 1:
        raise PreconditionError("need lam >= 1 and dyadic_steps >= 1")
    pairs: list[tuple[float, float]] = []
    parseval: list[float] = []
    for k in range(dyadic_steps):
        T = (2.0**k) * disk_radius(lam)
        m_arr, n_arr, nsq = window_arrays(geom, T * T, 4.0 * T * T, cap)
        c = 1.0 / (nsq - lam)
        mean_sq, mean_fourth = _mean_sq_and_fourth_fft(m_arr, n_arr, c, grid_cap)
        if len(c) > 0:
            ssum = math.fsum((c * c).tolist())
            parseval.append(abs(mean_sq - ssum) / ssum)
        else:
            parseval.append(0.0)
        pairs.append((T, mean_fourth**0.25))
    positive = [(T, v) for T, v in pairs if v > 0]
    if len(positive) >= 2:
        lx = np.log([p[0] for p in positive])
        ly = np.log([p[1] for p in positive])
        slope = float(np.polyfit(lx, ly, 1)[0])
    else:
        slope = math.nan
    return CauchyRateReport(pairs, slope, parseval)
