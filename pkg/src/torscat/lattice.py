"""Exact bookkeeping for the rectangular unimodular lattice Z(a,0) + Z(0,1/a).

A vector (m, n) embeds as (a*m, n/a), so its squared norm is
``a^2 m^2 + n^2 / a^2``.  For irrational a^4 two distinct keys (|m|,|n|)
can never share a squared norm, which lets the spectrum be grouped by
integer keys instead of float equality; rational test geometries (a = 1)
fall back to tolerance clustering.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal, localcontext
from typing import NamedTuple

import numpy as np

from .errors import NormCollisionError, WindowCapExceeded, WindowError

#: ceiling on points materialized by a single window enumeration
DEFAULT_POINT_CAP = 25_000_000

#: relative tolerance used to cluster norms of degenerate (rational a^4) geometries
CLUSTER_EPS = 1e-9

_NAMED_CONSTANTS = ("golden", "sqrt2")


def named_constant(name: str) -> float:
    """Evaluate a named a^4 constant in 50-digit precision, rounded once to double."""
    with localcontext() as ctx:
        ctx.prec = 50
        if name == "golden":
            return float((1 + Decimal(5).sqrt()) / 2)
        if name == "sqrt2":
            return float(Decimal(2).sqrt())
    raise ValueError(f"unknown geometry constant {name!r}; choose from {_NAMED_CONSTANTS}")


class LatticeVector(NamedTuple):
    m: int
    n: int

    def __neg__(self) -> "LatticeVector":
        return LatticeVector(-self.m, -self.n)


@dataclass(frozen=True)
class TorusGeometry:
    """Lattice parameter a and derived constants.

    ``generic`` is user-asserted metadata recording that a^4 is irrational
    (diophantine); it selects integer-key grouping of norms.  Rational test
    values such as a = 1 must be constructed with ``generic=False``.
    """

    a: float
    a_sq: float
    a_fourth: float
    min_aspect: float
    generic: bool
    label: str = ""

    def __post_init__(self):
        if not (self.a > 0 and math.isfinite(self.a)):
            raise ValueError("lattice parameter a must be positive and finite")

    @classmethod
    def from_a(cls, a: float, generic: bool = False, label: str = "") -> "TorusGeometry":
        a = float(a)
        a_sq = a * a
        return cls(a, a_sq, a_sq * a_sq, min(a, 1.0 / a), generic, label)

    @classmethod
    def from_a_fourth(cls, a4: float, generic: bool = False, label: str = "") -> "TorusGeometry":
        a4 = float(a4)
        if not (a4 > 0 and math.isfinite(a4)):
            raise ValueError("a^4 must be positive and finite")
        a_sq = math.sqrt(a4)
        a = math.sqrt(a_sq)
        return cls(a, a_sq, a4, min(a, 1.0 / a), generic, label)

    @classmethod
    def named(cls, name: str) -> "TorusGeometry":
        return cls.from_a_fourth(named_constant(name), generic=True, label=name)

    @classmethod
    def golden(cls) -> "TorusGeometry":
        """Default geometry: a^4 = (1+sqrt 5)/2, badly approximable."""
        return cls.named("golden")


def norm_sq(geom: TorusGeometry, v: LatticeVector) -> float:
    """Squared norm a^2 m^2 + n^2 / a^2 of the embedded vector."""
    return geom.a_sq * (v[0] * v[0]) + (v[1] * v[1]) / geom.a_sq


def inner(geom: TorusGeometry, v: LatticeVector, w: LatticeVector) -> float:
    """Euclidean pairing of two embedded vectors."""
    return geom.a_sq * (v[0] * w[0]) + (v[1] * w[1]) / geom.a_sq


def _check_window(lo: float, hi: float, cap: int) -> None:
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise WindowError("window bounds must be finite")
    if lo < 0:
        raise WindowError(f"window lower bound must be >= 0, got {lo}")
    if hi < lo:
        raise WindowError(f"window upper bound {hi} below lower bound {lo}")
    est = math.pi * (hi - lo) + 8.0 * math.sqrt(hi) + 16.0
    if est > cap:
        raise WindowCapExceeded(
            f"window [{lo}, {hi}] holds ~{est:.3g} points, above the cap {cap}"
        )


def window_arrays(
    geom: TorusGeometry, lo: float, hi: float, cap: int = DEFAULT_POINT_CAP
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """All lattice vectors with squared norm in the closed window [lo, hi].

    Returns parallel arrays (m, n, norm_sq) sorted by (norm_sq, m, n).  The
    scan is a row sweep over m with the n-range solved in closed form per
    row, then the exact window test; cost is O(window area).
    """
    _check_window(lo, hi, cap)
    a_sq = geom.a_sq
    mmax = math.ceil(math.sqrt(hi) / geom.a) if hi > 0 else 0
    ms, ns = [], []
    for m in range(-mmax, mmax + 1):
        rem_hi = hi - a_sq * (m * m)
        if rem_hi < 0:
            continue
        n_hi = math.floor(math.sqrt(rem_hi * a_sq)) + 1
        rem_lo = lo - a_sq * (m * m)
        if rem_lo > 0:
            n_lo = max(0, math.ceil(math.sqrt(rem_lo * a_sq)) - 1)
            n_row = np.concatenate(
                [np.arange(-n_hi, -n_lo + 1), np.arange(n_lo, n_hi + 1)]
            )
        else:
            n_row = np.arange(-n_hi, n_hi + 1)
        ms.append(np.full(n_row.shape, m, dtype=np.int64))
        ns.append(n_row.astype(np.int64))
    if not ms:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty.copy(), np.empty(0)
    m_arr = np.concatenate(ms)
    n_arr = np.concatenate(ns)
    nsq = a_sq * (m_arr * m_arr) + (n_arr * n_arr) / a_sq
    keep = (nsq >= lo) & (nsq <= hi)
    m_arr, n_arr, nsq = m_arr[keep], n_arr[keep], nsq[keep]
    order = np.lexsort((n_arr, m_arr, nsq))
    return m_arr[order], n_arr[order], nsq[order]


def enumerate_window(
    geom: TorusGeometry, lo: float, hi: float, cap: int = DEFAULT_POINT_CAP
) -> list[LatticeVector]:
    """Lattice vectors with norm_sq in [lo, hi], sorted by (norm_sq, m, n)."""
    m_arr, n_arr, _ = window_arrays(geom, lo, hi, cap)
    return [LatticeVector(int(m), int(n)) for m, n in zip(m_arr, n_arr)]


def count_in_unit_window(geom: TorusGeometry, k: int) -> int:
    """Number of lattice points with norm_sq in the half-open window [k, k+1)."""
    if k < 0:
        raise WindowError("k must be >= 0")
    _, _, nsq = window_arrays(geom, float(k), float(k + 1))
    return int(np.count_nonzero(nsq < k + 1))


def _sign_multiplicity(m: np.ndarray, n: np.ndarray) -> np.ndarray:
    return np.where(m == 0, 1, 2) * np.where(n == 0, 1, 2)


@dataclass(frozen=True)
class NormClass:
    """A distinct squared-norm value with its multiplicity.

    ``members`` lists the quadrant keys (|m|,|n|) sharing the value; for a
    generic geometry there is exactly one.
    """

    key: tuple[int, int]
    value: float
    multiplicity: int
    members: tuple[tuple[int, int], ...]


class ClassTable:
    """Sorted quadrant-key table of squared norms up to a limit.

    Rows are quadrant representatives (m >= 0, n >= 0) sorted by
    (value, m, n); ``class_start`` delimits tolerance clusters (trivial for
    generic geometries), giving the distinct spectrum with multiplicities.
    """

    def __init__(self, geom: TorusGeometry, limit: float, cap: int = DEFAULT_POINT_CAP):
        _check_window(0.0, limit, cap)
        self.geom = geom
        self.limit = float(limit)
        a_sq = geom.a_sq
        mmax = math.ceil(math.sqrt(limit) / geom.a) if limit > 0 else 0
        ms, ns = [], []
        for m in range(mmax + 1):
            rem = limit - a_sq * (m * m)
            if rem < 0:
                continue
            n_hi = math.floor(math.sqrt(rem * a_sq)) + 1
            n_row = np.arange(0, n_hi + 1, dtype=np.int64)
            ms.append(np.full(n_row.shape, m, dtype=np.int64))
            ns.append(n_row)
        m_arr = np.concatenate(ms)
        n_arr = np.concatenate(ns)
        val = a_sq * (m_arr * m_arr) + (n_arr * n_arr) / a_sq
        keep = val <= limit
        m_arr, n_arr, val = m_arr[keep], n_arr[keep], val[keep]
        order = np.lexsort((n_arr, m_arr, val))
        self.key_m = m_arr[order]
        self.key_n = n_arr[order]
        self.key_value = val[order]
        self.key_mult = _sign_multiplicity(self.key_m, self.key_n)
        self._class_start: Optional[np.ndarray] = None
        self._values: Optional[np.ndarray] = None
        self._mult: Optional[np.ndarray] = None

    def _cluster(self) -> None:
        """Group keys into distinct values; lazy because tails need keys only."""
        v = self.key_value
        if len(v) == 0:
            self._class_start = np.zeros(1, dtype=np.int64)
            self._values = np.empty(0)
            self._mult = np.empty(0, dtype=np.int64)
            return
        gap = np.diff(v)
        tol = CLUSTER_EPS * np.maximum(1.0, v[1:])
        new_class = gap > tol
        if self.geom.generic and not np.all(new_class):
            i = int(np.argmin(new_class))
            raise NormCollisionError(
                f"keys {(int(self.key_m[i]), int(self.key_n[i]))} and "
                f"{(int(self.key_m[i + 1]), int(self.key_n[i + 1]))} collide at "
                f"value {v[i]!r} under a geometry flagged generic"
            )
        starts = np.flatnonzero(np.concatenate([[True], new_class]))
        self._class_start = np.concatenate([starts, [len(v)]])
        self._values = v[starts]
        self._mult = np.add.reduceat(self.key_mult, starts)

    @property
    def class_start(self) -> np.ndarray:
        if self._class_start is None:
            self._cluster()
        return self._class_start

    @property
    def values(self) -> np.ndarray:
        if self._values is None:
            self._cluster()
        return self._values

    @property
    def mult(self) -> np.ndarray:
        if self._mult is None:
            self._cluster()
        return self._mult

    def __len__(self) -> int:
        return len(self.values)

    def window_points(
        self, lo: float, hi: float
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Sign-expanded lattice points with norm_sq in [lo, hi].

        Matches ``window_arrays`` output exactly (same values, same
        (norm_sq, m, n) order) but reads the precomputed table; requires
        hi <= limit.
        """
        if hi > self.limit:
            raise WindowError(f"window upper bound {hi} beyond table limit {self.limit}")
        if hi < lo:
            raise WindowError(f"window upper bound {hi} below lower bound {lo}")
        s = np.searchsorted(self.key_value, lo, side="left")
        e = np.searchsorted(self.key_value, hi, side="right")
        km, kn, kv = self.key_m[s:e], self.key_n[s:e], self.key_value[s:e]
        ms, ns, vs = [], [], []
        for sm in (1, -1):
            for sn in (1, -1):
                keep = np.ones(len(km), dtype=bool)
                if sm < 0:
                    keep &= km > 0
                if sn < 0:
                    keep &= kn > 0
                ms.append(sm * km[keep])
                ns.append(sn * kn[keep])
                vs.append(kv[keep])
        m_arr = np.concatenate(ms)
        n_arr = np.concatenate(ns)
        nsq = np.concatenate(vs)
        order = np.lexsort((n_arr, m_arr, nsq))
        return m_arr[order], n_arr[order], nsq[order]

    def norm_classes(self) -> list[NormClass]:
        out = []
        for i in range(len(self.values)):
            s, e = self.class_start[i], self.class_start[i + 1]
            members = tuple(
                (int(self.key_m[j]), int(self.key_n[j])) for j in range(s, e)
            )
            out.append(
                NormClass(
                    key=members[0],
                    value=float(self.key_value[s]),
                    multiplicity=int(self.mult[i]),
                    members=members,
                )
            )
        return out


def class_table(geom: TorusGeometry, limit: float, cap: int = DEFAULT_POINT_CAP) -> ClassTable:
    return ClassTable(geom, limit, cap)


def norm_classes(geom: TorusGeometry, X: float, cap: int = DEFAULT_POINT_CAP) -> list[NormClass]:
    """Distinct squared-norm values <= X with multiplicities, strictly increasing."""
    if X < 0:
        raise WindowError("X must be >= 0")
    return ClassTable(geom, X, cap).norm_classes()
