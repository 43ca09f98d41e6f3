"""Unperturbed spectrum and interlacing sequences of new eigenvalues.

Any strictly increasing sequence with exactly one member in each gap of the
distinct unperturbed spectrum qualifies; the midpoint generator is the
simplest witness, the secular generator solves a renormalized resolvent
equation per gap, and external sequences can be loaded from CSV.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import NonBracketingError, ValidationError
from .lattice import ClassTable, NormClass, TorusGeometry, class_table

#: secular sums run over the spectrum up to this multiple of X, plus a tail integral
SECULAR_CUTOFF_FACTOR = 100.0

#: relative width of the bisection stopping interval
BISECTION_RTOL = 1e-12


def distinct_eigenvalues(geom: TorusGeometry, X: float) -> list[NormClass]:
    """The distinct unperturbed eigenvalues <= X, with multiplicities."""
    if not X > 0:
        raise ValueError("X must be positive")
    return class_table(geom, X).norm_classes()


@dataclass(frozen=True)
class InterlacingSequence:
    lambdas: np.ndarray
    generator: str
    geom: Optional[TorusGeometry] = None
    upper_bound: float = math.inf

    def __len__(self) -> int:
        return len(self.lambdas)


@dataclass(frozen=True)
class InterlacingCheck:
    ok: bool
    first_violation: Optional[int] = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


def verify_interlacing(lambdas: Sequence[float], N: Sequence[float]) -> InterlacingCheck:
    """Check strict interlacing against the distinct spectrum N.

    True iff the sequence is strictly increasing, collides with no element
    of N, and occupies every gap between its first and last point exactly
    once.  On failure the index of the first offending lambda is reported.
    """
    lam = np.asarray(lambdas, dtype=float)
    nn = np.asarray(N, dtype=float)
    if len(lam) == 0:
        return InterlacingCheck(True)
    if np.any(np.diff(lam) <= 0):
        i = int(np.flatnonzero(np.diff(lam) <= 0)[0]) + 1
        return InterlacingCheck(False, i, "sequence not strictly increasing")
    pos = np.searchsorted(nn, lam, side="left")
    hit = (pos < len(nn)) & (nn[np.minimum(pos, len(nn) - 1)] == lam)
    if np.any(hit):
        return InterlacingCheck(
            False, int(np.flatnonzero(hit)[0]), "collision with the unperturbed spectrum"
        )
    gap = pos - 1  # lambda lies in (n_gap, n_gap+1)
    if gap[0] < 0:
        return InterlacingCheck(False, 0, "lambda below the spectrum floor")
    if pos[-1] >= len(nn):
        return InterlacingCheck(False, len(lam) - 1, "lambda above the listed spectrum")
    dg = np.diff(gap)
    if np.any(dg == 0):
        return InterlacingCheck(False, int(np.flatnonzero(dg == 0)[0]) + 1, "two lambdas in one gap")
    if np.any(dg > 1):
        return InterlacingCheck(False, int(np.flatnonzero(dg > 1)[0]) + 1, "skipped gap inside the covered range")
    return InterlacingCheck(True)


def midpoint_interlacing(
    N: Sequence[float], geom: Optional[TorusGeometry] = None
) -> InterlacingSequence:
    """Arithmetic midpoints of consecutive distinct eigenvalues."""
    nn = np.asarray(N, dtype=float)
    if len(nn) < 2:
        raise ValueError("need at least two spectrum points")
    if np.any(np.diff(nn) <= 0):
        raise ValueError("spectrum must be strictly increasing")
    lam = 0.5 * (nn[:-1] + nn[1:])
    return InterlacingSequence(lam, "midpoint", geom, float(nn[-1]))


def _secular_value(
    lam: float,
    values: np.ndarray,
    mult: np.ndarray,
    coupling: float,
    scale: float,
    cutoff: float,
) -> float:
    terms = mult * (1.0 / (values - lam) - values / (values * values + scale * scale))
    tail = math.pi * math.log(math.sqrt(cutoff * cutoff + scale * scale) / (cutoff - lam))
    return float(np.sum(terms)) + tail - coupling


def secular_interlacing(
    geom: TorusGeometry,
    X: float,
    coupling: float,
    regularization_scale: float = 1.0,
    table: Optional[ClassTable] = None,
) -> InterlacingSequence:
    """Solve the renormalized resolvent equation on every gap up to X.

    On each gap the function sum_n r(n) (1/(n-lam) - n/(n^2+s^2)) increases
    from -inf to +inf, so bisection against the coupling constant always
    brackets; the spectrum sum is truncated at 100*X with an analytic
    integral tail for the remainder.
    """
    if not (X > 0 and math.isfinite(coupling)):
        raise ValueError("need X > 0 and finite coupling")
    cutoff = SECULAR_CUTOFF_FACTOR * X
    if table is None or table.limit < cutoff:
        table = class_table(geom, cutoff)
    values, mult = table.values, table.mult.astype(float)
    n_upper = np.searchsorted(values, X, side="right")
    roots = []
    for j in range(n_upper - 1):
        lo, hi = float(values[j]), float(values[j + 1])
        width = hi - lo
        off = width * 1e-9
        flo = _secular_value(lo + off, values, mult, coupling, regularization_scale, cutoff)
        fhi = _secular_value(hi - off, values, mult, coupling, regularization_scale, cutoff)
        shrink = 0
        while not (flo < 0.0 < fhi) and shrink < 6:
            off /= 16.0
            flo = _secular_value(lo + off, values, mult, coupling, regularization_scale, cutoff)
            fhi = _secular_value(hi - off, values, mult, coupling, regularization_scale, cutoff)
            shrink += 1
        if not (flo < 0.0 < fhi):
            raise NonBracketingError(
                f"secular function does not change sign on gap ({lo}, {hi}); "
                "cutoff too small or coupling out of range"
            )
        a, b = lo + off, hi - off
        while (b - a) > BISECTION_RTOL * max(1.0, abs(b)):
            mid = 0.5 * (a + b)
            if _secular_value(mid, values, mult, coupling, regularization_scale, cutoff) < 0.0:
                a = mid
            else:
                b = mid
        roots.append(0.5 * (a + b))
    return InterlacingSequence(np.asarray(roots), "secular", geom, float(X))


def load_interlacing_csv(
    path: str | Path, N: Sequence[float], geom: Optional[TorusGeometry] = None
) -> InterlacingSequence:
    """Load an external sequence (one ascending lambda per line) and verify it."""
    lam = []
    for ln, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            lam.append(float(line))
        except ValueError as exc:
            raise ValidationError(f"{path}:{ln}: not a number: {line!r}") from exc
    check = verify_interlacing(lam, N)
    if not check:
        raise ValidationError(
            f"{path}: sequence fails interlacing at index {check.first_violation}: {check.reason}"
        )
    nn = np.asarray(N, dtype=float)
    return InterlacingSequence(np.asarray(lam), "external", geom, float(nn[-1]))
