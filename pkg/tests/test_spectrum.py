import math

import numpy as np
import pytest

from torscat import (
    ValidationError,
    distinct_eigenvalues,
    load_interlacing_csv,
    midpoint_interlacing,
    secular_interlacing,
    verify_interlacing,
)
from torscat.spectrum import SECULAR_CUTOFF_FACTOR, _secular_value
from torscat.lattice import class_table


def test_distinct_eigenvalues_examples(square, sqrt2, golden):
    assert [c.value for c in distinct_eigenvalues(square, 5.0)] == [0.0, 1.0, 2.0, 4.0, 5.0]
    vals = [c.value for c in distinct_eigenvalues(sqrt2, 1.5)]
    assert vals[0] == 0.0
    assert vals[1] == pytest.approx(0.70711, abs=1e-5)
    assert vals[2] == pytest.approx(1.41421, abs=1e-5)
    assert [c.value for c in distinct_eigenvalues(golden, 1e-9)] == [0.0]


def test_midpoint_examples():
    assert midpoint_interlacing([0.0, 1.0, 2.0, 4.0]).lambdas.tolist() == [0.5, 1.5, 3.0]
    seq = midpoint_interlacing([0.0, 0.70711, 1.41421])
    assert seq.lambdas == pytest.approx([0.353555, 1.06066], abs=1e-5)
    assert midpoint_interlacing([0.0, 1.0]).lambdas.tolist() == [0.5]


def test_midpoint_rejects_bad_input():
    with pytest.raises(ValueError):
        midpoint_interlacing([0.0])
    with pytest.raises(ValueError):
        midpoint_interlacing([0.0, 2.0, 1.0])


def test_midpoint_density(golden):
    N = np.array([c.value for c in distinct_eigenvalues(golden, 200.0)])
    seq = midpoint_interlacing(N)
    # one lambda per gap of distinct values
    assert len(seq) == len(N) - 1
    assert verify_interlacing(seq.lambdas, N)


def test_midpoint_scaling_invariance():
    N = np.array([0.0, 0.7861, 1.2720, 2.0581, 3.1446])
    base = midpoint_interlacing(N).lambdas
    doubled = midpoint_interlacing(2.0 * N).lambdas
    assert np.array_equal(doubled, 2.0 * base)  # power-of-two scale is exact
    scaled = midpoint_interlacing(1.7 * N).lambdas
    assert scaled == pytest.approx(1.7 * base, rel=1e-14)


def test_verify_interlacing_cases():
    N = [0.0, 1.0, 2.0]
    assert verify_interlacing([0.5, 1.5], N)
    check = verify_interlacing([0.5, 0.6], N)
    assert not check and check.first_violation == 1
    check = verify_interlacing([1.0], N)
    assert not check and "collision" in check.reason
    check = verify_interlacing([0.5, 2.5], [0.0, 1.0, 2.0, 3.0, 4.0])
    assert not check  # the gap (1, 2) was skipped
    assert verify_interlacing([], N)


def test_secular_roots_interlace_and_bracket(square):
    X = 50.0
    N = np.array([c.value for c in distinct_eigenvalues(square, X)])
    seq = secular_interlacing(square, X, coupling=0.0)
    assert verify_interlacing(seq.lambdas, N)
    assert len(seq.lambdas) == np.searchsorted(N, X, side="right") - 1
    # sign-change oracle around every root
    table = class_table(square, SECULAR_CUTOFF_FACTOR * X)
    values, mult = table.values, table.mult.astype(float)
    cutoff = SECULAR_CUTOFF_FACTOR * X
    for lam in seq.lambdas:
        eps = 1e-7 * max(1.0, lam)
        lo = _secular_value(lam - eps, values, mult, 0.0, 1.0, cutoff)
        hi = _secular_value(lam + eps, values, mult, 0.0, 1.0, cutoff)
        assert lo < 0.0 < hi
    mids = midpoint_interlacing(N).lambdas
    assert np.abs(seq.lambdas - mids).max() > 1e-6  # genuinely different generator


def test_secular_monotone_in_coupling(golden):
    a = secular_interlacing(golden, 30.0, coupling=0.0)
    b = secular_interlacing(golden, 30.0, coupling=1.5)
    assert np.all(b.lambdas > a.lambdas)


def test_secular_strong_coupling_limit(golden):
    N = np.array([c.value for c in distinct_eigenvalues(golden, 30.0)])
    seq = secular_interlacing(golden, 30.0, coupling=1e8)
    gaps = N[1 : len(seq.lambdas) + 1] - seq.lambdas
    assert np.all(gaps > 0.0)
    assert gaps.max() < 1e-4  # roots pushed against the right endpoints


def test_secular_first_gap_root_strictly_inside(golden):
    seq = secular_interlacing(golden, 10.0, coupling=0.0)
    n1 = distinct_eigenvalues(golden, 10.0)[1].value
    assert 0.0 < seq.lambdas[0] < n1


def test_secular_rejects_nonfinite_coupling(golden):
    with pytest.raises(ValueError):
        secular_interlacing(golden, 10.0, coupling=math.nan)


def test_csv_loader_roundtrip(tmp_path, square):
    N = [c.value for c in distinct_eigenvalues(square, 10.0)]
    good = tmp_path / "ok.csv"
    good.write_text("# external sequence\n0.5\n1.5\n3.0\n", encoding="utf-8")
    seq = load_interlacing_csv(good, N)
    assert seq.generator == "external"
    assert seq.lambdas.tolist() == [0.5, 1.5, 3.0]

    bad = tmp_path / "bad.csv"
    bad.write_text("0.5\n0.6\n", encoding="utf-8")
    with pytest.raises(ValidationError):
        load_interlacing_csv(bad, N)

    junk = tmp_path / "junk.csv"
    junk.write_text("0.5\nnot-a-number\n", encoding="utf-8")
    with pytest.raises(ValidationError):
        load_interlacing_csv(junk, N)
