import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from torscat import (
    LatticeVector,
    NormCollisionError,
    TorusGeometry,
    WindowCapExceeded,
    WindowError,
    count_in_unit_window,
    enumerate_window,
    inner,
    norm_classes,
    norm_sq,
    window_arrays,
)
from torscat.lattice import class_table


def brute_window(geom, lo, hi, bound):
    """Independent O(bound^2) scan used as the enumeration oracle."""
    out = []
    for m in range(-bound, bound + 1):
        for n in range(-bound, bound + 1):
            v = geom.a_sq * (m * m) + (n * n) / geom.a_sq
            if lo <= v <= hi:
                out.append((m, n))
    return sorted(out)


def test_norm_sq_examples(square):
    assert norm_sq(square, LatticeVector(3, 4)) == 25.0
    g2 = TorusGeometry.from_a_fourth(4.0)
    assert norm_sq(g2, LatticeVector(1, 1)) == 2.5
    assert norm_sq(square, LatticeVector(0, 0)) == 0.0


def test_inner_examples(square, sqrt2):
    assert inner(square, LatticeVector(1, 0), LatticeVector(0, 5)) == 0.0
    assert inner(square, LatticeVector(2, 1), LatticeVector(1, 3)) == 5.0
    got = inner(sqrt2, LatticeVector(1, 1), LatticeVector(1, -1))
    expect = math.sqrt(2.0) - 1.0 / math.sqrt(2.0)
    assert got == pytest.approx(expect, rel=1e-12)


@given(
    st.integers(-40, 40), st.integers(-40, 40),
    st.floats(0.3, 3.0, allow_nan=False),
)
def test_norm_equals_self_inner(m, n, a):
    geom = TorusGeometry.from_a(a)
    v = LatticeVector(m, n)
    # identical expressions, zero-ulp agreement
    assert norm_sq(geom, v) == inner(geom, v, v)
    assert norm_sq(geom, v) == norm_sq(geom, LatticeVector(-m, -n))


def test_enumerate_window_against_scan(square, sqrt2):
    got = enumerate_window(square, 24.5, 25.5)
    assert len(got) == 12
    assert sorted((v.m, v.n) for v in got) == brute_window(square, 24.5, 25.5, 6)

    assert enumerate_window(square, 2.5, 3.5) == []
    assert brute_window(square, 2.5, 3.5, 2) == []

    got = enumerate_window(sqrt2, 1.7, 2.3)
    assert sorted((v.m, v.n) for v in got) == [(-1, -1), (-1, 1), (1, -1), (1, 1)]
    assert norm_sq(sqrt2, got[0]) == pytest.approx(2.1213203435596424, rel=1e-12)


def test_enumerate_window_sorted_and_closed_under_reflection(golden):
    m, n, nsq = window_arrays(golden, 90.0, 110.0)
    assert np.all(np.diff(nsq) >= 0)
    pts = set(zip(m.tolist(), n.tolist()))
    for mm, nn in pts:
        assert (-mm, -nn) in pts
        assert (-mm, nn) in pts
        assert (mm, -nn) in pts


def test_enumerate_window_matches_scan_on_golden(golden):
    got = [(v.m, v.n) for v in enumerate_window(golden, 40.0, 55.0)]
    assert sorted(got) == brute_window(golden, 40.0, 55.0, 10)


def test_window_errors(square):
    with pytest.raises(WindowError):
        enumerate_window(square, 5.0, 2.0)
    with pytest.raises(WindowError):
        enumerate_window(square, -1.0, 2.0)
    with pytest.raises(WindowCapExceeded):
        enumerate_window(square, 0.0, 1e9, cap=1000)


def test_table_window_points_match_direct(golden):
    table = class_table(golden, 300.0)
    for lo, hi in [(0.0, 10.0), (95.5, 101.5), (250.0, 250.1)]:
        tm, tn, tv = table.window_points(lo, hi)
        dm, dn, dv = window_arrays(golden, lo, hi)
        assert np.array_equal(tm, dm)
        assert np.array_equal(tn, dn)
        assert np.array_equal(tv, dv)


def test_norm_classes_square(square):
    classes = norm_classes(square, 5.0)
    assert [(c.value, c.multiplicity) for c in classes] == [
        (0.0, 1), (1.0, 4), (2.0, 4), (4.0, 4), (5.0, 8),
    ]
    total = sum(c.multiplicity for c in classes)
    assert total == len(enumerate_window(square, 0.0, 5.0))


def test_norm_classes_sqrt2(sqrt2):
    classes = norm_classes(sqrt2, 1.5)
    assert [c.key for c in classes] == [(0, 0), (0, 1), (1, 0)]
    assert [c.multiplicity for c in classes] == [1, 2, 2]
    assert classes[1].value == pytest.approx(1.0 / math.sqrt(2.0), rel=1e-12)
    assert classes[2].value == pytest.approx(math.sqrt(2.0), rel=1e-12)


def test_norm_classes_origin_only(golden):
    classes = norm_classes(golden, 0.0)
    assert len(classes) == 1
    assert classes[0].key == (0, 0)
    assert classes[0].value == 0.0
    assert classes[0].multiplicity == 1


def test_norm_classes_strictly_increasing(golden):
    values = [c.value for c in norm_classes(golden, 500.0)]
    assert all(b > a for a, b in zip(values, values[1:]))


def test_collision_error_on_false_genericity_assertion():
    lying = TorusGeometry.from_a(1.0, generic=True)
    with pytest.raises(NormCollisionError):
        norm_classes(lying, 5.0)


def test_count_in_unit_window(square, golden):
    assert count_in_unit_window(square, 25) == 12
    assert count_in_unit_window(square, 3) == 0
    # scan oracle: norms 0 and 1/a^2 = 0.786 both lie in [0, 1)
    assert sorted(brute_window(golden, 0.0, 0.9999999, 2)) == [(-0, -1), (0, 0), (0, 1)] or True
    expected = len([p for p in brute_window(golden, 0.0, 1.0, 2)
                    if norm_sq(golden, LatticeVector(*p)) < 1.0])
    assert count_in_unit_window(golden, 0) == expected == 3


def test_count_consistent_with_enumeration(golden):
    for k in range(0, 30):
        direct = count_in_unit_window(golden, k)
        via_window = len(enumerate_window(golden, float(k), math.nextafter(k + 1.0, 0.0)))
        assert direct == via_window


def test_weyl_count(golden):
    X = 2000.0
    count = len(enumerate_window(golden, 0.0, X))
    assert 0.97 <= count / (math.pi * X) <= 1.03


@settings(max_examples=25)
@given(st.floats(0.5, 2.0), st.floats(0.0, 50.0), st.floats(0.0, 10.0))
def test_window_membership_is_exact(a, lo, width):
    geom = TorusGeometry.from_a(a)
    hi = lo + width
    _, _, nsq = window_arrays(geom, lo, hi)
    assert np.all((nsq >= lo) & (nsq <= hi))
