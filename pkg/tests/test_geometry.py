import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from swarmsim import geometry
from swarmsim.exceptions import ContractViolation, DegenerateConfiguration
from swarmsim.geometry import (Circle, LocalFrame, angle_at, banded_compare,
                               centroid, distance, from_local,
                               geometric_median, interior_angles, midpoint,
                               smallest_enclosing_circle, sum_of_distances,
                               to_local)

coords = st.floats(min_value=-100.0, max_value=100.0,
                   allow_nan=False, allow_infinity=False)
points = st.tuples(coords, coords)


def test_distance_pythagorean():
    assert distance((0.0, 0.0), (3.0, 4.0)) == 5.0


def test_distance_identical_points():
    assert distance((1.0, 1.0), (1.0, 1.0)) == 0.0


def test_distance_unit_pair():
    assert distance((-0.5, 0.0), (0.5, 0.0)) == 1.0


def test_midpoint_symmetry():
    assert midpoint((0.0, 0.0), (2.0, 0.0)) == (1.0, 0.0)


def test_midpoint_identity():
    assert midpoint((1.5, -2.5), (1.5, -2.5)) == (1.5, -2.5)


def test_midpoint_adjacent_floats_rounds_to_endpoint():
    # For adjacent floats the midpoint rounds to one of the endpoints;
    # callers must tolerate midpoint(a, b) == a.
    a = 1.0 + 2 ** -52
    b = math.nextafter(a, math.inf)
    m = midpoint((a, 0.0), (b, 0.0))
    assert m[0] in (a, b)


def test_centroid_triangle():
    c = centroid([(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)])
    assert c == pytest.approx((1 / 3, 1 / 3))


def test_centroid_single_point():
    assert centroid([(2.0, 7.0)]) == (2.0, 7.0)


def test_centroid_square():
    assert centroid([(0.0, 0.0), (2.0, 0.0), (0.0, 2.0), (2.0, 2.0)]) == (1.0, 1.0)


def test_centroid_empty_raises():
    with pytest.raises(ContractViolation):
        centroid([])


def test_interior_angles_right_isoceles():
    a = interior_angles((0.0, 0.0), (1.0, 0.0), (0.0, 1.0))
    assert a == pytest.approx((math.pi / 2, math.pi / 4, math.pi / 4))


def test_interior_angles_equilateral():
    pts = [(0.0, 0.0), (1.0, 0.0), (0.5, math.sqrt(3) / 2)]
    a = interior_angles(*pts)
    assert a == pytest.approx((math.pi / 3,) * 3)


def test_interior_angles_tall_isoceles():
    a = interior_angles((-0.5, 0.0), (0.5, 0.0), (0.0, 2.0))
    assert a[0] == pytest.approx(1.3258, abs=1e-4)
    assert a[1] == pytest.approx(1.3258, abs=1e-4)
    assert a[2] == pytest.approx(0.4900, abs=1e-4)


def test_interior_angles_coincident_raises():
    with pytest.raises(DegenerateConfiguration):
        interior_angles((0.0, 0.0), (0.0, 0.0), (1.0, 1.0))


def test_interior_angles_collinear_raises():
    with pytest.raises(DegenerateConfiguration):
        interior_angles((0.0, 0.0), (1.0, 0.0), (2.0, 0.0))


def test_angle_at_chirality_free():
    # an angle and its mirror image are indistinguishable
    up = angle_at((0.0, 0.0), (1.0, 0.0), (1.0, 1.0))
    down = angle_at((0.0, 0.0), (1.0, 0.0), (1.0, -1.0))
    assert up == down


@given(st.lists(points, min_size=3, max_size=3, unique=True))
@settings(max_examples=300)
def test_angle_sum_property(pts):
    try:
        angles = interior_angles(*pts)
    except DegenerateConfiguration:
        return
    assert math.fsum(angles) == pytest.approx(math.pi, abs=1e-9)


# --- smallest enclosing circle ----------------------------------------------


def brute_force_sec(pts):
    """Minimal circle through some pair or triple that contains all points."""
    best = None
    n = len(pts)
    if n == 1:
        return Circle(pts[0], 0.0)
    candidates = []
    for i in range(n):
        for j in range(i + 1, n):
            candidates.append(geometry._circle_two(pts[i], pts[j]))
            for k in range(j + 1, n):
                cc = geometry._circumcircle(pts[i], pts[j], pts[k])
                if cc is not None:
                    candidates.append(cc)
    for c in candidates:
        if all(distance(c.center, p) <= c.radius * (1 + 1e-12) + 1e-12 for p in pts):
            if best is None or c.radius < best.radius:
                best = c
    return best


def test_sec_unit_circle_points():
    c = smallest_enclosing_circle([(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0)])
    assert c.center == pytest.approx((0.0, 0.0), abs=1e-12)
    assert c.radius == pytest.approx(1.0, abs=1e-12)


def test_sec_diametral_pair():
    c = smallest_enclosing_circle([(0.0, 0.0), (2.0, 0.0)])
    assert c.center == (1.0, 0.0)
    assert c.radius == 1.0


def test_sec_single_point():
    c = smallest_enclosing_circle([(3.0, 4.0)])
    assert c.center == (3.0, 4.0) and c.radius == 0.0


def test_sec_empty_raises():
    with pytest.raises(ContractViolation):
        smallest_enclosing_circle([])


def test_sec_matches_brute_force_random():
    rng = random.Random(20240817)
    for _ in range(300):
        pts = [(rng.uniform(-10, 10), rng.uniform(-10, 10))
               for _ in range(rng.randint(2, 8))]
        got = smallest_enclosing_circle(pts)
        want = brute_force_sec(pts)
        assert got.radius == pytest.approx(want.radius, abs=1e-9)
        assert distance(got.center, want.center) < 1e-9
        assert all(got.contains(p) for p in pts)


# --- geometric median -------------------------------------------------------


def test_median_square_center():
    m = geometric_median([(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)])
    assert m == pytest.approx((0.5, 0.5), abs=1e-9)


def test_median_equilateral_is_centroid():
    pts = [(0.0, 0.0), (1.0, 0.0), (0.5, math.sqrt(3) / 2)]
    m = geometric_median(pts)
    assert m == pytest.approx(centroid(pts), abs=1e-9)


def test_median_collinear_picks_middle_point():
    # 1-D median of three collinear points is the middle one
    assert geometric_median([(0.0, 0.0), (1.0, 0.0), (10.0, 0.0)]) == (1.0, 0.0)


def test_median_bad_tolerance_raises():
    with pytest.raises(ContractViolation):
        geometric_median([(0.0, 0.0)], tolerance=0.0)


def test_median_dominates_centroid_random():
    rng = random.Random(7)
    for _ in range(200):
        n = rng.randint(3, 10)
        pts = [(rng.uniform(-5, 5), rng.uniform(-5, 5)) for _ in range(n)]
        m = geometric_median(pts, tolerance=1e-10)
        assert sum_of_distances(m, pts) <= sum_of_distances(centroid(pts), pts) + 1e-8


# --- banded comparisons -----------------------------------------------------


def test_banded_closed_closed_widens():
    # [A,B] -> [A-band, B+band]
    assert banded_compare(0.0, 0.0, 0.0, 1e-6)
    assert banded_compare(1e-6, 0.0, 0.0, 1e-6)
    assert banded_compare(-1e-6, 0.0, 0.0, 1e-6)
    assert not banded_compare(1.1e-6, 0.0, 0.0, 1e-6)


def test_banded_zero_band_is_plain_membership():
    assert banded_compare(0.5, 0.0, 1.0, 0.0)
    assert banded_compare(1.0, 0.0, 1.0, 0.0)
    assert not banded_compare(1.0000001, 0.0, 1.0, 0.0)


def test_banded_closed_open_shifts_down():
    # [A,B[ -> [A-band, B-band[ so value B itself is excluded
    assert not banded_compare(1.0, 0.0, 1.0, 1e-6, hi_closed=False)
    assert banded_compare(1.0 - 2e-6, 0.0, 1.0, 1e-6, hi_closed=False)
    assert banded_compare(-1e-6, 0.0, 1.0, 1e-6, hi_closed=False)


def test_banded_open_closed_shifts_up():
    # ]A,B] -> ]A+band, B+band]
    assert not banded_compare(0.0, 0.0, 1.0, 1e-6, lo_closed=False)
    assert banded_compare(2e-6, 0.0, 1.0, 1e-6, lo_closed=False)
    assert banded_compare(1.0 + 1e-6, 0.0, 1.0, 1e-6, lo_closed=False)


def test_banded_open_open_shifts_inward():
    # ]A,B[ -> ]A+band, B-band[
    assert not banded_compare(1e-6, 0.0, 1.0, 1e-6,
                              lo_closed=False, hi_closed=False)
    assert banded_compare(0.5, 0.0, 1.0, 1e-6,
                          lo_closed=False, hi_closed=False)
    assert not banded_compare(1.0 - 1e-6, 0.0, 1.0, 1e-6,
                              lo_closed=False, hi_closed=False)


def test_banded_invalid_interval_raises():
    with pytest.raises(ContractViolation):
        banded_compare(0.0, 1.0, 0.0)


# --- local frames -----------------------------------------------------------


def test_identity_frame_is_noop():
    f = LocalFrame()
    assert to_local(f, (3.5, -1.25)) == (3.5, -1.25)
    assert from_local(f, (3.5, -1.25)) == (3.5, -1.25)


def test_quarter_turn_rotation():
    f = LocalFrame(rotation=math.pi / 2)
    assert to_local(f, (1.0, 0.0)) == (0.0, -1.0)


def test_quarter_turn_roundtrip_is_bit_exact():
    rng = random.Random(5)
    for rot in geometry.QUARTER_TURNS:
        for reflect in (False, True):
            f = LocalFrame(rotation=rot, reflect=reflect,
                           origin=(0.0, 0.0))
            for _ in range(50):
                p = (rng.uniform(-9, 9), rng.uniform(-9, 9))
                assert from_local(f, to_local(f, p)) == p


@given(points, st.floats(min_value=0.0, max_value=2 * math.pi),
       st.booleans(), points)
@settings(max_examples=300)
def test_roundtrip_within_tolerance(p, rot, reflect, origin):
    f = LocalFrame(rotation=rot, reflect=reflect, origin=origin)
    q = from_local(f, to_local(f, p))
    assert distance(p, q) < 1e-12 * (1 + distance(p, (0.0, 0.0))
                                     + distance(origin, (0.0, 0.0)))


@given(points, points, st.floats(min_value=0.0, max_value=2 * math.pi),
       st.booleans(), points)
@settings(max_examples=300)
def test_midpoint_frame_equivariance(a, b, rot, reflect, origin):
    f = LocalFrame(rotation=rot, reflect=reflect, origin=origin)
    via_frame = from_local(f, midpoint(to_local(f, a), to_local(f, b)))
    assert distance(via_frame, midpoint(a, b)) < 1e-9


def test_polar_offset_normalizes_angle():
    off = geometry.PolarOffset(1.0, -math.pi)
    assert 0.0 <= off.theta < 2 * math.pi
    with pytest.raises(ContractViolation):
        geometry.PolarOffset(-1.0, 0.0)
