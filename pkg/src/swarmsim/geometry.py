"""Planar primitives shared by all robot algorithms.

Points are plain ``(x, y)`` tuples of floats.  Everything here is a pure
function; all arithmetic is ordinary binary64, on purpose: the simulator
must exhibit the same float behavior as the algorithms it hosts.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Iterable, Sequence

from .exceptions import ContractViolation, DegenerateConfiguration

Point = tuple[float, float]


@dataclass(frozen=True)
class PolarOffset:
    """An offset expressed as (distance, angle), angle normalized to [0, 2pi)."""

    r: float
    theta: float

    def __post_init__(self):
        if self.r < 0:
            raise ContractViolation("polar distance must be nonnegative")
        object.__setattr__(self, "theta", self.theta % (2 * math.pi))


@dataclass(frozen=True)
class Circle:
    center: Point
    radius: float

    def contains(self, p: Point, slack: float = 1e-9) -> bool:
        return distance(self.center, p) <= self.radius + slack


@dataclass(frozen=True)
class LocalFrame:
    """A robot's private coordinate system: rotation, optional mirror, origin."""

    rotation: float = 0.0
    reflect: bool = False
    origin: Point = (0.0, 0.0)


def distance(a: Point, b: Point) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def midpoint(a: Point, b: Point) -> Point:
    # May round to one endpoint for adjacent floats; callers must tolerate it.
    return ((a[0] + b[0]) / 2, (a[1] + b[1]) / 2)


def centroid(points: Sequence[Point]) -> Point:
    if not points:
        raise ContractViolation("centroid of empty point set")
    sx = math.fsum(p[0] for p in points)
    sy = math.fsum(p[1] for p in points)
    n = len(points)
    return (sx / n, sy / n)


def angle_at(p: Point, q: Point, r: Point) -> float:
    """Unsigned angle at vertex p of triangle pqr, in (0, pi).

    Computed from |cross| and dot so that an angle and its mirror image are
    indistinguishable (robots have no chirality).
    """
    v1 = (q[0] - p[0], q[1] - p[1])
    v2 = (r[0] - p[0], r[1] - p[1])
    dot = v1[0] * v2[0] + v1[1] * v2[1]
    cross = abs(v1[0] * v2[1] - v1[1] * v2[0])
    return math.atan2(cross, dot)


def interior_angles(a: Point, b: Point, c: Point) -> tuple[float, float, float]:
    """The three interior angles of triangle abc, one per vertex, summing to pi."""
    if a == b or b == c or a == c:
        raise DegenerateConfiguration("coincident triangle vertices")
    angles = (angle_at(a, b, c), angle_at(b, a, c), angle_at(c, a, b))
    if min(angles) == 0.0:
        raise DegenerateConfiguration("collinear triangle vertices")
    return angles


# --- smallest enclosing circle (randomized incremental) ---------------------


def _circle_two(a: Point, b: Point) -> Circle:
    c = midpoint(a, b)
    return Circle(c, max(distance(c, a), distance(c, b)))


def _circumcircle(a: Point, b: Point, c: Point) -> Circle | None:
    ax, ay = a
    bx, by = b
    cx, cy = c
    d = 2 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    if d == 0:
        return None
    ux = ((ax * ax + ay * ay) * (by - cy) + (bx * bx + by * by) * (cy - ay)
          + (cx * cx + cy * cy) * (ay - by)) / d
    uy = ((ax * ax + ay * ay) * (cx - bx) + (bx * bx + by * by) * (ax - cx)
          + (cx * cx + cy * cy) * (bx - ax)) / d
    center = (ux, uy)
    return Circle(center, max(distance(center, p) for p in (a, b, c)))


def _in_circle(c: Circle | None, p: Point) -> bool:
    if c is None:
        return False
    return distance(c.center, p) <= c.radius * (1 + 1e-14) + 1e-14


def smallest_enclosing_circle(points: Sequence[Point],
                              rng: random.Random | None = None) -> Circle:
    """Smallest circle containing all points (move-to-front Welzl)."""
    if not points:
        raise ContractViolation("smallest enclosing circle of empty point set")
    pts = list(points)
    # Shuffle for the expected-linear bound; a private stream keeps the
    # result independent of caller RNG state.
    (rng or random.Random(0x5EC)).shuffle(pts)

    circle: Circle | None = None
    for i, p in enumerate(pts):
        if _in_circle(circle, p):
            continue
        circle = Circle(p, 0.0)
        for j, q in enumerate(pts[: i + 1]):
            if _in_circle(circle, q):
                continue
            circle = _circle_two(p, q)
            for r in pts[: j + 1]:
                if _in_circle(circle, r):
                    continue
                cc = _circumcircle(p, q, r)
                if cc is not None:
                    circle = cc
    assert circle is not None
    return circle


def geometric_median(points: Sequence[Point], tolerance: float = 1e-12,
                     max_iterations: int = 256) -> Point:
    """Weiszfeld iteration for the point minimizing the sum of distances.

    Starts from the centroid (so the objective can only improve on it) and
    stops once an iterate moves less than ``tolerance``.  An iterate landing
    on an input point within ``tolerance`` is returned as-is: the plain
    update is singular there.
    """
    if not points:
        raise ContractViolation("geometric median of empty point set")
    if tolerance <= 0:
        raise ContractViolation("tolerance must be positive")
    x = centroid(points)
    for _ in range(max_iterations):
        wsum = 0.0
        nx = 0.0
        ny = 0.0
        for p in points:
            d = distance(x, p)
            if d < tolerance:
                return p
            w = 1.0 / d
            wsum += w
            nx += p[0] * w
            ny += p[1] * w
        new = (nx / wsum, ny / wsum)
        if distance(new, x) < tolerance:
            return new
        x = new
    return x


def sum_of_distances(x: Point, points: Iterable[Point]) -> float:
    return math.fsum(distance(x, p) for p in points)


def banded_compare(value: float, lo: float, hi: float, band: float = 1e-6,
                   lo_closed: bool = True, hi_closed: bool = True) -> bool:
    """Interval membership with the bound-shifting rules used for angle tests.

    Closed bounds widen outward by ``band``; open bounds shift inward:
    [A,B] -> [A-band, B+band], [A,B[ -> [A-band, B-band[,
    ]A,B] -> ]A+band, B+band], ]A,B[ -> ]A+band, B-band[.
    """
    if lo > hi:
        raise ContractViolation("interval lower bound above upper bound")
    lo_eff = lo - band if lo_closed else lo + band
    hi_eff = hi + band if hi_closed else hi - band
    above = value >= lo_eff if lo_closed else value > lo_eff
    below = value <= hi_eff if hi_closed else value < hi_eff
    return above and below


# Quarter turns get exact trig values so sign-flip/swap rotations are
# lossless; this is what makes exact point coincidence reachable under
# randomized (dihedral) frames despite binary floating point.
QUARTER_TURNS = (0.0, math.pi / 2, math.pi, 3 * math.pi / 2)
_QUARTER_TRIG = {0.0: (1.0, 0.0), math.pi / 2: (0.0, 1.0),
                 math.pi: (-1.0, 0.0), 3 * math.pi / 2: (0.0, -1.0)}


def _trig(rotation: float) -> tuple[float, float]:
    exact = _QUARTER_TRIG.get(rotation)
    if exact is not None:
        return exact
    return math.cos(rotation), math.sin(rotation)


def to_local(frame: LocalFrame, p: Point) -> Point:
    """Express the global point p in the frame's coordinates."""
    x = p[0] - frame.origin[0]
    y = p[1] - frame.origin[1]
    c, s = _trig(frame.rotation)
    # rotate by -rotation
    rx = c * x + s * y
    ry = -s * x + c * y
    if frame.reflect:
        ry = -ry
    return (rx, ry)


def from_local(frame: LocalFrame, p: Point) -> Point:
    """Inverse of :func:`to_local`."""
    x, y = p
    if frame.reflect:
        y = -y
    c, s = _trig(frame.rotation)
    rx = c * x - s * y
    ry = s * x + c * y
    return (rx + frame.origin[0], ry + frame.origin[1])
