"""Vision and compass error models.

A vision error perturbs the observer-centered position of one perceived
robot.  Three models are supported:

* ``absolute`` -- the perceived point is displaced by a vector of length
  drawn uniformly in [0, err] with a uniformly random direction.
* ``relative`` -- in polar form, the radius is scaled to r*(1+R) with
  R ~ U[-err_dist, err_dist] and the angle shifted by U[-err_angle, err_angle].
* ``abs_rel`` -- like relative, but the radius offset is additive:
  r + R with R ~ U[-err_dist, err_dist].

Fresh error parameters are drawn for every perceived robot at every LOOK
(``draw_at="every_look"``); alternatively one draw per observer can be
frozen at initialization (``draw_at="init"``).
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .exceptions import ConfigError
from .geometry import Point

VISION_KINDS = ("none", "absolute", "relative", "abs_rel")
COMPASS_KINDS = ("none", "static", "dynamic")


@dataclass(frozen=True)
class VisionErrorSpec:
    kind: str = "none"
    err: float = 0.0          # absolute model: displacement radius
    err_dist: float = 0.0     # relative: fraction of r; abs_rel: plane units
    err_angle: float = 0.0    # radians
    draw_at: str = "every_look"

    def __post_init__(self):
        if self.kind not in VISION_KINDS:
            raise ConfigError(f"unknown vision error kind {self.kind!r}")
        if self.err < 0 or self.err_dist < 0 or self.err_angle < 0:
            raise ConfigError("vision error magnitudes must be nonnegative")
        if self.draw_at not in ("every_look", "init"):
            raise ConfigError(f"unknown draw_at mode {self.draw_at!r}")

    @property
    def is_identity(self) -> bool:
        if self.kind == "none":
            return True
        if self.kind == "absolute":
            return self.err == 0.0
        return self.err_dist == 0.0 and self.err_angle == 0.0


@dataclass
class CompassErrorSpec:
    """Compass inaccuracy config for luminous/compass extension algorithms.

    ``static`` offsets are drawn once at initialization; ``dynamic`` offsets
    are redrawn at the start of every LOOK.
    """

    kind: str = "none"
    max_error: float = 0.0
    current_offset: float = 0.0

    def __post_init__(self):
        if self.kind not in COMPASS_KINDS:
            raise ConfigError(f"unknown compass kind {self.kind!r}")
        if self.max_error < 0:
            raise ConfigError("compass max_error must be nonnegative")
        if abs(self.current_offset) > self.max_error:
            raise ConfigError("compass offset exceeds max_error")

    def draw_offset(self, rng: random.Random) -> float:
        self.current_offset = rng.uniform(-self.max_error, self.max_error)
        return self.current_offset


def draw_error_params(spec: VisionErrorSpec, rng: random.Random) -> tuple[float, float]:
    """Draw the (magnitude, angle) pair for one perceived robot."""
    if spec.kind == "absolute":
        return rng.uniform(0.0, spec.err), rng.uniform(0.0, 2 * math.pi)
    return (rng.uniform(-spec.err_dist, spec.err_dist),
            rng.uniform(-spec.err_angle, spec.err_angle))


def apply_error(p: Point, spec: VisionErrorSpec, params: tuple[float, float]) -> Point:
    """Apply previously drawn error parameters to an observer-centered point."""
    mag, ang = params
    if spec.kind == "absolute":
        return (p[0] + mag * math.cos(ang), p[1] + mag * math.sin(ang))
    r = math.hypot(p[0], p[1])
    theta = math.atan2(p[1], p[0])
    if spec.kind == "relative":
        r = r * (1.0 + mag)
    else:  # abs_rel
        r = r + mag
    if r < 0.0:
        r = 0.0
    theta = theta + ang
    return (r * math.cos(theta), r * math.sin(theta))


def perturb(p: Point, spec: VisionErrorSpec, rng: random.Random,
            fixed_params: tuple[float, float] | None = None) -> Point:
    """Perturb one observer-centered perceived position.

    ``fixed_params`` carries a frozen draw for ``draw_at="init"`` observers;
    otherwise fresh parameters are drawn from ``rng``.
    """
    if spec.is_identity:
        return p
    params = fixed_params if fixed_params is not None else draw_error_params(spec, rng)
    return apply_error(p, spec, params)
