"""Robot state and the LOOK / MOVE halves of the activation cycle.

A robot is a point with a private coordinate frame, an optional light
(color), and a phase in the IDLE -> LOOKED -> COMPUTED -> MOVING -> IDLE
cycle.  In the discrete scheduler a MOVE completes within its activation,
so a robot observed with a pending move (COMPUTED or MOVING) is the one
the stale-perception adversary acts on.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field

from . import geometry
from .error_models import CompassErrorSpec, VisionErrorSpec, perturb
from .exceptions import ContractViolation
from .geometry import LocalFrame, Point

WHITE = 0
BLACK = 1


class Phase(enum.IntEnum):
    IDLE = 0
    LOOKED = 1
    COMPUTED = 2
    MOVING = 3


@dataclass(frozen=True)
class PerceivedRobot:
    """One entry of a snapshot: a position in the observer's frame plus color."""

    relative_position: Point
    color: int | None = None


@dataclass
class RobotState:
    """Full scheduler-side state of one robot.

    ``name`` exists only so the scheduler and the experiment harness can
    monitor robots; no COMPUTE implementation may read it.
    """

    name: str
    position: Point
    frame: LocalFrame = field(default_factory=LocalFrame)
    color: int | None = None
    phase: Phase = Phase.IDLE
    target: Point = (0.0, 0.0)
    position_at_move_start: Point = (0.0, 0.0)
    snapshot: list[PerceivedRobot] = field(default_factory=list)
    compass: CompassErrorSpec = field(default_factory=CompassErrorSpec)
    leader: str | None = None
    # frozen per-observer vision draw, used when draw_at="init"
    fixed_vision_params: tuple[float, float] | None = None

    def __post_init__(self):
        self.position_at_move_start = self.position
        self.target = self.position

    def observer_frame(self) -> LocalFrame:
        """The robot's frame anchored at its current position."""
        return LocalFrame(self.frame.rotation, self.frame.reflect, self.position)


def build_snapshot(observer: RobotState, network: list[RobotState],
                   vision: VisionErrorSpec, async_perception: str,
                   rng: random.Random) -> list[PerceivedRobot]:
    """Perform the LOOK of ``observer``: frame-transformed, error-perturbed view.

    Robots with a pending move are observed at their pre-move position
    (``async_perception="initial"``, the most adversarial choice) or at a
    uniformly random point of their motion segment (``"uniform"``).
    The observer itself is excluded.  Sets the observer's phase to LOOKED.
    """
    if observer.phase != Phase.IDLE:
        raise ContractViolation(f"LOOK from phase {observer.phase.name}")
    if observer.compass.kind == "dynamic":
        observer.compass.draw_offset(rng)
    frame = observer.observer_frame()
    snapshot: list[PerceivedRobot] = []
    for robot in network:
        if robot is observer:
            continue
        if robot.phase in (Phase.COMPUTED, Phase.MOVING):
            if async_perception == "uniform":
                u = rng.random()
                start = robot.position_at_move_start
                pos = (start[0] + u * (robot.target[0] - start[0]),
                       start[1] + u * (robot.target[1] - start[1]))
            else:
                pos = robot.position_at_move_start
        else:
            pos = robot.position
        rel = geometry.to_local(frame, pos)
        rel = perturb(rel, vision, rng, observer.fixed_vision_params)
        snapshot.append(PerceivedRobot(rel, robot.color))
    observer.snapshot = snapshot
    observer.phase = Phase.LOOKED
    return snapshot


def advance_move(robot: RobotState, rigid: bool, delta: float,
                 rng: random.Random, adversary: str = "uniform") -> float:
    """Perform the MOVE of ``robot`` and return the distance traveled.

    Rigid motion always reaches the target.  Non-rigid motion stops on the
    straight segment after at least min(delta, d): uniformly in
    [min(delta, d), d] for the ``uniform`` adversary, or exactly at
    min(delta, d) for ``min_stop``.
    """
    if robot.phase not in (Phase.COMPUTED, Phase.MOVING):
        raise ContractViolation(f"MOVE from phase {robot.phase.name}")
    robot.phase = Phase.MOVING
    start = robot.position
    d = geometry.distance(start, robot.target)
    if rigid or d == 0.0:
        robot.position = robot.target
        traveled = d
    else:
        lo = min(delta, d)
        stop = lo if adversary == "min_stop" else rng.uniform(lo, d)
        if stop >= d:
            robot.position = robot.target
            traveled = d
        else:
            f = stop / d
            robot.position = (start[0] + f * (robot.target[0] - start[0]),
                              start[1] + f * (robot.target[1] - start[1]))
            traveled = geometry.distance(start, robot.position)
    robot.position_at_move_start = robot.position
    robot.target = robot.position
    robot.phase = Phase.IDLE
    return traveled
