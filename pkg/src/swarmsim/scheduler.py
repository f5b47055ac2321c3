"""FSYNC / SSYNC / ASYNC drivers with randomized adversarial choices.

A step is: every robot cycles in lockstep (FSYNC), a uniformly random
nonempty subset executes one atomic cycle (SSYNC), or one uniformly random
robot executes exactly its next phase (ASYNC).  Each step can be forced by
an explicit decision, which is what witness replay uses.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from . import geometry
from .algorithms import SELF, AlgorithmSpec, ComputeContext, ComputeOutput
from .error_models import VisionErrorSpec
from .exceptions import ConfigError, ContractViolation
from .robot_model import Phase, RobotState, advance_move, build_snapshot

SCHEDULER_KINDS = ("FSYNC", "SSYNC", "ASYNC")


@dataclass(frozen=True)
class SchedulerConfig:
    kind: str = "FSYNC"
    rigid: bool = True
    delta: float = 0.0
    async_perception: str = "initial"   # or "uniform"
    non_rigid_adversary: str = "uniform"  # or "min_stop"

    def __post_init__(self):
        if self.kind not in SCHEDULER_KINDS:
            raise ConfigError(f"unknown scheduler kind {self.kind!r}")
        if not self.rigid and self.delta <= 0:
            raise ConfigError("non-rigid motion requires delta > 0")
        if self.async_perception not in ("initial", "uniform"):
            raise ConfigError(f"unknown async perception {self.async_perception!r}")
        if self.non_rigid_adversary not in ("uniform", "min_stop"):
            raise ConfigError(f"unknown non-rigid adversary {self.non_rigid_adversary!r}")


@dataclass
class StepRecord:
    activated: tuple[str, ...]
    phases: tuple[str, ...]
    traveled: dict[str, float] = field(default_factory=dict)
    decision: object = None  # replayable scheduling choice


def draw_ssync_subset(n: int, rng: random.Random) -> tuple[int, ...]:
    """A uniformly random nonempty subset of robot indices."""
    bits = rng.randrange(1, 1 << n)
    return tuple(i for i in range(n) if bits >> i & 1)


def draw_async_robot(n: int, rng: random.Random) -> int:
    return rng.randrange(n)


def apply_compute(robot: RobotState, network: list[RobotState],
                  algorithm: AlgorithmSpec, params: dict,
                  rng: random.Random) -> ComputeOutput:
    """Run the COMPUTE of ``robot`` and commit target / color / leader."""
    if robot.phase != Phase.LOOKED:
        raise ContractViolation(f"COMPUTE from phase {robot.phase.name}")
    out = algorithm.compute(ComputeContext(robot.snapshot, robot.color, rng, params))
    frame = robot.observer_frame()
    robot.target = geometry.from_local(frame, out.target)
    robot.position_at_move_start = robot.position
    if out.new_color is not None:
        robot.color = out.new_color
    if out.leader_choice is not None:
        if out.leader_choice == SELF:
            robot.leader = robot.name
        else:
            others = [r for r in network if r is not robot]
            robot.leader = others[out.leader_choice].name
    robot.phase = Phase.COMPUTED
    return out


def _full_cycle(robots: list[RobotState], network: list[RobotState],
                config: SchedulerConfig, algorithm: AlgorithmSpec, params: dict,
                vision: VisionErrorSpec, rng_sched: random.Random,
                rng_alg: random.Random, rng_env: random.Random,
                rec: StepRecord) -> None:
    # phase barriers: all LOOK, then all COMPUTE, then all MOVE
    for r in robots:
        build_snapshot(r, network, vision, config.async_perception, rng_env)
    for r in robots:
        apply_compute(r, network, algorithm, params, rng_alg)
    for r in robots:
        rec.traveled[r.name] = advance_move(
            r, config.rigid, config.delta, rng_sched, config.non_rigid_adversary)
    rec.phases = ("LOOK", "COMPUTE", "MOVE")


def step(network: list[RobotState], config: SchedulerConfig,
         algorithm: AlgorithmSpec, params: dict, vision: VisionErrorSpec,
         rng_sched: random.Random, rng_alg: random.Random,
         rng_env: random.Random, decision: object = None) -> StepRecord:
    """Advance the network by one scheduler step.

    ``decision`` forces the scheduling choice (subset indices for SSYNC, a
    robot index for ASYNC); when None it is drawn from ``rng_sched``.
    """
    if not network:
        raise ContractViolation("empty network")
    rec = StepRecord(activated=(), phases=())
    if config.kind == "FSYNC":
        rec.decision = "all"
        rec.activated = tuple(r.name for r in network)
        _full_cycle(list(network), network, config, algorithm, params,
                    vision, rng_sched, rng_alg, rng_env, rec)
    elif config.kind == "SSYNC":
        subset = tuple(decision) if decision is not None else \
            draw_ssync_subset(len(network), rng_sched)
        rec.decision = subset
        robots = [network[i] for i in subset]
        rec.activated = tuple(r.name for r in robots)
        _full_cycle(robots, network, config, algorithm, params,
                    vision, rng_sched, rng_alg, rng_env, rec)
    else:  # ASYNC
        i = decision if decision is not None else draw_async_robot(len(network), rng_sched)
        rec.decision = i
        robot = network[i]
        rec.activated = (robot.name,)
        if robot.phase == Phase.IDLE:
            build_snapshot(robot, network, vision, config.async_perception, rng_env)
            rec.phases = ("LOOK",)
        elif robot.phase == Phase.LOOKED:
            apply_compute(robot, network, algorithm, params, rng_alg)
            rec.phases = ("COMPUTE",)
        else:
            rec.traveled[robot.name] = advance_move(
                robot, config.rigid, config.delta, rng_sched,
                config.non_rigid_adversary)
            rec.phases = ("MOVE",)
    return rec


def fairness_guard(activations: list[tuple[str, ...]], names: list[str],
                   window: int) -> bool:
    """True iff no robot went more than ``window`` consecutive steps idle."""
    last_seen = {name: -1 for name in names}
    for t, active in enumerate(activations):
        for name in active:
            last_seen[name] = t
        for name in names:
            if t - last_seen[name] > window:
                return False
    return True
