"""COMPUTE implementations and their cycle-detection input keys.

Every algorithm is registered as an :class:`AlgorithmSpec` pairing the
COMPUTE function with the projection of the configuration that is actually
visible to it (its *input key*).  Equal joint keys mean the algorithm
cannot distinguish the two configurations, which is what the termination
module's cycle detection relies on.
"""

from __future__ import annotations

import math
import random
import struct
from dataclasses import dataclass, field
from typing import Callable, Sequence

from . import geometry
from .error_models import VisionErrorSpec, perturb
from .exceptions import ContractViolation, DegenerateConfiguration, RegistryError
from .geometry import Point
from .robot_model import BLACK, WHITE, PerceivedRobot, RobotState

SELF = -1  # leader_choice sentinel: the observer elects itself

ORIGIN: Point = (0.0, 0.0)


@dataclass
class ComputeOutput:
    """Result of one COMPUTE: a local-frame target plus optional extras."""

    target: Point = ORIGIN
    new_color: int | None = None
    leader_choice: int | None = None  # SELF or an index into the snapshot
    wants_random_move: bool = False


@dataclass
class ComputeContext:
    snapshot: list[PerceivedRobot]
    color: int | None
    rng: random.Random
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class AlgorithmSpec:
    name: str
    task: str                 # "gathering" | "convergence" | "election"
    palette: int              # color count; 1 means oblivious
    min_robots: int
    max_robots: int | None
    finite_keys: bool
    compute: Callable[[ComputeContext], ComputeOutput]
    input_key: Callable[[RobotState, list[RobotState], dict], bytes]
    deterministic: bool = True


_REGISTRY: dict[str, AlgorithmSpec] = {}


def register(spec: AlgorithmSpec) -> AlgorithmSpec:
    _REGISTRY[spec.name] = spec
    return spec


def get_algorithm(name: str) -> AlgorithmSpec:
    try:
        return _REGISTRY[name]
    except KeyError:
        raise RegistryError(name) from None


def algorithm_names() -> list[str]:
    return sorted(_REGISTRY)


def input_set_of(name: str, robot: RobotState, network: list[RobotState]) -> bytes:
    spec = get_algorithm(name)
    return spec.input_key(robot, network, {})


# --- input keys -------------------------------------------------------------


def _key_empty(robot, network, params) -> bytes:
    return b""


def _key_gathered(robot, network, params) -> bytes:
    gathered = all(r.position == network[0].position for r in network)
    return b"\x01" if gathered else b"\x00"


def _key_fec(robot, network, params) -> bytes:
    other = next(r for r in network if r is not robot)
    return bytes((robot.color or 0, other.color or 0))


def _key_configuration(robot, network, params) -> bytes:
    """Sorted pairwise distances, quantized: a frame-free configuration digest."""
    quantum = params.get("cycle_quantum", 1e-12)
    dists = sorted(
        geometry.distance(a.position, b.position)
        for i, a in enumerate(network) for b in network[i + 1:])
    return b"".join(struct.pack("<q", round(d / quantum)) for d in dists)


# --- rendezvous / convergence computes --------------------------------------


def compute_midpoint(ctx: ComputeContext) -> ComputeOutput:
    """Move to the midpoint between me and the single other robot."""
    if len(ctx.snapshot) != 1:
        raise ContractViolation("midpoint rendezvous needs exactly 2 robots")
    p = ctx.snapshot[0].relative_position
    return ComputeOutput(target=(p[0] / 2, p[1] / 2))


def compute_midpoint_multiplicity(ctx: ComputeContext) -> ComputeOutput:
    """Midpoint rendezvous gated by weak local multiplicity detection."""
    if len(ctx.snapshot) != 1:
        raise ContractViolation("midpoint rendezvous needs exactly 2 robots")
    p = ctx.snapshot[0].relative_position
    if p == ORIGIN:  # gathered: stay
        return ComputeOutput(target=ORIGIN)
    return ComputeOutput(target=(p[0] / 2, p[1] / 2))


def compute_cog(ctx: ComputeContext) -> ComputeOutput:
    """Move to the center of gravity of all robots (self included)."""
    pts = [p.relative_position for p in ctx.snapshot] + [ORIGIN]
    return ComputeOutput(target=geometry.centroid(pts))


def compute_geometric_median_target(ctx: ComputeContext) -> ComputeOutput:
    """Move to an approximation of the geometric median of all robots."""
    pts = [p.relative_position for p in ctx.snapshot] + [ORIGIN]
    tol = ctx.params.get("tolerance", 1e-12)
    return ComputeOutput(target=geometry.geometric_median(pts, tol))


def compute_fec(ctx: ComputeContext) -> ComputeOutput:
    """Two-color fuel-efficient convergence.

    WHITE seeing WHITE: turn BLACK and move to the midpoint.
    WHITE seeing BLACK: turn BLACK, stay.
    BLACK seeing BLACK: turn WHITE, stay.
    BLACK seeing WHITE: stay BLACK, stay.
    """
    if len(ctx.snapshot) != 1:
        raise ContractViolation("FEC needs exactly 2 robots")
    other = ctx.snapshot[0]
    if ctx.color == WHITE:
        if other.color == WHITE:
            p = other.relative_position
            return ComputeOutput(target=(p[0] / 2, p[1] / 2), new_color=BLACK)
        return ComputeOutput(target=ORIGIN, new_color=BLACK)
    if other.color == BLACK:
        return ComputeOutput(target=ORIGIN, new_color=WHITE)
    return ComputeOutput(target=ORIGIN)


# --- leader election --------------------------------------------------------


def _tie_equal(a: float, b: float, band: float) -> bool:
    if band == 0.0:
        return a == b
    return geometry.banded_compare(a - b, 0.0, 0.0, band)


def _choice_from_index(idx: int) -> int:
    # pts lists start with the observer at index 0
    return SELF if idx == 0 else idx - 1


def elect_leader_3(pts: Sequence[Point], rng: random.Random,
                   tie_band: float = 0.0,
                   symmetry_break_step: float | None = None) -> ComputeOutput:
    """Three-robot election by smallest interior angle, observer at pts[0].

    The unique strictly smallest angle wins; if the other two angles are
    identical while mine is not smallest, I win; a fully equiangular
    triangle degrades to a Bernoulli(1/3) trial whose winner moves
    perpendicular to the opposite side, away from the triangle.
    """
    if len(pts) != 3:
        raise ContractViolation("three-robot election needs 3 positions")
    angles = geometry.interior_angles(*pts)
    m = min(angles)
    tied = [i for i, a in enumerate(angles) if _tie_equal(a, m, tie_band)]
    if len(tied) == 1:
        return ComputeOutput(leader_choice=_choice_from_index(tied[0]))
    if len(tied) == 2:
        # the two smallest angles are identical: the remaining robot wins
        other = next(i for i in range(3) if i not in tied)
        return ComputeOutput(leader_choice=_choice_from_index(other))
    # equiangular: randomized symmetry breaking
    if rng.random() < 1.0 / 3.0:
        me, a, b = pts
        ab2 = (b[0] - a[0]) ** 2 + (b[1] - a[1]) ** 2
        t = ((me[0] - a[0]) * (b[0] - a[0])
             + (me[1] - a[1]) * (b[1] - a[1])) / ab2
        foot = (a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]))
        away = (me[0] - foot[0], me[1] - foot[1])  # opposite side toward me
        norm = math.hypot(*away)
        if symmetry_break_step is None:
            shortest = min(geometry.distance(pts[i], pts[j])
                           for i in range(3) for j in range(i + 1, 3))
            symmetry_break_step = 0.1 * shortest
        scale = symmetry_break_step / norm
        return ComputeOutput(target=(away[0] * scale, away[1] * scale))
    return ComputeOutput()


def elect_leader_n(pts: Sequence[Point], rng: random.Random,
                   tie_band: float = 0.0) -> ComputeOutput:
    """Election for n >= 4 robots by distance to the SEC center, observer at pts[0].

    The robot strictly closest to the center of the smallest enclosing
    circle wins.  Robots tied for closest run a Bernoulli(1/n) trial; a
    winner moves a fraction 1/n of its center distance toward the center.
    """
    n = len(pts)
    if n < 4:
        raise ContractViolation("n-robot election needs at least 4 positions")
    if len(set(pts)) != n:
        raise DegenerateConfiguration("coincident robots in election")
    sec = geometry.smallest_enclosing_circle(pts)
    dists = [geometry.distance(p, sec.center) for p in pts]
    m = min(dists)
    tied = [i for i, d in enumerate(dists) if _tie_equal(d, m, tie_band)]
    if len(tied) == 1:
        return ComputeOutput(leader_choice=_choice_from_index(tied[0]))
    if 0 in tied and rng.random() < 1.0 / n:
        if dists[0] > 0:
            # move d_self / n toward the SEC center (as a local displacement)
            return ComputeOutput(target=((sec.center[0] - pts[0][0]) / n,
                                         (sec.center[1] - pts[0][1]) / n))
    return ComputeOutput()


def _plain_election(pts: Sequence[Point], rng: random.Random,
                    tie_band: float, symmetry_break_step: float | None) -> ComputeOutput:
    if len(pts) == 3:
        return elect_leader_3(pts, rng, tie_band, symmetry_break_step)
    return elect_leader_n(pts, rng, tie_band)


def _leader_index(out: ComputeOutput) -> int | None:
    if out.leader_choice is None:
        return None
    return 0 if out.leader_choice == SELF else out.leader_choice + 1


def reliable_election(pts: Sequence[Point], vision: VisionErrorSpec,
                      nb_tries: int, rng: random.Random,
                      tie_band: float = 0.0,
                      symmetry_break_step: float | None = None,
                      scramble_radius: float | None = None) -> ComputeOutput:
    """Election hardened against vision error by internal re-simulation.

    Runs the plain election, then ``nb_tries`` rounds of virtual elections
    in which every robot of my perceived network (myself included) is
    re-perturbed within the known error bounds.  Any virtual disagreement
    triggers a random scramble move instead of electing.
    """
    base = _plain_election(pts, rng, tie_band, symmetry_break_step)
    leader = _leader_index(base)
    if nb_tries <= 0 or leader is None:
        return base
    n = len(pts)
    for _ in range(nb_tries):
        for i in range(n):
            virtual = [perturb(p, vision, rng) for p in pts]
            # re-center on the virtual observer: elections are run in its frame
            ox, oy = virtual[i]
            local = [(virtual[j][0] - ox, virtual[j][1] - oy)
                     for j in (i, *(k for k in range(n) if k != i))]
            try:
                v_out = _plain_election(local, rng, tie_band, symmetry_break_step)
            except DegenerateConfiguration:
                v_out = ComputeOutput()
            v_leader = _leader_index(v_out)
            if v_leader is not None:
                # map back from the virtual ordering to pts indices
                order = (i, *(k for k in range(n) if k != i))
                v_leader = order[v_leader]
            if v_leader != leader:
                if scramble_radius is None:
                    base_err = vision.err if vision.kind == "absolute" else vision.err_dist
                    scramble_radius = 10.0 * base_err if base_err > 0 else 1.0
                ang = rng.uniform(0.0, 2 * math.pi)
                mag = rng.uniform(0.0, scramble_radius)
                return ComputeOutput(
                    target=(mag * math.cos(ang), mag * math.sin(ang)),
                    wants_random_move=True)
    return base


# --- registry wiring --------------------------------------------------------


def _ctx_points(ctx: ComputeContext) -> list[Point]:
    return [ORIGIN] + [p.relative_position for p in ctx.snapshot]


def _compute_elect3(ctx: ComputeContext) -> ComputeOutput:
    return elect_leader_3(_ctx_points(ctx), ctx.rng,
                          ctx.params.get("tie_band", 0.0),
                          ctx.params.get("symmetry_break_step"))


def _compute_electn(ctx: ComputeContext) -> ComputeOutput:
    return elect_leader_n(_ctx_points(ctx), ctx.rng,
                          ctx.params.get("tie_band", 0.0))


def _compute_reliable(ctx: ComputeContext) -> ComputeOutput:
    vision = ctx.params.get("vision", VisionErrorSpec())
    return reliable_election(_ctx_points(ctx), vision,
                             ctx.params.get("nb_tries", 0), ctx.rng,
                             ctx.params.get("tie_band", 0.0),
                             ctx.params.get("symmetry_break_step"),
                             ctx.params.get("scramble_radius"))


register(AlgorithmSpec("midpoint", "gathering", 1, 2, 2, True,
                       compute_midpoint, _key_empty))
register(AlgorithmSpec("midpoint_multiplicity", "gathering", 1, 2, 2, True,
                       compute_midpoint_multiplicity, _key_gathered))
register(AlgorithmSpec("cog", "convergence", 1, 1, None, False,
                       compute_cog, _key_configuration))
register(AlgorithmSpec("geometric_median", "convergence", 1, 1, None, False,
                       compute_geometric_median_target, _key_configuration))
register(AlgorithmSpec("fec", "convergence", 2, 2, 2, True,
                       compute_fec, _key_fec))
register(AlgorithmSpec("elect3", "election", 1, 3, 3, False,
                       _compute_elect3, _key_configuration, deterministic=False))
register(AlgorithmSpec("electn", "election", 1, 4, None, False,
                       _compute_electn, _key_configuration, deterministic=False))
register(AlgorithmSpec("reliable_election", "election", 1, 3, None, False,
                       _compute_reliable, _key_configuration, deterministic=False))


def register_luminous_pair_algorithm(name: str, palette: int,
                                     table: dict[tuple[int, int], tuple[int, str]],
                                     task: str = "gathering") -> AlgorithmSpec:
    """Plug in a two-robot luminous state machine from a transition table.

    ``table`` maps (my_color, other_color) to (new_color, move) with move
    one of "self", "midpoint", "other".  This is the extension point for
    external two-robot luminous algorithms; their tables are not shipped.
    """
    moves = {"self": 0.0, "midpoint": 0.5, "other": 1.0}
    for (mine, theirs), (new, move) in table.items():
        if not (0 <= mine < palette and 0 <= theirs < palette and 0 <= new < palette):
            raise ContractViolation("color outside declared palette")
        if move not in moves:
            raise ContractViolation(f"unknown move rule {move!r}")

    def compute(ctx: ComputeContext) -> ComputeOutput:
        if len(ctx.snapshot) != 1:
            raise ContractViolation(f"{name} needs exactly 2 robots")
        other = ctx.snapshot[0]
        new_color, move = table[(ctx.color or 0, other.color or 0)]
        f = moves[move]
        p = other.relative_position
        return ComputeOutput(target=(p[0] * f, p[1] * f),
                             new_color=new_color if new_color != ctx.color else None)

    def key(robot: RobotState, network: list[RobotState], params) -> bytes:
        other = next(r for r in network if r is not robot)
        gathered = robot.position == other.position
        return bytes((robot.color or 0, other.color or 0, int(gathered)))

    return register(AlgorithmSpec(name, task, palette, 2, 2, True, compute, key))
