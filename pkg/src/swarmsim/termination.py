"""Practical victory / defeat detection via input-set cycle search.

A trace stores, per step, the joint input key of the network (per-robot
algorithm keys plus phase tags).  Two records with equal joint keys bound
a cycle the adversary can repeat; gathering and convergence defeats, and
the gathering victory, are all phrased over such cycles.
"""

from __future__ import annotations

import copy
import random
from dataclasses import dataclass, field

from . import geometry, scheduler
from .algorithms import AlgorithmSpec
from .error_models import VisionErrorSpec
from .robot_model import Phase, RobotState

#: convergence threshold baseline: |r1r2| < max(EPS, max|O r_i| * EPS)
CONVERGENCE_EPS = 1e-10


@dataclass(frozen=True)
class Witness:
    """A repeated-input-key cycle: records t0 and t1 share a joint key."""

    t0: int
    t1: int
    kind: str                 # "gathering" | "convergence"
    float_stuck: bool = False  # positions bit-identical at both ends


@dataclass(frozen=True)
class Verdict:
    outcome: str              # "VICTORY" | "DEFEAT" | "TIMEOUT"
    kind: str                 # "gathering" | "convergence" | "divergence" | "election" | ""
    witness: Witness | None = None


@dataclass
class TraceRecord:
    step: int
    joint_key: bytes
    gathered: bool
    max_distance: float
    positions: tuple


@dataclass
class ExecutionTrace:
    records: list[TraceRecord] = field(default_factory=list)
    key_index: dict[bytes, list[int]] = field(default_factory=dict)
    # prefix counts for O(1) "any non-gathered in a range" queries
    nongathered_prefix: list[int] = field(default_factory=lambda: [0])
    traveled: dict[str, float] = field(default_factory=dict)
    activations: list[tuple[str, ...]] = field(default_factory=list)
    decisions: list[object] = field(default_factory=list)

    def nongathered_in(self, t0: int, t1: int) -> bool:
        """Any non-gathered record with index in [t0, t1]?"""
        return self.nongathered_prefix[t1 + 1] - self.nongathered_prefix[t0] > 0


def joint_key(network: list[RobotState], algorithm: AlgorithmSpec,
              params: dict) -> bytes:
    parts = []
    for robot in network:
        parts.append(algorithm.input_key(robot, network, params))
        parts.append(bytes((robot.phase.value,)))
    return b"|".join(parts)


def max_pairwise_distance(network: list[RobotState]) -> float:
    dmax = 0.0
    for i, a in enumerate(network):
        for b in network[i + 1:]:
            d = geometry.distance(a.position, b.position)
            if d > dmax:
                dmax = d
    return dmax


def record(trace: ExecutionTrace, network: list[RobotState],
           algorithm: AlgorithmSpec, params: dict, step_index: int) -> TraceRecord:
    """Append the current configuration to the trace."""
    dmax = max_pairwise_distance(network)
    rec = TraceRecord(
        step=step_index,
        joint_key=joint_key(network, algorithm, params),
        gathered=dmax == 0.0,
        max_distance=dmax,
        positions=tuple(r.position for r in network),
    )
    idx = len(trace.records)
    trace.records.append(rec)
    trace.key_index.setdefault(rec.joint_key, []).append(idx)
    trace.nongathered_prefix.append(
        trace.nongathered_prefix[-1] + (0 if rec.gathered else 1))
    return rec


def gathering_defeat(trace: ExecutionTrace) -> Witness | None:
    """A cycle containing a non-gathered configuration."""
    if not trace.records:
        return None
    t1 = len(trace.records) - 1
    rec = trace.records[t1]
    for t0 in trace.key_index.get(rec.joint_key, ()):
        if t0 >= t1:
            break
        if trace.nongathered_in(t0, t1):
            return Witness(t0, t1, "gathering")
    return None


def convergence_defeat(trace: ExecutionTrace) -> Witness | None:
    """A cycle over which the inter-robot distance did not decrease."""
    if not trace.records:
        return None
    t1 = len(trace.records) - 1
    rec = trace.records[t1]
    for t0 in trace.key_index.get(rec.joint_key, ()):
        if t0 >= t1:
            break
        d0 = trace.records[t0].max_distance
        if 0.0 < d0 <= rec.max_distance:
            stuck = trace.records[t0].positions == rec.positions
            return Witness(t0, t1, "convergence", float_stuck=stuck)
    return None


def convergence_reached(network: list[RobotState],
                        eps: float = CONVERGENCE_EPS,
                        mode: str = "relative_abs") -> bool:
    """All pairwise distances below the (relative-absolute) threshold."""
    dmax = max_pairwise_distance(network)
    if mode == "exact_zero":
        return dmax == 0.0
    rmax = max(geometry.distance((0.0, 0.0), r.position) for r in network)
    return dmax < max(eps, rmax * eps)


def divergence_detected(network: list[RobotState], initial_distance: float,
                        factor: float = 10.0) -> bool:
    return max_pairwise_distance(network) >= factor * initial_distance


def _state_digest(network: list[RobotState]) -> tuple:
    return tuple((r.position, r.color, r.phase.value, r.target) for r in network)


def _scheduling_choices(kind: str, n: int) -> list[object]:
    if kind == "FSYNC":
        return [None]
    if kind == "SSYNC":
        return [tuple(i for i in range(n) if bits >> i & 1)
                for bits in range(1, 1 << n)]
    return list(range(n))


def expansion_stays_gathered(network: list[RobotState], config,
                             algorithm: AlgorithmSpec, params: dict,
                             max_states: int = 512) -> bool:
    """Exhaustively expand scheduler choices from a gathered configuration.

    Sound only for deterministic algorithms with finite key spaces; returns
    False (no victory) whenever the expansion leaves gathered configurations
    or exceeds the state budget.
    """
    no_error = VisionErrorSpec()
    dummy = random.Random(0)
    seen: set[tuple] = set()
    frontier = [copy.deepcopy(network)]
    while frontier:
        state = frontier.pop()
        if max_pairwise_distance(state) != 0.0:
            return False
        digest = _state_digest(state)
        if digest in seen:
            continue
        seen.add(digest)
        if len(seen) > max_states:
            return False
        for choice in _scheduling_choices(config.kind, len(state)):
            succ = copy.deepcopy(state)
            scheduler.step(succ, config, algorithm, params, no_error,
                           dummy, dummy, dummy, decision=choice)
            if max_pairwise_distance(succ) != 0.0:
                return False
            frontier.append(succ)
    return True


def gathering_victory(trace: ExecutionTrace, network: list[RobotState],
                      config, algorithm: AlgorithmSpec, params: dict) -> bool:
    """Gathered, in a repeated-key cycle, and provably stuck there.

    The cycle check allows the earlier key occurrence itself to be
    non-gathered (the oblivious rendezvous succeeds exactly when the
    network is gathered after the first activation); everything strictly
    between must be gathered, and a bounded exhaustive expansion over all
    scheduler choices must never leave gathered configurations.
    """
    if not algorithm.finite_keys or not algorithm.deterministic:
        return False
    if not trace.records:
        return False
    t1 = len(trace.records) - 1
    rec = trace.records[t1]
    if not rec.gathered:
        return False
    for t0 in trace.key_index.get(rec.joint_key, ()):
        if t0 >= t1:
            break
        if t1 - t0 <= 1 or not trace.nongathered_in(t0 + 1, t1 - 1):
            return expansion_stays_gathered(network, config, algorithm, params)
    return False
