"""Experiment harness: scenario configs, single runs, batches, witnesses.

A scenario bundles the algorithm, the scheduler, the vision error model
and the initial placement rule.  ``run_single`` executes one seeded run
to a verdict; ``run_batch`` aggregates many runs with counter-derived
per-run seeds, so results are independent of chunking and parallelism.
"""

from __future__ import annotations

import dataclasses
import json
import math
import random
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from . import geometry, kernels, termination
from .algorithms import get_algorithm
from .error_models import VisionErrorSpec, draw_error_params
from .exceptions import ConfigError
from .geometry import LocalFrame, Point, centroid, distance
from .robot_model import WHITE, Phase, RobotState
from .scheduler import SchedulerConfig, step
from .seeds import run_seed, stream_seed
from .termination import ExecutionTrace, Verdict, Witness

RUN_CHUNK = 256

PLACEMENT_RULES = ("unit_circle_pair", "uniform_box", "fixed_pair_plus_random",
                   "explicit")


@dataclass(frozen=True)
class PlacementRule:
    """How initial positions are sampled from the environment stream."""

    rule: str = "unit_circle_pair"
    box_half: float = 1.5
    positions: tuple = ()   # for rule == "explicit"

    def __post_init__(self):
        if self.rule not in PLACEMENT_RULES:
            raise ConfigError(f"unknown placement rule {self.rule!r}")
        if self.rule == "explicit" and not self.positions:
            raise ConfigError("explicit placement needs positions")


@dataclass(frozen=True)
class ScenarioConfig:
    algorithm: str = "midpoint"
    n_robots: int = 2
    scheduler: SchedulerConfig = field(default_factory=SchedulerConfig)
    vision: VisionErrorSpec = field(default_factory=VisionErrorSpec)
    placement: PlacementRule = field(default_factory=PlacementRule)
    max_steps: int = 10_000
    frame_mode: str = "uniform"          # "uniform" | "dihedral" | "identity"
    cycle_detection: str = "auto"        # "auto" | "on" | "off"
    convergence_mode: str = "relative_abs"  # or "exact_zero"
    divergence_factor: float = 10.0
    algorithm_params: dict = field(default_factory=dict)

    def __post_init__(self):
        spec = get_algorithm(self.algorithm)
        if self.n_robots < spec.min_robots or \
                (spec.max_robots is not None and self.n_robots > spec.max_robots):
            raise ConfigError(
                f"{self.algorithm} does not support {self.n_robots} robots")
        if self.frame_mode not in ("uniform", "dihedral", "identity"):
            raise ConfigError(f"unknown frame_mode {self.frame_mode!r}")
        if self.cycle_detection not in ("auto", "on", "off"):
            raise ConfigError(f"unknown cycle_detection {self.cycle_detection!r}")
        if self.convergence_mode not in ("relative_abs", "exact_zero"):
            raise ConfigError(f"unknown convergence_mode {self.convergence_mode!r}")
        if self.max_steps <= 0:
            raise ConfigError("max_steps must be positive")
        if spec.task == "convergence" and self.n_robots == 2 and \
                self.vision.kind == "relative" and self.vision.err_dist >= 1.0:
            warnings.warn("relative distance error >= 1 can make two-robot "
                          "convergence diverge almost surely", stacklevel=2)

    @property
    def cycle_enabled(self) -> bool:
        if self.cycle_detection == "off":
            return False
        if self.cycle_detection == "on":
            return True
        spec = get_algorithm(self.algorithm)
        return spec.deterministic and spec.finite_keys

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["placement"]["positions"] = [list(p) for p in self.placement.positions]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioConfig":
        d = dict(d)
        p = dict(d.pop("placement", {}))
        p["positions"] = tuple(tuple(q) for q in p.get("positions", ()))
        return cls(scheduler=SchedulerConfig(**d.pop("scheduler", {})),
                   vision=VisionErrorSpec(**d.pop("vision", {})),
                   placement=PlacementRule(**p), **d)


@dataclass
class RunOutcome:
    verdict: Verdict
    steps: int
    fuel: float
    normalized_fuel: float
    initial_spread: float
    final_spread: float
    election_class: str | None = None
    leaders: dict[str, str | None] = field(default_factory=dict)
    decisions: list = field(default_factory=list)
    invariant_violations: int = 0
    run_seed: int = 0


def sample_initial(config: ScenarioConfig, rng_env: random.Random) -> list[RobotState]:
    """Draw initial positions, private frames and colors for one run."""
    rule = config.placement
    n = config.n_robots
    if rule.rule == "unit_circle_pair":
        if n != 2:
            raise ConfigError("unit_circle_pair needs exactly 2 robots")
        theta = rng_env.uniform(0.0, 2 * math.pi)
        positions = [(0.0, 0.0), (math.cos(theta), math.sin(theta))]
    elif rule.rule == "fixed_pair_plus_random":
        positions = [(-0.5, 0.0), (0.5, 0.0)]
        positions += [(rng_env.uniform(-rule.box_half, rule.box_half),
                       rng_env.uniform(-rule.box_half, rule.box_half))
                      for _ in range(n - 2)]
    elif rule.rule == "uniform_box":
        while True:
            positions = [(rng_env.uniform(-rule.box_half, rule.box_half),
                          rng_env.uniform(-rule.box_half, rule.box_half))
                         for _ in range(n)]
            if len(set(positions)) == n:
                break
    else:
        positions = list(rule.positions)
        if len(positions) != n:
            raise ConfigError("explicit placement count mismatch")
    spec = get_algorithm(config.algorithm)
    robots = []
    for i, pos in enumerate(positions):
        if config.frame_mode == "identity":
            frame = LocalFrame()
        elif config.frame_mode == "dihedral":
            # exact quarter-turn rotations: disoriented, yet frame round
            # trips are lossless, so exact gathering stays reachable
            frame = LocalFrame(rotation=rng_env.choice(geometry.QUARTER_TURNS),
                               reflect=rng_env.random() < 0.5)
        else:
            frame = LocalFrame(rotation=rng_env.uniform(0.0, 2 * math.pi),
                               reflect=rng_env.random() < 0.5)
        color = WHITE if spec.palette > 1 else None
        r = RobotState(name=f"r{i + 1}", position=pos, frame=frame, color=color)
        if config.vision.draw_at == "init" and not config.vision.is_identity:
            r.fixed_vision_params = draw_error_params(config.vision, rng_env)
        robots.append(r)
    return robots


def _baseline(network: list[RobotState]) -> float:
    """Fuel normalization: initial distance (pair) or sum to initial centroid."""
    if len(network) == 2:
        return distance(network[0].position, network[1].position)
    c = centroid([r.position for r in network])
    return sum(distance(r.position, c) for r in network)


def _segment_violation(network: list[RobotState]) -> bool:
    """FEC invariant: every pending target lies in the bbox of both robots."""
    (x1, y1), (x2, y2) = network[0].position, network[1].position
    lox, hix = min(x1, x2) - 1e-9, max(x1, x2) + 1e-9
    loy, hiy = min(y1, y2) - 1e-9, max(y1, y2) + 1e-9
    for r in network:
        if r.phase in (Phase.COMPUTED, Phase.MOVING):
            tx, ty = r.target
            if not (lox <= tx <= hix and loy <= ty <= hiy):
                return True
    return False


def _classify_election(network: list[RobotState], scrambled: bool) -> str:
    if scrambled:
        return "detected_possible_error"
    leaders = {r.leader for r in network}
    if None in leaders or len(leaders) > 1:
        return "undetected_error"
    return "valid"


def run_single(config: ScenarioConfig, seed: int,
               keep_trace: bool = False) -> RunOutcome:
    """Execute one run to its verdict.

    ``seed`` is the per-run seed; environment, scheduler and algorithm
    randomness use separate sub-streams so witness replay can force
    scheduler decisions without desynchronizing the rest.
    """
    rng_env = random.Random(stream_seed(seed, 1))
    rng_sched = random.Random(stream_seed(seed, 2))
    rng_alg = random.Random(stream_seed(seed, 3))
    spec = get_algorithm(config.algorithm)
    params = dict(config.algorithm_params)
    if spec.task == "election":
        params.setdefault("vision", config.vision)
    network = sample_initial(config, rng_env)
    initial_spread = termination.max_pairwise_distance(network)
    baseline = _baseline(network)
    trace = ExecutionTrace()
    cycle = config.cycle_enabled
    if cycle:
        termination.record(trace, network, spec, params, 0)
    fuel = 0.0
    violations = 0
    decisions: list = []

    def outcome(verdict: Verdict, steps: int, election_class=None) -> RunOutcome:
        return RunOutcome(
            verdict=verdict, steps=steps, fuel=fuel,
            normalized_fuel=fuel / baseline if baseline > 0 else 0.0,
            initial_spread=initial_spread,
            final_spread=termination.max_pairwise_distance(network),
            election_class=election_class,
            leaders={r.name: r.leader for r in network},
            decisions=decisions if keep_trace else [],
            invariant_violations=violations, run_seed=seed)

    if spec.task == "election":
        # one synchronous round, then classify agreement
        rec = step(network, SchedulerConfig("FSYNC", rigid=True), spec, params,
                   config.vision, rng_sched, rng_alg, rng_env)
        fuel += sum(rec.traveled.values())
        scrambled = any(rec.traveled.get(r.name, 0.0) > 0.0 and r.leader is None
                        for r in network)
        cls = _classify_election(network, scrambled)
        return outcome(Verdict("VICTORY" if cls == "valid" else "DEFEAT",
                               "election"), 1, election_class=cls)

    for t in range(1, config.max_steps + 1):
        rec = step(network, config.scheduler, spec, params, config.vision,
                   rng_sched, rng_alg, rng_env)
        decisions.append(rec.decision)
        fuel += sum(rec.traveled.values())
        if config.algorithm == "fec" and "COMPUTE" in rec.phases:
            if _segment_violation(network):
                violations += 1
        if cycle:
            termination.record(trace, network, spec, params, t)
        if spec.task == "gathering":
            if cycle and termination.gathering_victory(
                    trace, network, config.scheduler, spec, params):
                return outcome(Verdict("VICTORY", "gathering"), t)
            if cycle:
                w = termination.gathering_defeat(trace)
                if w is not None:
                    return outcome(Verdict("DEFEAT", "gathering", w), t)
        else:  # convergence
            if termination.convergence_reached(network,
                                               mode=config.convergence_mode):
                return outcome(Verdict("VICTORY", "convergence"), t)
            if termination.divergence_detected(network, initial_spread,
                                               config.divergence_factor):
                return outcome(Verdict("DEFEAT", "divergence"), t)
            if cycle:
                w = termination.convergence_defeat(trace)
                if w is not None:
                    return outcome(Verdict("DEFEAT", "convergence", w), t)
    return outcome(Verdict("TIMEOUT", ""), config.max_steps)


# --- batch aggregation ------------------------------------------------------


@dataclass
class AggregateStats:
    runs: int = 0
    victories: int = 0
    defeats: int = 0
    timeouts: int = 0
    diverged: int = 0
    float_stuck: int = 0
    election_valid: int = 0
    election_detected: int = 0
    election_undetected: int = 0
    fuel_runs: int = 0
    fuel_sum: float = 0.0
    fuel_min: float = float("inf")
    fuel_max: float = float("-inf")
    steps_sum: int = 0
    invariant_violations: int = 0

    @property
    def fuel_avg(self) -> float:
        return self.fuel_sum / self.fuel_runs if self.fuel_runs else 0.0

    @property
    def steps_avg(self) -> float:
        return self.steps_sum / self.runs if self.runs else 0.0

    def add(self, row: tuple) -> None:
        (out, kind, stuck, steps, nfuel, cls, viol) = row
        self.runs += 1
        self.steps_sum += steps
        self.invariant_violations += viol
        if out == "VICTORY":
            self.victories += 1
        elif out == "DEFEAT":
            self.defeats += 1
            if kind == "divergence":
                self.diverged += 1
        else:
            self.timeouts += 1
        if stuck:
            self.float_stuck += 1
        if cls == "valid":
            self.election_valid += 1
        elif cls == "detected_possible_error":
            self.election_detected += 1
        elif cls == "undetected_error":
            self.election_undetected += 1
        # fuel statistics cover completed (non-timeout, non-diverged) runs
        if out == "VICTORY":
            self.fuel_runs += 1
            self.fuel_sum += nfuel
            self.fuel_min = min(self.fuel_min, nfuel)
            self.fuel_max = max(self.fuel_max, nfuel)


def _row(o: RunOutcome) -> tuple:
    stuck = bool(o.verdict.witness and o.verdict.witness.float_stuck)
    return (o.verdict.outcome, o.verdict.kind, stuck, o.steps,
            o.normalized_fuel, o.election_class, o.invariant_violations)


def _run_chunk(config_dict: dict, master_seed: int, start: int, count: int) -> list[tuple]:
    config = ScenarioConfig.from_dict(config_dict)
    return [_row(run_single(config, run_seed(master_seed, start + k)))
            for k in range(count)]


def _fec_fast_path(config: ScenarioConfig) -> bool:
    return (config.algorithm == "fec"
            and config.scheduler.kind == "ASYNC" and config.scheduler.rigid
            and config.vision.is_identity
            and config.placement.rule == "unit_circle_pair"
            and not config.cycle_enabled
            and config.convergence_mode == "relative_abs")


def _cog_fast_path(config: ScenarioConfig) -> bool:
    return (config.algorithm == "cog" and config.n_robots == 2
            and config.scheduler.kind == "FSYNC" and config.scheduler.rigid
            and config.vision.kind == "relative"
            and config.placement.rule == "unit_circle_pair"
            and not config.cycle_enabled
            and config.convergence_mode == "relative_abs")


def run_batch(config: ScenarioConfig, master_seed: int, runs: int,
              parallelism: int = 1, use_fast_path: bool = True) -> AggregateStats:
    """Aggregate ``runs`` independent runs of ``config``.

    Per-run seeds derive from (master_seed, run index) and chunks are
    merged in index order, so the result is identical for any
    ``parallelism``.  Two heavily used configurations dispatch to
    vectorized kernels; everything else goes through the reference engine.
    """
    if runs <= 0:
        raise ConfigError("run_batch needs a positive run count")
    stats = AggregateStats()
    if use_fast_path and _fec_fast_path(config):
        k = kernels.fec_fuel_batch(master_seed, runs, config.max_steps)
        stats.runs = runs
        stats.victories = k.converged
        stats.timeouts = k.timeouts
        stats.fuel_runs = k.converged
        stats.fuel_sum = k.fuel_avg * k.converged
        stats.fuel_min = k.fuel_min
        stats.fuel_max = k.fuel_max
        stats.steps_sum = k.total_steps
        stats.invariant_violations = k.segment_violations
        return stats
    if use_fast_path and _cog_fast_path(config):
        k = kernels.cog_pair_error_batch(
            master_seed, runs, config.vision.err_dist, config.vision.err_angle,
            config.vision.draw_at == "init", config.max_steps,
            config.divergence_factor)
        stats.runs = runs
        stats.victories = k.converged
        stats.defeats = stats.diverged = k.diverged
        stats.timeouts = k.timeouts
        stats.fuel_runs = k.converged
        stats.fuel_sum = k.fuel_avg * k.converged
        stats.fuel_min = k.fuel_min
        stats.fuel_max = k.fuel_max
        return stats

    chunks = [(i, min(RUN_CHUNK, runs - i)) for i in range(0, runs, RUN_CHUNK)]
    cfg = config.to_dict()
    if parallelism > 1:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            results = list(pool.map(
                _run_chunk, [cfg] * len(chunks), [master_seed] * len(chunks),
                [c[0] for c in chunks], [c[1] for c in chunks]))
    else:
        results = [_run_chunk(cfg, master_seed, s, c) for s, c in chunks]
    for rows in results:
        for row in rows:
            stats.add(row)
    return stats


# --- dedicated experiments --------------------------------------------------


def election_experiment(master_seed: int, points: int, err: float,
                        nb_tries: int, box_half: float = 1.5,
                        keep_points: bool = False) -> kernels.ElectionTable:
    """Three-robot election classification over random third placements."""
    return kernels.election3_classify(master_seed, points, err, nb_tries,
                                      box_half, keep_points)


def pathology_run(rng: random.Random, mover: int, max_iters: int = 200) -> bool:
    """Reference one-attempt midpoint chase; True when stuck on adjacent floats."""
    x1 = rng.random()
    x2 = 2.0 + rng.random()
    for _ in range(max_iters):
        m = (x1 + x2) / 2
        if mover == 1:
            if m == x1:
                return True
            x1 = m
        else:
            if m == x2:
                return True
            x2 = m
        if x1 == x2:
            return False
    return False


def float_pathology_experiment(master_seed: int, attempts: int) -> dict[str, float]:
    """Fractions of midpoint chases stuck on adjacent floats, per moving robot."""
    return {"mover1": kernels.pathology_fraction(master_seed, attempts, mover=1),
            "mover2": kernels.pathology_fraction(master_seed, attempts, mover=2)}


# --- witness serialization and replay ---------------------------------------


def witness_record(config: ScenarioConfig, seed: int,
                   outcome: RunOutcome) -> dict:
    w = outcome.verdict.witness
    if w is None:
        raise ConfigError("outcome carries no cycle witness")
    return {"config": config.to_dict(), "run_seed": seed,
            "decisions": [list(d) if isinstance(d, tuple) else d
                          for d in outcome.decisions],
            "witness": {"t0": w.t0, "t1": w.t1, "kind": w.kind,
                        "float_stuck": w.float_stuck}}


def save_witnesses(path, records: list[dict]) -> None:
    with open(path, "w") as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")


def load_witnesses(path) -> list[dict]:
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]


def replay_witness(record: dict, repetitions: int = 3) -> bool:
    """Re-execute a defeat witness and loop its cycle.

    Replays the recorded scheduler decisions from the same seed, checks
    the repeated joint key at both cycle ends, then forces the cycle's
    decisions ``repetitions`` more times verifying the key recurs and the
    defeat condition persists each time.
    """
    config = ScenarioConfig.from_dict(record["config"])
    seed = record["run_seed"]
    w = record["witness"]
    decisions = [tuple(d) if isinstance(d, list) else d
                 for d in record["decisions"]]
    rng_env = random.Random(stream_seed(seed, 1))
    rng_sched = random.Random(stream_seed(seed, 2))
    rng_alg = random.Random(stream_seed(seed, 3))
    spec = get_algorithm(config.algorithm)
    params = dict(config.algorithm_params)
    network = sample_initial(config, rng_env)
    trace = ExecutionTrace()
    termination.record(trace, network, spec, params, 0)
    for t in range(1, w["t1"] + 1):
        step(network, config.scheduler, spec, params, config.vision,
             rng_sched, rng_alg, rng_env, decision=decisions[t - 1])
        termination.record(trace, network, spec, params, t)
    t0, t1 = w["t0"], w["t1"]
    key = trace.records[t1].joint_key
    if trace.records[t0].joint_key != key:
        return False
    cycle = decisions[t0:t1]
    d0 = trace.records[t0].max_distance
    t = t1
    for _ in range(repetitions):
        start_idx = len(trace.records) - 1
        for d in cycle:
            t += 1
            step(network, config.scheduler, spec, params, config.vision,
                 rng_sched, rng_alg, rng_env, decision=d)
            termination.record(trace, network, spec, params, t)
        end_idx = len(trace.records) - 1
        rec = trace.records[end_idx]
        if rec.joint_key != key:
            return False
        if w["kind"] == "gathering":
            if not trace.nongathered_in(start_idx, end_idx):
                return False
        else:
            if rec.max_distance < d0 or rec.max_distance == 0.0:
                return False
    return True
