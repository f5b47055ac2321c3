"""Command-line entry point.

Subcommands:

* ``run``      one seeded run, prints the outcome as JSON
* ``bench``    batch of runs, emits an aggregate CSV row (optional per-run CSV)
* ``scatter``  election classification map as flat CSV (x, y, class, leaders)
* ``pathology`` float-adjacency midpoint experiment
* ``replay``   re-executes a witness schedule file and prints the trace

Exit codes: 0 success, 1 configuration/usage error, 2 internal assertion
failure.  The master seed comes from ``--seed`` or the SWARMSIM_SEED
environment variable.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import os
import sys
import time

from . import harness
from .exceptions import SwarmSimError
from .seeds import run_seed

CONFIG_VERSION = 1


def _fmt(x) -> str:
    """Locale-independent scalar formatting; reals keep 17 significant digits."""
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _apply_overrides(d: dict, overrides: list[str]) -> dict:
    for item in overrides:
        if "=" not in item:
            raise SwarmSimError(f"--set expects key=value, got {item!r}")
        key, _, value = item.partition("=")
        node = d
        parts = key.split(".")
        for p in parts[:-1]:
            node = node.setdefault(p, {})
        node[parts[-1]] = _parse_value(value)
    return d


def load_config(path: str | None, overrides: list[str]) -> harness.ScenarioConfig:
    if path:
        with open(path) as fh:
            d = json.load(fh)
    else:
        d = {"version": CONFIG_VERSION}
    version = d.pop("version", CONFIG_VERSION)
    if version != CONFIG_VERSION:
        raise SwarmSimError(f"unsupported config version {version}")
    _apply_overrides(d, overrides)
    return harness.ScenarioConfig.from_dict(d)


def config_to_json(config: harness.ScenarioConfig) -> str:
    d = {"version": CONFIG_VERSION}
    d.update(config.to_dict())
    return json.dumps(d, indent=2)


def _master_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("SWARMSIM_SEED")
    if env is not None:
        return int(env)
    return 0


def _outcome_dict(o: harness.RunOutcome) -> dict:
    return {
        "outcome": o.verdict.outcome,
        "kind": o.verdict.kind,
        "witness": dataclasses.asdict(o.verdict.witness) if o.verdict.witness else None,
        "steps": o.steps,
        "fuel": o.fuel,
        "normalized_fuel": o.normalized_fuel,
        "initial_spread": o.initial_spread,
        "final_spread": o.final_spread,
        "election_class": o.election_class,
        "leaders": o.leaders,
        "invariant_violations": o.invariant_violations,
        "run_seed": o.run_seed,
    }


def cmd_run(args) -> int:
    config = load_config(args.config, args.set or [])
    if args.print_config:
        print(config_to_json(config))
        return 0
    seed = run_seed(_master_seed(args), args.index)
    outcome = harness.run_single(config, seed)
    print(json.dumps(_outcome_dict(outcome)))
    return 0


BENCH_FIELDS = ("algorithm", "scheduler", "runs", "victories", "defeats",
                "timeouts", "diverged", "float_stuck", "fuel_min", "fuel_max",
                "fuel_avg", "steps_avg", "invariant_violations",
                "election_valid", "election_detected", "election_undetected",
                "wall_time")


def cmd_bench(args) -> int:
    config = load_config(args.config, args.set or [])
    seed = _master_seed(args)
    t0 = time.perf_counter()
    stats = harness.run_batch(config, seed, args.runs,
                              parallelism=args.parallelism,
                              use_fast_path=not args.no_fast_path)
    wall = time.perf_counter() - t0
    values = {
        "algorithm": config.algorithm,
        "scheduler": config.scheduler.kind,
        "runs": stats.runs,
        "victories": stats.victories,
        "defeats": stats.defeats,
        "timeouts": stats.timeouts,
        "diverged": stats.diverged,
        "float_stuck": stats.float_stuck,
        "fuel_min": stats.fuel_min if stats.fuel_runs else 0.0,
        "fuel_max": stats.fuel_max if stats.fuel_runs else 0.0,
        "fuel_avg": stats.fuel_avg,
        "steps_avg": stats.steps_avg,
        "invariant_violations": stats.invariant_violations,
        "election_valid": stats.election_valid,
        "election_detected": stats.election_detected,
        "election_undetected": stats.election_undetected,
        "wall_time": wall,
    }
    out = open(args.output, "w", newline="") if args.output else sys.stdout
    try:
        writer = csv.writer(out)
        writer.writerow(BENCH_FIELDS)
        writer.writerow([_fmt(values[f]) for f in BENCH_FIELDS])
    finally:
        if args.output:
            out.close()
    return 0


def cmd_scatter(args) -> int:
    config = load_config(args.config, args.set or []) if args.config else None
    err = args.err
    nb_tries = args.nb_tries
    box_half = args.box_half
    if config is not None:
        err = config.vision.err if args.err is None else err
        nb_tries = config.algorithm_params.get("nb_tries", 0) \
            if args.nb_tries is None else nb_tries
        box_half = config.placement.box_half if args.box_half is None else box_half
    if err is None:
        raise SwarmSimError("scatter needs --err or a config with vision.err")
    table = harness.election_experiment(
        _master_seed(args), args.points, err, nb_tries or 0,
        box_half if box_half is not None else 1.5, keep_points=True)
    names = ("valid", "detected_possible_error", "undetected_error")
    out = open(args.output, "w", newline="") if args.output else sys.stdout
    try:
        writer = csv.writer(out)
        writer.writerow(("x", "y", "class", "leader_r1", "leader_r2", "leader_r3"))
        for i in range(len(table.classes)):
            writer.writerow((
                _fmt(float(table.points[i, 0])), _fmt(float(table.points[i, 1])),
                names[table.classes[i]],
                f"r{table.leaders[0, i] + 1}", f"r{table.leaders[1, i] + 1}",
                f"r{table.leaders[2, i] + 1}"))
    finally:
        if args.output:
            out.close()
    return 0


def cmd_pathology(args) -> int:
    fractions = harness.float_pathology_experiment(_master_seed(args), args.attempts)
    print(json.dumps({k: float(v) for k, v in fractions.items()}))
    return 0


def cmd_replay(args) -> int:
    records = harness.load_witnesses(args.witnesses)
    failures = 0
    for i, rec in enumerate(records):
        ok = harness.replay_witness(rec, repetitions=args.repetitions)
        w = rec["witness"]
        print(f"witness {i}: kind={w['kind']} t0={w['t0']} t1={w['t1']} "
              f"replay={'ok' if ok else 'FAILED'}")
        if not ok:
            failures += 1
    if failures:
        print(f"{failures} of {len(records)} witnesses failed to replay")
        return 2
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swarmsim",
        description="Monte-Carlo simulator for oblivious mobile robot swarms")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="scenario JSON file")
        p.add_argument("--seed", type=int, default=None,
                       help="master seed (default: SWARMSIM_SEED or 0)")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a config entry (dotted keys)")

    p = sub.add_parser("run", help="one seeded run, JSON outcome")
    common(p)
    p.add_argument("--index", type=int, default=0, help="run index under the master seed")
    p.add_argument("--print-config", action="store_true",
                   help="echo the effective config and exit")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("bench", help="batch of runs, aggregate CSV")
    common(p)
    p.add_argument("--runs", type=int, required=True)
    p.add_argument("--parallelism", type=int, default=os.cpu_count() or 1)
    p.add_argument("--no-fast-path", action="store_true",
                   help="force the reference engine for every run")
    p.add_argument("--output", help="CSV file (default: stdout)")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("scatter", help="election classification map CSV")
    common(p)
    p.add_argument("--points", type=int, required=True)
    p.add_argument("--err", type=float, default=None)
    p.add_argument("--nb-tries", type=int, default=None)
    p.add_argument("--box-half", type=float, default=None)
    p.add_argument("--output", help="CSV file (default: stdout)")
    p.set_defaults(func=cmd_scatter)

    p = sub.add_parser("pathology", help="float-adjacency midpoint experiment")
    common(p)
    p.add_argument("--attempts", type=int, default=1_000_000)
    p.set_defaults(func=cmd_pathology)

    p = sub.add_parser("replay", help="re-execute a witness schedule file")
    p.add_argument("witnesses", help="newline-delimited JSON witness records")
    p.add_argument("--repetitions", type=int, default=3)
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (SwarmSimError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except AssertionError as exc:
        print(f"internal assertion failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
