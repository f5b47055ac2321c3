"""Vectorized / JIT fast paths for the large Monte-Carlo experiments.

The reference engine (scheduler + robot_model + termination) stays the
semantic authority; these kernels restate the handful of hot scenarios
(FEC fuel runs, two-robot CoG with vision error, three-robot election
classification, the float-adjacency pathology) in array or numba form so
that million-run batches finish in seconds on one core.  Agreement with
the reference engine is covered by tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .seeds import run_seed, splitmix64

_CHUNK = 100_000


def _chunk_rng(master_seed: int, chunk_index: int, tag: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=splitmix64(master_seed, (tag << 32) + chunk_index)))


# --- FEC fuel runs (ASYNC, rigid, no error) ---------------------------------


@njit(cache=True)
def _fec_run(seed: int, max_steps: int):
    """One ASYNC rigid FEC run from a random unit-distance start.

    Returns (fuel, segment_ok, converged, steps).  Mirrors the engine:
    uniform single-robot single-phase activations, colors switched at the
    end of COMPUTE, rigid moves, convergence at the relative-absolute
    threshold.
    """
    np.random.seed(seed)
    th = np.random.uniform(0.0, 2 * np.pi)
    px = np.array([0.0, np.cos(th)])
    py = np.array([0.0, np.sin(th)])
    tx = px.copy()
    ty = py.copy()
    ph = np.zeros(2, np.int64)
    col = np.zeros(2, np.int64)
    snap_x = np.zeros(2)
    snap_y = np.zeros(2)
    snap_c = np.zeros(2, np.int64)
    fuel = 0.0
    seg_ok = True
    for s in range(max_steps):
        dx = px[1] - px[0]
        dy = py[1] - py[0]
        d = (dx * dx + dy * dy) ** 0.5
        rmax = max((px[0] ** 2 + py[0] ** 2) ** 0.5,
                   (px[1] ** 2 + py[1] ** 2) ** 0.5)
        if d < max(1e-10, rmax * 1e-10):
            return fuel, seg_ok, True, s
        i = np.random.randint(0, 2)
        j = 1 - i
        if ph[i] == 0:  # LOOK (pending movers are at their pre-move position)
            snap_x[i] = px[j] - px[i]
            snap_y[i] = py[j] - py[i]
            snap_c[i] = col[j]
            ph[i] = 1
        elif ph[i] == 1:  # COMPUTE
            mx = 0.0
            my = 0.0
            if col[i] == 0:
                col[i] = 1
                if snap_c[i] == 0:
                    mx = snap_x[i] / 2
                    my = snap_y[i] / 2
            else:
                if snap_c[i] == 1:
                    col[i] = 0
            tx[i] = px[i] + mx
            ty[i] = py[i] + my
            if not (min(px[0], px[1]) - 1e-9 <= tx[i] <= max(px[0], px[1]) + 1e-9
                    and min(py[0], py[1]) - 1e-9 <= ty[i] <= max(py[0], py[1]) + 1e-9):
                seg_ok = False
            ph[i] = 2
        else:  # MOVE (rigid)
            ddx = tx[i] - px[i]
            ddy = ty[i] - py[i]
            fuel += (ddx * ddx + ddy * ddy) ** 0.5
            px[i] = tx[i]
            py[i] = ty[i]
            ph[i] = 0
    return fuel, seg_ok, False, max_steps


@njit(cache=True)
def _fec_batch(seeds: np.ndarray, max_steps: int):
    n = seeds.shape[0]
    fuel_min = np.inf
    fuel_max = -np.inf
    fuel_sum = 0.0
    converged = 0
    seg_violations = 0
    total_steps = 0
    for k in range(n):
        fuel, seg_ok, conv, steps = _fec_run(seeds[k], max_steps)
        total_steps += steps
        if not seg_ok:
            seg_violations += 1
        if fuel < fuel_min:
            fuel_min = fuel
        if fuel > fuel_max:
            fuel_max = fuel
        if conv:
            converged += 1
            fuel_sum += fuel
    return fuel_min, fuel_max, fuel_sum, converged, seg_violations, total_steps


@dataclass
class FecFuelStats:
    runs: int
    converged: int
    timeouts: int
    fuel_min: float
    fuel_max: float
    fuel_avg: float
    segment_violations: int
    total_steps: int


def fec_fuel_batch(master_seed: int, runs: int, max_steps: int = 100_000) -> FecFuelStats:
    """Run ``runs`` independent FEC ASYNC rigid executions and aggregate fuel."""
    seeds = np.empty(runs, np.int64)
    for k in range(runs):
        seeds[k] = run_seed(master_seed, k) & 0x7FFFFFFF  # np.random.seed range
    fmin, fmax, fsum, converged, segv, steps = _fec_batch(seeds, max_steps)
    return FecFuelStats(runs, converged, runs - converged, fmin, fmax,
                        fsum / max(converged, 1), segv, steps)


# --- two-robot CoG with relative vision error -------------------------------


@dataclass
class CogPairStats:
    runs: int
    converged: int
    diverged: int
    timeouts: int
    fuel_min: float
    fuel_max: float
    fuel_avg: float


def _cog_pair_chunk(rng: np.random.Generator, n: int, err_dist: float,
                    err_angle: float, draw_at_init: bool, max_rounds: int,
                    divergence_factor: float):
    th0 = rng.uniform(0.0, 2 * np.pi, n)
    p1 = np.zeros((n, 2))
    p2 = np.stack([np.cos(th0), np.sin(th0)], axis=1)
    fuel = np.zeros(n)
    idx = np.arange(n)
    out_fuel = np.zeros(n)
    diverged = np.zeros(n, bool)
    converged = np.zeros(n, bool)
    if draw_at_init:
        fixed_r = rng.uniform(-err_dist, err_dist, (n, 2))
        fixed_t = rng.uniform(-err_angle, err_angle, (n, 2))

    def perceive(frm, to, who):
        v = to - frm
        r = np.hypot(v[:, 0], v[:, 1])
        th = np.arctan2(v[:, 1], v[:, 0])
        if draw_at_init:
            dr = fixed_r[:, who]
            dt = fixed_t[:, who]
        else:
            dr = rng.uniform(-err_dist, err_dist, len(r))
            dt = rng.uniform(-err_angle, err_angle, len(r))
        rr = r * (1.0 + dr)
        rr = np.maximum(rr, 0.0)
        ta = th + dt
        return np.stack([rr * np.cos(ta), rr * np.sin(ta)], axis=1)

    for _ in range(max_rounds):
        d = np.hypot(p2[:, 0] - p1[:, 0], p2[:, 1] - p1[:, 1])
        rmax = np.maximum(np.hypot(p1[:, 0], p1[:, 1]), np.hypot(p2[:, 0], p2[:, 1]))
        conv = d < np.maximum(1e-10, rmax * 1e-10)
        div = d >= divergence_factor
        finished = conv | div
        if finished.any():
            converged[idx[conv]] = True
            diverged[idx[div & ~conv]] = True
            out_fuel[idx[finished]] = fuel[finished]
            # runs that stalled near the divergence boundary dominate the
            # round count, so drop finished runs from the working arrays
            keep = ~finished
            idx = idx[keep]
            if len(idx) == 0:
                break
            p1, p2, fuel = p1[keep], p2[keep], fuel[keep]
            if draw_at_init:
                fixed_r, fixed_t = fixed_r[keep], fixed_t[keep]
        # FSYNC round: both robots look (with error) and move to the
        # perceived midpoint
        t1 = p1 + perceive(p1, p2, 0) / 2
        t2 = p2 + perceive(p2, p1, 1) / 2
        fuel += (np.hypot(t1[:, 0] - p1[:, 0], t1[:, 1] - p1[:, 1])
                 + np.hypot(t2[:, 0] - p2[:, 0], t2[:, 1] - p2[:, 1]))
        p1, p2 = t1, t2
    return out_fuel, converged, diverged


def cog_pair_error_batch(master_seed: int, runs: int, err_dist: float,
                         err_angle: float, draw_at_init: bool = True,
                         max_rounds: int = 10_000,
                         divergence_factor: float = 10.0) -> CogPairStats:
    """FSYNC rigid CoG for two robots under the relative vision-error model.

    Unit-distance starts; fuel is normalized by construction.  Runs are
    processed in fixed-size chunks, each with its own counter-derived
    Philox stream, so aggregates do not depend on scheduling of chunks.
    """
    fuel_min = np.inf
    fuel_max = -np.inf
    fuel_sum = 0.0
    converged = diverged = 0
    done = 0
    chunk_index = 0
    while done < runs:
        n = min(_CHUNK, runs - done)
        rng = _chunk_rng(master_seed, chunk_index, tag=1)
        fuel, conv, div = _cog_pair_chunk(rng, n, err_dist, err_angle,
                                          draw_at_init, max_rounds,
                                          divergence_factor)
        if conv.any():
            f = fuel[conv]
            fuel_min = min(fuel_min, float(f.min()))
            fuel_max = max(fuel_max, float(f.max()))
            fuel_sum += float(f.sum())
        converged += int(conv.sum())
        diverged += int(div.sum())
        done += n
        chunk_index += 1
    return CogPairStats(runs, converged, diverged, runs - converged - diverged,
                        fuel_min, fuel_max, fuel_sum / max(converged, 1))


# --- three-robot election classification ------------------------------------

VALID, DETECTED, UNDETECTED = 0, 1, 2


@dataclass
class ElectionTable:
    points: np.ndarray        # (n, 2) positions of the swept robot
    classes: np.ndarray       # (n,) VALID / DETECTED / UNDETECTED
    leaders: np.ndarray       # (3, n) leader index per observer

    @property
    def fractions(self) -> tuple[float, float, float]:
        n = len(self.classes)
        return (float((self.classes == VALID).sum()) / n,
                float((self.classes == DETECTED).sum()) / n,
                float((self.classes == UNDETECTED).sum()) / n)


def _smallest_angle_leader(P: np.ndarray) -> np.ndarray:
    """Leader = vertex of the strictly smallest interior angle; P is (3, 2, n)."""

    def ang(p, q, r):
        v1 = q - p
        v2 = r - p
        dot = v1[0] * v2[0] + v1[1] * v2[1]
        cross = np.abs(v1[0] * v2[1] - v1[1] * v2[0])
        return np.arctan2(cross, dot)

    angles = np.stack([ang(P[0], P[1], P[2]),
                       ang(P[1], P[0], P[2]),
                       ang(P[2], P[0], P[1])])
    return np.argmin(angles, axis=0)


def election3_classify(master_seed: int, points: int, err: float,
                       nb_tries: int, box_half: float = 1.5,
                       keep_points: bool = False) -> ElectionTable:
    """Classify election outcomes for the fixed-pair + random third placement.

    Two robots sit at (-0.5, 0) and (0.5, 0); the third is uniform in the
    centered square of half-width ``box_half``.  Each observer sees the
    other two with independent absolute vision error; with ``nb_tries`` > 0
    each observer additionally runs that many rounds of virtual, fully
    re-perturbed elections and flags the point on any disagreement.
    """
    all_pts = [] if keep_points else None
    all_cls = []
    all_lead = []
    done = 0
    chunk_index = 0
    while done < points:
        n = min(_CHUNK, points - done)
        rng = _chunk_rng(master_seed, chunk_index, tag=2)
        P = np.empty((3, 2, n))
        P[0, 0], P[0, 1] = -0.5, 0.0
        P[1, 0], P[1, 1] = 0.5, 0.0
        P[2, 0] = rng.uniform(-box_half, box_half, n)
        P[2, 1] = rng.uniform(-box_half, box_half, n)

        def perturb(col):
            r = rng.uniform(0.0, err, n)
            t = rng.uniform(0.0, 2 * np.pi, n)
            return col + np.stack([r * np.cos(t), r * np.sin(t)])

        snaps = []
        for obs in range(3):
            Q = P.copy()
            for j in range(3):
                if j != obs:
                    Q[j] = perturb(Q[j])
            snaps.append(Q)
        leaders = np.stack([_smallest_angle_leader(Q) for Q in snaps])
        detected = np.zeros(n, bool)
        for obs in range(3):
            for _ in range(nb_tries):
                for _virtual in range(3):
                    V = np.empty_like(P)
                    for j in range(3):
                        V[j] = perturb(snaps[obs][j])
                    detected |= _smallest_angle_leader(V) != leaders[obs]
        disagree = (leaders[0] != leaders[1]) | (leaders[1] != leaders[2])
        classes = np.zeros(n, np.int64)
        classes[detected] = DETECTED
        classes[~detected & disagree] = UNDETECTED
        if keep_points:
            all_pts.append(P[2].T.copy())
        all_cls.append(classes)
        all_lead.append(leaders)
        done += n
        chunk_index += 1
    return ElectionTable(
        np.concatenate(all_pts) if keep_points else np.empty((0, 2)),
        np.concatenate(all_cls),
        np.concatenate(all_lead, axis=1))


# --- float-adjacency pathology ----------------------------------------------


def pathology_fraction(master_seed: int, attempts: int, mover: int,
                       max_iters: int = 200) -> float:
    """Fraction of midpoint-chase runs that get stuck on adjacent floats.

    One robot is static, the other repeatedly moves to the computed
    midpoint; a run is stuck (wrongly failing convergence) when the
    midpoint rounds back to the mover's own coordinate before the two
    coordinates become equal.
    """
    stuck_total = 0
    done = 0
    chunk_index = 0
    while done < attempts:
        n = min(_CHUNK * 5, attempts - done)
        rng = _chunk_rng(master_seed, chunk_index, tag=3 + mover)
        x1 = rng.random(n)
        x2 = 2.0 + rng.random(n)
        stuck = np.zeros(n, bool)
        finished = np.zeros(n, bool)
        for _ in range(max_iters):
            m = (x1 + x2) / 2
            if mover == 1:
                now_stuck = ~finished & (m == x1)
                x1 = np.where(finished | now_stuck, x1, m)
            else:
                now_stuck = ~finished & (m == x2)
                x2 = np.where(finished | now_stuck, x2, m)
            stuck |= now_stuck
            finished |= now_stuck | (x1 == x2)
            if finished.all():
                break
        stuck_total += int(stuck.sum())
        done += n
        chunk_index += 1
    return stuck_total / attempts
