import math
import random

import pytest

from swarmsim.error_models import VisionErrorSpec
from swarmsim.exceptions import ContractViolation
from swarmsim.geometry import LocalFrame, distance
from swarmsim.robot_model import (BLACK, WHITE, Phase, RobotState,
                                  advance_move, build_snapshot)

NO_ERROR = VisionErrorSpec()


def pair(p1=(0.0, 0.0), p2=(1.0, 0.0), **kw):
    return [RobotState("r1", p1, **kw), RobotState("r2", p2, **kw)]


def test_snapshot_identity_frames():
    net = pair()
    snap = build_snapshot(net[0], net, NO_ERROR, "initial", random.Random(0))
    assert [p.relative_position for p in snap] == [(1.0, 0.0)]
    assert net[0].phase == Phase.LOOKED


def test_snapshot_excludes_observer():
    net = pair()
    snap = build_snapshot(net[0], net, NO_ERROR, "initial", random.Random(0))
    assert len(snap) == 1


def test_snapshot_rotated_frame():
    net = [RobotState("r1", (0.0, 0.0), frame=LocalFrame(rotation=math.pi)),
           RobotState("r2", (1.0, 0.0))]
    snap = build_snapshot(net[0], net, NO_ERROR, "initial", random.Random(0))
    rel = snap[0].relative_position
    assert rel[0] == pytest.approx(-1.0)
    assert rel[1] == pytest.approx(0.0, abs=1e-15)


def test_snapshot_stale_perception_initial():
    net = pair()
    # r2 has a committed pending move toward (0.5, 0)
    net[1].position_at_move_start = net[1].position
    net[1].target = (0.5, 0.0)
    net[1].phase = Phase.COMPUTED
    snap = build_snapshot(net[0], net, NO_ERROR, "initial", random.Random(0))
    assert snap[0].relative_position == (1.0, 0.0)


def test_snapshot_stale_perception_uniform_on_segment():
    rng = random.Random(3)
    for _ in range(200):
        net = pair()
        net[1].position_at_move_start = (1.0, 0.0)
        net[1].target = (0.5, 0.0)
        net[1].phase = Phase.MOVING
        snap = build_snapshot(net[0], net, NO_ERROR, "uniform", rng)
        x, y = snap[0].relative_position
        assert 0.5 <= x <= 1.0 and y == 0.0


def test_snapshot_copies_colors():
    net = pair()
    net[1].color = BLACK
    snap = build_snapshot(net[0], net, NO_ERROR, "initial", random.Random(0))
    assert snap[0].color == BLACK


def test_snapshot_requires_idle():
    net = pair()
    net[0].phase = Phase.LOOKED
    with pytest.raises(ContractViolation):
        build_snapshot(net[0], net, NO_ERROR, "initial", random.Random(0))


def test_advance_move_rigid():
    r = RobotState("r1", (0.0, 0.0))
    r.target = (1.0, 0.0)
    r.phase = Phase.COMPUTED
    traveled = advance_move(r, rigid=True, delta=0.0, rng=random.Random(0))
    assert r.position == (1.0, 0.0)
    assert traveled == 1.0
    assert r.phase == Phase.IDLE


def test_advance_move_null_move():
    r = RobotState("r1", (2.0, 2.0))
    r.phase = Phase.COMPUTED
    traveled = advance_move(r, rigid=True, delta=0.0, rng=random.Random(0))
    assert traveled == 0.0 and r.position == (2.0, 2.0)
    assert r.phase == Phase.IDLE


def test_advance_move_non_rigid_uniform_range():
    rng = random.Random(8)
    for _ in range(300):
        r = RobotState("r1", (0.0, 0.0))
        r.target = (1.0, 0.0)
        r.phase = Phase.COMPUTED
        traveled = advance_move(r, rigid=False, delta=0.3, rng=rng)
        assert 0.3 - 1e-12 <= traveled <= 1.0
        # straight-line motion: traveled equals the realized displacement
        assert traveled == pytest.approx(distance((0.0, 0.0), r.position))


def test_advance_move_non_rigid_min_stop():
    r = RobotState("r1", (0.0, 0.0))
    r.target = (1.0, 0.0)
    r.phase = Phase.COMPUTED
    traveled = advance_move(r, rigid=False, delta=0.3, rng=random.Random(0),
                            adversary="min_stop")
    assert traveled == pytest.approx(0.3)


def test_advance_move_short_target_completes():
    # delta larger than the distance: the robot is allowed to finish
    r = RobotState("r1", (0.0, 0.0))
    r.target = (0.1, 0.0)
    r.phase = Phase.COMPUTED
    advance_move(r, rigid=False, delta=0.5, rng=random.Random(0))
    assert r.position == (0.1, 0.0)


def test_advance_move_requires_pending_phase():
    r = RobotState("r1", (0.0, 0.0))
    with pytest.raises(ContractViolation):
        advance_move(r, rigid=True, delta=0.0, rng=random.Random(0))


def test_initial_state_consistency():
    r = RobotState("r1", (3.0, 4.0))
    assert r.target == (3.0, 4.0)
    assert r.position_at_move_start == (3.0, 4.0)
    assert r.phase == Phase.IDLE
    assert r.color is None


def test_observer_frame_tracks_position():
    r = RobotState("r1", (1.0, 2.0), frame=LocalFrame(rotation=0.5, reflect=True))
    f = r.observer_frame()
    assert f.origin == (1.0, 2.0)
    assert f.rotation == 0.5 and f.reflect


def test_colors_are_small_ints():
    assert WHITE == 0 and BLACK == 1
