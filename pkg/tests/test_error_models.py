import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from swarmsim.error_models import (CompassErrorSpec, VisionErrorSpec,
                                   apply_error, draw_error_params, perturb)
from swarmsim.exceptions import ConfigError


def test_none_kind_is_identity():
    rng = random.Random(1)
    p = (0.123456789, -9.87654321)
    assert perturb(p, VisionErrorSpec(), rng) is p


def test_zero_magnitudes_are_bit_exact_identity():
    rng = random.Random(1)
    p = (1.0000000000000002, -0.30000000000000004)
    for kind in ("absolute", "relative", "abs_rel"):
        spec = VisionErrorSpec(kind=kind)
        assert perturb(p, spec, rng) == p


def test_absolute_formula_direct():
    spec = VisionErrorSpec(kind="absolute", err=0.5)
    # forced draw: magnitude err, angle 0 -> displaced along +x
    out = apply_error((2.0, 3.0), spec, (0.5, 0.0))
    assert out == (2.5, 3.0)


def test_relative_formula_direct():
    spec = VisionErrorSpec(kind="relative", err_dist=0.1)
    out = apply_error((1.0, 0.0), spec, (0.1, 0.0))
    assert out[0] == pytest.approx(1.1)
    assert out[1] == pytest.approx(0.0, abs=1e-15)


def test_abs_rel_formula_direct():
    spec = VisionErrorSpec(kind="abs_rel", err_dist=0.25)
    out = apply_error((1.0, 0.0), spec, (0.25, 0.0))
    assert out[0] == pytest.approx(1.25)


def test_abs_rel_negative_radius_clamps_to_zero():
    spec = VisionErrorSpec(kind="abs_rel", err_dist=5.0)
    out = apply_error((1.0, 0.0), spec, (-5.0, 0.0))
    assert out == (0.0, 0.0)


def test_absolute_containment_many_draws():
    spec = VisionErrorSpec(kind="absolute", err=0.01)
    rng = random.Random(2024)
    p = (3.0, -4.0)
    for _ in range(20000):
        q = perturb(p, spec, rng)
        assert math.hypot(q[0] - p[0], q[1] - p[1]) <= 0.01 + 1e-15


def test_relative_containment_many_draws():
    spec = VisionErrorSpec(kind="relative", err_dist=0.1, err_angle=0.2)
    rng = random.Random(99)
    p = (2.0, 1.0)
    r = math.hypot(*p)
    theta = math.atan2(p[1], p[0])
    for _ in range(20000):
        q = perturb(p, spec, rng)
        qr = math.hypot(*q)
        qt = math.atan2(q[1], q[0])
        assert r * (1 - 0.1) - 1e-12 <= qr <= r * (1 + 0.1) + 1e-12
        dt = (qt - theta + math.pi) % (2 * math.pi) - math.pi
        assert abs(dt) <= 0.2 + 1e-12


def test_draw_params_ranges():
    rng = random.Random(4)
    abs_spec = VisionErrorSpec(kind="absolute", err=0.3)
    rel_spec = VisionErrorSpec(kind="relative", err_dist=0.2, err_angle=0.1)
    for _ in range(2000):
        mag, ang = draw_error_params(abs_spec, rng)
        assert 0.0 <= mag <= 0.3 and 0.0 <= ang <= 2 * math.pi
        mag, ang = draw_error_params(rel_spec, rng)
        assert -0.2 <= mag <= 0.2 and -0.1 <= ang <= 0.1


def test_fixed_params_bypass_rng():
    spec = VisionErrorSpec(kind="absolute", err=1.0, draw_at="init")
    rng = random.Random(5)
    before = rng.getstate()
    out = perturb((1.0, 1.0), spec, rng, fixed_params=(0.5, math.pi))
    assert rng.getstate() == before
    assert out == pytest.approx((0.5, 1.0))


@given(st.sampled_from(["absolute", "relative", "abs_rel"]),
       st.integers(min_value=0, max_value=2 ** 32))
@settings(max_examples=100)
def test_perturb_deterministic_per_seed(kind, seed):
    spec = VisionErrorSpec(kind=kind, err=0.1, err_dist=0.1, err_angle=0.1)
    a = perturb((1.0, 2.0), spec, random.Random(seed))
    b = perturb((1.0, 2.0), spec, random.Random(seed))
    assert a == b


def test_vision_spec_validation():
    with pytest.raises(ConfigError):
        VisionErrorSpec(kind="fuzzy")
    with pytest.raises(ConfigError):
        VisionErrorSpec(kind="absolute", err=-0.1)
    with pytest.raises(ConfigError):
        VisionErrorSpec(draw_at="sometimes")


def test_vision_identity_flag():
    assert VisionErrorSpec().is_identity
    assert VisionErrorSpec(kind="absolute", err=0.0).is_identity
    assert not VisionErrorSpec(kind="absolute", err=0.1).is_identity
    assert not VisionErrorSpec(kind="relative", err_angle=0.1).is_identity


def test_compass_spec():
    spec = CompassErrorSpec(kind="dynamic", max_error=0.5)
    rng = random.Random(6)
    for _ in range(100):
        off = spec.draw_offset(rng)
        assert abs(off) <= 0.5
        assert spec.current_offset == off
    with pytest.raises(ConfigError):
        CompassErrorSpec(kind="wobbly")
    with pytest.raises(ConfigError):
        CompassErrorSpec(kind="static", max_error=0.1, current_offset=0.2)
