import math

import numpy as np
import pytest

from conformal_balls import retraction
from conformal_balls.conformal import (
    apply_point,
    compose_all,
    matrix_distance,
    pi_map,
    random_rotation,
    rotation_axis,
    scale_plus,
    south_pole,
    translate_minus,
    translate_plus,
)
from conformal_balls.generators import Twist, framed_slot, generate
from conformal_balls.operad import Configuration, config_distance, is_framed, validate_config
from conformal_balls.retraction import (
    HomotopyParams,
    NonIntervalError,
    continuity_probe,
    decompose_pole,
    homotopy_step,
    max_scale,
    recompose,
    retract_to_framed,
    scale_path,
)


def little_ball_params(rng, n):
    """Parameters whose composite maps D into D: |y| + s / (1 - |q|^2) * (1 + |q|) <= 1."""
    q = rng.normal(size=n)
    q *= rng.uniform(0, 0.6) / np.linalg.norm(q)
    y = rng.normal(size=n)
    y *= rng.uniform(0, 0.5) / np.linalg.norm(y)
    radius = (1 - np.linalg.norm(y)) * rng.uniform(0.2, 0.95)
    s = radius * (1 - q @ q) / (1 + np.linalg.norm(q))
    return y, s, random_rotation(rng, n), q


def build(y, s, m, q):
    return compose_all(translate_plus(y), scale_plus(s, y.size), rotation_axis(m), translate_minus(q))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_decomposition_recovers_parameters(rng, n):
    worst_map = worst_param = 0.0
    for _ in range(200):
        y, s, m, q = little_ball_params(rng, n)
        f = build(y, s, m, q)
        d = decompose_pole(f)
        worst_map = max(worst_map, np.linalg.norm(recompose(d).matrix - f.matrix))
        worst_param = max(
            worst_param,
            np.abs(d.y - y).max(), abs(d.s - s), np.abs(d.m - m).max(), np.abs(d.q - q).max(),
        )
    assert worst_map <= 1e-9 and worst_param <= 1e-8


def test_decomposition_of_framed_slot_has_no_q(rng):
    m = random_rotation(rng, 2)
    d = decompose_pole(framed_slot(np.array([0.1, -0.2]), 0.3, m))
    assert np.abs(d.q).max() <= 1e-14
    assert np.allclose(d.y, [0.1, -0.2]) and d.s == pytest.approx(0.3) and np.allclose(d.m, m)


def test_decomposition_precondition():
    with pytest.raises(ValueError):
        decompose_pole(scale_plus(2.0, 2))


def test_factors_fix_the_right_poles(rng):
    d = decompose_pole(build(*little_ball_params(rng, 2)))
    p_minus = south_pole(2)
    assert np.allclose(apply_point(translate_minus(d.q), p_minus), p_minus)
    # f(p-) is Y(p-), so its chart coordinate is y
    f = recompose(d)
    assert np.allclose(apply_point(f, p_minus), apply_point(translate_plus(d.y), p_minus), atol=1e-12)


def one_ball_r(y, s, m, q, t):
    """Largest r <= 1 with the single image ball inside the unit ball.

    The image of D under Y S R_r M T-(q') is the plane ball with center
    y - r s M q' / (1 - |q'|^2) and radius r s / (1 - |q'|^2); containment
    |center| + radius <= 1 is a quadratic condition in r.
    """
    qt = (1 - t) * q
    k = 1 - qt @ qt
    a, b = s * (m @ qt) / k, s / k
    coeffs = [a @ a - b * b, 2 * (b - y @ a), y @ y - 1]
    roots = [r.real for r in np.roots(coeffs) if abs(r.imag) < 1e-12 and r.real > 0]
    return min(1.0, min(roots))


def test_single_ball_scale_matches_closed_form(rng):
    worst = 0.0
    hits = 0
    for _ in range(60):
        n = int(rng.integers(1, 4))
        # big q pushes the straightened ball outside D, forcing r < 1
        q = rng.normal(size=n)
        q *= rng.uniform(0.3, 0.7) / np.linalg.norm(q)
        m = random_rotation(rng, n)
        # centers pushed along M q move the straightened ball towards the rim
        center = (m @ q) / np.linalg.norm(q) * rng.uniform(0, 0.3)
        rho = rng.uniform(0.6, 0.98) - np.linalg.norm(center)
        s = rho * (1 - q @ q)
        y = center + rho * (m @ q)
        slot = compose_all(framed_slot(y, s, m), translate_minus(q))
        c = Configuration(n, (pi_map(n), slot))
        assert validate_config(c).ok
        for t in (0.0, 0.5, 1.0):
            expected = one_ball_r(y, s, m, q, t)
            got = max_scale(c, t)
            hits += expected < 1
            worst = max(worst, abs(got - expected))
    assert hits > 20
    assert worst <= 1e-8


def test_identity_at_zero_and_framed_endpoint(rng):
    for n in (1, 2, 3):
        c = generate(rng, n, 4, twist=Twist.Q)
        assert config_distance(homotopy_step(c, 0.0), c) <= 1e-12
        end = retract_to_framed(c)
        assert is_framed(end) and validate_config(end).ok
        assert max_scale(c, 0.0) == 1.0


def test_framed_inputs_are_fixed(rng):
    c = generate(rng, 2, 5)
    for t in np.linspace(0, 1, 5):
        assert config_distance(homotopy_step(c, float(t)), c) <= 1e-12


def test_p_minus_images_constant(rng):
    c = generate(rng, 3, 3, twist=Twist.Q)
    p = south_pole(3)
    base = [apply_point(f, p) for f in c.slots]
    for t in np.linspace(0, 1, 7):
        h = homotopy_step(c, float(t))
        assert max(np.linalg.norm(apply_point(f, p) - b) for f, b in zip(h.slots, base)) <= 1e-9


def test_scale_path_in_range(rng):
    c = generate(rng, 2, 5, twist=Twist.Q)
    rs = scale_path(c, np.linspace(0, 1, 11), HomotopyParams(sweep_points=32))
    assert rs[0] == 1.0 and all(0 < r <= 1 for r in rs)


def test_sweep_detects_non_interval(monkeypatch, rng):
    c = generate(rng, 2, 2, twist=Twist.Q)

    def fake(n, factors, r):
        # admissible set (0, 0.25] plus an island around 0.7
        r = np.asarray(r)
        return (r <= 0.25) | ((r > 0.6) & (r < 0.8))

    monkeypatch.setattr(retraction, "_valid_at", fake)
    with pytest.raises(NonIntervalError):
        homotopy_step(c, 0.5, HomotopyParams(sweep_points=64))


def test_t_out_of_range(rng):
    c = generate(rng, 2, 2, twist=Twist.Q)
    with pytest.raises(ValueError):
        homotopy_step(c, 1.5)


def test_without_rescaling_validity_can_fail():
    # one slot whose straightened ball pokes out of D
    q = np.array([0.6, 0.0])
    rho, m = 0.6, np.eye(2)
    s = rho * (1 - q @ q)
    center = np.array([0.35, 0.0])
    slot = compose_all(framed_slot(center + rho * q, s, m), translate_minus(q))
    c = Configuration(2, (pi_map(2), slot))
    assert validate_config(c).ok
    assert not validate_config(homotopy_step(c, 1.0, rescale=False)).ok
    assert validate_config(homotopy_step(c, 1.0)).ok


def test_continuity_probe_is_moderate(rng):
    c = generate(rng, 2, 3, twist=Twist.Q)
    ratio = continuity_probe(c, samples=6)
    assert math.isfinite(ratio) and ratio < 50


def test_homotopy_params_validation():
    with pytest.raises(ValueError):
        HomotopyParams(bisection_tol=0.0)


def test_recompose_is_inverse_of_decompose_on_random_slots(rng):
    c = generate(rng, 2, 5, twist=Twist.Q)
    for f in c.slots:
        assert matrix_distance(recompose(decompose_pole(f)), f) <= 1e-12
