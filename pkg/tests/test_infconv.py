"""Envelope (infimal convolution) routines against closed forms and a
brute-force grid oracle."""

import math

import numpy as np
import pytest

from taucert import (
    Cost,
    GridMismatchError,
    PLConvex,
    SlopeBoundError,
    UnboundedBelowError,
    envelope_drop_certificate,
    infconv_exact,
    infconv_grid,
    random_plconvex,
)

from _oracles import envelope_grid_oracle, envelope_probe_points

VEE = PLConvex((0.0,), (-1.0, 1.0), (0.0, 0.0))
HINGE = PLConvex((0.0,), (0.0, 1.0), (0.0, 0.0))


def test_phi0_values():
    assert Cost.phi0(0.0) == 0.0
    assert Cost.phi0(1.0) == 0.5
    assert Cost.phi0(-1.0) == 0.5
    assert Cost.phi0(2.0) == 1.5
    assert Cost.phi0(-2.0) == 1.5
    assert Cost.phi0(0.5) == 0.125
    c = Cost(2.0)
    assert c(1.0) == 0.125
    assert c.quad_param == 4.0
    assert c.lip == 0.5
    xs = np.linspace(-5, 5, 201)
    assert np.max(np.abs(c.eval_array(xs) - np.array([c(x) for x in xs]))) == 0.0
    with pytest.raises(ValueError):
        Cost(0.0)
    with pytest.raises(ValueError):
        Cost(math.inf)


def test_abs_envelope_is_cost():
    # |.| box phi0 = phi0 when the scale is 1
    env = infconv_exact(VEE, Cost(1.0))
    for x in np.linspace(-4, 4, 81):
        assert env(float(x)) == pytest.approx(Cost.phi0(x), abs=1e-12)
    assert env.validate() < 1e-12


def test_hinge_envelope_closed_form():
    env = infconv_exact(HINGE, Cost(2.0))
    for x in np.linspace(-3, 6, 91):
        want = 0.0 if x <= 0 else Cost.phi0(x / 2.0)
        assert env(float(x)) == pytest.approx(want, abs=1e-12)
    # steep cost: quadratic until the slopes match, then f minus a constant
    env = infconv_exact(HINGE, Cost(0.5))
    t = 0.25
    for x in np.linspace(-2, 3, 101):
        if x <= 0:
            want = 0.0
        elif x <= t:
            want = x * x / (2.0 * t)
        else:
            want = x - t / 2.0
        assert env(float(x)) == pytest.approx(want, abs=1e-12)


def test_envelope_structure():
    rng = np.random.default_rng(31)
    for _ in range(30):
        f = random_plconvex(rng)
        cost = Cost(float(rng.uniform(0.3, 8.0)))
        if f.slopes[0] > cost.lip or f.slopes[-1] < -cost.lip:
            # falls faster than the cost slope on a ray: envelope is -inf
            with pytest.raises(UnboundedBelowError):
                infconv_exact(f, cost)
            continue
        env = infconv_exact(f, cost)
        assert env.validate() < 1e-9
        xs = np.linspace(-15, 15, 301)
        slopes = [env.right_slope(float(x)) for x in xs]
        assert all(a <= b + 1e-10 for a, b in zip(slopes, slopes[1:]))
        assert abs(env.first_slope) <= cost.lip + 1e-12
        assert abs(env.last_slope) <= cost.lip + 1e-12
        vals = env.eval_array(xs)
        assert np.all(vals <= f.eval_array(xs) + 1e-10)
        for x in xs[::20]:
            m = env.minimizer_at(float(x))
            assert f(m) + cost(x - m) == pytest.approx(env(float(x)), abs=1e-8)


def test_envelope_matches_grid_oracle():
    rng = np.random.default_rng(5)
    for _ in range(30):
        scale = float(rng.choice([1.0, 5.0, 17.0]))
        budget = 1.0 / scale
        f = random_plconvex(rng, bounded_below=True, slope_scale=0.4 * budget)
        peak = max(abs(f.slopes[0]), abs(f.slopes[-1]))
        if peak > 0.98 * budget:
            f = f.scaled(0.98 * budget / peak)
        env = infconv_exact(f, Cost(scale))
        xs = envelope_probe_points(f, scale, count=501)
        got = env.eval_array(xs)
        want = envelope_grid_oracle(f, scale, xs)
        assert np.max(np.abs(got - want)) <= 1e-3 / scale + 1e-9


def _brute_grid(fv, phi):
    n = len(fv)
    idx = np.arange(n)
    table = fv[None, :] + phi[np.abs(idx[:, None] - idx[None, :])]
    return table.min(axis=1)


def test_infconv_grid_two_pointer_and_dc():
    cost = Cost(1.5)
    xs = np.linspace(-4.0, 4.0, 161)
    f = PLConvex((-1.0, 0.5), (-0.5, 0.1, 0.6), (0.0, 0.2))
    fv = f.eval_array(xs)
    auto = infconv_grid(fv, cost, xs)
    assert auto.method == "two_pointer"
    phi = cost.eval_array(np.arange(len(xs)) * auto.step)
    brute = _brute_grid(fv, phi)
    assert np.max(np.abs(auto.values - brute)) < 1e-12
    dc = infconv_grid(fv, cost, xs, method="divide_conquer")
    assert np.max(np.abs(dc.values - brute)) < 1e-12
    # argmin indices actually achieve the minimum
    achieved = fv[auto.argmin] + phi[np.abs(np.arange(len(xs)) - auto.argmin)]
    assert np.max(np.abs(achieved - brute)) < 1e-12


def test_infconv_grid_nonconvex_values():
    rng = np.random.default_rng(13)
    cost = Cost(0.8)
    xs = np.linspace(0.0, 3.0, 97)
    fv = rng.uniform(0.0, 2.0, size=len(xs))
    res = infconv_grid(fv, cost, xs)
    assert res.method == "divide_conquer"
    phi = cost.eval_array(np.arange(len(xs)) * res.step)
    assert np.max(np.abs(res.values - _brute_grid(fv, phi))) < 1e-12


def test_infconv_grid_rejects_bad_grids():
    cost = Cost(1.0)
    with pytest.raises(GridMismatchError):
        infconv_grid([0.0, 1.0, 0.0], cost, [0.0, 0.5, 2.0])
    with pytest.raises(GridMismatchError):
        infconv_grid([0.0, 1.0], cost, [0.0, 0.5, 1.0])
    with pytest.raises(GridMismatchError):
        infconv_grid([0.0], cost, [0.0])
    with pytest.raises(ValueError):
        infconv_grid([0.0, 1.0, 0.0], cost, [0.0, 1.0, 2.0], method="magic")


def test_monotone_within_budget():
    f = PLConvex((), (-0.3,), (0.0, 0.0))
    env = infconv_exact(f, Cost(1.0))
    # linear f: complete the square, drop is t s^2 / 2
    for x in (-2.0, 0.0, 1.7):
        assert env(x) == pytest.approx(f(x) - 0.045, abs=1e-12)
    with pytest.raises(UnboundedBelowError):
        infconv_exact(PLConvex((), (-5.0,), (0.0, 0.0)), Cost(1.0))


def test_envelope_drop_linear_equality():
    c1, h = 3.0, 0.7
    budget = 1.0 / (c1 * h)
    f = PLConvex((), (budget,), (0.0, 0.0))
    rep = envelope_drop_certificate(f, c1, h)
    assert rep.passed
    assert abs(rep.max_violation) < 1e-9


def test_envelope_drop_slope_budget():
    c1, h = 2.0, 1.0
    with pytest.raises(SlopeBoundError):
        envelope_drop_certificate(VEE, c1, h)  # slope 1 > 1/2
    with pytest.raises(ValueError):
        envelope_drop_certificate(HINGE, -1.0, h)


def test_envelope_drop_random_within_budget():
    rng = np.random.default_rng(77)
    for c1, h in ((2.0, 1.0), (17.0, 1.0), (17.0, 0.5)):
        budget = 1.0 / (c1 * h)
        for _ in range(25):
            f = random_plconvex(rng, bounded_below=True, slope_scale=0.4 * budget)
            peak = max(abs(f.slopes[0]), abs(f.slopes[-1]))
            if peak > 0.98 * budget:
                f = f.scaled(0.98 * budget / peak)
            rep = envelope_drop_certificate(f, c1, h)
            assert rep.passed, (c1, h, rep.max_violation, rep.worst_x)
