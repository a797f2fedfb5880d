"""Product-measure enlargement bounds: geometry kernels, Wilson
intervals, and the Monte Carlo verifiers."""

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from taucert import (
    ComposedConvex,
    ConfigError,
    DegenerateInputError,
    Exponential,
    HalfSpace,
    L1Ball,
    L2Ball,
    LinearFunctional,
    MaxCoordinate,
    NotInClassError,
    NotSymmetricError,
    PLConvex,
    ProductMeasure,
    Slab,
    TwoPoint,
    Uniform,
    UnsupportedSetError,
    cost_ball_member,
    cost_ball_support,
    deviation_exponent_slack,
    deviation_function_from_dict,
    enlargement_member,
    product_from_dict,
    restrict_positive,
    sanitize,
    set_from_dict,
    verify_cost_ball_enlargement,
    verify_lipschitz_deviation,
    verify_two_level_enlargement,
    wilson_interval,
)
from taucert.concentration import _residual_after_l1_spend, _residual_after_l2_spend


def ref_l1_spend(d, r):
    # min ||d - v||_2 over ||v||_1 <= r, by bisecting the soft threshold
    mags = [abs(float(x)) for x in d]
    if sum(mags) <= r:
        return 0.0
    lo, hi = 0.0, max(mags)
    for _ in range(90):
        mid = 0.5 * (lo + hi)
        if sum(max(m - mid, 0.0) for m in mags) > r:
            lo = mid
        else:
            hi = mid
    theta = 0.5 * (lo + hi)
    return math.sqrt(sum(min(m, theta) ** 2 for m in mags))


def ref_l2_spend(d, s):
    # min ||d - v||_1 over ||v||_2 <= s, by bisecting the magnitude cap
    mags = [abs(float(x)) for x in d]
    if sum(m * m for m in mags) <= s * s:
        return 0.0
    lo, hi = 0.0, max(mags)
    for _ in range(90):
        mid = 0.5 * (lo + hi)
        if sum(min(m, mid) ** 2 for m in mags) < s * s:
            lo = mid
        else:
            hi = mid
    nu = 0.5 * (lo + hi)
    return sum(max(m - nu, 0.0) for m in mags)


vectors = st.lists(
    st.floats(-10, 10, allow_nan=False, allow_infinity=False), min_size=1, max_size=6
)


@settings(max_examples=120, deadline=None)
@given(vectors, st.floats(0, 25, allow_nan=False))
def test_l1_spend_matches_reference(d, r):
    got = _residual_after_l1_spend(np.array([d]), r)[0]
    assert got == pytest.approx(ref_l1_spend(d, r), abs=1e-7)


@settings(max_examples=120, deadline=None)
@given(vectors, st.floats(0, 25, allow_nan=False))
def test_l2_spend_matches_reference(d, s):
    got = _residual_after_l2_spend(np.array([d]), s)[0]
    assert got == pytest.approx(ref_l2_spend(d, s), abs=1e-7)


def test_halfspace_arithmetic():
    hs = HalfSpace((1.0, 0.0), 1.0)
    assert not hs.contains((2.5, 0.0))
    assert enlargement_member(hs, (2.5, 0.0), 1.0, 0.5)  # 1 + 1 + 0.5 exactly
    assert not enlargement_member(hs, (2.5 + 1e-9, 0.0), 1.0, 0.5)
    a = (1.0 / math.sqrt(2.0), 1.0 / math.sqrt(2.0))
    assert enlargement_member(HalfSpace(a, 0.0), (1.0, 1.0), 1.0, 1.0 / math.sqrt(2.0))
    with pytest.raises(ConfigError):
        enlargement_member(hs, (0.0, 0.0), -0.1, 0.0)


def test_ball_arithmetic():
    b2 = L2Ball((0.0, 0.0, 0.0), math.sqrt(2.0))
    assert enlargement_member(b2, (1.5, 1.5, 0.0), 0.0, 1.0)  # threshold 1 residual
    assert not enlargement_member(b2, (1.5, 1.5, 0.0), 0.0, 0.9)
    unit = L2Ball((0.0, 0.0), 1.0)
    assert enlargement_member(unit, (2.0, 0.0), 0.0, 1.0)
    assert not enlargement_member(unit, (2.0, 0.0), 0.0, 0.5)
    b1 = L1Ball((0.0, 0.0), 1.0)
    assert enlargement_member(b1, (2.0, 0.0), 1.0, 0.0)
    assert not enlargement_member(b1, (2.0, 0.0), 0.5, 0.0)
    slab = Slab((0.0, 1.0), 0.5)
    assert slab.contains((9.0, -0.5))
    assert enlargement_member(slab, (0.0, 2.0), 1.0, 0.5)
    assert not enlargement_member(slab, (0.0, 2.0 + 1e-9), 1.0, 0.5)

    class Fake:
        pass

    with pytest.raises(UnsupportedSetError):
        enlargement_member(Fake(), (0.0,), 0.0, 0.0)


def test_enlargement_monotone_in_radii():
    rng = np.random.default_rng(8)
    sets = [
        HalfSpace(tuple(rng.normal(size=4)), 0.3),
        Slab(tuple(rng.normal(size=4)), 0.7),
        L2Ball(tuple(rng.normal(size=4)), 1.1),
        L1Ball(tuple(rng.normal(size=4)), 1.3),
    ]
    xs = rng.normal(scale=2.0, size=(200, 4))
    for set_ in sets:
        inner = set_.enlarged_contains(xs, 0.4, 0.2)
        outer = set_.enlarged_contains(xs, 0.8, 0.6)
        assert not np.any(inner & ~outer)
        base = set_.contains(xs)
        assert not np.any(base & ~set_.enlarged_contains(xs, 0.0, 0.0))


def test_cost_ball_support_against_optimizer():
    from scipy.optimize import minimize

    rng = np.random.default_rng(15)
    for _ in range(8):
        n = int(rng.integers(2, 6))
        a = rng.normal(size=n)
        c = float(rng.uniform(0.5, 5.0))
        t = float(rng.uniform(0.05, 4.0))
        got = cost_ball_support(a, c, t)

        def neg(y):
            return -float(a @ y)

        def cost(y):
            u = np.abs(y / c)
            return t - float(np.sum(np.where(u <= 1, 0.5 * u * u, u - 0.5)))

        best = -math.inf
        for k in range(4):
            y0 = rng.normal(size=n) * 0.1
            res = minimize(neg, y0, constraints=[{"type": "ineq", "fun": cost}], method="SLSQP")
            if res.success:
                best = max(best, -res.fun)
        assert best <= got + 1e-6
        assert got == pytest.approx(best, rel=1e-4)


def test_cost_ball_inside_two_level_ball():
    # every cost-ball point is reachable with the paired (s, r) budgets
    rng = np.random.default_rng(44)
    for _ in range(200):
        n = int(rng.integers(1, 8))
        c = float(rng.uniform(0.5, 4.0))
        t = float(rng.uniform(0.05, 3.0))
        y = rng.normal(size=n)
        u = np.abs(y / c)
        total = float(np.sum(np.where(u <= 1, 0.5 * u * u, u - 0.5)))
        y *= float(rng.uniform(0.0, 1.0)) * math.sqrt(t / max(total, 1e-12))
        if not cost_ball_member(y, c, t):
            continue
        s = math.sqrt(2.0 * t) * c
        r = 2.0 * t * c
        assert _residual_after_l1_spend(y[None, :], r)[0] <= s + 1e-9


def test_wilson_interval_roots():
    rng = np.random.default_rng(5)
    for _ in range(40):
        total = int(rng.integers(5, 5000))
        succ = int(rng.integers(0, total + 1))
        alpha = float(rng.uniform(1e-5, 0.2))
        p_hat, rad, lo, hi = wilson_interval(succ, total, alpha)
        assert 0.0 <= lo <= p_hat <= hi <= 1.0
        from scipy.stats import norm

        z = norm.isf(alpha / 2.0)
        for root in (lo, hi):
            if 0.0 < root < 1.0:
                lhs = total * (p_hat - root) ** 2
                rhs = z * z * root * (1.0 - root)
                assert lhs == pytest.approx(rhs, rel=1e-7, abs=1e-9)
    assert wilson_interval(0, 100, 0.05)[2] == 0.0
    assert wilson_interval(100, 100, 0.05)[3] == 1.0
    with pytest.raises(DegenerateInputError):
        wilson_interval(0, 0, 0.05)


def test_product_measure_validation():
    pm = ProductMeasure((Exponential(1.0),) * 3)
    assert pm.dimension == 3
    assert "exponential" in pm.describe()
    x = pm.sample(np.random.default_rng(0), 50)
    assert x.shape == (50, 3)
    y = pm.sample(np.random.default_rng(0), 50)
    assert np.array_equal(x, y)
    with pytest.raises(DegenerateInputError):
        ProductMeasure(())
    with pytest.raises(NotSymmetricError):
        ProductMeasure((restrict_positive(Exponential(1.0)),))


def test_two_level_enlargement_small():
    pm = ProductMeasure((Exponential(1.0),) * 4)
    hs = HalfSpace((0.5, 0.5, 0.5, 0.5), 0.0)
    rep = verify_two_level_enlargement(pm, hs, 1.0, math.exp(-1.0), [0.0, 0.5, 2.0], samples=4000, seed=3)
    assert rep.passed
    assert rep.exact_geometry
    assert rep.rows[0].t == 0.0 and rep.rows[0].passed
    # larger t enlarges the set, so empirical mass is monotone
    freqs = [row.empirical for row in rep.rows]
    assert freqs == sorted(freqs)
    assert rep.base_probability > 0.3
    d = rep.to_dict()
    json.dumps(sanitize(d))


def test_two_level_enlargement_errors():
    pm = ProductMeasure((Exponential(1.0),) * 2)
    hs = HalfSpace((1.0, 0.0), 0.0)
    with pytest.raises(NotInClassError):
        verify_two_level_enlargement(pm, hs, 1.0, 1.0, [1.0], samples=100)
    tp = ProductMeasure((TwoPoint(1.0),) * 2)
    with pytest.raises(NotInClassError):
        verify_two_level_enlargement(tp, hs, 0.5, 0.5, [1.0], samples=100)
    far = L2Ball((50.0, 50.0), 0.1)
    with pytest.raises(DegenerateInputError):
        verify_two_level_enlargement(pm, far, 1.0, math.exp(-1.0), [1.0], samples=500)
    with pytest.raises(ConfigError):
        verify_two_level_enlargement(pm, HalfSpace((1.0, 0.0, 0.0), 0.0), 1.0, 0.5, [1.0], samples=100)
    with pytest.raises(ConfigError):
        verify_two_level_enlargement(pm, hs, 1.0, 0.5, [], samples=100)
    with pytest.raises(ConfigError):
        verify_two_level_enlargement(pm, hs, 1.0, 0.5, [-1.0], samples=100)


def test_cost_ball_enlargement_modes():
    pm = ProductMeasure((Uniform(1.0),) * 3)
    hs = HalfSpace((1.0, 1.0, 1.0), 0.0)
    exact = verify_cost_ball_enlargement(pm, hs, 5.0, [0.5, 1.0], samples=3000, seed=1)
    assert exact.exact_geometry and exact.passed
    ball = L2Ball((0.0, 0.0, 0.0), 1.0)
    proxy = verify_cost_ball_enlargement(pm, ball, 5.0, [0.5], samples=3000, seed=1)
    assert not proxy.exact_geometry
    assert proxy.passed


def test_deviation_functions():
    lin = LinearFunctional((3.0, -4.0))
    assert lin.l2_constant == pytest.approx(5.0)
    assert lin.l1_constant == pytest.approx(4.0)
    assert lin.evaluate((1.0, 1.0)) == pytest.approx(-1.0)
    mc = MaxCoordinate()
    assert mc.l2_constant == 1.0 and mc.l1_constant == 1.0
    assert mc.evaluate(np.array([[0.2, -3.0, 1.4]]))[0] == pytest.approx(1.4)
    vee = PLConvex((0.0,), (-2.0, 2.0), (0.0, 0.0))
    comp = ComposedConvex(vee, (0.6, 0.8))
    assert comp.l2_constant == pytest.approx(2.0)
    assert comp.l1_constant == pytest.approx(1.6)
    assert comp.evaluate((1.0, 0.5)) == pytest.approx(2.0)


def test_lipschitz_deviation_small():
    pm = ProductMeasure((Uniform(1.0),) * 8)
    rep = verify_lipschitz_deviation(
        pm, LinearFunctional((0.35,) * 8), 1.01, 0.0, [1.0, 4.0], samples=3000, seed=2
    )
    assert rep.passed
    assert rep.c_tau == pytest.approx(17.0 * 1.01)
    rep2 = verify_lipschitz_deviation(
        pm, MaxCoordinate(), 1.01, 0.0, [2.0], samples=2000, seed=2
    )
    assert rep2.passed
    assert abs(rep2.median) <= 1.0


def test_deviation_exponent_slack():
    assert deviation_exponent_slack(1.0, 1.0, 2.0) >= 0.0
    assert deviation_exponent_slack(3.0, 0.2, 0.01) >= 0.0
    with pytest.raises(ValueError):
        deviation_exponent_slack(0.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        deviation_exponent_slack(1.0, -1.0, 1.0)
    with pytest.raises(ValueError):
        deviation_exponent_slack(1.0, 1.0, -0.5)


def test_config_builders():
    hs = set_from_dict({"kind": "half_space", "a": [1.0, 0.0], "c": 0.25})
    assert isinstance(hs, HalfSpace) and hs.c == 0.25
    assert set_from_dict(hs.to_dict()) == hs
    ball = set_from_dict({"kind": "l2_ball", "center": [0.0, 0.0], "radius": 2.0})
    assert isinstance(ball, L2Ball)
    with pytest.raises(ConfigError):
        set_from_dict({"kind": "l2_ball", "center": [0.0], "radius": 1.0, "extra": 1})
    with pytest.raises(ConfigError):
        set_from_dict({"kind": "dodecahedron"})
    with pytest.raises(ConfigError):
        set_from_dict({"kind": "half_space", "a": [1.0]})  # missing c

    f = deviation_function_from_dict({"kind": "max_coordinate"})
    assert isinstance(f, MaxCoordinate)
    with pytest.raises(ConfigError):
        deviation_function_from_dict({"kind": "linear"})

    pm = product_from_dict({"factor": {"kind": "exponential", "rate": 1.0}, "copies": 4})
    assert pm.dimension == 4
    pm2 = product_from_dict([{"kind": "uniform", "r": 1.0}] * 2)
    assert pm2.dimension == 2
    with pytest.raises(ConfigError):
        product_from_dict({"factor": {"kind": "exponential", "rate": 1.0}})
    with pytest.raises(ConfigError):
        product_from_dict(17)
