"""Acceptance gate: one test per certified claim, each printing a
criterion PASS/FAIL line with its headline number and runtime."""

import json
import math
import time

import numpy as np

from taucert import (
    Cost,
    Exponential,
    Gaussian,
    HalfSpace,
    L2Ball,
    LinearFunctional,
    MaxCoordinate,
    ProductMeasure,
    TwoPoint,
    Uniform,
    alpha_chain_margin,
    certify_tail_to_tau,
    certify_tau_to_poincare,
    certify_exponential_increment,
    certify_halfline_increment,
    cli,
    cp_lower_bound,
    default_exponential_suite,
    default_halfline_suite,
    deviation_exponent_slack,
    envelope_drop_certificate,
    infconv_exact,
    lambda_star,
    muckenhoupt_constant,
    random_plconvex,
    restrict_positive,
    verify_lipschitz_deviation,
    verify_two_level_enlargement,
)

from _oracles import envelope_grid_oracle, envelope_probe_points

E1 = math.exp(-1.0)

SUITE_MEASURES = (
    (Uniform(1.0), 1.01),
    (TwoPoint(1.0), 1.01),
    (Exponential(1.0), 1.0),
)


def _report(capsys, num: int, ok: bool, detail: str) -> None:
    with capsys.disabled():
        print(f"criterion {num:02d} {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, detail


def test_c01_cost_values(capsys):
    ok = Cost.phi0(1.0) == 0.5 and Cost.phi0(2.0) == 1.5
    _report(capsys, 1, ok, f"phi0(1)={Cost.phi0(1.0)}, phi0(2)={Cost.phi0(2.0)} (exact)")


def test_c02_tail_ratio_frontier(capsys):
    t0 = time.monotonic()
    worst = 0.0
    for h in (0.5, 1.0, 2.0):
        got = lambda_star(Exponential(1.0), h).lambda_star
        worst = max(worst, abs(got - math.exp(-h)))
    elapsed = time.monotonic() - t0
    ok = worst <= 1e-9 and elapsed < 1.0
    _report(capsys, 2, ok, f"max |lambda* - e^-h| = {worst:.3g}, {elapsed:.2f}s")


def test_c03_muckenhoupt(capsys):
    b_exp = muckenhoupt_constant(Exponential(1.0))
    b_uni = muckenhoupt_constant(Uniform(1.0))
    ok = (
        abs(b_exp - 1.0) <= 1e-6
        and abs(b_uni - 0.25) <= 1e-6
        and 4.0 <= 4.0 * b_exp + 1e-6  # the sandwich covers the known constant 4
    )
    _report(capsys, 3, ok, f"B(exponential)={b_exp:.9f}, B(uniform)={b_uni:.9f}")


def test_c04_envelope_engine_equivalence(capsys):
    t0 = time.monotonic()
    rng = np.random.default_rng(2024)
    worst = -math.inf
    for i in range(100):
        scale = (1.0, 5.0, 17.0)[i % 3]
        budget = 1.0 / scale
        f = random_plconvex(rng, bounded_below=True, slope_scale=0.4 * budget)
        peak = max(abs(f.slopes[0]), abs(f.slopes[-1]))
        if peak > 0.98 * budget:
            f = f.scaled(0.98 * budget / peak)
        env = infconv_exact(f, Cost(scale))
        xs = envelope_probe_points(f, scale)
        diff = float(np.max(np.abs(env.eval_array(xs) - envelope_grid_oracle(f, scale, xs))))
        worst = max(worst, diff - (1e-3 / scale))
    elapsed = time.monotonic() - t0
    ok = worst <= 1e-9 and elapsed < 30.0
    _report(capsys, 4, ok, f"worst excess over grid-step tolerance {worst:.3g}, {elapsed:.1f}s")


def test_c05_envelope_drop(capsys):
    rng = np.random.default_rng(9)
    worst = -math.inf
    count = 0
    for c1, h in ((2.0, 1.0), (17.0, 1.0), (17.0, 0.5)):
        budget = 1.0 / (c1 * h)
        for _ in range(100):
            f = random_plconvex(rng, bounded_below=True, slope_scale=0.4 * budget)
            peak = max(abs(f.slopes[0]), abs(f.slopes[-1]))
            if peak > 0.98 * budget:
                f = f.scaled(0.98 * budget / peak)
            rep = envelope_drop_certificate(f, c1, h)
            worst = max(worst, rep.max_violation)
            count += 0 if rep.passed else 1
    ok = count == 0 and worst <= 1e-9
    _report(capsys, 5, ok, f"violations={count}, worst gap {worst:.3g}")


def test_c06_product_inequality_suites(capsys):
    t0 = time.monotonic()
    ok = True
    details = []
    for mu, h in SUITE_MEASURES:
        s = certify_tail_to_tau(mu, h, trials=200, seed=0)
        err_cap = max(r.error_bound for r in s.reports)
        ok = ok and s.violations == 0 and s.worst.margin >= 0.0 and err_cap <= 1e-6
        details.append(f"{mu.kind}: margin {s.worst.margin:.3g}, err {err_cap:.2g}")
    elapsed = time.monotonic() - t0
    ok = ok and elapsed < 120.0
    _report(capsys, 6, ok, "; ".join(details) + f", {elapsed:.1f}s")


def test_c07_constant_chain(capsys):
    worst = math.inf
    for lam in np.linspace(0.0, 0.99, 1000):
        lhs, rhs, margin = alpha_chain_margin(float(lam))
        worst = min(worst, margin)
    ok = worst >= -1e-12
    _report(capsys, 7, ok, f"min chain margin {worst:.6g} over 1000 ratio levels")


def test_c08_variance_bound(capsys):
    ok = True
    details = []
    for mu, h in SUITE_MEASURES:
        lam = lambda_star(mu, h).lambda_star
        c_tau = 17.0 * h / (1.0 - lam) ** 2
        s = certify_tau_to_poincare(mu, c_tau, trials=200, seed=0)
        ok = ok and s.violations == 0 and s.worst_slack >= -1e-8
        details.append(f"{mu.kind}: slack {s.worst_slack:.3g}")
    _report(capsys, 8, ok, "; ".join(details))


def test_c09_closure_to_tail(capsys):
    got = lambda_star(Exponential(1.0), math.sqrt(32.0), lambda_query=0.5)
    ok = abs(got.lambda_star - math.exp(-math.sqrt(32.0))) <= 1e-6 and got.member
    details = [f"exponential: lambda*(sqrt(32))={got.lambda_star:.6g}"]
    for mu in (TwoPoint(1.0), Uniform(1.0)):
        cp = cp_lower_bound(mu, seed=0).cp_lower
        cert = lambda_star(mu, math.sqrt(8.0 * cp), lambda_query=0.5)
        ok = ok and cert.member
        details.append(f"{mu.kind}: cp>={cp:.4g}, lambda*={cert.lambda_star:.4g}")
    _report(capsys, 9, ok, "; ".join(details))


def test_c10_increment_suites(capsys):
    ok = True
    worst = math.inf
    cases = (
        (Exponential(1.0), 1.0, E1),
        (Uniform(1.0), 1.01, 0.0),
        (TwoPoint(1.0), 1.01, 0.0),
        (Gaussian(1.0), 1.0, lambda_star(Gaussian(1.0), 1.0).lambda_star),
    )
    for mu, h, lam in cases:
        plus = restrict_positive(mu)
        rng = np.random.default_rng(12)
        for name, gx, gy in default_halfline_suite(plus, h, rng):
            rep = certify_halfline_increment(plus, h, lam, gx, gy, name=name)
            ok = ok and rep.passed
            worst = min(worst, rep.slack + rep.error_bound)
        for name, f in default_exponential_suite(mu, h, rng):
            rep = certify_exponential_increment(mu, h, lam, f, name=name)
            ok = ok and rep.passed
            worst = min(worst, rep.slack + rep.error_bound)
    _report(capsys, 10, ok, f"all increment suites passed, min slack {worst:.3g}")


def test_c11_enlargement_monte_carlo(capsys):
    t0 = time.monotonic()
    exp16 = ProductMeasure((Exponential(1.0),) * 16)
    rep1 = verify_two_level_enlargement(
        exp16, HalfSpace((0.25,) * 16, 0.0), 1.0, E1, [0.5, 1.0, 2.0, 4.0],
        samples=100_000, seed=0,
    )
    t1 = time.monotonic()
    uni8 = ProductMeasure((Uniform(1.0),) * 8)
    rep2 = verify_two_level_enlargement(
        uni8, L2Ball((0.0,) * 8, 1.0), 1.01, 0.0, [0.5, 1.0, 2.0, 4.0],
        samples=100_000, seed=0,
    )
    t2 = time.monotonic()
    ok = rep1.passed and rep2.passed and (t1 - t0) < 60.0 and (t2 - t1) < 60.0
    _report(
        capsys, 11, ok,
        f"half-space base {rep1.base_probability:.4f}, ball base "
        f"{rep2.base_probability:.4f}, {t1 - t0:.1f}s + {t2 - t1:.1f}s",
    )


def test_c12_deviation_monte_carlo(capsys):
    exp16 = ProductMeasure((Exponential(1.0),) * 16)
    rep1 = verify_lipschitz_deviation(
        exp16, MaxCoordinate(), 1.0, E1, [1.0, 2.0, 4.0, 8.0], samples=100_000, seed=0
    )
    uni16 = ProductMeasure((Uniform(1.0),) * 16)
    rep2 = verify_lipschitz_deviation(
        uni16, LinearFunctional((0.25,) * 16), 1.01, 0.0, [1.0, 2.0, 4.0, 8.0],
        samples=100_000, seed=0,
    )
    grid = np.logspace(-2.0, 2.0, 50)
    worst = math.inf
    for a in grid:
        for b in grid:
            for t in grid:
                worst = min(worst, deviation_exponent_slack(float(a), float(b), float(t)))
    ok = rep1.passed and rep2.passed and worst >= -1e-12
    _report(
        capsys, 12, ok,
        f"max-coordinate and linear bounds hold, min exponent slack {worst:.3g}",
    )


def test_c13_negative_control(capsys, tmp_path):
    s = certify_tail_to_tau(Exponential(1.0), 1.0, trials=10, seed=0, c_tau_scale=1e-3)
    cfg = tmp_path / "neg.json"
    cfg.write_text(json.dumps({
        "measure": {"kind": "exponential", "rate": 1.0},
        "h": 1.0,
        "trials": 10,
        "suites": ["tail_to_tau"],
        "c_tau_scale": 1e-3,
    }))
    code = cli.main(["tau", "--config", str(cfg), "--seed", "0", "--quiet"])
    ok = s.violations > 0 and code == 5
    _report(capsys, 13, ok, f"shrunken scale: {s.violations} violations, exit code {code}")
