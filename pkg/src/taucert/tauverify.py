"""Certification of the convex exponential inequality and its relatives.

The headline functional, for a convex bounded-below f and Huber-type
cost phi, is the product

    T(f) = (int e^{f box phi} dmu) * (int e^{-f} dmu),

which the tail-ratio class guarantees to be <= 1 once the cost scale is
C_tau = 17 h / (1 - lambda)^2.  Every integral here is piecewise
exponential-polynomial against the measure, so both factors carry exact
atom sums and a propagated quadrature error bound; a report "passes"
when T(f) <= 1 + (error bound).

Alongside the product functional, the module certifies the two
increment inequalities it rests on (the half-line second-moment bound
for nondecreasing g, and the exponential-moment version driven by the
discrete gradient), the scalar constant chain

    (C1/2) * alpha(C1) >= 8 / (1 - lambda)^2,   C1 = 17 / (1 - lambda)^2,
    alpha(C1) = 2 C1 (1 - exp(-1/(2 C1))),

and the downstream variance bound Var <= (C_tau^2 / 2) * Energy.

Random suites are seeded and reproducible; an adversarial coordinate
search perturbs the worst random function's breakpoints and slopes to
push the product up before the verdict is issued.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .convexfn import PLConvex, discrete_gradient, random_plconvex
from .errors import DivergentIntegralError, NotInClassError, UnboundedBelowError
from .infconv import Cost, infconv_exact
from .measure1d import Measure1D, lambda_star
from .piecewise import PiecewisePoly
from .poincare import dirichlet_energy, variance

__all__ = [
    "TauReport",
    "tau_functional",
    "TauSuiteSummary",
    "certify_tail_to_tau",
    "IncrementReport",
    "certify_halfline_increment",
    "certify_exponential_increment",
    "default_halfline_suite",
    "default_exponential_suite",
    "VarianceSuiteSummary",
    "certify_tau_to_poincare",
    "increment_alpha",
    "alpha_chain_margin",
]

_SLOPE_RATE_MARGIN = 1e-9


# -- scalar constants -----------------------------------------------------------


def increment_alpha(c1: float) -> float:
    """alpha(C1) = 2 C1 (1 - exp(-1/(2 C1))); expm1 keeps it exact for
    large C1 where 1 - exp(...) underflows."""
    return 2.0 * c1 * (-math.expm1(-1.0 / (2.0 * c1)))


def alpha_chain_margin(lam: float) -> tuple[float, float, float]:
    """(lhs, rhs, margin) of the constant chain at ratio level lam."""
    if not (0.0 <= lam < 1.0):
        raise ValueError("lambda must be in [0, 1)")
    c1 = 17.0 / (1.0 - lam) ** 2
    lhs = 0.5 * c1 * increment_alpha(c1)
    rhs = 8.0 / (1.0 - lam) ** 2
    return lhs, rhs, lhs - rhs


# -- the product functional -------------------------------------------------------


@dataclass(frozen=True)
class TauReport:
    measure: str
    function: str
    c_tau: float
    lhs_product: float
    margin: float
    error_bound: float

    @property
    def passed(self) -> bool:
        return self.margin >= 0.0

    def to_dict(self) -> dict:
        return {
            "measure": self.measure,
            "function": self.function,
            "c_tau": self.c_tau,
            "lhs_product": self.lhs_product,
            "margin": self.margin,
            "error_bound": self.error_bound,
        }


def _check_rate(mu: Measure1D, left_slope: float, right_slope: float, what: str):
    rate = mu.exp_decay_rate()
    if not math.isfinite(rate):
        return
    if right_slope >= rate - _SLOPE_RATE_MARGIN or -left_slope >= rate - _SLOPE_RATE_MARGIN:
        raise DivergentIntegralError(
            f"{what}: exponent tail slopes ({left_slope}, {right_slope}) reach the measure's decay rate {rate}"
        )


def tau_functional(
    mu: Measure1D,
    f: PLConvex,
    cost: Cost,
    measure_id: str | None = None,
    function_id: str = "f",
) -> TauReport:
    """Evaluate T(f) = (int e^{f box phi}) (int e^{-f}) with error bound.

    Raises UnboundedBelowError for f without finite infimum and
    DivergentIntegralError when the forward integral cannot converge
    against the measure's exponential tail.
    """
    if not f.is_bounded_below():
        raise UnboundedBelowError("the product functional needs bounded-below f")
    env = infconv_exact(f, cost)
    _check_rate(mu, env.first_slope, env.last_slope, "forward integral")
    fwd = mu.integrate(exp_part=env.piecewise())
    bwd = mu.integrate(exp_part=f.piecewise().scale(-1.0))
    product = fwd.value * bwd.value
    err = abs(fwd.value) * bwd.error + abs(bwd.value) * fwd.error + fwd.error * bwd.error
    return TauReport(
        measure=measure_id or mu.describe(),
        function=function_id,
        c_tau=cost.scale,
        lhs_product=product,
        margin=1.0 + err - product,
        error_bound=err,
    )


# -- randomized + adversarial suite ------------------------------------------------


@dataclass(frozen=True)
class TauSuiteSummary:
    measure: str
    h: float
    lambda_value: float
    c_tau: float
    trials: int
    violations: int
    divergent: int
    worst: TauReport
    worst_function: dict
    adversarial: TauReport | None
    adversarial_function: dict | None
    reports: tuple[TauReport, ...]

    @property
    def passed(self) -> bool:
        return self.violations == 0


def _perturb(f: PLConvex, kind: str, idx: int, delta: float) -> PLConvex | None:
    bps = list(f.breakpoints)
    slopes = list(f.slopes)
    if kind == "b":
        bps[idx] += delta
        if any(b2 <= b1 for b1, b2 in zip(bps, bps[1:])):
            return None
    else:
        slopes[idx] += delta
        if any(s2 < s1 for s1, s2 in zip(slopes, slopes[1:])):
            return None
        if not (slopes[0] <= 0.0 <= slopes[-1]):
            return None
    try:
        return PLConvex(tuple(bps), tuple(slopes), f.anchor)
    except ValueError:
        return None


def _adversarial_climb(mu, cost, f0: PLConvex, budget: int, measure_id: str):
    """Coordinate ascent on the product over breakpoints and slopes."""

    def evaluate(f):
        try:
            return tau_functional(mu, f, cost, measure_id, "adversarial")
        except (DivergentIntegralError, UnboundedBelowError):
            return None

    best_f = f0
    best_r = evaluate(f0)
    if best_r is None:
        return f0, None
    evals = 1
    delta = 0.25
    while evals < budget and delta > 1e-4:
        improved = False
        moves = [("b", i) for i in range(len(best_f.breakpoints))]
        moves += [("s", i) for i in range(len(best_f.slopes))]
        for kind, i in moves:
            for sign in (1.0, -1.0):
                if evals >= budget:
                    break
                cand = _perturb(best_f, kind, i, sign * delta)
                if cand is None:
                    continue
                rep = evaluate(cand)
                evals += 1
                if rep is not None and rep.lhs_product > best_r.lhs_product + 1e-15:
                    best_f, best_r = cand, rep
                    improved = True
        if not improved:
            delta *= 0.5
    return best_f, best_r


def certify_tail_to_tau(
    mu: Measure1D,
    h: float,
    trials: int = 200,
    seed: int = 0,
    lam: float | None = None,
    c_tau: float | None = None,
    c_tau_scale: float = 1.0,
    adversarial_budget: int = 200,
    measure_id: str | None = None,
) -> TauSuiteSummary:
    """Membership at step h implies the product inequality at scale
    C_tau = 17 h / (1 - lambda*)^2: random convex suite + adversarial
    search.  A divergent forward integral is itself a violation (the
    product is +inf), counted separately for diagnostics.
    """
    measure_id = measure_id or mu.describe()
    if lam is None:
        lam = lambda_star(mu, h).lambda_star
    if not (0.0 <= lam < 1.0):
        raise NotInClassError(f"tail ratio level {lam} leaves no finite cost scale")
    if c_tau is None:
        c_tau = 17.0 * h / (1.0 - lam) ** 2
    c_tau = c_tau * c_tau_scale
    cost = Cost(c_tau)
    rng = np.random.default_rng(seed)

    reports = []
    divergent = 0
    violations = 0
    worst = None
    worst_f = None
    for i in range(trials):
        f = random_plconvex(rng, bounded_below=True)
        try:
            rep = tau_functional(mu, f, cost, measure_id, f"random(trial={i})")
        except DivergentIntegralError:
            divergent += 1
            violations += 1
            rep = TauReport(measure_id, f"random(trial={i})", c_tau, math.inf, -math.inf, 0.0)
        reports.append(rep)
        if worst is None or rep.margin < worst.margin:
            worst = rep
            worst_f = f

    adv_rep = None
    adv_f = None
    if worst_f is not None and adversarial_budget > 0 and math.isfinite(worst.margin):
        adv_f, adv_rep = _adversarial_climb(mu, cost, worst_f, adversarial_budget, measure_id)
        if adv_rep is not None and not adv_rep.passed:
            violations += 1
    return TauSuiteSummary(
        measure=measure_id,
        h=h,
        lambda_value=lam,
        c_tau=c_tau,
        trials=trials,
        violations=violations + sum(1 for r in reports if math.isfinite(r.margin) and r.margin < 0.0),
        divergent=divergent,
        worst=worst,
        worst_function=worst_f.to_dict() if worst_f is not None else {},
        adversarial=adv_rep,
        adversarial_function=adv_f.to_dict() if adv_f is not None else None,
        reports=tuple(reports),
    )


# -- increment inequalities ---------------------------------------------------------


@dataclass(frozen=True)
class IncrementReport:
    name: str
    measure: str
    constant: float
    lhs: float
    rhs: float
    slack: float
    error_bound: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "measure": self.measure,
            "constant": self.constant,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "slack": self.slack,
            "error_bound": self.error_bound,
            "passed": self.passed,
        }


def _halfline_class_check(mu_plus, h: float, lam: float):
    """tail(x+h) <= lam * tail(x) on probe points of the half-line."""
    probes = {0.0}
    for p, _ in mu_plus.atoms():
        probes.add(p)
        probes.add(math.nextafter(p, math.inf))
        probes.add(max(0.0, p - h))
    hi = mu_plus.quantile_tail(1e-10)
    probes |= set(np.linspace(0.0, max(hi, h), 1024))
    for x in probes:
        t0 = mu_plus.tail(x)
        t1 = mu_plus.tail(x + h)
        if t1 > lam * t0 + 1e-9:
            raise NotInClassError(f"half-line tail ratio fails at x={x}: {t1} > {lam} * {t0}")


def _grid_function(xs, ys) -> PiecewisePoly:
    """Nondecreasing grid function, zero on x <= 0, linear between knots,
    linearly extended beyond the last knot."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.ndim != 1 or xs.shape != ys.shape or len(xs) < 2:
        raise ValueError("need equal-length 1-d grids with >= 2 knots")
    if xs[0] != 0.0 or abs(ys[0]) > 1e-12:
        raise ValueError("grid must start at x=0 with value 0")
    if np.any(np.diff(xs) <= 0):
        raise ValueError("grid x values must be strictly increasing")
    if np.any(np.diff(ys) < -1e-12) or np.any(ys < -1e-12):
        raise ValueError("grid values must be nonnegative and nondecreasing")
    breaks = [float(x) for x in xs]
    coeffs = [(0.0,)]  # zero left of the first knot
    for i in range(len(xs) - 1):
        s = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i])
        coeffs.append((float(ys[i] - s * xs[i]), float(s)))
    s_last = (ys[-1] - ys[-2]) / (xs[-1] - xs[-2])
    coeffs.append((float(ys[-1] - s_last * xs[-1]), float(s_last)))
    # the final knot separates the last segment from its linear extension
    return PiecewisePoly(tuple(breaks), tuple(coeffs))


def certify_halfline_increment(
    mu_plus,
    h: float,
    lam: float,
    grid_x,
    grid_y,
    name: str = "g",
    tolerance: float = 1e-8,
) -> IncrementReport:
    """For nondecreasing g with g(0) = 0 on a half-line measure in the
    tail-ratio class:  int g^2 <= (2/(1-lam))^2 int (g(x) - g(x-h))^2."""
    if not (0.0 <= lam < 1.0):
        raise NotInClassError(f"ratio level {lam} not in [0, 1)")
    _halfline_class_check(mu_plus, h, lam)
    g = _grid_function(grid_x, grid_y)
    inc = g - g.shift_arg(h)
    lhs = mu_plus.integrate(None, g * g)
    rhs_int = mu_plus.integrate(None, inc * inc)
    k = (2.0 / (1.0 - lam)) ** 2
    rhs = k * rhs_int.value
    err = lhs.error + k * rhs_int.error
    slack = rhs - lhs.value
    passed = lhs.value <= rhs + err + tolerance * max(1.0, abs(lhs.value), abs(rhs))
    return IncrementReport(
        name=name,
        measure=mu_plus.describe(),
        constant=k,
        lhs=lhs.value,
        rhs=rhs,
        slack=slack,
        error_bound=err,
        passed=bool(passed),
    )


def certify_exponential_increment(
    mu: Measure1D,
    h: float,
    lam: float,
    f: PLConvex,
    name: str = "f",
    tolerance: float = 1e-8,
) -> IncrementReport:
    """For convex f with f(0) = 0 on a symmetric measure in the class:

        int e^f + int e^{-f} - 2  <=  (8/(1-lam)^2) int e^f (Df)^2 dmu.
    """
    if not (0.0 <= lam < 1.0):
        raise NotInClassError(f"ratio level {lam} not in [0, 1)")
    cert = lambda_star(mu, h)
    if cert.lambda_star > lam + 1e-9:
        raise NotInClassError(f"lambda*(h={h}) = {cert.lambda_star} exceeds {lam}")
    if abs(f(0.0)) > 1e-9:
        raise ValueError("f(0) must vanish")
    rate = mu.exp_decay_rate()
    if math.isfinite(rate):
        worst = max(abs(f.slopes[0]), abs(f.slopes[-1]))
        if worst >= rate - _SLOPE_RATE_MARGIN:
            raise DivergentIntegralError(f"|f'| reaches {worst} >= decay rate {rate}")
    fpp = f.piecewise()
    df = discrete_gradient(f, h)
    fwd = mu.integrate(exp_part=fpp)
    bwd = mu.integrate(exp_part=fpp.scale(-1.0))
    dpp = df.piecewise()
    rhs_int = mu.integrate(exp_part=fpp, poly_part=dpp * dpp)
    k = 8.0 / (1.0 - lam) ** 2
    lhs = fwd.value + bwd.value - 2.0
    rhs = k * rhs_int.value
    err = fwd.error + bwd.error + k * rhs_int.error
    passed = lhs <= rhs + err + tolerance * max(1.0, abs(lhs), abs(rhs))
    return IncrementReport(
        name=name,
        measure=mu.describe(),
        constant=k,
        lhs=lhs,
        rhs=rhs,
        slack=rhs - lhs,
        error_bound=err,
        passed=bool(passed),
    )


# -- documented default suites ------------------------------------------------------


def default_halfline_suite(mu_plus, h: float, rng: np.random.Generator, random_count: int = 8):
    """Named (name, grid_x, grid_y) triples: ramps, hinges, saturating
    profiles, and random nondecreasing step accumulations."""
    hi = max(mu_plus.quantile_tail(1e-8) + 2.0 * h, 4.0 * h)
    xs = np.linspace(0.0, hi, 96)
    out = [
        ("identity_ramp", xs, xs.copy()),
        ("saturating", xs, np.minimum(xs, 0.25 * hi)),
    ]
    for frac in (0.1, 0.35, 0.6):
        u = frac * hi
        out.append((f"hinge(u={u:.3g})", xs, np.maximum(xs - u, 0.0)))
    for i in range(random_count):
        steps = np.abs(rng.normal(0.0, 1.0, size=len(xs)))
        steps[0] = 0.0
        ys = np.cumsum(steps)
        out.append((f"random(trial={i})", xs, ys))
    return out


def default_exponential_suite(
    mu: Measure1D,
    h: float,
    rng: np.random.Generator,
    random_count: int = 8,
):
    """Named (name, PLConvex) pairs with f(0) = 0: monotone hinges, their
    reflections, symmetric non-monotone shapes, and random convex
    functions with slopes inside the integrability budget."""
    rate = mu.exp_decay_rate()
    cap = 2.0 if math.isinf(rate) else 0.45 * rate
    out = []
    for s in (0.3 * cap, 0.9 * cap):
        for u in (0.0, h):
            mono = PLConvex((u,), (0.0, s), (u, 0.0))
            out.append((f"monotone(s={s:.3g},u={u:.3g})", mono))
            out.append((f"reflected(s={s:.3g},u={u:.3g})", mono.reflect()))
        out.append((f"vee(s={s:.3g})", PLConvex((0.0,), (-s, s), (0.0, 0.0))))
        out.append(
            (f"flat_vee(s={s:.3g})", PLConvex((-h, h), (-s, 0.0, s), (0.0, 0.0)))
        )
    for i in range(random_count):
        k = int(rng.integers(1, 7))
        bps = np.sort(rng.uniform(-4.0, 4.0, size=k))
        for j in range(1, k):
            if bps[j] <= bps[j - 1]:
                bps[j] = math.nextafter(bps[j - 1], math.inf)
        slopes = np.sort(rng.normal(0.0, 1.0, size=k + 1))
        m = np.max(np.abs(slopes))
        if m > 0:
            slopes = slopes * (0.9 * cap / max(m, 0.9 * cap))
        f = PLConvex(tuple(bps), tuple(slopes), (0.0, 0.0))
        out.append((f"random(trial={i})", f))
    return out


# -- downstream variance bound --------------------------------------------------------


@dataclass(frozen=True)
class VarianceSuiteSummary:
    measure: str
    c_tau: float
    bound_constant: float
    trials: int
    violations: int
    worst_slack: float
    worst_function: dict | None

    @property
    def passed(self) -> bool:
        return self.violations == 0


def certify_tau_to_poincare(
    mu: Measure1D,
    c_tau: float,
    trials: int = 200,
    seed: int = 0,
    tolerance: float = 1e-8,
    measure_id: str | None = None,
) -> VarianceSuiteSummary:
    """Var(f) <= (C_tau^2 / 2) * int (f')^2 dmu over a random convex suite."""
    cp = 0.5 * c_tau * c_tau
    rng = np.random.default_rng(seed)
    violations = 0
    worst = math.inf
    worst_f = None
    for _ in range(trials):
        f = random_plconvex(rng)
        v = variance(mu, f)
        e = dirichlet_energy(mu, f)
        slack = cp * e.value - v.value
        budget = v.error + cp * e.error + tolerance * max(1.0, v.value, cp * e.value)
        if slack < -budget:
            violations += 1
        if slack < worst:
            worst = slack
            worst_f = f
    return VarianceSuiteSummary(
        measure=measure_id or mu.describe(),
        c_tau=c_tau,
        bound_constant=cp,
        trials=trials,
        violations=violations,
        worst_slack=worst,
        worst_function=worst_f.to_dict() if worst_f is not None else None,
    )
