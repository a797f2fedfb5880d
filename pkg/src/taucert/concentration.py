"""Monte Carlo checks of dimension-free concentration for product measures.

The scalar certificates bound a cost constant C for each factor; here that
constant is cashed in: a convex set enlarged by a Euclidean ball of radius
s = sqrt(2t)*C plus an l1 ball of radius r = 2t*C must capture all but
exp(-t)/mu(A) of the mass, and convex Lipschitz functions must concentrate
around their median at the matching rate.  All probability estimates carry
Wilson confidence radii, Bonferroni-corrected across the t grid, so a true
inequality does not flake in CI.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.stats import norm as _norm

from .convexfn import PLConvex
from .errors import (
    ConfigError,
    DegenerateInputError,
    NotInClassError,
    NotSymmetricError,
    UnsupportedSetError,
)
from .measure1d import Measure1D, lambda_star, measure_from_dict

__all__ = [
    "ProductMeasure",
    "ConvexSet",
    "HalfSpace",
    "Slab",
    "L2Ball",
    "L1Ball",
    "enlargement_member",
    "cost_ball_support",
    "cost_ball_member",
    "wilson_interval",
    "EnlargementRow",
    "ConcentrationReport",
    "verify_two_level_enlargement",
    "verify_cost_ball_enlargement",
    "LinearFunctional",
    "MaxCoordinate",
    "ComposedConvex",
    "DeviationRow",
    "DeviationReport",
    "verify_lipschitz_deviation",
    "deviation_exponent_slack",
    "set_from_dict",
    "deviation_function_from_dict",
]


# --------------------------------------------------------------------------
# product measure


@dataclass(frozen=True)
class ProductMeasure:
    """Independent product of one-dimensional factors."""

    factors: tuple[Measure1D, ...]

    def __post_init__(self):
        factors = tuple(self.factors)
        object.__setattr__(self, "factors", factors)
        if not factors:
            raise DegenerateInputError("product measure needs at least one factor")
        for fac in factors:
            if not getattr(fac, "symmetric", True):
                raise NotSymmetricError("every factor must be symmetric")

    @property
    def dimension(self) -> int:
        return len(self.factors)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Draw `size` i.i.d. vectors, one column per factor."""
        out = np.empty((size, len(self.factors)))
        for j, fac in enumerate(self.factors):
            out[:, j] = fac.sample(rng, size)
        return out

    def describe(self) -> str:
        kinds = [fac.describe() for fac in self.factors]
        if len(set(kinds)) == 1:
            return f"{kinds[0]}^{len(kinds)}"
        return " x ".join(kinds)


# --------------------------------------------------------------------------
# convex sets and their two-level enlargements
#
# x lies in A + s*B2 + r*B1 iff some l1 spend y with |y|_1 <= r brings x - y
# within l2 distance s of A.  For the supported families that inner problem
# has a closed form or a sorted-coordinate exact solution.


def _as_matrix(x) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        return arr[None, :], True
    if arr.ndim == 2:
        return arr, False
    raise UnsupportedSetError("points must be a vector or a matrix of rows")


def _residual_after_l1_spend(diff: np.ndarray, r: float) -> np.ndarray:
    """Rowwise min of |d - y|_2 over |y|_1 <= r.

    The minimizer soft-thresholds the magnitudes at the level theta solving
    sum max(|d_i| - theta, 0) = r, found by sorting; the residual keeps
    min(|d_i|, theta) per coordinate.
    """
    mags = np.abs(diff)
    if r <= 0.0:
        return np.sqrt(np.sum(mags * mags, axis=1))
    inside = np.sum(mags, axis=1) <= r
    desc = np.sort(mags, axis=1)[:, ::-1]
    csum = np.cumsum(desc, axis=1)
    ranks = np.arange(1, diff.shape[1] + 1, dtype=float)
    active = desc > (csum - r) / ranks
    k = np.maximum(np.sum(active, axis=1), 1)
    top = np.take_along_axis(csum, (k - 1)[:, None], axis=1)[:, 0]
    theta = np.maximum((top - r) / k, 0.0)
    resid = np.minimum(mags, theta[:, None])
    out = np.sqrt(np.sum(resid * resid, axis=1))
    out[inside] = 0.0
    return out


def _residual_after_l2_spend(diff: np.ndarray, s: float) -> np.ndarray:
    """Rowwise min of |d - z|_1 over |z|_2 <= s.

    The optimal spend caps each magnitude at a common level nu with
    sum min(|d_i|, nu)^2 = s^2; the leftover l1 mass is sum max(|d_i|-nu, 0).
    """
    mags = np.abs(diff)
    total = np.sum(mags, axis=1)
    if s <= 0.0:
        return total
    n = diff.shape[1]
    asc = np.sort(mags, axis=1)
    sq = asc * asc
    psq = np.cumsum(sq, axis=1)
    # value of sum min(m_i, nu)^2 at nu = asc[j]
    counts = np.arange(n - 1, -1, -1, dtype=float)
    at_knots = psq + sq * counts
    ssq = s * s
    hit = at_knots >= ssq
    inside = ~hit[:, -1]
    j = np.argmax(hit, axis=1)
    below_sq = np.take_along_axis(psq, j[:, None], axis=1)[:, 0] - np.take_along_axis(
        sq, j[:, None], axis=1
    )[:, 0]
    n_above = float(n) - j
    nu = np.sqrt(np.maximum(ssq - below_sq, 0.0) / n_above)
    c1 = np.cumsum(asc, axis=1)
    below_1 = np.take_along_axis(c1, j[:, None], axis=1)[:, 0] - np.take_along_axis(
        asc, j[:, None], axis=1
    )[:, 0]
    out = np.maximum(total - below_1 - nu * n_above, 0.0)
    out[inside] = 0.0
    return out


class ConvexSet:
    """Base for the supported convex families.

    Subclasses give an exact membership test and an exact membership test
    for the enlargement A + s*B2 + r*B1, both vectorized over sample rows.
    """

    family = "convex"

    @property
    def dimension(self) -> int:
        raise NotImplementedError

    def contains(self, x) -> np.ndarray:
        raise NotImplementedError

    def enlarged_contains(self, x, s: float, r: float) -> np.ndarray:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


def _check_direction(a) -> np.ndarray:
    arr = np.asarray(a, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise DegenerateInputError("direction must be a nonempty vector")
    if not np.all(np.isfinite(arr)):
        raise DegenerateInputError("direction must be finite")
    if not np.any(arr != 0.0):
        raise DegenerateInputError("direction must be nonzero")
    return arr


@dataclass(frozen=True)
class HalfSpace(ConvexSet):
    """{x : <a, x> <= c}."""

    a: tuple
    c: float
    family = "half_space"

    def __post_init__(self):
        arr = _check_direction(self.a)
        object.__setattr__(self, "a", tuple(float(v) for v in arr))
        object.__setattr__(self, "c", float(self.c))
        if not math.isfinite(self.c):
            raise DegenerateInputError("offset must be finite")

    @property
    def dimension(self) -> int:
        return len(self.a)

    def _margins(self, x):
        mat, single = _as_matrix(x)
        return mat @ np.asarray(self.a), single

    def contains(self, x):
        m, single = self._margins(x)
        out = m <= self.c
        return bool(out[0]) if single else out

    def enlarged_contains(self, x, s, r):
        m, single = self._margins(x)
        arr = np.asarray(self.a)
        grow = s * float(np.linalg.norm(arr)) + r * float(np.max(np.abs(arr)))
        out = m <= self.c + grow
        return bool(out[0]) if single else out

    def to_dict(self):
        return {"kind": "half_space", "a": list(self.a), "c": self.c}


@dataclass(frozen=True)
class Slab(ConvexSet):
    """{x : |<a, x>| <= c}, a symmetric band."""

    a: tuple
    c: float
    family = "slab"

    def __post_init__(self):
        arr = _check_direction(self.a)
        object.__setattr__(self, "a", tuple(float(v) for v in arr))
        object.__setattr__(self, "c", float(self.c))
        if not (math.isfinite(self.c) and self.c >= 0.0):
            raise DegenerateInputError("slab half-width must be finite and >= 0")

    @property
    def dimension(self) -> int:
        return len(self.a)

    def contains(self, x):
        mat, single = _as_matrix(x)
        out = np.abs(mat @ np.asarray(self.a)) <= self.c
        return bool(out[0]) if single else out

    def enlarged_contains(self, x, s, r):
        mat, single = _as_matrix(x)
        arr = np.asarray(self.a)
        grow = s * float(np.linalg.norm(arr)) + r * float(np.max(np.abs(arr)))
        out = np.abs(mat @ arr) <= self.c + grow
        return bool(out[0]) if single else out

    def to_dict(self):
        return {"kind": "slab", "a": list(self.a), "c": self.c}


def _check_center(center) -> np.ndarray:
    arr = np.asarray(center, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise DegenerateInputError("center must be a nonempty vector")
    if not np.all(np.isfinite(arr)):
        raise DegenerateInputError("center must be finite")
    return arr


@dataclass(frozen=True)
class L2Ball(ConvexSet):
    center: tuple
    radius: float
    family = "l2_ball"

    def __post_init__(self):
        arr = _check_center(self.center)
        object.__setattr__(self, "center", tuple(float(v) for v in arr))
        object.__setattr__(self, "radius", float(self.radius))
        if not (math.isfinite(self.radius) and self.radius >= 0.0):
            raise DegenerateInputError("radius must be finite and >= 0")

    @property
    def dimension(self) -> int:
        return len(self.center)

    def contains(self, x):
        mat, single = _as_matrix(x)
        d = mat - np.asarray(self.center)
        out = np.sqrt(np.sum(d * d, axis=1)) <= self.radius
        return bool(out[0]) if single else out

    def enlarged_contains(self, x, s, r):
        mat, single = _as_matrix(x)
        d = mat - np.asarray(self.center)
        out = _residual_after_l1_spend(d, r) <= self.radius + s
        return bool(out[0]) if single else out

    def to_dict(self):
        return {"kind": "l2_ball", "center": list(self.center), "radius": self.radius}


@dataclass(frozen=True)
class L1Ball(ConvexSet):
    center: tuple
    radius: float
    family = "l1_ball"

    def __post_init__(self):
        arr = _check_center(self.center)
        object.__setattr__(self, "center", tuple(float(v) for v in arr))
        object.__setattr__(self, "radius", float(self.radius))
        if not (math.isfinite(self.radius) and self.radius >= 0.0):
            raise DegenerateInputError("radius must be finite and >= 0")

    @property
    def dimension(self) -> int:
        return len(self.center)

    def contains(self, x):
        mat, single = _as_matrix(x)
        out = np.sum(np.abs(mat - np.asarray(self.center)), axis=1) <= self.radius
        return bool(out[0]) if single else out

    def enlarged_contains(self, x, s, r):
        mat, single = _as_matrix(x)
        d = mat - np.asarray(self.center)
        out = _residual_after_l2_spend(d, s) <= self.radius + r
        return bool(out[0]) if single else out

    def to_dict(self):
        return {"kind": "l1_ball", "center": list(self.center), "radius": self.radius}


def enlargement_member(set_: ConvexSet, x, s: float, r: float):
    """Exact membership of x in A + s*B2 + r*B1."""
    if not isinstance(set_, (HalfSpace, Slab, L2Ball, L1Ball)):
        raise UnsupportedSetError(f"unsupported set type {type(set_).__name__}")
    if s < 0.0 or r < 0.0:
        raise ConfigError("enlargement radii must be >= 0")
    return set_.enlarged_contains(x, s, r)


# --------------------------------------------------------------------------
# cost ball {y : sum phi0(y_i / C) <= t}


def cost_ball_support(a, c_tau: float, t: float) -> float:
    """sup of <a, y> over the cost ball at level t.

    With all coordinates in the quadratic regime the optimum is the scaled
    direction a itself, giving sqrt(2t)*C*|a|_2; once the top coordinate
    saturates the kink the leftover budget buys linear growth there.
    """
    arr = _check_direction(a)
    if t < 0.0:
        raise ConfigError("cost level must be >= 0")
    if t == 0.0:
        return 0.0
    l2 = float(np.linalg.norm(arr))
    linf = float(np.max(np.abs(arr)))
    if 2.0 * t <= (l2 / linf) ** 2:
        return c_tau * math.sqrt(2.0 * t) * l2
    return c_tau * (t * linf + l2 * l2 / (2.0 * linf))


def cost_ball_member(x, c_tau: float, t: float):
    """Whether sum phi0(x_i / C) <= t, vectorized over rows."""
    mat, single = _as_matrix(x)
    u = np.abs(mat / c_tau)
    cost = np.where(u <= 1.0, 0.5 * u * u, u - 0.5)
    out = np.sum(cost, axis=1) <= t
    return bool(out[0]) if single else out


# --------------------------------------------------------------------------
# confidence intervals


def wilson_interval(successes: int, total: int, alpha: float):
    """Wilson score interval: (estimate, radius, lower, upper)."""
    if total <= 0:
        raise DegenerateInputError("need at least one sample")
    z = float(_norm.isf(alpha / 2.0))
    p = successes / total
    denom = 1.0 + z * z / total
    center = (p + z * z / (2.0 * total)) / denom
    rad = z * math.sqrt(p * (1.0 - p) / total + z * z / (4.0 * total * total)) / denom
    return p, rad, max(center - rad, 0.0), min(center + rad, 1.0)


# --------------------------------------------------------------------------
# set enlargement reports


@dataclass(frozen=True)
class EnlargementRow:
    t: float
    ell2_radius: float
    ell1_radius: float
    empirical: float
    confidence_radius: float
    bound: float
    passed: bool

    def to_dict(self):
        return {
            "t": self.t,
            "ell2_radius": self.ell2_radius,
            "ell1_radius": self.ell1_radius,
            "empirical": self.empirical,
            "confidence_radius": self.confidence_radius,
            "bound": self.bound,
            "passed": self.passed,
        }


@dataclass(frozen=True)
class ConcentrationReport:
    kind: str
    measure: str
    set_family: str
    dimension: int
    samples: int
    seed: int
    confidence: float
    c_tau: float
    base_probability: float
    base_confidence_radius: float
    rows: tuple = field(default_factory=tuple)
    exact_geometry: bool = True

    @property
    def passed(self) -> bool:
        return all(row.passed for row in self.rows)

    def to_dict(self):
        return {
            "kind": self.kind,
            "measure": self.measure,
            "set_family": self.set_family,
            "dimension": self.dimension,
            "samples": self.samples,
            "seed": self.seed,
            "confidence": self.confidence,
            "c_tau": self.c_tau,
            "base_probability": self.base_probability,
            "base_confidence_radius": self.base_confidence_radius,
            "exact_geometry": self.exact_geometry,
            "passed": self.passed,
            "rows": [row.to_dict() for row in self.rows],
        }


def _check_t_grid(t_grid) -> tuple:
    ts = tuple(float(t) for t in t_grid)
    if not ts:
        raise ConfigError("t grid must be nonempty")
    for t in ts:
        if not (math.isfinite(t) and t >= 0.0):
            raise ConfigError("every t must be finite and >= 0")
    return ts


def _check_factors_in_class(pm: ProductMeasure, h: float, lam: float) -> None:
    if not (0.0 <= lam < 1.0):
        raise NotInClassError(f"tail ratio must lie in [0, 1), got {lam}")
    for j, fac in enumerate(pm.factors):
        cert = lambda_star(fac, h, lambda_query=lam)
        if not cert.member:
            raise NotInClassError(
                f"factor {j} ({fac.describe()}) has tail ratio "
                f"{cert.lambda_star:.6g} > {lam:.6g} at step {h}"
            )


def _enlargement_report(
    kind, pm, set_, c_tau, ts, samples, seed, confidence, member_at
):
    if set_.dimension != pm.dimension:
        raise ConfigError(
            f"set dimension {set_.dimension} != measure dimension {pm.dimension}"
        )
    if samples <= 0:
        raise ConfigError("sample count must be positive")
    rng = np.random.default_rng(seed)
    x = pm.sample(rng, samples)
    base_hits = int(np.count_nonzero(set_.contains(x)))
    if base_hits == 0:
        raise DegenerateInputError("base set has empirical mass zero")
    alpha_each = (1.0 - confidence) / (len(ts) + 1)
    p_base, rad_base, lo_base, _ = wilson_interval(base_hits, samples, alpha_each)

    rows = []
    for t in ts:
        s = math.sqrt(2.0 * t) * c_tau
        r = 2.0 * t * c_tau
        hits = int(np.count_nonzero(member_at(x, t, s, r)))
        p_enl, rad_enl, _, _ = wilson_interval(hits, samples, alpha_each)
        bound = 1.0 - math.exp(-t) / p_base
        if lo_base > 0.0:
            slack = math.exp(-t) * (1.0 / lo_base - 1.0 / p_base)
        else:
            slack = math.inf
        radius = rad_enl + slack
        rows.append(
            EnlargementRow(
                t=t,
                ell2_radius=s,
                ell1_radius=r,
                empirical=p_enl,
                confidence_radius=radius,
                bound=bound,
                passed=bool(p_enl >= bound - radius),
            )
        )
    return ConcentrationReport(
        kind=kind,
        measure=pm.describe(),
        set_family=set_.family,
        dimension=pm.dimension,
        samples=samples,
        seed=seed,
        confidence=confidence,
        c_tau=c_tau,
        base_probability=p_base,
        base_confidence_radius=rad_base,
        rows=tuple(rows),
        exact_geometry=True,
    )


def verify_two_level_enlargement(
    pm: ProductMeasure,
    set_: ConvexSet,
    h: float,
    lam: float,
    t_grid,
    samples: int = 100_000,
    seed: int = 0,
    confidence: float = 0.999,
) -> ConcentrationReport:
    """Check mu(A + sqrt(2t)C*B2 + 2tC*B1) >= 1 - exp(-t)/mu(A) empirically.

    Every factor must pass the tail-ratio membership test at (h, lam); the
    cost scale is then C = 17h/(1-lam)^2.  All levels share one sample, so
    the empirical curve is monotone in t by construction.  A row passes when
    the empirical probability clears the plug-in bound minus the combined
    Wilson radius (enlargement estimate plus base-mass uncertainty).
    """
    ts = _check_t_grid(t_grid)
    _check_factors_in_class(pm, h, lam)
    c_tau = 17.0 * h / (1.0 - lam) ** 2

    def member_at(x, t, s, r):
        return enlargement_member(set_, x, s, r)

    return _enlargement_report(
        "two_level", pm, set_, c_tau, ts, samples, seed, confidence, member_at
    )


def verify_cost_ball_enlargement(
    pm: ProductMeasure,
    set_: ConvexSet,
    c_tau: float,
    t_grid,
    samples: int = 100_000,
    seed: int = 0,
    confidence: float = 0.999,
) -> ConcentrationReport:
    """Check mu(A + B_cost(t)) >= 1 - exp(-t)/mu(A) empirically.

    B_cost(t) is the separable Huber cost ball {y : sum phi0(y_i/C) <= t}.
    For a half space the enlarged membership is exact via the support
    function of the cost ball.  Other families fall back on the two-level
    superset sqrt(2t)C*B2 + 2tC*B1, which the cost ball is contained in, so
    the check is conservative; the report flags this with
    exact_geometry=False.
    """
    ts = _check_t_grid(t_grid)
    if not (math.isfinite(c_tau) and c_tau > 0.0):
        raise ConfigError("cost scale must be positive and finite")
    exact = isinstance(set_, HalfSpace)

    if exact:
        arr = np.asarray(set_.a)

        def member_at(x, t, s, r):
            mat, _ = _as_matrix(x)
            return mat @ arr <= set_.c + cost_ball_support(arr, c_tau, t)

    else:

        def member_at(x, t, s, r):
            return enlargement_member(set_, x, s, r)

    report = _enlargement_report(
        "cost_ball", pm, set_, c_tau, ts, samples, seed, confidence, member_at
    )
    if not exact:
        report = replace(report, exact_geometry=False)
    return report


# --------------------------------------------------------------------------
# convex Lipschitz deviation around the median


class DeviationFunction:
    """Convex function of a sample vector with known Lipschitz constants."""

    name = "f"

    @property
    def l2_constant(self) -> float:
        raise NotImplementedError

    @property
    def l1_constant(self) -> float:
        raise NotImplementedError

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class LinearFunctional(DeviationFunction):
    """x -> <w, x>; Lipschitz |w|_2 in l2 and |w|_inf in l1."""

    weights: tuple
    name = "linear"

    def __post_init__(self):
        arr = _check_direction(self.weights)
        object.__setattr__(self, "weights", tuple(float(v) for v in arr))

    @property
    def l2_constant(self):
        return float(np.linalg.norm(self.weights))

    @property
    def l1_constant(self):
        return float(np.max(np.abs(self.weights)))

    def evaluate(self, x):
        mat, single = _as_matrix(x)
        vals = mat @ np.asarray(self.weights)
        return float(vals[0]) if single else vals

    def to_dict(self):
        return {"kind": "linear", "weights": list(self.weights)}


@dataclass(frozen=True)
class MaxCoordinate(DeviationFunction):
    """x -> max_i x_i; 1-Lipschitz in both l2 and l1."""

    name = "max_coordinate"

    @property
    def l2_constant(self):
        return 1.0

    @property
    def l1_constant(self):
        return 1.0

    def evaluate(self, x):
        mat, single = _as_matrix(x)
        vals = np.max(mat, axis=1)
        return float(vals[0]) if single else vals

    def to_dict(self):
        return {"kind": "max_coordinate"}


@dataclass(frozen=True)
class ComposedConvex(DeviationFunction):
    """x -> g(<w, x>) for a convex piecewise-linear g.

    Convex as a composition of a convex function with an affine map; the
    Lipschitz constants are those of the linear part scaled by the largest
    slope magnitude of g.
    """

    function: PLConvex
    weights: tuple
    name = "composed"

    def __post_init__(self):
        arr = _check_direction(self.weights)
        object.__setattr__(self, "weights", tuple(float(v) for v in arr))

    def _slope_scale(self) -> float:
        return max(abs(s) for s in self.function.slopes)

    @property
    def l2_constant(self):
        return self._slope_scale() * float(np.linalg.norm(self.weights))

    @property
    def l1_constant(self):
        return self._slope_scale() * float(np.max(np.abs(self.weights)))

    def evaluate(self, x):
        mat, single = _as_matrix(x)
        vals = self.function.eval_array(mat @ np.asarray(self.weights))
        return float(vals[0]) if single else vals

    def to_dict(self):
        return {
            "kind": "composed",
            "weights": list(self.weights),
            "function": self.function.to_dict(),
        }


@dataclass(frozen=True)
class DeviationRow:
    t: float
    threshold: float
    upper_frequency: float
    upper_radius: float
    lower_frequency: float
    lower_radius: float
    bound: float
    passed: bool

    def to_dict(self):
        return {
            "t": self.t,
            "threshold": self.threshold,
            "upper_frequency": self.upper_frequency,
            "upper_radius": self.upper_radius,
            "lower_frequency": self.lower_frequency,
            "lower_radius": self.lower_radius,
            "bound": self.bound,
            "passed": self.passed,
        }


@dataclass(frozen=True)
class DeviationReport:
    function: str
    measure: str
    dimension: int
    samples: int
    seed: int
    confidence: float
    c_tau: float
    median: float
    ell2_constant: float
    ell1_constant: float
    rows: tuple = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return all(row.passed for row in self.rows)

    def to_dict(self):
        return {
            "function": self.function,
            "measure": self.measure,
            "dimension": self.dimension,
            "samples": self.samples,
            "seed": self.seed,
            "confidence": self.confidence,
            "c_tau": self.c_tau,
            "median": self.median,
            "ell2_constant": self.ell2_constant,
            "ell1_constant": self.ell1_constant,
            "passed": self.passed,
            "rows": [row.to_dict() for row in self.rows],
        }


def verify_lipschitz_deviation(
    pm: ProductMeasure,
    func: DeviationFunction,
    h: float,
    lam: float,
    t_grid,
    samples: int = 100_000,
    seed: int = 0,
    confidence: float = 0.999,
    ell2_constant: float | None = None,
    ell1_constant: float | None = None,
) -> DeviationReport:
    """Check both one-sided median deviation bounds empirically.

    For a convex function that is a-Lipschitz in l2 and b-Lipschitz in l1,
    each tail mu(f > med + C*t) and mu(f < med - C*t) must stay below
    2*exp(-min(t/b, t^2/a^2)/8).  The median is taken from the sample; at
    the default sizes its error is orders of magnitude below C*t.
    """
    ts = _check_t_grid(t_grid)
    _check_factors_in_class(pm, h, lam)
    c_tau = 17.0 * h / (1.0 - lam) ** 2
    a = func.l2_constant if ell2_constant is None else float(ell2_constant)
    b = func.l1_constant if ell1_constant is None else float(ell1_constant)
    if not (a > 0.0 and b > 0.0):
        raise ConfigError("Lipschitz constants must be positive")
    if samples <= 0:
        raise ConfigError("sample count must be positive")

    rng = np.random.default_rng(seed)
    vals = func.evaluate(pm.sample(rng, samples))
    med = float(np.median(vals))
    alpha_each = (1.0 - confidence) / (2 * len(ts))

    rows = []
    for t in ts:
        thr = c_tau * t
        up = int(np.count_nonzero(vals > med + thr))
        dn = int(np.count_nonzero(vals < med - thr))
        p_up, rad_up, _, _ = wilson_interval(up, samples, alpha_each)
        p_dn, rad_dn, _, _ = wilson_interval(dn, samples, alpha_each)
        bound = 2.0 * math.exp(-min(t / b, t * t / (a * a)) / 8.0)
        ok = p_up <= bound + rad_up and p_dn <= bound + rad_dn
        rows.append(
            DeviationRow(
                t=t,
                threshold=thr,
                upper_frequency=p_up,
                upper_radius=rad_up,
                lower_frequency=p_dn,
                lower_radius=rad_dn,
                bound=bound,
                passed=bool(ok),
            )
        )
    return DeviationReport(
        function=func.name,
        measure=pm.describe(),
        dimension=pm.dimension,
        samples=samples,
        seed=seed,
        confidence=confidence,
        c_tau=c_tau,
        median=med,
        ell2_constant=a,
        ell1_constant=b,
        rows=tuple(rows),
    )


def deviation_exponent_slack(a: float, b: float, t: float) -> float:
    """t minus the exponent min(r/b, r^2/a^2)/8 at r = a*sqrt(2t) + 2bt.

    Nonnegative for all positive a, b, t: spending t through the two-level
    radii never claims a better rate than exp(-t).  The deviation bound's
    constant-8 exponent is exactly this margin.
    """
    if not (a > 0.0 and b > 0.0 and t >= 0.0):
        raise ValueError("need a > 0, b > 0, t >= 0")
    r = a * math.sqrt(2.0 * t) + 2.0 * b * t
    return t - min(r / b, r * r / (a * a)) / 8.0


# --------------------------------------------------------------------------
# config parsing


def _require_keys(spec: dict, allowed: set, what: str) -> None:
    extra = set(spec) - allowed
    if extra:
        raise ConfigError(f"unknown keys {sorted(extra)} in {what} spec")


def set_from_dict(spec: dict) -> ConvexSet:
    """Build a convex set from a config mapping; unknown keys are rejected."""
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError("set spec must be a mapping with a 'kind' key")
    kind = spec["kind"]
    try:
        if kind == "half_space":
            _require_keys(spec, {"kind", "a", "c"}, "half_space")
            return HalfSpace(tuple(spec["a"]), spec["c"])
        if kind == "slab":
            _require_keys(spec, {"kind", "a", "c"}, "slab")
            return Slab(tuple(spec["a"]), spec["c"])
        if kind == "l2_ball":
            _require_keys(spec, {"kind", "center", "radius"}, "l2_ball")
            return L2Ball(tuple(spec["center"]), spec["radius"])
        if kind == "l1_ball":
            _require_keys(spec, {"kind", "center", "radius"}, "l1_ball")
            return L1Ball(tuple(spec["center"]), spec["radius"])
    except KeyError as exc:
        raise ConfigError(f"missing key {exc} in {kind} spec") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad {kind} spec: {exc}") from exc
    raise ConfigError(f"unknown set kind {kind!r}")


def deviation_function_from_dict(spec: dict) -> DeviationFunction:
    """Build a deviation test function from a config mapping."""
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError("function spec must be a mapping with a 'kind' key")
    kind = spec["kind"]
    try:
        if kind == "linear":
            _require_keys(spec, {"kind", "weights"}, "linear")
            return LinearFunctional(tuple(spec["weights"]))
        if kind == "max_coordinate":
            _require_keys(spec, {"kind"}, "max_coordinate")
            return MaxCoordinate()
        if kind == "composed":
            _require_keys(spec, {"kind", "weights", "function"}, "composed")
            return ComposedConvex(
                PLConvex.from_dict(spec["function"]), tuple(spec["weights"])
            )
    except KeyError as exc:
        raise ConfigError(f"missing key {exc} in {kind} spec") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad {kind} spec: {exc}") from exc
    raise ConfigError(f"unknown function kind {kind!r}")


def product_from_dict(spec) -> ProductMeasure:
    """Build a product measure from a config list or {factor, copies} mapping."""
    if isinstance(spec, dict):
        _require_keys(spec, {"factor", "copies"}, "product measure")
        try:
            copies = int(spec["copies"])
            factor = measure_from_dict(spec["factor"])
        except KeyError as exc:
            raise ConfigError(f"missing key {exc} in product measure spec") from exc
        if copies <= 0:
            raise ConfigError("copies must be positive")
        return ProductMeasure((factor,) * copies)
    if isinstance(spec, (list, tuple)):
        return ProductMeasure(tuple(measure_from_dict(s) for s in spec))
    raise ConfigError("product measure spec must be a list or {factor, copies}")
