"""Convex piecewise-linear functions on the line.

A :class:`PLConvex` is determined by strictly increasing breakpoints
``b_1 < ... < b_k``, nondecreasing slopes ``s_0 <= ... <= s_k`` (one more
slope than breakpoints; ``s_0`` applies left of ``b_1``), and one anchor
point ``(x_a, f(x_a))`` pinning the additive constant.  Adjacent equal
slopes are merged on construction, so representations are canonical.

The discrete gradient of f at step h is

    Df(x) = f(x) - f(x - h)        for x >  x0 + h
          = f(x) - f(x0)           for x0 - h <= x <= x0 + h
          = f(x) - f(x + h)        for x <  x0 - h

where x0 is a minimizer of f (+-inf for monotone f, in which case a
single branch applies everywhere).  Df is nonnegative and does not
depend on which minimizer is chosen when the minimum is attained on an
interval; the test suite asserts this invariance directly.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import UnboundedBelowError
from .piecewise import PiecewisePoly

__all__ = [
    "PLConvex",
    "DiscreteGradient",
    "SlopeTruncation",
    "discrete_gradient",
    "truncate_slopes",
    "random_plconvex",
]


@dataclass(frozen=True)
class PLConvex:
    breakpoints: tuple[float, ...]
    slopes: tuple[float, ...]
    anchor: tuple[float, float]

    def __post_init__(self):
        bps = tuple(float(b) for b in self.breakpoints)
        slopes = tuple(float(s) for s in self.slopes)
        if len(slopes) != len(bps) + 1:
            raise ValueError("need exactly one more slope than breakpoints")
        if any(b2 <= b1 for b1, b2 in zip(bps, bps[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        if any(s2 < s1 - 1e-15 for s1, s2 in zip(slopes, slopes[1:])):
            raise ValueError("slopes must be nondecreasing (convexity)")
        if any(not math.isfinite(v) for v in bps + slopes + tuple(self.anchor)):
            raise ValueError("breakpoints, slopes, and anchor must be finite")
        # canonical form: drop breakpoints whose two slopes coincide
        keep_b, keep_s = [], [slopes[0]]
        for b, s in zip(bps, slopes[1:]):
            if s == keep_s[-1]:
                continue
            keep_b.append(b)
            keep_s.append(s)
        object.__setattr__(self, "breakpoints", tuple(keep_b))
        object.__setattr__(self, "slopes", tuple(keep_s))
        object.__setattr__(self, "anchor", (float(self.anchor[0]), float(self.anchor[1])))

    # -- evaluation -------------------------------------------------------

    @cached_property
    def _bp_values(self) -> tuple[float, ...]:
        """f at each breakpoint, derived from the anchor."""
        if not self.breakpoints:
            return ()
        vals = [0.0] * len(self.breakpoints)
        xa, fa = self.anchor
        # value at the first breakpoint: integrate slope from the anchor
        vals[0] = fa + self._slope_integral(xa, self.breakpoints[0])
        for i in range(1, len(self.breakpoints)):
            vals[i] = vals[i - 1] + self.slopes[i] * (self.breakpoints[i] - self.breakpoints[i - 1])
        return tuple(vals)

    def _slope_integral(self, x1: float, x2: float) -> float:
        """int_{x1}^{x2} f'(t) dt, signed."""
        if x1 == x2:
            return 0.0
        sign = 1.0
        if x2 < x1:
            x1, x2, sign = x2, x1, -1.0
        cuts = [x1] + [b for b in self.breakpoints if x1 < b < x2] + [x2]
        acc = 0.0
        for a, b in zip(cuts, cuts[1:]):
            acc += self.right_slope(a) * (b - a)
        return sign * acc

    def __call__(self, x: float) -> float:
        if not self.breakpoints:
            xa, fa = self.anchor
            return fa + self.slopes[0] * (x - xa)
        i = bisect_right(self.breakpoints, x)
        if i == 0:
            return self._bp_values[0] + self.slopes[0] * (x - self.breakpoints[0])
        return self._bp_values[i - 1] + self.slopes[i] * (x - self.breakpoints[i - 1])

    def eval_array(self, xs: np.ndarray) -> np.ndarray:
        return self.piecewise().eval_array(np.asarray(xs, dtype=float))

    def right_slope(self, x: float) -> float:
        return self.slopes[bisect_right(self.breakpoints, x)]

    def left_slope(self, x: float) -> float:
        i = bisect_right(self.breakpoints, x)
        if i > 0 and self.breakpoints[i - 1] == x:
            return self.slopes[i - 1]
        return self.slopes[i]

    # -- shape ------------------------------------------------------------

    def is_bounded_below(self) -> bool:
        return self.slopes[0] <= 0.0 <= self.slopes[-1]

    def minimizer(self) -> float:
        """Leftmost minimizer.  Returns the -inf sentinel when f is
        nondecreasing from the far left (minimum approached or attained on
        a left ray) and +inf when f is strictly decreasing overall."""
        if self.slopes[0] >= 0.0:
            return -math.inf
        if self.slopes[-1] < 0.0:
            return math.inf
        i = next(j for j, s in enumerate(self.slopes) if s >= 0.0)
        return self.breakpoints[i - 1]

    def min_value(self) -> float:
        if not self.is_bounded_below():
            raise UnboundedBelowError("function has no finite infimum")
        x0 = self.minimizer()
        if math.isfinite(x0):
            return self(x0)
        # flat left ray: the minimum is the value there
        if self.breakpoints:
            return self._bp_values[0]
        return self.anchor[1]

    def piecewise(self) -> PiecewisePoly:
        """Exact degree-1 PiecewisePoly representation."""
        if not self.breakpoints:
            xa, fa = self.anchor
            return PiecewisePoly((), ((fa - self.slopes[0] * xa, self.slopes[0]),))
        coeffs = []
        for i, s in enumerate(self.slopes):
            bi = self.breakpoints[0] if i == 0 else self.breakpoints[i - 1]
            vi = self._bp_values[0] if i == 0 else self._bp_values[i - 1]
            coeffs.append((vi - s * bi, s))
        return PiecewisePoly(self.breakpoints, tuple(coeffs))

    def reflect(self) -> "PLConvex":
        """x -> f(-x)."""
        return PLConvex(
            tuple(-b for b in reversed(self.breakpoints)),
            tuple(-s for s in reversed(self.slopes)),
            (-self.anchor[0], self.anchor[1]),
        )

    def shift_value(self, c: float) -> "PLConvex":
        return PLConvex(self.breakpoints, self.slopes, (self.anchor[0], self.anchor[1] + c))

    def scaled(self, c: float) -> "PLConvex":
        """Pointwise multiple c*f; c must be positive to preserve convexity."""
        if c <= 0.0:
            raise ValueError("scale must be positive")
        return PLConvex(
            self.breakpoints,
            tuple(c * s for s in self.slopes),
            (self.anchor[0], c * self.anchor[1]),
        )

    def to_dict(self) -> dict:
        return {
            "initial_slope": self.slopes[0],
            "pieces": [[b, s] for b, s in zip(self.breakpoints, self.slopes[1:])],
            "anchor": [self.anchor[0], self.anchor[1]],
        }

    @staticmethod
    def from_dict(d: dict) -> "PLConvex":
        pieces = d.get("pieces", [])
        return PLConvex(
            tuple(p[0] for p in pieces),
            (float(d["initial_slope"]),) + tuple(p[1] for p in pieces),
            tuple(d["anchor"]),
        )


@dataclass(frozen=True)
class DiscreteGradient:
    """Df at step h with the minimizer x0 recorded (possibly +-inf)."""

    f: PLConvex
    h: float
    x0: float

    def __call__(self, x: float) -> float:
        f, h, x0 = self.f, self.h, self.x0
        if x > x0 + h:
            return f(x) - f(x - h)
        if x >= x0 - h:
            return f(x) - f(x0)
        return f(x) - f(x + h)

    @cached_property
    def _pp(self) -> PiecewisePoly:
        f, h, x0 = self.f, self.h, self.x0
        bps = list(f.breakpoints)
        cand = set(bps)
        if math.isinf(x0):
            cand |= {b - h for b in bps} if x0 > 0 else {b + h for b in bps}
        else:
            cand |= {b + h for b in bps} | {b - h for b in bps} | {x0 - h, x0 + h}
        breaks = sorted(cand)
        # drop near-duplicates so slope reconstruction stays exact
        dedup = []
        for b in breaks:
            if not dedup or b - dedup[-1] > 1e-12:
                dedup.append(b)
        breaks = dedup
        coeffs = []
        for i in range(len(breaks) + 1):
            if i == 0:
                x = breaks[0] - 1.0 if breaks else 0.0
            elif i == len(breaks):
                x = breaks[-1] + 1.0
            else:
                x = 0.5 * (breaks[i - 1] + breaks[i])
            if x > x0 + h:
                slope = f.right_slope(x) - f.right_slope(x - h)
            elif x >= x0 - h:
                slope = f.right_slope(x)
            else:
                slope = f.right_slope(x) - f.right_slope(x + h)
            val = self(x)
            coeffs.append((val - slope * x, slope))
        return PiecewisePoly(tuple(breaks), tuple(coeffs))

    def piecewise(self) -> PiecewisePoly:
        return self._pp

    def eval_array(self, xs: np.ndarray) -> np.ndarray:
        return self._pp.eval_array(xs)


def discrete_gradient(f: PLConvex, h: float, minimizer: float | None = None) -> DiscreteGradient:
    """Three-branch discrete gradient; ``minimizer`` overrides the leftmost
    default (any point of the minimizing set gives the same Df)."""
    if not (h > 0 and math.isfinite(h)):
        raise ValueError("h must be positive and finite")
    x0 = f.minimizer() if minimizer is None else float(minimizer)
    return DiscreteGradient(f=f, h=h, x0=x0)


@dataclass(frozen=True)
class SlopeTruncation:
    """g = f with slopes clipped to [-bound, bound]; g agrees with f on
    [clip_lo, clip_hi] and is affine outside."""

    function: PLConvex
    clip_lo: float
    clip_hi: float


def truncate_slopes(f: PLConvex, bound: float) -> SlopeTruncation:
    """Clip slopes to [-bound, bound], keeping g == f on the agreement
    interval [clip_lo, clip_hi] (the closure of where f's slopes already
    respect the bound) and affine continuation outside.

    Requires slopes[0] <= bound and slopes[-1] >= -bound; otherwise no
    agreement point exists and the corresponding Lipschitz regularization
    is identically -inf.
    """
    if not (bound > 0):
        raise ValueError("slope bound must be positive")
    if f.slopes[0] > bound or f.slopes[-1] < -bound:
        raise UnboundedBelowError("all slopes exceed the bound on one side")
    slopes = tuple(min(max(s, -bound), bound) for s in f.slopes)
    # slope i lives on (breakpoints[i-1], breakpoints[i]) with +-inf ends
    clip_lo = -math.inf
    clip_hi = math.inf
    steep_down = [i for i, s in enumerate(f.slopes) if s < -bound]
    if steep_down:
        clip_lo = f.breakpoints[steep_down[-1]]
    steep_up = [i for i, s in enumerate(f.slopes) if s > bound]
    if steep_up:
        clip_hi = f.breakpoints[steep_up[0] - 1]
    if math.isfinite(clip_lo):
        xa = clip_lo
    elif math.isfinite(clip_hi):
        xa = clip_hi
    else:
        xa = f.anchor[0]
    g = PLConvex(f.breakpoints, slopes, (xa, f(xa)))
    return SlopeTruncation(function=g, clip_lo=clip_lo, clip_hi=clip_hi)


def random_plconvex(
    rng: np.random.Generator,
    bounded_below: bool = False,
    max_breaks: int = 12,
    breakpoint_range: tuple[float, float] = (-5.0, 5.0),
    slope_scale: float = 1.0,
    anchor_value_range: tuple[float, float] = (-1.0, 1.0),
) -> PLConvex:
    """Seeded generator: k ~ U{1..max_breaks} breakpoints in the given
    range, sorted gaussian slopes, anchor value from a small range."""
    k = int(rng.integers(1, max_breaks + 1))
    lo, hi = breakpoint_range
    bps = np.sort(rng.uniform(lo, hi, size=k))
    # enforce strict increase under float ties
    for i in range(1, k):
        if bps[i] <= bps[i - 1]:
            bps[i] = math.nextafter(bps[i - 1], math.inf)
    slopes = np.sort(rng.normal(0.0, slope_scale, size=k + 1))
    if bounded_below and not (slopes[0] <= 0.0 <= slopes[-1]):
        slopes = slopes - 0.5 * (slopes[0] + slopes[-1])
    xa = float(rng.uniform(lo, hi))
    va = float(rng.uniform(*anchor_value_range))
    return PLConvex(tuple(bps), tuple(slopes), (xa, va))
