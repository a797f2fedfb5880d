"""Infimum convolution of convex piecewise-linear functions with
Huber-type costs.

The cost is ``phi(x) = phi0(x / C)`` where phi0 is quadratic ``x^2/2`` on
[-1, 1] and ``|x| - 1/2`` outside.  Because phi0 itself factors as an
infimum convolution of a pure quadratic with a Lipschitz cone,

    phi0(x / C) = (x^2 / (2 C^2))  box  (|x| / C),

the exact envelope ``f box phi`` of a PL convex f is computed in two
closed-form stages:

1. quadratic stage (Moreau envelope at parameter t = C^2): alternating
   affine pieces (one per slope of f, shifted by t * slope) and quadratic
   arcs (one per breakpoint);
2. Lipschitz stage at level L = 1/C: slopes of the stage-1 envelope are
   clipped to [-L, L], with affine continuations outside the clip points
   (which may fall inside a quadratic arc).

The same engine at general (t, L) serves the rescaled cost
``phi1 = phi0(. / h) / C1`` (t = C1 h^2, L = 1/(C1 h)) used by the
envelope-drop certificate.  The result is finite iff the first slope of f
is <= L and the last is >= -L.

A grid fallback evaluates the envelope by direct minimization over a
shared uniform grid; the candidate matrix ``f[j] + phi(x_i - y_j)`` has
the Monge property for any f (phi convex), so the minimizing index is
nondecreasing in i and the sweep is O(n) for convex f values and
O(n log n) via divide and conquer otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .convexfn import PLConvex, discrete_gradient
from .errors import GridMismatchError, SlopeBoundError, UnboundedBelowError
from .piecewise import PiecewisePoly

__all__ = [
    "Cost",
    "cost_eval",
    "EnvelopeFunction",
    "GridInfConv",
    "infconv_exact",
    "infconv_grid",
    "EnvelopeDropReport",
    "envelope_drop_certificate",
]


@dataclass(frozen=True)
class Cost:
    """phi(x) = phi0(x / scale), quadratic near 0, slope 1/scale far out."""

    scale: float

    def __post_init__(self):
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise ValueError("cost scale must be positive and finite")

    @staticmethod
    def phi0(u: float) -> float:
        u = abs(u)
        if u <= 1.0:
            return 0.5 * u * u
        return u - 0.5

    def __call__(self, x: float) -> float:
        return self.phi0(x / self.scale)

    def eval_array(self, xs: np.ndarray) -> np.ndarray:
        u = np.abs(np.asarray(xs, dtype=float)) / self.scale
        return np.where(u <= 1.0, 0.5 * u * u, u - 0.5)

    @property
    def quad_param(self) -> float:
        return self.scale * self.scale

    @property
    def lip(self) -> float:
        return 1.0 / self.scale


def cost_eval(cost: Cost, x: float) -> float:
    return cost(x)


@dataclass(frozen=True)
class EnvelopeFunction:
    """Piecewise function with degree <= 2 pieces plus the minimizer map:
    ``argmin_y f(y) + phi(x - y) = m0 + m1 * x`` piece by piece."""

    breaks: tuple[float, ...]
    coeffs: tuple[tuple[float, ...], ...]
    min_map: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if len(self.coeffs) != len(self.breaks) + 1 or len(self.min_map) != len(self.coeffs):
            raise ValueError("inconsistent piece counts")

    def _idx(self, x: float) -> int:
        return int(np.searchsorted(self.breaks, x, side="right"))

    def __call__(self, x: float) -> float:
        c = self.coeffs[self._idx(x)]
        return float(np.polynomial.polynomial.polyval(x, c))

    def eval_array(self, xs: np.ndarray) -> np.ndarray:
        return self.piecewise().eval_array(xs)

    def right_slope(self, x: float) -> float:
        c = self.coeffs[self._idx(x)]
        out = 0.0
        if len(c) > 1:
            out += c[1]
        if len(c) > 2:
            out += 2.0 * c[2] * x
        return out

    def minimizer_at(self, x: float) -> float:
        m0, m1 = self.min_map[self._idx(x)]
        return m0 + m1 * x

    @property
    def first_slope(self) -> float:
        c = self.coeffs[0]
        return c[1] if len(c) > 1 else 0.0

    @property
    def last_slope(self) -> float:
        c = self.coeffs[-1]
        return c[1] if len(c) > 1 else 0.0

    @cached_property
    def _pp(self) -> PiecewisePoly:
        return PiecewisePoly(self.breaks, self.coeffs)

    def piecewise(self) -> PiecewisePoly:
        return self._pp

    def validate(self) -> float:
        """Max continuity defect at the breaks (slope monotonicity is
        checked structurally by the tests)."""
        worst = 0.0
        for i, b in enumerate(self.breaks):
            left = float(np.polynomial.polynomial.polyval(b, self.coeffs[i]))
            right = float(np.polynomial.polynomial.polyval(b, self.coeffs[i + 1]))
            worst = max(worst, abs(left - right))
        return worst

    def to_dict(self) -> dict:
        return {
            "breaks": list(self.breaks),
            "pieces": [list(c) for c in self.coeffs],
        }


def _quad_stage(f: PLConvex, t: float):
    """Moreau envelope segments: list of (lo, hi, coeffs, (m0, m1))."""
    bps, slopes = f.breakpoints, f.slopes
    if not bps:
        s = slopes[0]
        xa, fa = f.anchor
        a0 = fa - s * xa
        return [(-math.inf, math.inf, (a0 - 0.5 * t * s * s, s), (-t * s, 1.0))]
    vals = [f(b) for b in bps]
    segs = []
    lo = -math.inf
    for j in range(len(bps) + 1):
        s = slopes[j]
        # affine stretch carried by slope j
        hi = bps[j] + t * s if j < len(bps) else math.inf
        bref = bps[0] if j == 0 else bps[j - 1]
        vref = vals[0] if j == 0 else vals[j - 1]
        a0 = vref - s * bref
        if hi > lo:
            segs.append((lo, hi, (a0 - 0.5 * t * s * s, s), (-t * s, 1.0)))
            lo = hi
        if j < len(bps):
            # quadratic arc around breakpoint j
            b, v = bps[j], vals[j]
            hi = b + t * slopes[j + 1]
            if hi > lo:
                segs.append((lo, hi, (v + b * b / (2.0 * t), -b / t, 1.0 / (2.0 * t)), (b, 0.0)))
                lo = hi
    return segs


def _seg_eval(seg, x: float) -> float:
    return float(np.polynomial.polynomial.polyval(x, seg[2]))


def _seg_at(segs, x: float):
    for seg in segs:
        if seg[0] <= x <= seg[1]:
            return seg
    return segs[-1] if x > segs[-1][1] else segs[0]


def _envelope(f: PLConvex, t: float, L: float) -> EnvelopeFunction:
    """f box [quad_t box L|.|] for general parameters."""
    if f.slopes[0] > L or f.slopes[-1] < -L:
        raise UnboundedBelowError("infimum convolution is -inf: slopes exceed the Lipschitz level on one side")
    segs = _quad_stage(f, t)
    bps, slopes = f.breakpoints, f.slopes
    u_lo = -math.inf
    if slopes[0] < -L:
        j = next(i for i, s in enumerate(slopes) if s >= -L)
        u_lo = bps[j - 1] - t * L
    u_hi = math.inf
    if slopes[-1] > L:
        j = next(i for i, s in enumerate(slopes) if s > L)
        u_hi = bps[j - 1] + t * L
    out = []
    if u_lo > -math.inf:
        seg = _seg_at(segs, u_lo)
        v = _seg_eval(seg, u_lo)
        y = seg[3][0] + seg[3][1] * u_lo
        out.append((-math.inf, u_lo, (v + L * u_lo, -L), (y, 0.0)))
    for lo, hi, coeffs, mmap in segs:
        a, b = max(lo, u_lo), min(hi, u_hi)
        if b > a:
            out.append((a, b, coeffs, mmap))
    if u_hi < math.inf:
        seg = _seg_at(segs, u_hi)
        v = _seg_eval(seg, u_hi)
        y = seg[3][0] + seg[3][1] * u_hi
        out.append((u_hi, math.inf, (v - L * u_hi, L), (y, 0.0)))
    breaks = tuple(seg[1] for seg in out[:-1])
    return EnvelopeFunction(
        breaks=breaks,
        coeffs=tuple(seg[2] for seg in out),
        min_map=tuple(seg[3] for seg in out),
    )


def infconv_exact(f: PLConvex, cost: Cost) -> EnvelopeFunction:
    """Exact envelope (f box phi).

    Raises :class:`UnboundedBelowError` when the envelope is identically
    -inf, i.e. f falls faster than the cost's maximal slope on one side.
    Monotone f within the slope budget is accepted (the envelope is then
    finite everywhere even though f has no minimum).
    """
    return _envelope(f, cost.quad_param, cost.lip)


# -- grid fallback -------------------------------------------------------------


@dataclass(frozen=True)
class GridInfConv:
    values: np.ndarray
    argmin: np.ndarray
    method: str
    step: float


def _sweep_grid(fv: np.ndarray, phi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = len(fv)
    out = np.empty(n)
    arg = np.empty(n, dtype=np.int64)
    j = 0
    for i in range(n):
        best = fv[j] + phi[abs(i - j)]
        while j + 1 < n:
            nxt = fv[j + 1] + phi[abs(i - j - 1)]
            if nxt <= best:
                j += 1
                best = nxt
            else:
                break
        out[i] = best
        arg[i] = j
    return out, arg


def _dc_grid(fv: np.ndarray, phi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = len(fv)
    out = np.empty(n)
    arg = np.empty(n, dtype=np.int64)
    stack = [(0, n - 1, 0, n - 1)]
    while stack:
        ilo, ihi, jlo, jhi = stack.pop()
        if ilo > ihi:
            continue
        mid = (ilo + ihi) // 2
        js = np.arange(jlo, jhi + 1)
        cand = fv[jlo : jhi + 1] + phi[np.abs(mid - js)]
        k = int(np.argmin(cand))  # first index on ties: leftmost minimizer
        out[mid] = cand[k]
        arg[mid] = jlo + k
        stack.append((ilo, mid - 1, jlo, jlo + k))
        stack.append((mid + 1, ihi, jlo + k, jhi))
    return out, arg


def infconv_grid(f_values, cost: Cost, grid, method: str = "auto") -> GridInfConv:
    """min_j f[j] + phi(x_i - x_j) over a shared uniform grid.

    ``method``: "auto" picks the monotone sweep when the sampled values
    are convex (nonnegative second differences up to noise) and divide
    and conquer otherwise; both exploit the Monge structure.
    """
    fv = np.asarray(f_values, dtype=float)
    xs = np.asarray(grid, dtype=float)
    if fv.shape != xs.shape or fv.ndim != 1 or len(fv) < 2:
        raise GridMismatchError("values and grid must be equal-length 1-d arrays")
    step = (xs[-1] - xs[0]) / (len(xs) - 1)
    if step <= 0 or np.max(np.abs(np.diff(xs) - step)) > 1e-9 * max(1.0, abs(step)):
        raise GridMismatchError("grid must be uniform")
    phi = cost.eval_array(np.arange(len(fv)) * step)
    if method == "auto":
        d2 = fv[2:] - 2.0 * fv[1:-1] + fv[:-2]
        tol = 1e-9 * max(1.0, float(np.max(np.abs(fv))))
        method = "two_pointer" if d2.min(initial=0.0) >= -tol else "divide_conquer"
    if method == "two_pointer":
        out, arg = _sweep_grid(fv, phi)
    elif method == "divide_conquer":
        out, arg = _dc_grid(fv, phi)
    else:
        raise ValueError(f"unknown method {method!r}")
    return GridInfConv(values=out, argmin=arg, method=method, step=float(step))


# -- envelope-drop certificate --------------------------------------------------


@dataclass(frozen=True)
class EnvelopeDropReport:
    c1: float
    h: float
    max_violation: float
    worst_x: float
    checked: int
    tolerance: float
    passed: bool


def envelope_drop_certificate(
    f: PLConvex,
    c1: float,
    h: float,
    probes: np.ndarray | None = None,
    tolerance: float = 1e-9,
) -> EnvelopeDropReport:
    """Certify that the envelope of f under the rescaled cost
    phi0(./h)/c1 sits below f by at least (c1/2) Df^2 pointwise:

        (f box phi1)(x) <= f(x) - (c1/2) |Df(x)|^2.

    Requires |f'| <= 1/(c1 h) everywhere.
    """
    if not (c1 > 0 and h > 0):
        raise ValueError("c1 and h must be positive")
    L = 1.0 / (c1 * h)
    worst_slope = max(abs(f.slopes[0]), abs(f.slopes[-1]))
    if worst_slope > L * (1.0 + 1e-12):
        raise SlopeBoundError(f"max |slope| {worst_slope} exceeds 1/(c1 h) = {L}")
    env = _envelope(f, c1 * h * h, L)
    df = discrete_gradient(f, h)
    if probes is None:
        pts = set(f.breakpoints)
        pts |= {b + h for b in f.breakpoints} | {b - h for b in f.breakpoints}
        x0 = df.x0
        if math.isfinite(x0):
            pts |= {x0 - h, x0, x0 + h}
        lo = min(f.breakpoints, default=f.anchor[0]) - 5.0 * h - 1.0
        hi = max(f.breakpoints, default=f.anchor[0]) + 5.0 * h + 1.0
        probes = np.unique(np.concatenate([np.linspace(lo, hi, 2001), np.array(sorted(pts), dtype=float)]))
    probes = np.asarray(probes, dtype=float)
    lhs = env.eval_array(probes)
    rhs = f.eval_array(probes) - 0.5 * c1 * df.eval_array(probes) ** 2
    gap = lhs - rhs
    k = int(np.argmax(gap))
    worst = float(gap[k])
    return EnvelopeDropReport(
        c1=c1,
        h=h,
        max_violation=worst,
        worst_x=float(probes[k]),
        checked=len(probes),
        tolerance=tolerance,
        passed=bool(worst <= tolerance),
    )
