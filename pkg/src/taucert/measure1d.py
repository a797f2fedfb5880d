"""Symmetric probability measures on the line and their tail functionals.

All tail quantities use closed rays: ``tail(x) = mu[x, inf)`` includes an
atom sitting exactly at x, so the tail function is left-continuous with
jumps at atoms.  The central quantity is the tail-ratio supremum

    lambda_star(mu, h) = sup_{x >= 0} tail(x + h) / tail(x),

with the convention 0/0 = 0, which decides membership in the class of
measures whose tails decay by a fixed factor over steps of length h.

The module also computes two Hardy-type quantities for the symmetric
measure (density p on the positive half-line):

* ``muckenhoupt_constant``:  sup_x  mu[x,inf) * int_0^x dy/p(y)
* ``bobkov_goetze_constant``: the same with an extra log(1/mu[x,inf))
  factor; this one is +inf for exponential-like tails and that infinity
  is a first-class, meaningful return value.

Finally, measures know how to integrate ``exp(E(x)) * Q(x)`` for
piecewise-polynomial E (degree <= 2) and Q, reporting a rigorous-in-
practice error bound: atom contributions are exact sums, density pieces
use closed forms where the exponent is affine and adaptive quadrature
otherwise, and unbounded exponential tails use exact antiderivatives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate as _sciint
from scipy import optimize as _sciopt
from scipy import special as _special

from .errors import (
    DivergentIntegralError,
    MeasureInvalidError,
    NoDensityError,
    NotSymmetricError,
)
from .piecewise import PiecewisePoly, exp_poly_integral, merged_pieces, poly_integral

__all__ = [
    "Measure1D",
    "TwoPoint",
    "Uniform",
    "Exponential",
    "Gaussian",
    "AtomDensityMix",
    "PositivePart",
    "MembershipCertificate",
    "IntegralEstimate",
    "tail",
    "lambda_star",
    "muckenhoupt_constant",
    "bobkov_goetze_constant",
    "restrict_positive",
    "measure_from_dict",
]

_MASS_TOL = 1e-12
_SYM_TOL = 1e-10

# below this, exp(c*x) is numerically 1 + c*x and the closed-form
# antiderivative cancels catastrophically; fall back to quadrature
_EXP_WIDTH_MIN = 1e-3

_QUAD_OPTS = dict(epsabs=1e-13, epsrel=1e-11, limit=200)


@dataclass(frozen=True)
class IntegralEstimate:
    value: float
    error: float

    def __add__(self, other: "IntegralEstimate") -> "IntegralEstimate":
        return IntegralEstimate(self.value + other.value, self.error + other.error)


@dataclass(frozen=True)
class MembershipCertificate:
    """Result of a tail-ratio query: the supremum, where it was (nearly)
    attained, and the verdict against an optional queried level."""

    h: float
    lambda_star: float
    witness: float
    lambda_query: float | None = None
    member: bool | None = None

    def to_dict(self) -> dict:
        return {
            "h": self.h,
            "lambda_star": self.lambda_star,
            "witness": self.witness,
            "lambda_query": self.lambda_query,
            "member": self.member,
        }


def _eval_exp_poly(exp_part, poly_part, x: float) -> float:
    v = 1.0
    if exp_part is not None:
        v *= math.exp(exp_part(x))
    if poly_part is not None:
        v *= poly_part(x)
    return v


class Measure1D:
    """Base class; concrete kinds implement tails, atoms, density data,
    sampling, and the absolutely-continuous part of integrals."""

    symmetric: bool = True
    kind: str = "abstract"

    # -- interface -------------------------------------------------------

    def tail(self, x: float) -> float:
        raise NotImplementedError

    def atoms(self) -> tuple[tuple[float, float], ...]:
        return ()

    def density_pieces(self) -> tuple[tuple[float, float, float, float], ...]:
        """Affine density pieces (lo, hi, d0, d1) where applicable."""
        raise NoDensityError(f"{self.kind} has no affine density description")

    def support_bounds(self) -> tuple[float, float]:
        raise NotImplementedError

    def quantile_tail(self, eps: float) -> float:
        """Smallest x (up to support) with tail(x) <= eps; used to size
        probe grids."""
        raise NotImplementedError

    def exp_decay_rate(self) -> float:
        """Largest s with int exp(s|x|) dmu < inf (inf for compactly
        supported or Gaussian kinds)."""
        return math.inf

    def scaled(self, s: float) -> "Measure1D":
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        raise NotImplementedError

    def describe(self) -> str:
        raise NotImplementedError

    # -- integration -----------------------------------------------------

    def integrate(
        self,
        exp_part: PiecewisePoly | None = None,
        poly_part: PiecewisePoly | None = None,
        lo: float = -math.inf,
        hi: float = math.inf,
    ) -> IntegralEstimate:
        """int_{[lo, hi]} exp(E(x)) Q(x) dmu(x) with an error bound."""
        total = 0.0
        err = 0.0
        for pos, mass in self.atoms():
            if lo <= pos <= hi and mass > 0.0:
                total += mass * _eval_exp_poly(exp_part, poly_part, pos)
                err += abs(total) * 1e-16
        est = self._ac_integral(exp_part, poly_part, lo, hi)
        return IntegralEstimate(total + est.value, err + est.error)

    def _ac_integral(self, exp_part, poly_part, lo, hi) -> IntegralEstimate:
        return IntegralEstimate(0.0, 0.0)


# -- shared integration helpers ---------------------------------------------


def _quad_exp_poly(e, q, a: float, b: float) -> IntegralEstimate:
    e = list(e) if e is not None else [0.0]
    q = list(q) if q is not None else [1.0]

    def f(x):
        return math.exp(np.polynomial.polynomial.polyval(x, e)) * np.polynomial.polynomial.polyval(x, q)

    val, abserr = _sciint.quad(f, a, b, **_QUAD_OPTS)
    return IntegralEstimate(val, abserr)


def _piece_integral(e, q, a: float, b: float) -> IntegralEstimate:
    """Integral of exp(E)Q over finite [a, b]; E affine handled in closed
    form, quadratic via quadrature."""
    if a >= b:
        return IntegralEstimate(0.0, 0.0)
    if e is None or len(e) == 1:
        scale = math.exp(e[0]) if e else 1.0
        val = scale * poly_integral(q if q is not None else (1.0,), a, b)
        return IntegralEstimate(val, abs(val) * 1e-14)
    if len(e) == 2:
        c = e[1]
        if abs(c) * (b - a) >= _EXP_WIDTH_MIN:
            val = math.exp(e[0]) * exp_poly_integral(q if q is not None else (1.0,), c, a, b)
            return IntegralEstimate(val, abs(val) * 1e-13)
    return _quad_exp_poly(e, q, a, b)


def _tail_piece_integral(e, q, a: float, b: float) -> IntegralEstimate:
    """Same with a = -inf or b = +inf allowed; exponent must be affine and
    decaying toward the infinite end."""
    e = list(e) if e is not None else [0.0]
    if len(e) > 2:
        raise DivergentIntegralError("non-affine exponent on an unbounded tail")
    c = e[1] if len(e) == 2 else 0.0
    if b == math.inf and c >= 0.0:
        raise DivergentIntegralError(f"right tail exponent slope {c} >= 0")
    if a == -math.inf and c <= 0.0:
        raise DivergentIntegralError(f"left tail exponent slope {c} <= 0")
    val = math.exp(e[0]) * exp_poly_integral(q if q is not None else (1.0,), c, a, b)
    return IntegralEstimate(val, abs(val) * 1e-13)


def _affine_density_integral(exp_part, poly_part, lo, hi, d0, d1) -> IntegralEstimate:
    """Integral of exp(E)Q against density d0 + d1*x over finite [lo, hi]."""
    if lo >= hi:
        return IntegralEstimate(0.0, 0.0)
    breaks, pieces = merged_pieces(exp_part, poly_part)
    cuts = [lo] + [b for b in breaks if lo < b < hi] + [hi]
    total = IntegralEstimate(0.0, 0.0)
    for a, b in zip(cuts, cuts[1:]):
        idx = int(np.searchsorted(breaks, 0.5 * (a + b), side="right"))
        e, q = pieces[idx]
        qd = tuple(np.polynomial.polynomial.polymul(list(q) if q is not None else [1.0], [d0, d1]))
        total = total + _piece_integral(e, qd, a, b)
    return total


# -- concrete kinds -----------------------------------------------------------


@dataclass(frozen=True)
class TwoPoint(Measure1D):
    """Half mass at -a, half at +a."""

    a: float
    symmetric: bool = field(default=True, init=False)
    kind: str = field(default="two_point", init=False)

    def __post_init__(self):
        if not (self.a > 0 and math.isfinite(self.a)):
            raise MeasureInvalidError("two-point location must be positive and finite")

    def tail(self, x: float) -> float:
        if x <= -self.a:
            return 1.0
        if x <= self.a:
            return 0.5
        return 0.0

    def atoms(self):
        return ((-self.a, 0.5), (self.a, 0.5))

    def support_bounds(self):
        return (-self.a, self.a)

    def quantile_tail(self, eps: float) -> float:
        return self.a

    def scaled(self, s: float) -> "TwoPoint":
        return TwoPoint(self.a * s)

    def sample(self, rng, size):
        return self.a * (2.0 * rng.integers(0, 2, size=size) - 1.0)

    def describe(self) -> str:
        return f"two_point(a={self.a:g})"


@dataclass(frozen=True)
class Uniform(Measure1D):
    """Uniform on [-r, r]."""

    r: float
    symmetric: bool = field(default=True, init=False)
    kind: str = field(default="uniform", init=False)

    def __post_init__(self):
        if not (self.r > 0 and math.isfinite(self.r)):
            raise MeasureInvalidError("uniform radius must be positive and finite")

    def tail(self, x: float) -> float:
        if x <= -self.r:
            return 1.0
        if x >= self.r:
            return 0.0
        return (self.r - x) / (2.0 * self.r)

    def density_pieces(self):
        return ((-self.r, self.r, 1.0 / (2.0 * self.r), 0.0),)

    def support_bounds(self):
        return (-self.r, self.r)

    def quantile_tail(self, eps: float) -> float:
        return min(self.r, max(0.0, self.r * (1.0 - 2.0 * eps)))

    def scaled(self, s: float) -> "Uniform":
        return Uniform(self.r * s)

    def sample(self, rng, size):
        return rng.uniform(-self.r, self.r, size=size)

    def describe(self) -> str:
        return f"uniform(r={self.r:g})"

    def _ac_integral(self, exp_part, poly_part, lo, hi):
        d0 = 1.0 / (2.0 * self.r)
        return _affine_density_integral(exp_part, poly_part, max(lo, -self.r), min(hi, self.r), d0, 0.0)


@dataclass(frozen=True)
class Exponential(Measure1D):
    """Two-sided exponential: density (rate/2) exp(-rate |x|)."""

    rate: float
    symmetric: bool = field(default=True, init=False)
    kind: str = field(default="exponential", init=False)

    def __post_init__(self):
        if not (self.rate > 0 and math.isfinite(self.rate)):
            raise MeasureInvalidError("exponential rate must be positive and finite")

    def tail(self, x: float) -> float:
        if x >= 0:
            return 0.5 * math.exp(-self.rate * x)
        return 1.0 - 0.5 * math.exp(self.rate * x)

    def support_bounds(self):
        return (-math.inf, math.inf)

    def quantile_tail(self, eps: float) -> float:
        if eps >= 0.5:
            return 0.0
        return -math.log(2.0 * eps) / self.rate

    def exp_decay_rate(self) -> float:
        return self.rate

    def scaled(self, s: float) -> "Exponential":
        return Exponential(self.rate / s)

    def sample(self, rng, size):
        return rng.laplace(0.0, 1.0 / self.rate, size=size)

    def describe(self) -> str:
        return f"exponential(rate={self.rate:g})"

    def _ac_integral(self, exp_part, poly_part, lo, hi):
        rate = self.rate
        breaks, pieces = merged_pieces(exp_part, poly_part)
        total = IntegralEstimate(0.0, 0.0)
        # halves: (sign of density exponent slope, region)
        for dens_slope, rlo, rhi in ((rate, -math.inf, 0.0), (-rate, 0.0, math.inf)):
            a0, b0 = max(lo, rlo), min(hi, rhi)
            if a0 >= b0:
                continue
            cuts = sorted({a0, b0} | {b for b in breaks if a0 < b < b0})
            for a, b in zip(cuts, cuts[1:]):
                mid = a + 1.0 if b == math.inf else (b - 1.0 if a == -math.inf else 0.5 * (a + b))
                idx = int(np.searchsorted(breaks, mid, side="right"))
                e, q = pieces[idx]
                e_tot = list(e) if e is not None else [0.0]
                while len(e_tot) < 2:
                    e_tot.append(0.0)
                e_tot[0] += math.log(rate / 2.0)
                e_tot[1] += dens_slope
                if math.isinf(a) or math.isinf(b):
                    total = total + _tail_piece_integral(e_tot, q, a, b)
                else:
                    total = total + _piece_integral(e_tot, q, a, b)
        return total


@dataclass(frozen=True)
class Gaussian(Measure1D):
    """Centred normal with standard deviation sigma."""

    sigma: float
    symmetric: bool = field(default=True, init=False)
    kind: str = field(default="gaussian", init=False)

    def __post_init__(self):
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise MeasureInvalidError("gaussian sigma must be positive and finite")

    def tail(self, x: float) -> float:
        return float(_special.ndtr(-x / self.sigma))

    def support_bounds(self):
        return (-math.inf, math.inf)

    def quantile_tail(self, eps: float) -> float:
        if eps >= 0.5:
            return 0.0
        return float(-self.sigma * _special.ndtri(eps))

    def scaled(self, s: float) -> "Gaussian":
        return Gaussian(self.sigma * s)

    def sample(self, rng, size):
        return rng.normal(0.0, self.sigma, size=size)

    def describe(self) -> str:
        return f"gaussian(sigma={self.sigma:g})"

    def _ac_integral(self, exp_part, poly_part, lo, hi):
        sg = self.sigma
        breaks, pieces = merged_pieces(exp_part, poly_part)
        # rightmost/leftmost exponent slopes decide where the integrand peaks
        e_left = list(pieces[0][0]) if pieces[0][0] is not None else [0.0]
        e_right = list(pieces[-1][0]) if pieces[-1][0] is not None else [0.0]
        sl = e_left[1] if len(e_left) > 1 else 0.0
        sr = e_right[1] if len(e_right) > 1 else 0.0
        b_hi = breaks[-1] if breaks else 0.0
        b_lo = breaks[0] if breaks else 0.0
        cut_hi = min(hi, max(b_hi, sr * sg * sg) + 40.0 * sg)
        cut_lo = max(lo, min(b_lo, sl * sg * sg) - 40.0 * sg)
        if cut_lo >= cut_hi:
            return IntegralEstimate(0.0, 0.0)
        log_norm = -math.log(sg * math.sqrt(2.0 * math.pi))
        cuts = sorted({cut_lo, cut_hi} | {b for b in breaks if cut_lo < b < cut_hi})
        total = IntegralEstimate(0.0, 0.0)
        inv2s2 = 1.0 / (2.0 * sg * sg)
        for a, b in zip(cuts, cuts[1:]):
            idx = int(np.searchsorted(breaks, 0.5 * (a + b), side="right"))
            e, q = pieces[idx]
            e_tot = list(e) if e is not None else [0.0]
            while len(e_tot) < 3:
                e_tot.append(0.0)
            e_tot[0] += log_norm
            e_tot[2] -= inv2s2
            total = total + _quad_exp_poly(e_tot, q, a, b)
        # truncated tails are below double-precision underflow (40 sigma)
        return total


def _validate_mix(atoms, pieces):
    for pos, mass in atoms:
        if mass < 0 or not math.isfinite(pos) or not math.isfinite(mass):
            raise MeasureInvalidError("atom masses must be finite and nonnegative")
    last_hi = -math.inf
    for lo, hi, d0, d1 in pieces:
        if not (math.isfinite(lo) and math.isfinite(hi) and hi > lo):
            raise MeasureInvalidError("density pieces need finite lo < hi")
        if lo < last_hi - 1e-15:
            raise MeasureInvalidError("density pieces must be sorted and non-overlapping")
        if d0 + d1 * lo < -1e-12 or d0 + d1 * hi < -1e-12:
            raise MeasureInvalidError("density must be nonnegative on each piece")
        last_hi = hi
    mass = sum(m for _, m in atoms)
    mass += sum(d0 * (hi - lo) + 0.5 * d1 * (hi * hi - lo * lo) for lo, hi, d0, d1 in pieces)
    if abs(mass - 1.0) > _MASS_TOL:
        raise MeasureInvalidError(f"total mass {mass!r} != 1")


@dataclass(frozen=True)
class AtomDensityMix(Measure1D):
    """Finitely many atoms plus an affine-by-pieces density.

    ``atoms`` is a tuple of (position, mass); ``pieces`` a tuple of
    (lo, hi, d0, d1) with density d0 + d1*x on [lo, hi].  Construction
    validates nonnegativity, ordering, unit mass, and (by default)
    symmetry of the whole measure, probed via tail identities.
    """

    atoms_: tuple[tuple[float, float], ...]
    pieces: tuple[tuple[float, float, float, float], ...]
    require_symmetric: bool = True
    kind: str = field(default="atom_density_mix", init=False)

    def __post_init__(self):
        atoms = tuple(sorted((float(p), float(m)) for p, m in self.atoms_))
        pieces = tuple(sorted(tuple(float(v) for v in pc) for pc in self.pieces))
        object.__setattr__(self, "atoms_", atoms)
        object.__setattr__(self, "pieces", pieces)
        _validate_mix(atoms, pieces)
        object.__setattr__(self, "symmetric", bool(self.require_symmetric))
        if self.require_symmetric:
            self._check_symmetry()

    def _check_symmetry(self):
        probes = set()
        for pos, _ in self.atoms_:
            probes.add(pos)
        for lo, hi, _, _ in self.pieces:
            probes.add(lo)
            probes.add(hi)
            probes.add(0.5 * (lo + hi))
        probes |= {-p for p in list(probes)}
        probes.add(0.0)
        atom_mass = dict(self.atoms_)
        for x in sorted(probes):
            lhs = self.tail(x)
            rhs = 1.0 - self.tail(-x) + atom_mass.get(-x, 0.0)
            if abs(lhs - rhs) > _SYM_TOL:
                raise NotSymmetricError(f"tail asymmetry at x={x}: {lhs} vs {rhs}")

    def tail(self, x: float) -> float:
        t = sum(m for p, m in self.atoms_ if p >= x)
        for lo, hi, d0, d1 in self.pieces:
            if hi <= x:
                continue
            a = max(lo, x)
            t += d0 * (hi - a) + 0.5 * d1 * (hi * hi - a * a)
        return min(1.0, max(0.0, t))

    def atoms(self):
        return self.atoms_

    def density_pieces(self):
        return self.pieces

    def support_bounds(self):
        his = [hi for _, hi, _, _ in self.pieces] + [p for p, m in self.atoms_ if m > 0]
        los = [lo for lo, _, _, _ in self.pieces] + [p for p, m in self.atoms_ if m > 0]
        return (min(los), max(his))

    def quantile_tail(self, eps: float) -> float:
        return self.support_bounds()[1]

    def scaled(self, s: float) -> "AtomDensityMix":
        return AtomDensityMix(
            tuple((p * s, m) for p, m in self.atoms_),
            tuple((lo * s, hi * s, d0 / s, d1 / (s * s)) for lo, hi, d0, d1 in self.pieces),
            require_symmetric=self.require_symmetric,
        )

    def describe(self) -> str:
        return f"atom_density_mix(atoms={len(self.atoms_)}, pieces={len(self.pieces)})"

    def _ac_integral(self, exp_part, poly_part, lo, hi):
        total = IntegralEstimate(0.0, 0.0)
        for plo, phi, d0, d1 in self.pieces:
            total = total + _affine_density_integral(exp_part, poly_part, max(lo, plo), min(hi, phi), d0, d1)
        return total

    # segment table for inverse-CDF sampling
    def _cdf_segments(self):
        events = [("atom", p, p, m) for p, m in self.atoms_ if m > 0]
        events += [("piece", lo, hi, d0 * (hi - lo) + 0.5 * d1 * (hi * hi - lo * lo)) for lo, hi, d0, d1 in self.pieces]
        events.sort(key=lambda ev: (ev[1], 0 if ev[0] == "atom" else 1))
        segs = []
        acc = 0.0
        piece_by_lo = {lo: (lo, hi, d0, d1) for lo, hi, d0, d1 in self.pieces}
        for kind, lo, hi, mass in events:
            segs.append((kind, lo, hi, acc, acc + mass, piece_by_lo.get(lo) if kind == "piece" else None))
            acc += mass
        return segs

    def sample(self, rng, size):
        u = rng.random(size)
        segs = self._cdf_segments()
        uppers = np.array([s[4] for s in segs])
        idx = np.searchsorted(uppers, u, side="left")
        idx = np.minimum(idx, len(segs) - 1)
        out = np.empty(size, dtype=float)
        for i, seg in enumerate(segs):
            mask = idx == i
            if not mask.any():
                continue
            kind, lo, hi, flo, fhi, piece = seg
            if kind == "atom":
                out[mask] = lo
                continue
            d0, d1 = piece[2], piece[3]
            t = u[mask] - flo
            if d1 == 0.0:
                x = lo + t / d0
            else:
                # solve d0 (x-lo) + d1 (x^2 - lo^2)/2 = t for x in [lo, hi]
                A = 0.5 * d1
                B = d0
                Cc = -(d0 * lo + 0.5 * d1 * lo * lo + t)
                disc = np.maximum(B * B - 4 * A * Cc, 0.0)
                x1 = (-B + np.sqrt(disc)) / (2 * A)
                x2 = (-B - np.sqrt(disc)) / (2 * A)
                x = np.where((x1 >= lo - 1e-12) & (x1 <= hi + 1e-12), x1, x2)
            out[mask] = np.clip(x, lo, hi)
        return out


class PositivePart(Measure1D):
    """Base measure conditioned on the closed ray [0, inf).

    Atom at 0 (if any) is kept in full.  Not symmetric; used by the
    half-line certification routines.
    """

    def __init__(self, base: Measure1D):
        self.base = base
        self.norm = base.tail(0.0)
        if self.norm <= 0.0:
            raise MeasureInvalidError("base measure has no mass on [0, inf)")
        self.symmetric = False
        self.kind = f"positive_part({base.kind})"

    def tail(self, x: float) -> float:
        return self.base.tail(max(x, 0.0)) / self.norm

    def atoms(self):
        return tuple((p, m / self.norm) for p, m in self.base.atoms() if p >= 0.0)

    def support_bounds(self):
        lo, hi = self.base.support_bounds()
        return (max(lo, 0.0), hi)

    def quantile_tail(self, eps: float) -> float:
        return self.base.quantile_tail(eps * self.norm)

    def exp_decay_rate(self) -> float:
        return self.base.exp_decay_rate()

    def describe(self) -> str:
        return f"positive_part({self.base.describe()})"

    def integrate(self, exp_part=None, poly_part=None, lo=-math.inf, hi=math.inf):
        total = 0.0
        err = 0.0
        for pos, mass in self.atoms():
            if lo <= pos <= hi and mass > 0.0:
                total += mass * _eval_exp_poly(exp_part, poly_part, pos)
        est = self.base._ac_integral(exp_part, poly_part, max(lo, 0.0), hi)
        return IntegralEstimate(total + est.value / self.norm, err + est.error / self.norm)


def restrict_positive(mu: Measure1D) -> PositivePart:
    return PositivePart(mu)


# -- tail-ratio supremum -------------------------------------------------------


def tail(mu: Measure1D, x: float) -> float:
    """mu[x, inf) with the closed-ray convention."""
    return mu.tail(x)


def _ratio_probes(mu: Measure1D, h: float, n: int) -> np.ndarray:
    """Probe grid on [0, xmax]: dense linear grid plus every critical point
    (atom, piece endpoint), its h-shift, and right-limits via nextafter."""
    _, sup_hi = mu.support_bounds()
    xmax = mu.quantile_tail(1e-12) if math.isinf(sup_hi) else sup_hi
    xmax = max(xmax, h)
    crit = {0.0, xmax}
    for p, _ in mu.atoms():
        crit.add(p)
    try:
        for lo, hi, _, _ in mu.density_pieces():
            crit.add(lo)
            crit.add(hi)
    except NoDensityError:
        pass
    shifted = {c - h for c in crit}
    pts = set()
    for c in crit | shifted:
        pts.add(c)
        pts.add(math.nextafter(c, math.inf))
        pts.add(math.nextafter(c, -math.inf))
    base = np.linspace(0.0, xmax, n)
    probes = np.unique(np.concatenate([base, np.array(sorted(pts))]))
    return probes[(probes >= 0.0) & (probes <= xmax)]


def lambda_star(
    mu: Measure1D,
    h: float,
    lambda_query: float | None = None,
    probes: int = 4096,
) -> MembershipCertificate:
    """Supremum of tail(x+h)/tail(x) over x >= 0, with 0/0 = 0.

    Closed forms for the analytic kinds; probe-grid supremum (with
    mandatory probes at atoms, endpoints, and their h-shifts) otherwise.
    """
    if not mu.symmetric:
        raise NotSymmetricError("tail-ratio class is defined for symmetric measures")
    if not (h > 0 and math.isfinite(h)):
        raise ValueError("h must be positive and finite")

    witness = 0.0
    if isinstance(mu, TwoPoint):
        val = 1.0 if h <= mu.a else 0.0
    elif isinstance(mu, Uniform):
        val = max(0.0, (mu.r - h) / mu.r)
    elif isinstance(mu, Exponential):
        val = math.exp(-mu.rate * h)
    elif isinstance(mu, Gaussian):
        # the gaussian tail is log-concave, so the ratio is maximal at 0
        val = 2.0 * float(_special.ndtr(-h / mu.sigma))
    else:
        xs = _ratio_probes(mu, h, probes)
        num = np.array([mu.tail(x + h) for x in xs])
        den = np.array([mu.tail(x) for x in xs])
        with np.errstate(divide="ignore", invalid="ignore"):
            ratios = np.where(den > 0.0, num / np.where(den > 0.0, den, 1.0), 0.0)
        k = int(np.argmax(ratios))
        val = float(min(ratios[k], 1.0))
        witness = float(xs[k])

    member = None
    if lambda_query is not None:
        member = bool(val <= lambda_query + 1e-12)
    return MembershipCertificate(h=h, lambda_star=val, witness=witness, lambda_query=lambda_query, member=member)


# -- Hardy-type constants ------------------------------------------------------


def _inv_density_cumulative(mu: Measure1D, xs: np.ndarray) -> np.ndarray:
    """int_0^x dy / p(y) for each probe x > 0; +inf where the density
    vanishes on a set of positive measure before x (gaps, zero pieces)."""
    pieces = [(lo, hi, d0, d1) for lo, hi, d0, d1 in mu.density_pieces() if hi > 0.0]
    pieces.sort()
    out = np.empty(len(xs))

    def seg_integral(d0, d1, a, b):
        # int_a^b dy / (d0 + d1 y)
        pa, pb = d0 + d1 * a, d0 + d1 * b
        if pa <= 0.0 or pb <= 0.0:
            return math.inf
        if d1 == 0.0:
            return (b - a) / d0
        if pa == pb:
            return (b - a) / pa
        return (math.log(pb) - math.log(pa)) / d1

    for i, x in enumerate(xs):
        if x <= 0.0:
            out[i] = 0.0
            continue
        acc = 0.0
        cursor = 0.0
        for lo, hi, d0, d1 in pieces:
            a = max(lo, 0.0)
            if a >= x:
                break
            if a > cursor + 1e-14:
                acc = math.inf  # uncovered gap inside (0, x)
                break
            b = min(hi, x)
            acc += seg_integral(d0, d1, max(a, cursor), b)
            cursor = max(cursor, b)
            if math.isinf(acc):
                break
        if cursor < x - 1e-14 and not math.isinf(acc):
            acc = math.inf
        out[i] = acc
    return out


def _hardy_sup(mu: Measure1D, with_log: bool) -> float:
    sup_lo, sup_hi = mu.support_bounds()
    xmax = mu.quantile_tail(1e-14) if math.isinf(sup_hi) else sup_hi
    xs = np.linspace(0.0, xmax, 4097)[1:]
    extra = []
    for lo, hi, _, _ in mu.density_pieces():
        for c in (lo, hi):
            if 0.0 < c <= xmax:
                extra.extend([c, math.nextafter(c, 0.0)])
    for p, m in mu.atoms():
        if 0.0 < p <= xmax and m > 0:
            extra.extend([p, math.nextafter(p, math.inf)])
    if extra:
        xs = np.unique(np.concatenate([xs, np.array(extra)]))
    cum = _inv_density_cumulative(mu, xs)
    tails = np.array([mu.tail(math.nextafter(x, math.inf)) for x in xs])
    vals = np.zeros(len(xs))
    for i in range(len(xs)):
        t = tails[i]
        if t <= 0.0:
            continue
        if math.isinf(cum[i]):
            return math.inf
        factor = math.log(1.0 / t) if with_log else 1.0
        vals[i] = t * factor * cum[i]
    best = float(np.max(vals)) if len(vals) else 0.0
    # local parabolic refinement around the grid maximum
    k = int(np.argmax(vals))
    if 0 < k < len(xs) - 1:
        lo_b, hi_b = xs[k - 1], xs[k + 1]

        def neg(x):
            t = mu.tail(math.nextafter(x, math.inf))
            if t <= 0.0:
                return 0.0
            c = _inv_density_cumulative(mu, np.array([x]))[0]
            f = math.log(1.0 / t) if with_log else 1.0
            return -(t * f * c)

        res = _sciopt.minimize_scalar(neg, bounds=(lo_b, hi_b), method="bounded")
        best = max(best, float(-res.fun))
    return best


def muckenhoupt_constant(mu: Measure1D) -> float:
    """sup_{x>0} mu[x,inf) * int_0^x dy/p(y); controls the convex Poincare
    constant from both sides."""
    if not mu.symmetric:
        raise NotSymmetricError("defined for symmetric measures")
    if isinstance(mu, TwoPoint):
        raise NoDensityError("two-point measure has no density on (0, inf)")
    if isinstance(mu, Uniform):
        return mu.r * mu.r / 4.0
    if isinstance(mu, Exponential):
        return 1.0 / (mu.rate * mu.rate)
    if isinstance(mu, Gaussian):
        return _gaussian_hardy_sup(mu.sigma, with_log=False)
    _require_density_or_flag(mu)
    return _hardy_sup(mu, with_log=False)


def bobkov_goetze_constant(mu: Measure1D) -> float:
    """Like the Muckenhoupt constant with an extra log(1/tail) factor.

    +inf is a meaningful value (exponential-tailed measures)."""
    if not mu.symmetric:
        raise NotSymmetricError("defined for symmetric measures")
    if isinstance(mu, TwoPoint):
        raise NoDensityError("two-point measure has no density on (0, inf)")
    if isinstance(mu, Exponential):
        return math.inf
    if isinstance(mu, Gaussian):
        return _gaussian_hardy_sup(mu.sigma, with_log=True)
    _require_density_or_flag(mu)
    return _hardy_sup(mu, with_log=True)


def _require_density_or_flag(mu: Measure1D):
    pieces = [pc for pc in mu.density_pieces() if pc[1] > 0]
    has_pos_atoms = any(p > 0 and m > 0 for p, m in mu.atoms())
    if not pieces:
        if has_pos_atoms:
            raise NoDensityError("purely atomic on (0, inf) with positive tail")
        # all mass at or below 0 on the right: supremum over empty set
        return


def _gaussian_hardy_sup(sigma: float, with_log: bool) -> float:
    """Log-domain evaluation of tail(x) * [log 1/tail] * int_0^x e^{y^2/2s^2} s sqrt(2 pi) dy."""

    log_norm = math.log(sigma * math.sqrt(2.0 * math.pi))  # 1/p = norm * e^{y^2/2s^2}

    def log_int(x):
        # log of int_0^x dy / p(y) with p the N(0, sigma^2) density
        z = x / (sigma * math.sqrt(2.0))
        if z < 20.0:
            return log_norm + math.log(sigma * math.sqrt(math.pi / 2.0) * float(_special.erfi(z)))
        # erfi(z) ~ e^{z^2} / (z sqrt(pi)) for large z
        corr = math.log1p(0.5 / (z * z) + 0.75 / (z ** 4))
        return log_norm + z * z - math.log(z) - 0.5 * math.log(math.pi) + math.log(sigma / math.sqrt(2.0)) + corr

    def value(x):
        if x <= 0.0:
            return 0.0
        lt = float(_special.log_ndtr(-x / sigma))
        v = lt + log_int(x)
        out = math.exp(v)
        if with_log:
            out *= -lt
        return out

    xs = np.linspace(1e-6, 12.0 * sigma, 4096)
    vals = np.array([value(x) for x in xs])
    k = int(np.argmax(vals))
    lo = xs[max(k - 1, 0)]
    hi = xs[min(k + 1, len(xs) - 1)]
    res = _sciopt.minimize_scalar(lambda x: -value(x), bounds=(lo, hi), method="bounded")
    return max(float(np.max(vals)), float(-res.fun))


# -- construction from config -------------------------------------------------


def measure_from_dict(spec: dict) -> Measure1D:
    """Build a measure from a plain dict (the CLI config grammar)."""
    if not isinstance(spec, dict):
        raise MeasureInvalidError("measure spec must be an object")
    spec = dict(spec)
    kind = spec.pop("kind", None)
    builders = {
        "two_point": (TwoPoint, {"a"}),
        "uniform": (Uniform, {"r"}),
        "exponential": (Exponential, {"rate"}),
        "gaussian": (Gaussian, {"sigma"}),
    }
    if kind in builders:
        cls, keys = builders[kind]
        unknown = set(spec) - keys
        if unknown:
            raise MeasureInvalidError(f"unknown keys for {kind}: {sorted(unknown)}")
        missing = keys - set(spec)
        if missing:
            raise MeasureInvalidError(f"missing keys for {kind}: {sorted(missing)}")
        return cls(**{k: float(v) for k, v in spec.items()})
    if kind == "atom_density_mix":
        unknown = set(spec) - {"atoms", "density_pieces", "symmetric"}
        if unknown:
            raise MeasureInvalidError(f"unknown keys for {kind}: {sorted(unknown)}")
        atoms = tuple((float(p), float(m)) for p, m in spec.get("atoms", ()))
        pieces = tuple(tuple(float(v) for v in pc) for pc in spec.get("density_pieces", ()))
        return AtomDensityMix(atoms, pieces, require_symmetric=bool(spec.get("symmetric", True)))
    raise MeasureInvalidError(f"unknown measure kind: {kind!r}")
