"""Piecewise polynomial functions on the real line.

A :class:`PiecewisePoly` is a function that is polynomial on each interval
of a finite partition of R.  Pieces are indexed right-continuously: at a
breakpoint the piece to the right applies.  This is the common currency
between convex functions, discrete gradients, inf-convolution envelopes,
and the integrators: products like ``exp(E(x)) * Q(x)`` against a measure
are always reduced to one exponent PiecewisePoly and one payload
PiecewisePoly.

Also hosts the closed-form pieces of the integrators:

* exact integrals of polynomials over finite intervals,
* exact integrals of ``poly(x) * exp(c*x)`` over finite or infinite
  intervals (used for exponential tails, where adaptive quadrature cannot
  reach).
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P

__all__ = [
    "PiecewisePoly",
    "poly_integral",
    "exp_poly_integral",
    "merged_pieces",
]


def _trim(coeffs) -> tuple[float, ...]:
    arr = [float(c) for c in coeffs]
    while len(arr) > 1 and arr[-1] == 0.0:
        arr.pop()
    return tuple(arr)


@dataclass(frozen=True)
class PiecewisePoly:
    """Piecewise polynomial: ``len(coeffs) == len(breaks) + 1``.

    ``coeffs[i]`` (low-to-high degree) applies on the interval
    ``(breaks[i-1], breaks[i]]``-style partition evaluated right
    continuously: piece index for x is ``bisect_right(breaks, x)``.
    """

    breaks: tuple[float, ...]
    coeffs: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        if len(self.coeffs) != len(self.breaks) + 1:
            raise ValueError("need len(breaks)+1 coefficient tuples")
        if any(b2 <= b1 for b1, b2 in zip(self.breaks, self.breaks[1:])):
            raise ValueError("breaks must be strictly increasing")
        object.__setattr__(self, "breaks", tuple(float(b) for b in self.breaks))
        object.__setattr__(self, "coeffs", tuple(_trim(c) for c in self.coeffs))

    # -- construction helpers -------------------------------------------

    @staticmethod
    def constant(c: float) -> "PiecewisePoly":
        return PiecewisePoly((), ((float(c),),))

    @staticmethod
    def identity() -> "PiecewisePoly":
        return PiecewisePoly((), ((0.0, 1.0),))

    # -- evaluation ------------------------------------------------------

    def piece_index(self, x: float) -> int:
        return bisect_right(self.breaks, x)

    def __call__(self, x: float) -> float:
        c = self.coeffs[self.piece_index(x)]
        return float(P.polyval(x, c))

    def eval_array(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        out = np.empty_like(xs)
        idx = np.searchsorted(self.breaks, xs, side="right")
        for i in range(len(self.coeffs)):
            mask = idx == i
            if mask.any():
                out[mask] = P.polyval(xs[mask], self.coeffs[i])
        return out

    @property
    def degree(self) -> int:
        return max(len(c) - 1 for c in self.coeffs)

    # -- algebra ---------------------------------------------------------

    def _merge(self, other: "PiecewisePoly", op) -> "PiecewisePoly":
        breaks = tuple(sorted(set(self.breaks) | set(other.breaks)))
        coeffs = []
        for i in range(len(breaks) + 1):
            if i == 0:
                x = breaks[0] - 1.0 if breaks else 0.0
            elif i == len(breaks):
                x = breaks[-1] + 1.0
            else:
                x = 0.5 * (breaks[i - 1] + breaks[i])
            a = self.coeffs[self.piece_index(x)]
            b = other.coeffs[other.piece_index(x)]
            coeffs.append(tuple(op(a, b)))
        return PiecewisePoly(breaks, tuple(coeffs))

    def __add__(self, other):
        other = self._coerce(other)
        return self._merge(other, P.polyadd)

    def __sub__(self, other):
        other = self._coerce(other)
        return self._merge(other, P.polysub)

    def __mul__(self, other):
        other = self._coerce(other)
        return self._merge(other, P.polymul)

    def __neg__(self):
        return self.scale(-1.0)

    @staticmethod
    def _coerce(other):
        if isinstance(other, PiecewisePoly):
            return other
        return PiecewisePoly.constant(float(other))

    def scale(self, s: float) -> "PiecewisePoly":
        return PiecewisePoly(self.breaks, tuple(tuple(s * c for c in cs) for cs in self.coeffs))

    def square(self) -> "PiecewisePoly":
        return self * self

    def shift_arg(self, h: float) -> "PiecewisePoly":
        """Return x -> self(x - h)."""
        shifted = []
        for cs in self.coeffs:
            poly = np.polynomial.Polynomial(cs)
            comp = poly(np.polynomial.Polynomial([-h, 1.0]))
            shifted.append(tuple(comp.coef))
        return PiecewisePoly(tuple(b + h for b in self.breaks), tuple(shifted))

    # -- shape queries ----------------------------------------------------

    def tail_coeffs(self, side: str) -> tuple[float, ...]:
        return self.coeffs[0] if side == "left" else self.coeffs[-1]

    def is_affine_tails(self) -> bool:
        return len(self.coeffs[0]) <= 2 and len(self.coeffs[-1]) <= 2


# -- closed-form integrals -------------------------------------------------


def poly_integral(coeffs, a: float, b: float) -> float:
    """Exact integral of a polynomial over the finite interval [a, b]."""
    anti = P.polyint(list(coeffs))
    return float(P.polyval(b, anti) - P.polyval(a, anti))


def _exp_poly_antideriv_coeffs(coeffs, c: float) -> list[float]:
    # antiderivative of sum_k q_k x^k e^{cx} is e^{cx} * S(x) with
    # S[m] = sum_{k >= m} q_k * (-1)^(k-m) * (k! / m!) / c^(k-m+1)
    n = len(coeffs)
    S = [0.0] * n
    for k, q in enumerate(coeffs):
        if q == 0.0:
            continue
        term = q / c  # j = 0 term coefficient for x^k
        m = k
        while True:
            S[m] += term
            if m == 0:
                break
            term = -term * m / c
            m -= 1
    return S


def exp_poly_integral(coeffs, c: float, a: float, b: float) -> float:
    """Exact integral of ``poly(x) * exp(c*x)`` over [a, b].

    Supports ``a = -inf`` (requires c > 0) and ``b = +inf`` (requires
    c < 0); the polynomial-times-exponential limit vanishes there.  For
    c == 0 this degenerates to a plain polynomial integral (finite
    interval only).
    """
    if c == 0.0:
        if not (math.isfinite(a) and math.isfinite(b)):
            raise ValueError("infinite interval with zero exponent rate")
        return poly_integral(coeffs, a, b)
    S = _exp_poly_antideriv_coeffs(list(coeffs), c)

    def F(x: float) -> float:
        if x == math.inf:
            if c >= 0:
                raise ValueError("divergent: c >= 0 with b = +inf")
            return 0.0
        if x == -math.inf:
            if c <= 0:
                raise ValueError("divergent: c <= 0 with a = -inf")
            return 0.0
        return math.exp(c * x) * float(P.polyval(x, S))

    return F(b) - F(a)


def merged_pieces(exp_part: PiecewisePoly | None, poly_part: PiecewisePoly | None):
    """Merge exponent and payload into one break list.

    Returns ``(breaks, pieces)`` where pieces[i] is a pair
    ``(e_coeffs | None, q_coeffs | None)`` valid on the i-th interval of
    the partition induced by ``breaks``.
    """
    eb = exp_part.breaks if exp_part is not None else ()
    qb = poly_part.breaks if poly_part is not None else ()
    breaks = tuple(sorted(set(eb) | set(qb)))
    pieces = []
    for i in range(len(breaks) + 1):
        if i == 0:
            x = breaks[0] - 1.0 if breaks else 0.0
        elif i == len(breaks):
            x = breaks[-1] + 1.0
        else:
            x = 0.5 * (breaks[i - 1] + breaks[i])
        e = exp_part.coeffs[exp_part.piece_index(x)] if exp_part is not None else None
        q = poly_part.coeffs[poly_part.piece_index(x)] if poly_part is not None else None
        pieces.append((e, q))
    return breaks, pieces
