"""Convex Poincare inequality: Var_mu(f) <= C_p * int (f')^2 dmu.

Derivatives of PL convex functions are taken as right slopes, so the
energy integrand is right-continuous and an atom sitting exactly at a
hinge location u contributes the slope of the piece starting at u.  For
hinge functions f_u(x) = max(x - u, 0) this makes the Dirichlet energy
exactly mu[u, inf) under the closed-ray tail convention.

``cp_lower_bound`` produces certified lower estimates of the optimal
constant by maximizing Var/Energy over a hinge grid plus random convex
trials; ``certify_poincare_to_tail`` closes the loop back to the
tail-ratio class with step h = sqrt(8 cp) at ratio level 1/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .convexfn import PLConvex, random_plconvex
from .errors import DegenerateInputError
from .measure1d import IntegralEstimate, Measure1D, MembershipCertificate, lambda_star
from .piecewise import PiecewisePoly

__all__ = [
    "variance",
    "dirichlet_energy",
    "PoincareEstimate",
    "cp_lower_bound",
    "TailClosureReport",
    "certify_poincare_to_tail",
    "hinge",
]


def hinge(u: float) -> PLConvex:
    """f_u(x) = max(x - u, 0)."""
    return PLConvex((u,), (0.0, 1.0), (u, 0.0))


def variance(mu: Measure1D, f: PLConvex) -> IntegralEstimate:
    """Var_mu(f) with a propagated quadrature error bound."""
    pp = f.piecewise()
    m1 = mu.integrate(None, pp)
    m2 = mu.integrate(None, pp * pp)
    value = m2.value - m1.value * m1.value
    error = m2.error + 2.0 * abs(m1.value) * m1.error + m1.error * m1.error
    return IntegralEstimate(value, error)


def dirichlet_energy(mu: Measure1D, f: PLConvex) -> IntegralEstimate:
    """int (f')^2 dmu with f' the right slope (right-continuous pieces)."""
    sq = PiecewisePoly(f.breakpoints, tuple((s * s,) for s in f.slopes))
    return mu.integrate(None, sq)


@dataclass(frozen=True)
class PoincareEstimate:
    cp_lower: float
    witness: str
    probes: int


def cp_lower_bound(
    mu: Measure1D,
    u_count: int = 256,
    trials: int = 64,
    seed: int = 0,
) -> PoincareEstimate:
    """Best Var/Energy ratio over hinge functions on a nonnegative u-grid
    plus seeded random convex functions."""
    best = 0.0
    witness = "none"
    checked = 0
    u_hi = mu.quantile_tail(1e-8)
    for u in np.linspace(0.0, u_hi, u_count):
        f = hinge(float(u))
        e = dirichlet_energy(mu, f).value
        if e <= 0.0:
            continue
        v = variance(mu, f).value
        checked += 1
        if v / e > best:
            best = v / e
            witness = f"hinge(u={float(u):.6g})"
    rng = np.random.default_rng(seed)
    for i in range(trials):
        f = random_plconvex(rng)
        e = dirichlet_energy(mu, f).value
        if e <= 1e-12:
            continue
        v = variance(mu, f).value
        checked += 1
        if v / e > best:
            best = v / e
            witness = f"random(trial={i})"
    if checked == 0:
        raise DegenerateInputError("no test function had positive energy")
    return PoincareEstimate(cp_lower=best, witness=witness, probes=checked)


@dataclass(frozen=True)
class TailClosureReport:
    cp: float
    h: float
    certificate: MembershipCertificate
    diag_min_slack: float
    diag_worst_u: float
    diag_points: int

    @property
    def member(self) -> bool:
        return bool(self.certificate.member)


def certify_poincare_to_tail(mu: Measure1D, cp: float, diag_points: int = 64) -> TailClosureReport:
    """From a convex Poincare constant cp, certify membership in the
    tail-ratio class at step h = sqrt(8 cp), ratio 1/2.

    Diagnostics re-test the Poincare inequality itself on a hinge grid:
    slack(u) = cp * Energy(f_u) - Var(f_u), which must be nonnegative
    whenever cp really dominates the optimal constant.
    """
    if not (cp > 0 and math.isfinite(cp)):
        raise ValueError("cp must be positive and finite")
    h = math.sqrt(8.0 * cp)
    cert = lambda_star(mu, h, lambda_query=0.5)
    worst = math.inf
    worst_u = 0.0
    u_hi = mu.quantile_tail(1e-8)
    for u in np.linspace(0.0, u_hi, diag_points):
        f = hinge(float(u))
        slack = cp * dirichlet_energy(mu, f).value - variance(mu, f).value
        if slack < worst:
            worst = slack
            worst_u = float(u)
    return TailClosureReport(
        cp=cp,
        h=h,
        certificate=cert,
        diag_min_slack=worst,
        diag_worst_u=worst_u,
        diag_points=diag_points,
    )
