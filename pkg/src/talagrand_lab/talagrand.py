"""Talagrand-type variance bounds for chains with a commuting Dirichlet decomposition."""
from __future__ import annotations

import math

import numpy as np
from scipy import integrate

from .chain import DirichletDecomposition, FiniteChain
from .cube import orlicz_norm_values
from .report import InequalityReport

__all__ = [
    "InequalityReport",
    "semigroup_constant",
    "talagrand_summand",
    "theorem1_report",
    "interpolation_integral",
    "interpolation_bound",
    "interpolated_variance_report",
    "orlicz_variance_report",
    "orlicz_ratio",
    "corollary2_report",
    "influence_bound_extract",
]


def semigroup_constant(rho: float, kappa: float = 0.0) -> float:
    """``4 exp((1 + kappa/rho)^+) / rho``."""
    if rho <= 0:
        raise ValueError("rho must be positive")
    return 4.0 * math.exp(max(1.0 + kappa / rho, 0.0)) / rho


def talagrand_summand(n2: float, n1: float) -> float:
    """``n2^2 / (1 + log(n2/n1))``, with 0 for a vanishing direction."""
    if n2 == 0.0:
        return 0.0
    if n1 <= 0.0:
        raise ArithmeticError("L1 norm vanishes while the L2 norm does not")
    return n2 * n2 / (1.0 + math.log(n2 / n1))


def _norm(mu: np.ndarray, g: np.ndarray, r: float) -> float:
    return float(mu @ np.abs(g) ** r) ** (1.0 / r)


def theorem1_report(
    chain: FiniteChain,
    decomp: DirichletDecomposition,
    rho: float,
    f,
    constant: float | None = None,
    model: str = "",
) -> InequalityReport:
    """``Var f <= C(rho, kappa) sum_i ||Gamma_i f||_2^2 / (1 + log(||Gamma_i f||_2 / ||Gamma_i f||_1))``.

    ``constant`` overrides ``C(rho, kappa)``; used to probe that a too
    small constant is caught.
    """
    if rho <= 0:
        raise ValueError("rho must be positive")
    C = semigroup_constant(rho, decomp.kappa) if constant is None else constant
    f = np.asarray(f, dtype=np.float64)
    mu = chain.measure
    total = 0.0
    for g in decomp.apply(f):
        total += talagrand_summand(_norm(mu, g, 2.0), _norm(mu, g, 1.0))
    return InequalityReport("theorem1", model or f"chain n={chain.n}", chain.variance(f), C * total, C)


def interpolation_integral(g, mu, epsrel: float = 1e-10) -> float:
    """``int_1^2 ||g||_v^2 dv`` by adaptive quadrature."""
    g = np.abs(np.asarray(g, dtype=np.float64))
    mu = np.asarray(mu, dtype=np.float64)
    if not np.any(g > 0):
        return 0.0
    scale = g.max()
    h = g / scale
    val, _ = integrate.quad(lambda v: float(mu @ h ** v) ** (2.0 / v), 1.0, 2.0, epsabs=0.0, epsrel=epsrel, limit=200)
    return val * scale * scale


def holder_exponent(v: float) -> float:
    """``theta`` with ``1/v = theta + (1 - theta)/2``."""
    return 2.0 / v - 1.0


def interpolation_bound(g, mu) -> float:
    """``||g||_2^2 * 2 / (1 + log(1/b))`` with ``b = ||g||_1 / ||g||_2``.

    Upper bound for ``interpolation_integral`` from Holder interpolation
    ``||g||_v <= ||g||_1^theta ||g||_2^(1-theta)``.
    """
    g = np.asarray(g, dtype=np.float64)
    mu = np.asarray(mu, dtype=np.float64)
    n2, n1 = _norm(mu, g, 2.0), _norm(mu, g, 1.0)
    if n2 == 0.0:
        return 0.0
    return n2 * n2 * 2.0 / (1.0 + math.log(n2 / n1))


def holder_integral(g, mu) -> float:
    """``||g||_2^2 int_1^2 b^(2 theta(v)) dv``: the Holder-interpolated middle term."""
    g = np.asarray(g, dtype=np.float64)
    mu = np.asarray(mu, dtype=np.float64)
    n2, n1 = _norm(mu, g, 2.0), _norm(mu, g, 1.0)
    if n2 == 0.0:
        return 0.0
    b = n1 / n2
    val, _ = integrate.quad(lambda v: b ** (2.0 * holder_exponent(v)), 1.0, 2.0, epsrel=1e-12)
    return n2 * n2 * val


def interpolated_variance_report(chain: FiniteChain, decomp: DirichletDecomposition, rho: float, f) -> InequalityReport:
    """``Var f <= 2 e^((1+kappa/rho)^+)/rho * sum_i int_1^2 ||Gamma_i f||_v^2 dv``."""
    C = semigroup_constant(rho, decomp.kappa) / 2.0
    f = np.asarray(f, dtype=np.float64)
    total = sum(interpolation_integral(g, chain.measure) for g in decomp.apply(f))
    return InequalityReport("interpolated-variance", f"chain n={chain.n}", chain.variance(f), C * total, C)


def orlicz_ratio(g, mu) -> float:
    """``int_1^2 ||g||_v^2 dv / ||g||_phi^2``; 0 for ``g = 0``."""
    nphi = orlicz_norm_values(g, mu)
    if nphi == 0.0:
        return 0.0
    return interpolation_integral(g, mu) / nphi ** 2


def orlicz_variance_report(
    chain: FiniteChain,
    decomp: DirichletDecomposition,
    rho: float,
    f,
    C_phi: float | None = None,
) -> InequalityReport:
    """``Var f <= 2 C_phi e^((1+kappa/rho)^+)/rho * sum_i ||Gamma_i f||_phi^2``.

    ``C_phi`` defaults to the frozen calibrated comparison constant between
    the interpolation integral and the squared Orlicz norm.
    """
    if C_phi is None:
        from .calibration import frozen_constant

        C_phi = frozen_constant("c-phi")
    if C_phi <= 0:
        raise ValueError("C_phi must be positive")
    C = C_phi * semigroup_constant(rho, decomp.kappa) / 2.0
    f = np.asarray(f, dtype=np.float64)
    total = sum(orlicz_norm_values(g, chain.measure) ** 2 for g in decomp.apply(f))
    return InequalityReport("orlicz-variance", f"chain n={chain.n}", chain.variance(f), C * total, C)


def corollary2_report(cayley, f, rho: float, require_conjugacy_closed: bool = True) -> InequalityReport:
    """``Var f <= 2e/(rho |S|) sum_s ||D_s f||_2^2 / (1 + log(||D_s f||_2 / ||D_s f||_1))``.

    ``cayley`` is a :class:`talagrand_lab.cayley.CayleyChain`.
    """
    from .cayley import conjugacy_closed, edge_derivative

    if require_conjugacy_closed and not conjugacy_closed(cayley.group, cayley.generators):
        raise ValueError("generator set is not closed under conjugation")
    if rho <= 0:
        raise ValueError("rho must be positive")
    f = np.asarray(f, dtype=np.float64)
    mu = cayley.chain.measure
    S = cayley.generators
    C = 2.0 * math.e / (rho * len(S))
    total = 0.0
    for s in S:
        d = edge_derivative(cayley.group, s, f, S)
        total += talagrand_summand(_norm(mu, d, 2.0), _norm(mu, d, 1.0))
    model = f"cayley order={cayley.group.order} |S|={len(S)}"
    return InequalityReport("corollary2", model, cayley.chain.variance(f), C * total, C)


def influence_bound_extract(a: float, rho: float, C: float) -> float:
    """Guaranteed lower bound ``a(1-a) rho log(1 + 1/(C rho a(1-a))) / C`` on the max influence."""
    if not 0.0 < a < 1.0:
        raise ValueError("a must lie in (0, 1)")
    if rho <= 0 or C < 1:
        raise ValueError("need rho > 0 and C >= 1")
    v = a * (1.0 - a)
    return v * rho * math.log1p(1.0 / (C * rho * v)) / C
