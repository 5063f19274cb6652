"""Variance bounds for product measures on Euclidean space, in L2, L1 and L^q form."""
from __future__ import annotations

import math

import numpy as np

from ..montecarlo import batch_means_error
from ..report import InequalityReport
from ..talagrand import semigroup_constant, talagrand_summand
from .measures import ProductMeasure, QuadratureGrid, SampleCloud, SmoothFunction
from .ou import admissible_time, block_norms


def l1_summand(b: float, power: float = 0.5) -> float:
    """``b (1 + b) / [1 + log+(1/b)]^power``; 0 at ``b = 0``."""
    if b <= 0.0:
        return 0.0
    return b * (1.0 + b) / (1.0 + max(math.log(1.0 / b), 0.0)) ** power


def q_summand(Q: float, n1: float, q: float) -> float:
    """``Q (1 + n1^2/Q) / [1 + log+(Q / n1^2)]^(q/2)`` with ``Q = ||g||_q^q``; 0 at ``Q = 0``."""
    if Q <= 0.0:
        return 0.0
    if n1 <= 0.0:
        raise ArithmeticError("L1 norm vanishes while the Lq norm does not")
    r = Q / (n1 * n1)
    return (Q + n1 * n1) / (1.0 + max(math.log(r), 0.0)) ** (q / 2.0)


def _backend(mu: ProductMeasure, backend):
    if backend is None:
        return mu.panel_grid()
    if backend.points.shape[1] != mu.dim:
        raise ValueError("backend dimension does not match the measure")
    return backend


def _weighted_var(v: np.ndarray, w: np.ndarray) -> float:
    m = float(w @ v)
    return max(float(w @ (v - m) ** 2), 0.0)


def _sides(f: SmoothFunction, mu: ProductMeasure, backend, rhs_of_norms):
    """Evaluate ``(Var f, rhs)`` on a backend; clouds also get a batch-means slack."""
    P, w = backend.points, backend.weights
    v = f.value(P)
    B = block_norms(f.grad(P), mu.blocks)

    def sides(vv, BB, ww):
        ww = ww / ww.sum()
        return _weighted_var(vv, ww), rhs_of_norms(BB, ww)

    lhs, rhs = sides(v, B, w)
    slack = 0.0
    if isinstance(backend, SampleCloud):
        idx = np.arange(P.shape[0])

        def stat(rows):
            a, b = sides(v[rows], B[rows], w[rows])
            return a - b

        slack = 3.0 * batch_means_error(stat, idx)
    return lhs, rhs, slack


def corollary3_report(f: SmoothFunction, mu: ProductMeasure, C: float | None = None, backend=None) -> InequalityReport:
    """``Var f <= C sum_i ||grad_i f||_2^2 / (1 + log(||grad_i f||_2 / ||grad_i f||_1))``.

    The default constant is the semigroup constant at ``rho`` and the
    commutation rate of the measure: 4 for the standard gaussian.
    """
    rho = mu.rho
    if rho is None:
        raise ValueError("every factor must be hypercontractive")
    C = semigroup_constant(rho, mu.commutation_rate) if C is None else C
    backend = _backend(mu, backend)

    def rhs(B, w):
        n2 = np.sqrt(w @ B ** 2)
        n1 = w @ B
        return C * sum(talagrand_summand(a, b) for a, b in zip(n2, n1))

    lhs, r, slack = _sides(f, mu, backend, rhs)
    return InequalityReport("gaussian-l2-talagrand", f"product N={mu.N} {f.name}", lhs, r, C, slack)


def theorem6_constant(mu: ProductMeasure, c0: float) -> float:
    """``c0 / (rho^{3/2} T)`` with ``T = min(1, 1/(2 rho), 1/(2 kappa))``."""
    rho = mu.rho
    if rho is None:
        raise ValueError("every factor must be hypercontractive")
    T = min(1.0, 1.0 / (2.0 * rho), admissible_time(mu.curvature_kappa))
    return c0 / (rho ** 1.5 * T)


def theorem6_report(f: SmoothFunction, mu: ProductMeasure, c0: float | None = None, backend=None) -> InequalityReport:
    """``Var f <= C' sum_i b_i (1 + b_i) / [1 + log+(1/b_i)]^{1/2}``, ``b_i = ||grad_i f||_1``, for ``|f| <= 1``."""
    if not f.bounded:
        raise ValueError("needs a function flagged |f| <= 1")
    if c0 is None:
        from ..calibration import frozen_constant

        c0 = frozen_constant("theorem6")
    C = theorem6_constant(mu, c0)
    backend = _backend(mu, backend)

    def rhs(B, w):
        return C * sum(l1_summand(b) for b in w @ B)

    lhs, r, slack = _sides(f, mu, backend, rhs)
    return InequalityReport("gaussian-l1-talagrand", f"product N={mu.N} {f.name}", lhs, r, C, slack)


def interpolated_q_report(
    f: SmoothFunction, mu: ProductMeasure, q: float, C: float | None = None, backend=None
) -> InequalityReport:
    """``Var f <= C sum_i Q_i (1 + b_i^2/Q_i) / [1 + log+(Q_i / b_i^2)]^{q/2}``,
    ``Q_i = ||grad_i f||_q^q`` and ``b_i = ||grad_i f||_1``.
    """
    if not 1.0 <= q <= 2.0:
        raise ValueError("q must lie in [1, 2]")
    if not f.bounded:
        raise ValueError("needs a function flagged |f| <= 1")
    if C is None:
        from ..calibration import frozen_constant

        C = frozen_constant("interp-q")
    backend = _backend(mu, backend)

    def rhs(B, w):
        Q = w @ B ** q
        n1 = w @ B
        return C * sum(q_summand(a, b, q) for a, b in zip(Q, n1))

    lhs, r, slack = _sides(f, mu, backend, rhs)
    return InequalityReport("interpolated-q", f"product N={mu.N} q={q:g} {f.name}", lhs, r, C, slack)
