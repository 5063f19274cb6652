"""Geometric influences, Minkowski content and the gaussian isoperimetric profile."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from ..report import Estimate, InequalityReport
from .measures import BUMP_VARIANCE, ProductMeasure, bump_pdf
from .sets import Ball, Box, HalfSpace, PredicateSet

METHODS = ("analytic", "mollified", "mc")


@dataclass(frozen=True)
class GeometricInfluenceEstimate:
    value: float
    std_error: float
    method: str

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.method == "analytic" and self.std_error != 0.0:
            raise ValueError("analytic estimates carry no error")

    def to_estimate(self, quantity: str) -> Estimate:
        return Estimate(quantity, self.value, self.std_error, self.method)


def richardson(values, widths, order: float = 1.0) -> tuple[float, float]:
    """Extrapolate ``values[k] ~ v + c_1 w_k^order + c_2 w_k^(2 order) + ...`` to ``w = 0``.

    Returns the extrapolated value and the gap between the last two
    diagonal entries of the table as an error estimate.
    """
    v = np.asarray(values, dtype=np.float64)
    w = np.asarray(widths, dtype=np.float64)
    if v.size < 2:
        return float(v[-1]), math.inf
    table = [v]
    for level in range(1, v.size):
        prev = table[-1]
        e = order * level
        # neighbouring entries carry leading errors in the neighbouring widths
        ratio = (w[: v.size - level] / w[1 : v.size - level + 1]) ** e
        table.append((ratio * prev[1:] - prev[:-1]) / (ratio - 1.0))
    diag = [t[-1] for t in table]
    return float(diag[-1]), float(abs(diag[-1] - diag[-2]))


def width_schedule(eps0: float, levels: int) -> np.ndarray:
    """Geometric widths ``eps0 / 2^k``."""
    if levels < 3:
        raise ValueError("need at least 3 widths")
    return eps0 / 2.0 ** np.arange(levels)


# ---------------------------------------------------------------------------
# analytic path


def analytic_influence(A, i: int, mu: ProductMeasure) -> float:
    if isinstance(A, HalfSpace):
        if A.dim != mu.dim:
            raise ValueError("set and measure dimensions differ")
        if A.axis is not None:
            return float(mu.coordinate_factors[i].pdf(A.threshold)) if i == A.axis else 0.0
        if not mu.is_gaussian:
            raise ValueError("oblique half-spaces need the gaussian measure")
        return abs(float(A.normal[i])) * math.exp(-0.5 * A.threshold ** 2) / math.sqrt(2.0 * math.pi)
    if isinstance(A, Box):
        return A.influence(mu, i)
    raise ValueError("analytic influences cover half-spaces and boxes only")


# ---------------------------------------------------------------------------
# fiber machinery shared by the mollified and Monte Carlo paths


def _fiber_base(mu: ProductMeasure, i: int, fibers: int, seed: int) -> np.ndarray:
    if mu.dim == 1:
        return np.zeros((1, 1))
    return mu.sample(fibers, seed).points


def _locate_crossings(A, X: np.ndarray, i: int, lo: float, hi: float, resolution: int, tol: float = 1e-12):
    """Jumps of ``u -> 1_A(x with x_i = u)`` on ``[lo, hi]``: positions and signs, per fiber.

    Sign ``+1`` means entering ``A`` when ``u`` increases.
    """
    grid = np.linspace(lo, hi, resolution)
    M = X.shape[0]
    pts = np.repeat(X, resolution, axis=0)
    pts[:, i] = np.tile(grid, M)
    inside = A.contains(pts).reshape(M, resolution)
    rows, cols = np.nonzero(inside[:, 1:] != inside[:, :-1])
    a = grid[cols].copy()
    b = grid[cols + 1].copy()
    left_in = inside[rows, cols]
    base = X[rows].copy()
    for _ in range(200):
        if np.all(b - a <= tol):
            break
        mid = 0.5 * (a + b)
        base[:, i] = mid
        same = A.contains(base) == left_in
        a = np.where(same, mid, a)
        b = np.where(same, b, mid)
    pos = 0.5 * (a + b)
    sign = np.where(left_in, -1.0, 1.0)
    return rows, pos, sign


def _mollified_fiber_value(pos: np.ndarray, sign: np.ndarray, eps: float, pdf, nodes: int = 16) -> float:
    """``int |sum_c s_c psi_eps(u - c)| p(u) du`` for one fiber."""
    if pos.size == 0:
        return 0.0
    order = np.argsort(pos)
    pos, sign = pos[order], sign[order]
    g, gw = np.polynomial.legendre.leggauss(nodes)
    # clusters of jumps whose bumps overlap
    breaks = np.flatnonzero(np.diff(pos) > 2.0 * eps) + 1
    total = 0.0
    for cp, cs in zip(np.split(pos, breaks), np.split(sign, breaks)):
        if cp.size == 1:
            s = eps * g
            total += float(eps * gw @ (bump_pdf(g) / eps * pdf(cp[0] + s)))
            continue
        knots = np.unique(np.concatenate([cp - eps, cp + eps]))
        sub = np.linspace(0.0, 1.0, 9)
        edges = np.unique((knots[:-1, None] + np.diff(knots)[:, None] * sub[None, :]).ravel())
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[1:] + edges[:-1])
        u = (mid[:, None] + half[:, None] * g[None, :]).ravel()
        wts = (half[:, None] * gw[None, :]).ravel()
        dens = np.abs((cs[None, :] * bump_pdf((u[:, None] - cp[None, :]) / eps) / eps).sum(axis=1))
        total += float(wts @ (dens * pdf(u)))
    return total


def _search_range(A, i: int, mu: ProductMeasure) -> tuple[float, float]:
    lo, hi = A.bounding_box()
    fac = mu.coordinate_factors[i]
    edge = 8.5 if fac.kind == "gaussian" else fac.support
    return max(float(lo[i]), -edge), min(float(hi[i]), edge)


def mollified_influence(
    A,
    i: int,
    mu: ProductMeasure,
    eps0: float = 0.2,
    levels: int = 3,
    fibers: int = 2000,
    seed: int = 0,
    resolution: int = 1024,
) -> GeometricInfluenceEstimate:
    """``||d_i (1_A * psi_eps)||_1`` over ``eps = eps0/2^k``, extrapolated to ``eps = 0``.

    The mollifier is a symmetric bump, so the leading error is of order
    ``eps^2`` and the extrapolation uses that order.  The error bar adds the
    extrapolation gap to the fiber-sampling standard error.
    """
    if not hasattr(A, "bounding_box"):
        raise ValueError("the mollified path needs a bounding box")
    lo, hi = _search_range(A, i, mu)
    widths = width_schedule(eps0, levels)
    X = _fiber_base(mu, i, fibers, seed)
    rows, pos, sign = _locate_crossings(A, X, i, lo, hi, resolution)
    pdf = mu.coordinate_factors[i].pdf
    per_fiber = np.zeros((X.shape[0], widths.size))
    split = np.searchsorted(rows, np.arange(X.shape[0] + 1))
    for m in range(X.shape[0]):
        a, b = split[m], split[m + 1]
        if a == b:
            continue
        for k, eps in enumerate(widths):
            per_fiber[m, k] = _mollified_fiber_value(pos[a:b], sign[a:b], eps, pdf)
    ex = np.array([richardson(row, widths, 2.0)[0] for row in per_fiber])
    value, gap = richardson(per_fiber.mean(axis=0), widths, 2.0)
    se = float(np.std(ex, ddof=1) / math.sqrt(ex.size)) if ex.size > 1 else 0.0
    return GeometricInfluenceEstimate(max(value, 0.0), gap + se, "mollified")


def fiber_influence(A, i: int, mu: ProductMeasure, fibers: int = 20000, seed: int = 0) -> GeometricInfluenceEstimate:
    """Sum of the density at the exact fiber crossings, averaged over sampled fibers."""
    if not hasattr(A, "fiber_crossings"):
        raise ValueError("set has no exact fiber crossings")
    X = _fiber_base(mu, i, fibers, seed)
    pdf = mu.coordinate_factors[i].pdf
    vals = np.array([float(np.sum(pdf(c))) for c in A.fiber_crossings(X, i)])
    se = float(np.std(vals, ddof=1) / math.sqrt(vals.size)) if vals.size > 1 else 0.0
    return GeometricInfluenceEstimate(float(vals.mean()), se, "mc")


def geometric_influence(A, i: int, mu: ProductMeasure, method: str = "auto", **kw) -> GeometricInfluenceEstimate:
    """Average boundary measure of the sections of ``A`` along coordinate ``i``."""
    if not 0 <= i < mu.dim:
        raise ValueError("coordinate out of range")
    if method == "auto":
        method = "analytic" if isinstance(A, (HalfSpace, Box)) else ("mc" if isinstance(A, Ball) else "mollified")
    if method == "analytic":
        return GeometricInfluenceEstimate(analytic_influence(A, i, mu), 0.0, "analytic")
    if method == "mc":
        return fiber_influence(A, i, mu, **kw)
    if method == "mollified":
        if isinstance(A, PredicateSet) and A.box is None:
            raise ValueError(f"predicate {A.name!r} has no bounding box")
        return mollified_influence(A, i, mu, **kw)
    raise ValueError(f"unknown method {method!r}")


def influences(A, mu: ProductMeasure, method: str = "auto", **kw) -> list[GeometricInfluenceEstimate]:
    return [geometric_influence(A, i, mu, method, **kw) for i in range(mu.dim)]


# ---------------------------------------------------------------------------
# isoperimetry


def isoperimetric_profile(a: float) -> float:
    """``phi(Phi^{-1}(a))``, symmetric about ``1/2`` by construction."""
    if not 0.0 <= a <= 1.0:
        raise ValueError("a must lie in [0, 1]")
    a = min(a, 1.0 - a)
    if a == 0.0:
        return 0.0
    x = special.ndtri(a)
    return math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)


def isoperimetric_shape(a: float) -> float:
    """``a(1-a) (log 1/(a(1-a)))^{1/2}``."""
    v = a * (1.0 - a)
    return v * math.sqrt(math.log(1.0 / v))


def _enlargement_mc(A: Box, mu: ProductMeasure, widths, samples: int, seed: int):
    """``P(0 < d(X, A) <= eps)`` for each width from one shared sample."""
    d = A.distance(mu.sample(samples, seed).points)
    out = []
    for eps in widths:
        hits = (d > 0) & (d <= eps)
        out.append(hits.astype(np.float64))
    return np.array(out)


def minkowski_content(A, mu: ProductMeasure, widths=None, samples: int = 400000, seed: int = 0) -> Estimate:
    """``lim (mu(A_eps) - mu(A)) / eps`` from finite-width ratios and Richardson extrapolation.

    Half-spaces and balls use exact enlargement measures; boxes use a Monte
    Carlo estimate of the shell ``{0 < d(x, A) <= eps}`` with common samples.
    """
    widths = width_schedule(0.1, 4) if widths is None else np.asarray(widths, dtype=np.float64)
    if widths.size < 3:
        raise ValueError("need at least 3 widths")
    if isinstance(A, Box) and A.is_empty or isinstance(A, PredicateSet) and A.name == "empty":
        return Estimate("minkowski-content", 0.0, 0.0, "exact")
    if isinstance(A, (HalfSpace, Ball)):
        a = A.measure(mu)
        ratios = np.array([(A.enlargement_measure(mu, e) - a) / e for e in widths])
        value, gap = richardson(ratios, widths, 1.0)
        return Estimate("minkowski-content", value, gap, "richardson")
    if isinstance(A, Box):
        shells = _enlargement_mc(A, mu, widths, samples, seed)
        ratios = shells.mean(axis=1) / widths
        value, gap = richardson(ratios, widths, 1.0)
        # propagate sampling noise through the (linear) extrapolation weights
        basis = np.eye(widths.size)
        wts = np.array([richardson(b, widths, 1.0)[0] for b in basis])
        per_sample = (wts / widths) @ shells
        se = float(np.std(per_sample, ddof=1) / math.sqrt(samples))
        return Estimate("minkowski-content", value, gap + se, "richardson-mc")
    raise ValueError("Minkowski content covers half-spaces, balls and boxes")


def isoperimetric_bound_check(A, mu: ProductMeasure, C: float = 1.0, **kw) -> InequalityReport:
    """``a(1-a)(log 1/(a(1-a)))^{1/2} / C <= mu+(A)``; reports the minimal admissible ``C``."""
    a = A.measure(mu)
    if not 0.0 < a < 1.0:
        raise ValueError("degenerate set: measure must lie in (0, 1)")
    est = minkowski_content(A, mu, **kw)
    shape = isoperimetric_shape(a)
    return InequalityReport(
        "isoperimetric-shape",
        f"{type(A).__name__.lower()} a={a:.6g}",
        shape / C,
        est.value,
        C,
        slack=3.0 * est.std_error,
        extra={"a": a, "min_C": shape / est.value if est.value > 0 else math.inf, "profile": isoperimetric_profile(a)},
    )


# ---------------------------------------------------------------------------
# influence lower bounds


def _max_influence(A, mu: ProductMeasure, method: str, **kw) -> tuple[float, int, float]:
    ests = [geometric_influence(A, i, mu, method, **kw) for i in range(mu.dim)]
    k = int(np.argmax([e.value for e in ests]))
    return ests[k].value, k, ests[k].std_error


def corollary7_check(A, mu: ProductMeasure, C: float = 1.0, method: str = "auto", **kw) -> InequalityReport:
    """``max_i I_i(A) >= a(1-a) (log(N/(a(1-a))))^{1/2} / (C N)``.

    The weaker ``a(1-a)(log N)^{1/2}/(C N)`` and the smallest constant that
    would still pass are attached in ``extra``.
    """
    a = A.measure(mu)
    if not 0.0 < a < 1.0:
        raise ValueError("degenerate set: measure must lie in (0, 1)")
    N = mu.dim
    v = a * (1.0 - a)
    strong = v * math.sqrt(math.log(N / v)) / N
    weak = v * math.sqrt(math.log(N)) / N
    top, k, se = _max_influence(A, mu, method, **kw)
    return InequalityReport(
        "influence-lower-bound",
        f"{type(A).__name__.lower()} N={N} a={a:.6g}",
        strong / C,
        top,
        C,
        slack=3.0 * se,
        extra={"a": a, "weak_bound": weak / C, "coordinate": k, "min_C": strong / top if top > 0 else math.inf},
    )


def exp_power_exponent(alpha: float) -> tuple[float, bool]:
    """``(beta, fallback)``: ``beta = 2(1 - 1/alpha)`` inside ``(1, 2)``, else ``beta = 1``."""
    if alpha <= 1.0:
        raise ValueError("alpha must exceed 1")
    if 1.0 < alpha < 2.0:
        return 2.0 * (1.0 - 1.0 / alpha), False
    if alpha == 2.0:
        return 1.0, False
    return 1.0, True


def exp_power_influence_report(A, mu: ProductMeasure, C: float | None = None) -> InequalityReport:
    """``max_i I_i(A) >= a(1-a) (log(N/(a(1-a))))^{beta/2} / (C N)`` for exp-power products.

    All factors must share one ``alpha``; outside ``(1, 2)`` the report is
    flagged as using ``beta = 1``.
    """
    alphas = {f.alpha for f in mu.factors if f.kind == "exp_power"}
    if len(alphas) != 1 or any(f.kind != "exp_power" for f in mu.factors):
        raise ValueError("needs a product of exp-power factors with one alpha")
    alpha = alphas.pop()
    beta, fallback = exp_power_exponent(alpha)
    if C is None:
        from ..calibration import frozen_constant

        C = frozen_constant("exp-power")
    a = A.measure(mu)
    if not 0.0 < a < 1.0:
        raise ValueError("degenerate set: measure must lie in (0, 1)")
    N = mu.dim
    v = a * (1.0 - a)
    strong = v * math.log(N / v) ** (beta / 2.0) / N
    weak = v * math.log(N) ** (beta / 2.0) / N
    top, k, _ = _max_influence(A, mu, "analytic")
    return InequalityReport(
        "exp-power-influence",
        f"alpha={alpha:g} N={N} a={a:.6g}",
        strong / C,
        top,
        C,
        extra={"beta": beta, "fallback": fallback, "weak_bound": weak / C, "min_C": strong / top if top > 0 else math.inf},
    )


def mollification_bias(t: float, eps: float) -> float:
    """Leading relative bias of the mollified half-space influence: ``eps^2 var(psi) (t^2 - 1) / 2``."""
    return 0.5 * eps * eps * BUMP_VARIANCE * (t * t - 1.0)
