"""Ornstein-Uhlenbeck semigroup by quadrature, gradients and gradient norms."""
from __future__ import annotations

import math

import numpy as np

from ..report import Estimate, InequalityReport
from .measures import ProductMeasure, QuadratureGrid, SampleCloud, SmoothFunction

CHUNK_ROWS = 1 << 21


def _require_grid(grid: QuadratureGrid):
    if not grid.gaussian:
        raise ValueError("the Ornstein-Uhlenbeck semigroup needs a standard gaussian grid")


def _points(x, dim: int) -> tuple[np.ndarray, bool]:
    X = np.asarray(x, dtype=np.float64)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    if X.shape[1] != dim:
        raise ValueError(f"points must have {dim} coordinates")
    return X, single


def _average(fn, t: float, X: np.ndarray, grid: QuadratureGrid, weight_y: bool = False):
    """``sum_k w_k g(y_k) fn(e^{-t} x + s y_k)`` for each row of ``X``; ``g = y`` if ``weight_y``."""
    Y, w = grid.points, grid.weights
    a, s = math.exp(-t), math.sqrt(-math.expm1(-2.0 * t))
    per = max(1, CHUNK_ROWS // Y.shape[0])
    out = []
    for start in range(0, X.shape[0], per):
        Xc = X[start:start + per]
        Z = (a * Xc[:, None, :] + s * Y[None, :, :]).reshape(-1, X.shape[1])
        v = np.asarray(fn(Z), dtype=np.float64)
        v = v.reshape(Xc.shape[0], Y.shape[0], *v.shape[1:])
        if weight_y:
            out.append(np.einsum("k,mk...,kd->md...", w, v, Y))
        else:
            out.append(np.tensordot(v, w, axes=([1], [0])) if v.ndim == 2 else np.einsum("k,mk...->m...", w, v))
    return np.concatenate(out, axis=0)


def ou_semigroup_apply(f: SmoothFunction, t: float, x, grid: QuadratureGrid):
    """``P_t f(x) = int f(e^{-t} x + sqrt(1 - e^{-2t}) y) dmu(y)`` on ``grid``."""
    _require_grid(grid)
    if t < 0:
        raise ValueError("t must be nonnegative")
    X, single = _points(x, grid.dim)
    out = f.value(X) if t == 0 else _average(f.value, t, X, grid)
    return float(out[0]) if single else out


def ou_gradient(f: SmoothFunction, t: float, x, grid: QuadratureGrid, route: str = "parts"):
    """``grad P_t f(x)``.

    ``route="parts"`` uses only values of ``f``:
    ``e^{-t} / sqrt(1 - e^{-2t}) int y f(e^{-t} x + sqrt(1 - e^{-2t}) y) dmu(y)``;
    ``route="chain"`` differentiates under the integral: ``e^{-t} P_t(grad f)(x)``.
    """
    _require_grid(grid)
    X, single = _points(x, grid.dim)
    if t < 0:
        raise ValueError("t must be nonnegative")
    if route == "chain" or t == 0:
        G = f.grad(X) if t == 0 else math.exp(-t) * _average(f.grad, t, X, grid)
    elif route == "parts":
        G = math.exp(-t) / math.sqrt(-math.expm1(-2.0 * t)) * _average(f.value, t, X, grid, weight_y=True)
    else:
        raise ValueError(f"unknown route {route!r}")
    return G[0] if single else G


def block_norms(G: np.ndarray, blocks) -> np.ndarray:
    """Euclidean norm of each gradient block, shape ``(M, N)``."""
    return np.stack([np.linalg.norm(G[:, b], axis=1) for b in blocks], axis=1)


def variance(f: SmoothFunction, backend: QuadratureGrid | SampleCloud) -> float:
    v = f.value(backend.points)
    w = backend.weights
    m = float(w @ v)
    return max(float(w @ (v - m) ** 2), 0.0)


def _moment(values: np.ndarray, backend, r: float) -> tuple[float, float]:
    a = np.abs(values) ** r
    m = float(backend.weights @ a)
    if isinstance(backend, SampleCloud):
        se = float(np.std(a, ddof=1) / math.sqrt(a.size)) if a.size > 1 else 0.0
    else:
        se = 0.0
    return m, se


def gradient_lp_norm(f: SmoothFunction, mu: ProductMeasure, block: int, r: float, backend) -> Estimate:
    """``(int |grad_i f|^r dmu)^(1/r)``; a sample-cloud backend adds a delta-method standard error."""
    if r <= 0:
        raise ValueError("r must be positive")
    if block < 0 or block >= mu.N:
        raise ValueError("block out of range")
    if backend.points.shape[1] != mu.dim:
        raise ValueError("backend dimension does not match the measure")
    g = np.linalg.norm(f.grad(backend.points)[:, mu.blocks[block]], axis=1)
    m, se = _moment(g, backend, r)
    val = m ** (1.0 / r)
    if m > 0:
        se = se * val / (r * m)
    method = "cloud" if isinstance(backend, SampleCloud) else "grid"
    return Estimate(f"grad-L{r:g}[{block}]", val, se, method)


def block_gradient_norms(f: SmoothFunction, mu: ProductMeasure, backend, orders=(1.0, 2.0)) -> dict:
    """``{r: array of ||grad_i f||_r over blocks}``, evaluating the gradient once."""
    B = block_norms(f.grad(backend.points), mu.blocks)
    return {r: (backend.weights @ (B ** r)) ** (1.0 / r) for r in orders}


def gradient_commutation_check(
    f: SmoothFunction,
    t: float,
    grid: QuadratureGrid,
    points,
    kappa: float = -1.0,
    blocks=None,
    atol: float = 1e-8,
) -> InequalityReport:
    """Pointwise ``|grad_i P_t f| <= e^{kappa t} P_t |grad_i f|`` on ``points``, each block.

    The left side uses the integration-by-parts route, so it never sees ``grad f``.
    The report carries the worst point: its two sides, plus ``atol`` slack.
    """
    _require_grid(grid)
    X, _ = _points(points, grid.dim)
    blocks = blocks or [np.array([k]) for k in range(grid.dim)]
    lhs = block_norms(np.atleast_2d(ou_gradient(f, t, X, grid, "parts")), blocks)
    if t == 0:
        absg = block_norms(f.grad(X), blocks)
    else:
        absg = _average(lambda Z: block_norms(f.grad(Z), blocks), t, X, grid)
    rhs = math.exp(kappa * t) * absg
    excess = lhs - rhs
    k = np.unravel_index(int(np.argmax(excess)), excess.shape)
    return InequalityReport(
        "gradient-commutation",
        f"gaussian d={grid.dim} t={t:g} kappa={kappa:g} {f.name}",
        float(lhs[k]),
        float(rhs[k]),
        math.exp(kappa * t),
        slack=atol,
        extra={"max_excess": float(excess[k]), "block": int(k[1])},
    )


def admissible_time(curvature_kappa: float) -> float:
    """Upper end of the range ``0 < t <= 1/(2 kappa)``, read as ``1`` when ``kappa = 0``."""
    if curvature_kappa < 0:
        raise ValueError("curvature bound must be nonnegative")
    return 1.0 if curvature_kappa == 0 else 1.0 / (2.0 * curvature_kappa)


def gradient_bound_check(
    f: SmoothFunction,
    t: float,
    grid: QuadratureGrid,
    points,
    curvature_kappa: float = 0.0,
    tol: float = 1e-6,
) -> InequalityReport:
    """``sup_x |grad P_t f(x)| sqrt(t) <= 1`` for ``|f| <= 1``."""
    if not f.bounded:
        raise ValueError("the gradient bound needs a function flagged |f| <= 1")
    T = admissible_time(curvature_kappa)
    if not 0 < t <= T:
        raise ValueError(f"t must lie in (0, {T:g}]")
    X, _ = _points(points, grid.dim)
    G = np.atleast_2d(ou_gradient(f, t, X, grid, "parts"))
    sup = float(np.max(np.linalg.norm(G, axis=1))) * math.sqrt(t)
    return InequalityReport("gradient-bound", f"gaussian d={grid.dim} t={t:g} {f.name}", sup, 1.0, 1.0, slack=tol)


def sign_probe(t: float, width: float = 0.0) -> float:
    """``sqrt(t) sup_x |grad P_t f|`` for ``f = erf(x_1 / (width sqrt 2))`` (``sign`` at width 0).

    ``P_t f(x) = 2 Phi(e^{-t} x_1 / sqrt(width^2 + 1 - e^{-2t})) - 1`` in closed
    form, so the supremum sits at ``x = 0``.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    s2 = width * width - math.expm1(-2.0 * t)
    return math.sqrt(t) * 2.0 * math.exp(-t) / math.sqrt(2.0 * math.pi * s2)


def sign_probe_limit() -> float:
    """``lim_{t -> 0} sign_probe(t) = 1/sqrt(pi)``."""
    return 1.0 / math.sqrt(math.pi)
