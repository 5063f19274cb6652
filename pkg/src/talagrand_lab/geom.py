"""The sphere with its rotation derivatives, and geometric decompositions of the identity."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import integrate

from .gauss.inequalities import l1_summand
from .gauss.influence import isoperimetric_profile, isoperimetric_shape
from .gauss.measures import ProductMeasure, QuadratureGrid, SmoothFunction
from .gauss.ou import _average, _require_grid, ou_gradient
from .gauss.sets import Box, HalfSpace
from .montecarlo import batch_means_error
from .report import InequalityReport
from .talagrand import talagrand_summand

SPHERE_TOL = 1e-12
DECOMP_TOL = 1e-10


# ---------------------------------------------------------------------------
# sphere


@dataclass(frozen=True, eq=False)
class SphereModel:
    """Uniform measure on ``S^{n-1}`` sampled as normalised gaussians.

    Samples come in antithetic pairs ``(x, -x)`` stored next to each other,
    so contiguous batches keep pairs together.
    """

    n: int
    samples: int = 100000
    seed: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("ambient dimension must be at least 2")
        if self.samples < 2:
            raise ValueError("need at least two samples")

    @cached_property
    def points(self) -> np.ndarray:
        rng = np.random.Generator(np.random.Philox(key=self.seed))
        half = (self.samples + 1) // 2
        G = rng.standard_normal((half, self.n))
        G /= np.linalg.norm(G, axis=1, keepdims=True)
        X = np.empty((2 * half, self.n))
        X[0::2] = G
        X[1::2] = -G
        return X[: self.samples]

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.samples, 1.0 / self.samples)


def _on_sphere(x) -> np.ndarray:
    X = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if np.max(np.abs(np.linalg.norm(X, axis=1) - 1.0)) > SPHERE_TOL:
        raise ValueError("points must lie on the unit sphere")
    return X


def dij_derivative(f: SmoothFunction, i: int, j: int, x):
    """``D_ij f = x_i d_j f - x_j d_i f`` at points of the sphere."""
    X = _on_sphere(x)
    n = X.shape[1]
    if not (0 <= i < n and 0 <= j < n):
        raise ValueError("index out of range")
    G = f.grad(X)
    out = X[:, i] * G[:, j] - X[:, j] * G[:, i]
    return float(out[0]) if np.ndim(x) == 1 else out


def all_dij(f: SmoothFunction, X: np.ndarray) -> np.ndarray:
    """``D_ij f`` for every ``i < j``, shape ``(M, n(n-1)/2)``."""
    G = f.grad(X)
    pairs = list(itertools.combinations(range(X.shape[1]), 2))
    return np.stack([X[:, i] * G[:, j] - X[:, j] * G[:, i] for i, j in pairs], axis=1)


def spherical_laplacian(f: SmoothFunction, X: np.ndarray) -> np.ndarray:
    """``Delta f - x^T H x - (n-1) x . grad f`` for ``f`` extended to ``R^n``."""
    if f.hessian is None:
        raise ValueError("needs a Hessian")
    X = _on_sphere(X)
    H = f.hessian(X)
    G = f.grad(X)
    n = X.shape[1]
    return np.trace(H, axis1=1, axis2=2) - np.einsum("mi,mij,mj->m", X, H, X) - (n - 1) * np.sum(X * G, axis=1)


def _sphere_stat(model: SphereModel, stat, slack_sigmas: float = 3.0):
    P = model.points
    value = stat(np.arange(P.shape[0]))
    se = batch_means_error(stat, np.arange(P.shape[0]))
    return value, slack_sigmas * se


def sphere_dirichlet_identity_check(f: SmoothFunction, model: SphereModel) -> InequalityReport:
    """``int f(-Delta f) = sum_{i<j} int (D_ij f)^2`` (half the ordered-pair sum) within 3 standard errors."""
    X = model.points
    v = f.value(X)
    lap = spherical_laplacian(f, X)
    D2 = np.sum(all_dij(f, X) ** 2, axis=1)

    def diff(rows):
        return float(np.mean(-v[rows] * lap[rows]) - np.mean(D2[rows]))

    d, slack = _sphere_stat(model, diff)
    return InequalityReport(
        "sphere-dirichlet-identity",
        f"sphere n={model.n} {f.name}",
        abs(d),
        0.0,
        1.0,
        slack=slack,
        extra={"laplacian_side": float(np.mean(-v * lap)), "pair_side": float(np.mean(D2))},
    )


def _pair_norms(D: np.ndarray, rows) -> tuple[np.ndarray, np.ndarray]:
    sub = D[rows]
    return np.sqrt(np.mean(sub ** 2, axis=0)), np.mean(np.abs(sub), axis=0)


def _var(v: np.ndarray) -> float:
    return float(np.mean((v - v.mean()) ** 2))


def corollary4_report(f: SmoothFunction, model: SphereModel) -> InequalityReport:
    """``Var f <= (4e/n) sum_{i,j} ||D_ij f||_2^2 / (1 + log(||D_ij f||_2 / ||D_ij f||_1))``.

    The ordered-pair sum is twice the sum over ``i < j``.
    """
    X = model.points
    v = f.value(X)
    D = all_dij(f, X)
    C = 4.0 * math.e / model.n

    def sides(rows):
        n2, n1 = _pair_norms(D, rows)
        return _var(v[rows]), 2.0 * C * sum(talagrand_summand(a, b) for a, b in zip(n2, n1))

    lhs, rhs = sides(np.arange(X.shape[0]))
    _, slack = _sphere_stat(model, lambda r: np.subtract(*sides(r)))
    return InequalityReport("sphere-l2-talagrand", f"sphere n={model.n} {f.name}", lhs, rhs, C, slack)


def sphere_poincare_check(f: SmoothFunction, model: SphereModel) -> InequalityReport:
    """``(n-1) Var f <= sum_{i<j} ||D_ij f||_2^2`` within Monte Carlo error."""
    X = model.points
    v = f.value(X)
    D2 = np.sum(all_dij(f, X) ** 2, axis=1)

    def sides(rows):
        return (model.n - 1) * _var(v[rows]), float(np.mean(D2[rows]))

    lhs, rhs = sides(np.arange(X.shape[0]))
    _, slack = _sphere_stat(model, lambda r: np.subtract(*sides(r)))
    return InequalityReport("sphere-poincare", f"sphere n={model.n} {f.name}", lhs, rhs, model.n - 1, slack)


def theorem8_report(f: SmoothFunction, model: SphereModel, C: float | None = None) -> InequalityReport:
    """``Var f <= (C / sqrt n) sum_{i,j} b_ij (1 + b_ij) / [1 + log+(1/b_ij)]^{1/2}``, ``b_ij = ||D_ij f||_1``."""
    if not f.bounded:
        raise ValueError("needs a function flagged |f| <= 1")
    if C is None:
        from .calibration import frozen_constant

        C = frozen_constant("theorem8")
    X = model.points
    v = f.value(X)
    D = all_dij(f, X)
    K = C / math.sqrt(model.n)

    def sides(rows):
        b = np.mean(np.abs(D[rows]), axis=0)
        return _var(v[rows]), 2.0 * K * sum(l1_summand(x) for x in b)

    lhs, rhs = sides(np.arange(X.shape[0]))
    _, slack = _sphere_stat(model, lambda r: np.subtract(*sides(r)))
    pairs = [f"{i}-{j}" for i, j in itertools.combinations(range(model.n), 2)]
    infl = dict(zip(pairs, np.mean(np.abs(D), axis=0).tolist()))
    return InequalityReport("sphere-l1-talagrand", f"sphere n={model.n} {f.name}", lhs, rhs, K, slack, {"pair_l1": infl})


# ---------------------------------------------------------------------------
# sphere test functions


def linear(a) -> SmoothFunction:
    a = np.asarray(a, dtype=np.float64)
    return SmoothFunction(
        lambda X: X @ a,
        lambda X: np.broadcast_to(a, X.shape).copy(),
        lambda X: np.zeros((X.shape[0], a.size, a.size)),
        False,
        "linear",
    )


def quadratic(A, name: str = "quadratic") -> SmoothFunction:
    """``x^T A x`` for symmetric ``A``; harmonic iff ``trace A = 0``."""
    A = np.asarray(A, dtype=np.float64)
    A = 0.5 * (A + A.T)
    return SmoothFunction(
        lambda X: np.einsum("mi,ij,mj->m", X, A, X),
        lambda X: 2.0 * X @ A,
        lambda X: np.broadcast_to(2.0 * A, (X.shape[0],) + A.shape).copy(),
        False,
        name,
    )


def random_harmonic(n: int, degree: int, rng: np.random.Generator) -> SmoothFunction:
    """Random harmonic polynomial of degree 1 or 2 (traceless quadratic form)."""
    if degree == 1:
        return linear(rng.normal(size=n))
    if degree == 2:
        A = rng.normal(size=(n, n))
        A = 0.5 * (A + A.T)
        A -= np.trace(A) / n * np.eye(n)
        return quadratic(A, "harmonic-quadratic")
    raise ValueError("degree must be 1 or 2")


def radial_square() -> SmoothFunction:
    return quadratic(np.eye(3), "radial")


# ---------------------------------------------------------------------------
# decompositions of the identity


class DecompositionError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SubspaceDecomposition:
    """Terms ``(c_i, B_i)`` with ``B_i`` an orthonormal row basis of ``E_i``."""

    terms: tuple

    @property
    def n(self) -> int:
        return self.terms[0][1].shape[1]

    def projections(self) -> list[np.ndarray]:
        return [B.T @ B for _, B in self.terms]

    def identity_error(self) -> float:
        S = sum(c * B.T @ B for c, B in self.terms)
        return float(np.linalg.norm(S - np.eye(self.n), 2))


def validate_decomposition(terms, n: int | None = None) -> SubspaceDecomposition:
    """Check ``sum_i c_i Q_{E_i} = Id`` to ``1e-10``; the trace identity is tested first."""
    clean = []
    for c, B in terms:
        B = np.atleast_2d(np.asarray(B, dtype=np.float64))
        c = float(c)
        if c <= 0:
            raise DecompositionError("weights must be positive")
        if np.linalg.norm(B @ B.T - np.eye(B.shape[0]), 2) > DECOMP_TOL:
            raise DecompositionError("basis rows are not orthonormal")
        clean.append((c, B))
    if not clean:
        raise DecompositionError("no terms")
    dims = {B.shape[1] for _, B in clean}
    if len(dims) != 1:
        raise DecompositionError("bases live in different ambient dimensions")
    m = dims.pop()
    if n is not None and m != n:
        raise DecompositionError(f"expected ambient dimension {n}, got {m}")
    trace = sum(c * B.shape[0] for c, B in clean)
    if abs(trace - m) > DECOMP_TOL * m:
        raise DecompositionError(f"trace identity fails: sum c_i dim E_i = {trace:.12g} != {m}")
    d = SubspaceDecomposition(tuple(clean))
    err = d.identity_error()
    if err > DECOMP_TOL:
        raise DecompositionError(f"sum c_i Q_i differs from the identity by {err:.3g}")
    return d


def coordinate_decomposition(n: int) -> SubspaceDecomposition:
    I = np.eye(n)
    return validate_decomposition([(1.0, I[[k]]) for k in range(n)])


def loomis_whitney(n: int) -> SubspaceDecomposition:
    """``E_i = e_i^perp`` with weights ``1/(n-1)``."""
    if n < 2:
        raise ValueError("need n >= 2")
    I = np.eye(n)
    return validate_decomposition([(1.0 / (n - 1), np.delete(I, k, axis=0)) for k in range(n)])


def random_frame(n: int, rng: np.random.Generator) -> SubspaceDecomposition:
    """Lines along the columns of a random orthogonal matrix, weights 1."""
    Q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    return validate_decomposition([(1.0, Q[:, [k]].T) for k in range(n)])


def parse_decomposition(lines, n: int) -> SubspaceDecomposition:
    """Parse ``term c=<real> basis=<row-major reals>`` lines; rows have length ``n``."""
    terms = []
    for k, line in enumerate(lines, start=1):
        parts = line.split()
        if not parts or parts[0] != "term":
            raise DecompositionError(f"term {k}: expected 'term c=<real> basis=<reals>'")
        kv = dict(p.split("=", 1) for p in parts[1:] if "=" in p)
        if set(kv) != {"c", "basis"}:
            raise DecompositionError(f"term {k}: needs exactly c= and basis=")
        vals = np.array([float(v) for v in kv["basis"].split(",")])
        if vals.size % n:
            raise DecompositionError(f"term {k}: basis length {vals.size} is not a multiple of {n}")
        terms.append((float(kv["c"]), vals.reshape(-1, n)))
    return validate_decomposition(terms, n)


# ---------------------------------------------------------------------------
# gaussian inequalities along a decomposition


def _projected_norms(f: SmoothFunction, decomp: SubspaceDecomposition, grid: QuadratureGrid):
    G = f.grad(grid.points)
    w = grid.weights
    n1, n2 = [], []
    for _, B in decomp.terms:
        g = np.linalg.norm(G @ B.T, axis=1)
        n1.append(float(w @ g))
        n2.append(math.sqrt(float(w @ g ** 2)))
    return np.array(n1), np.array(n2)


def _grid_for(decomp: SubspaceDecomposition, grid: QuadratureGrid | None) -> QuadratureGrid:
    grid = ProductMeasure.standard_gaussian(decomp.n).panel_grid() if grid is None else grid
    _require_grid(grid)
    if grid.dim != decomp.n:
        raise ValueError("grid and decomposition dimensions differ")
    return grid


def _grid_var(f: SmoothFunction, grid: QuadratureGrid) -> float:
    v = f.value(grid.points)
    w = grid.weights
    m = float(w @ v)
    return max(float(w @ (v - m) ** 2), 0.0)


def corollary5_report(f: SmoothFunction, decomp: SubspaceDecomposition, grid: QuadratureGrid | None = None, C: float = 4.0) -> InequalityReport:
    """``Var f <= C sum_i c_i ||Q_i grad f||_2^2 / (1 + log(||Q_i grad f||_2 / ||Q_i grad f||_1))``."""
    grid = _grid_for(decomp, grid)
    n1, n2 = _projected_norms(f, decomp, grid)
    rhs = C * sum(c * talagrand_summand(a, b) for (c, _), a, b in zip(decomp.terms, n2, n1))
    return InequalityReport("decomposition-l2-talagrand", f"gaussian n={decomp.n} m={len(decomp.terms)} {f.name}", _grid_var(f, grid), rhs, C)


def proposition9_report(f: SmoothFunction, decomp: SubspaceDecomposition, grid: QuadratureGrid | None = None, C: float | None = None) -> InequalityReport:
    """``Var f <= C sum_i c_i b_i (1 + b_i) / [1 + log+(1/b_i)]^{1/2}``, ``b_i = ||Q_i grad f||_1``."""
    if not f.bounded:
        raise ValueError("needs a function flagged |f| <= 1")
    if C is None:
        from .calibration import frozen_constant

        C = frozen_constant("prop9")
    grid = _grid_for(decomp, grid)
    n1, _ = _projected_norms(f, decomp, grid)
    rhs = C * sum(c * l1_summand(b) for (c, _), b in zip(decomp.terms, n1))
    return InequalityReport("decomposition-l1-talagrand", f"gaussian n={decomp.n} m={len(decomp.terms)} {f.name}", _grid_var(f, grid), rhs, C)


def projection_commutation_error(f: SmoothFunction, decomp: SubspaceDecomposition, t: float, grid: QuadratureGrid, points) -> float:
    """``max |Q_i grad P_t f - e^{-t} P_t(Q_i grad f)|`` over ``points`` and terms."""
    _require_grid(grid)
    X = np.atleast_2d(np.asarray(points, dtype=np.float64))
    left = np.atleast_2d(ou_gradient(f, t, X, grid, "parts"))
    right = math.exp(-t) * (_average(f.grad, t, X, grid) if t > 0 else f.grad(X))
    worst = 0.0
    for _, B in decomp.terms:
        worst = max(worst, float(np.max(np.abs(left @ B.T - right @ B.T))))
    return worst


# ---------------------------------------------------------------------------
# hyperplane sections


def _phi(x):
    return np.exp(-0.5 * np.asarray(x, dtype=np.float64) ** 2) / math.sqrt(2.0 * math.pi)


def section_boundary(A, i: int, z: float) -> float:
    """Gaussian boundary measure of the section ``{y : (y with x_i = z) in A}`` in ``R^{n-1}``."""
    if isinstance(A, HalfSpace):
        u = A.normal
        r = float(np.linalg.norm(np.delete(u, i)))
        if r == 0.0:
            return 0.0
        return float(_phi((A.threshold - u[i] * z) / r))
    if isinstance(A, Box):
        if A.is_empty or not A.lo[i] <= z <= A.hi[i]:
            return 0.0
        m = A.side_masses(ProductMeasure.standard_gaussian(A.dim))
        total = 0.0
        for j in range(A.dim):
            if j == i:
                continue
            ends = sum(float(_phi(b)) for b in (A.lo[j], A.hi[j]) if np.isfinite(b))
            total += ends * float(np.prod(np.delete(m, [i, j])))
        return total
    raise ValueError("sections are computed for half-spaces and boxes only")


def averaged_section_boundary(A, i: int) -> float:
    """``int mu+(A^z) dphi(z)`` by adaptive quadrature."""
    cuts = [-np.inf, np.inf]
    if isinstance(A, Box):
        cuts[1:1] = [b for b in (A.lo[i], A.hi[i]) if np.isfinite(b)]

    def integrand(z):
        return section_boundary(A, i, z) * float(_phi(z))

    total = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        total += integrate.quad(integrand, a, b, epsabs=1e-13, epsrel=1e-11, limit=200)[0]
    return total


def section_boundary_check(A, mu: ProductMeasure | None = None, i: int | None = None, C: float | None = None) -> InequalityReport:
    """Averaged section boundary ``>= a(1-a)(log 1/(a(1-a)))^{1/2} / C``.

    With ``i = None`` the best coordinate is used, which is what the bound
    promises.  For half-spaces ``extra["halfspace_sections"]`` records whether
    some coordinate has half-space sections attaining the isoperimetric value.
    """
    if not isinstance(A, (HalfSpace, Box)):
        raise ValueError("needs a half-space or a box")
    mu = ProductMeasure.standard_gaussian(A.dim) if mu is None else mu
    if not mu.is_gaussian or mu.dim != A.dim:
        raise ValueError("needs the standard gaussian measure of matching dimension")
    if A.dim < 2:
        raise ValueError("sections need dimension >= 2")
    a = A.measure(mu)
    if not 0.0 < a < 1.0:
        raise ValueError("degenerate set: measure must lie in (0, 1)")
    if C is None:
        from .calibration import frozen_constant

        C = frozen_constant("section-boundary")
    avgs = [averaged_section_boundary(A, k) for k in range(A.dim)]
    k = int(np.argmax(avgs)) if i is None else i
    extra = {"a": a, "averages": avgs, "coordinate": k, "min_C": isoperimetric_shape(a) / avgs[k] if avgs[k] > 0 else math.inf}
    if isinstance(A, HalfSpace):
        extra["halfspace_sections"] = any(np.linalg.norm(np.delete(A.normal, j)) > 0 for j in range(A.dim))
        extra["profile"] = isoperimetric_profile(a)
    return InequalityReport("section-boundary", f"{type(A).__name__.lower()} n={A.dim} a={a:.6g}", isoperimetric_shape(a) / C, avgs[k], C, extra=extra)
