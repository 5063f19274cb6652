"""Product measures ``e^{-V} dx``, their quadrature grids and sample clouds."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, special

SQRT2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class Factor:
    """One factor ``mu_i`` of a product measure.

    ``kind`` is ``"gaussian"`` (standard normal on ``R^dim``),
    ``"exp_power"`` (density ``c_alpha e^{-|x|^alpha}`` on the line) or
    ``"custom"`` (density ``e^{-V}`` on the line, normalised numerically).

    ``rho`` is the log-Sobolev constant (``None`` if the factor is not
    hypercontractive), ``curvature_kappa >= 0`` bounds ``V'' >= -kappa``
    and ``commutation_rate`` is the exponent in
    ``|grad P_t f| <= e^{rate t} P_t |grad f|``.
    """

    kind: str = "gaussian"
    dim: int = 1
    alpha: float = 2.0
    potential: Callable | None = field(default=None, compare=False)
    rho: float | None = 1.0
    curvature_kappa: float = 0.0
    commutation_rate: float = -1.0
    support: float = 12.0

    def __post_init__(self):
        if self.kind not in ("gaussian", "exp_power", "custom"):
            raise ValueError(f"unknown factor kind {self.kind!r}")
        if self.kind != "gaussian" and self.dim != 1:
            raise ValueError("non-gaussian factors are one-dimensional")
        if self.kind == "exp_power" and self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.kind == "custom" and self.potential is None:
            raise ValueError("custom factors need a potential")

    @cached_property
    def _custom_norm(self) -> float:
        z, _ = integrate.quad(lambda x: math.exp(-self.potential(x)), -self.support, self.support, limit=400)
        return z

    def pdf(self, x):
        x = np.asarray(x, dtype=np.float64)
        if self.kind == "gaussian":
            return np.exp(-0.5 * x * x) / SQRT2PI
        if self.kind == "exp_power":
            return exp_power_norm(self.alpha) * np.exp(-np.abs(x) ** self.alpha)
        return np.exp(-np.vectorize(self.potential)(x)) / self._custom_norm

    def cdf(self, x):
        x = np.asarray(x, dtype=np.float64)
        if self.kind == "gaussian":
            return special.ndtr(x)
        if self.kind == "exp_power":
            a = self.alpha
            return 0.5 + 0.5 * np.sign(x) * special.gammainc(1.0 / a, np.abs(x) ** a)
        return np.interp(x, *self._cdf_table, left=0.0, right=1.0)

    def ppf(self, u):
        u = np.asarray(u, dtype=np.float64)
        if self.kind == "gaussian":
            return special.ndtri(u)
        if self.kind == "exp_power":
            a = self.alpha
            r = special.gammaincinv(1.0 / a, np.abs(2.0 * u - 1.0)) ** (1.0 / a)
            return np.sign(u - 0.5) * r
        xs, cs = self._cdf_table
        return np.interp(u, cs, xs)

    @cached_property
    def _cdf_table(self):
        xs = np.linspace(-self.support, self.support, 20001)
        cs = integrate.cumulative_simpson(self.pdf(xs), x=xs, initial=0.0)
        return xs, cs / cs[-1]

    def rule(self, nodes: int):
        """1-d quadrature rule for this factor's density."""
        if self.kind == "gaussian":
            return gauss_hermite_rule(nodes)
        return composite_rule(self.pdf, -self.support, self.support, panels=max(nodes // 8, 8), order=8)


def gaussian(dim: int = 1) -> Factor:
    return Factor("gaussian", dim, rho=1.0, curvature_kappa=0.0, commutation_rate=-1.0)


def exp_power(alpha: float) -> Factor:
    """``c_alpha e^{-|x|^alpha}``; convex potential, hypercontractive only for ``alpha >= 2``."""
    # alpha = 2 is the normal law with variance 1/2: V'' = 2
    rho = 2.0 if alpha == 2.0 else None
    return Factor("exp_power", 1, alpha=alpha, rho=rho, curvature_kappa=0.0, commutation_rate=-2.0 if alpha == 2.0 else 0.0)


def custom(potential: Callable, rho: float | None, kappa: float, support: float = 12.0) -> Factor:
    return Factor("custom", 1, potential=potential, rho=rho, curvature_kappa=max(kappa, 0.0), commutation_rate=kappa, support=support)


def exp_power_norm(alpha: float) -> float:
    """``c_alpha = alpha / (2 Gamma(1/alpha))``."""
    return alpha / (2.0 * math.gamma(1.0 / alpha))


def gauss_hermite_rule(n: int):
    """Nodes/weights for the standard normal, exact for polynomials of degree ``2n - 1``."""
    x, w = np.polynomial.hermite_e.hermegauss(n)
    return x, w / w.sum()


def composite_rule(density: Callable, lo: float, hi: float, panels: int = 200, order: int = 8):
    """Composite Gauss-Legendre rule on ``[lo, hi]`` weighted by ``density`` and normalised."""
    g, gw = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    x = (mid[:, None] + half[:, None] * g[None, :]).ravel()
    w = (half[:, None] * gw[None, :]).ravel() * density(x)
    return x, w / w.sum()


def gaussian_panel_rule(lo: float = -9.0, hi: float = 9.0, panels: int = 400, order: int = 6):
    """Fine composite rule for the standard normal, for integrands with narrow features."""
    return composite_rule(lambda x: np.exp(-0.5 * x * x), lo, hi, panels, order)


@dataclass(frozen=True, eq=False)
class QuadratureGrid:
    """Tensor product of 1-d rules, one per coordinate.

    A Gauss-Hermite rule with ``n`` nodes integrates polynomials of degree
    ``<= 2n - 1`` in that coordinate exactly.  ``gaussian`` marks grids for
    the standard normal, the only ones the Ornstein-Uhlenbeck routines accept.
    """

    rules: tuple
    gaussian: bool = False

    @property
    def dim(self) -> int:
        return len(self.rules)

    @cached_property
    def points(self) -> np.ndarray:
        axes = np.meshgrid(*[r[0] for r in self.rules], indexing="ij")
        return np.stack([a.ravel() for a in axes], axis=1)

    @cached_property
    def weights(self) -> np.ndarray:
        w = self.rules[0][1]
        for r in self.rules[1:]:
            w = np.multiply.outer(w, r[1])
        w = np.asarray(w).ravel()
        return w / w.sum()

    def integrate(self, values) -> float:
        return float(self.weights @ np.asarray(values, dtype=np.float64))


def gaussian_grid(dim: int, nodes: int = 20, overrides: dict | None = None) -> QuadratureGrid:
    return ProductMeasure.standard_gaussian(dim).grid(nodes, overrides)


@dataclass(frozen=True, eq=False)
class SampleCloud:
    seed: int
    points: np.ndarray

    @property
    def count(self) -> int:
        return self.points.shape[0]

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.count, 1.0 / self.count)


@dataclass(frozen=True, eq=False)
class ProductMeasure:
    factors: tuple

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if not self.factors:
            raise ValueError("need at least one factor")

    @classmethod
    def standard_gaussian(cls, n: int, block: int = 1) -> "ProductMeasure":
        if n % block:
            raise ValueError("block size must divide the dimension")
        return cls(tuple(gaussian(block) for _ in range(n // block)))

    @property
    def dim(self) -> int:
        return sum(f.dim for f in self.factors)

    @property
    def N(self) -> int:
        return len(self.factors)

    @cached_property
    def blocks(self) -> tuple:
        out, start = [], 0
        for f in self.factors:
            out.append(np.arange(start, start + f.dim))
            start += f.dim
        return tuple(out)

    @cached_property
    def coordinate_factors(self) -> tuple:
        return tuple(f for f in self.factors for _ in range(f.dim))

    @property
    def is_gaussian(self) -> bool:
        return all(f.kind == "gaussian" for f in self.factors)

    @property
    def rho(self) -> float | None:
        rhos = [f.rho for f in self.factors]
        return None if any(r is None for r in rhos) else min(rhos)

    @property
    def curvature_kappa(self) -> float:
        return max(f.curvature_kappa for f in self.factors)

    @property
    def commutation_rate(self) -> float:
        return max(f.commutation_rate for f in self.factors)

    def grid(self, nodes: int = 20, overrides: dict | None = None) -> QuadratureGrid:
        """Tensor grid with ``nodes`` per coordinate; ``overrides`` maps a coordinate to a 1-d rule."""
        overrides = overrides or {}
        rules = []
        for k, fac in enumerate(self.coordinate_factors):
            rules.append(overrides[k] if k in overrides else fac.rule(nodes))
        return QuadratureGrid(tuple(rules), self.is_gaussian)

    def panel_grid(self, nodes: int = 64, order: int = 4) -> QuadratureGrid:
        """Composite Gauss-Legendre grid; robust for integrands with kinks such as ``|grad f|``."""
        panels = max(nodes // order, 1)
        rules = []
        for fac in self.coordinate_factors:
            L = 8.0 if fac.kind == "gaussian" else fac.support
            rules.append(composite_rule(fac.pdf, -L, L, panels, order))
        return QuadratureGrid(tuple(rules), self.is_gaussian)

    def sample(self, count: int, seed: int, antithetic: bool = False) -> SampleCloud:
        """i.i.d. draws using a counter-based generator keyed by ``seed``."""
        rng = np.random.Generator(np.random.Philox(key=seed))
        m = (count + 1) // 2 if antithetic else count
        cols = []
        for fac in self.coordinate_factors:
            if fac.kind == "gaussian":
                cols.append(rng.standard_normal(m))
            else:
                cols.append(fac.ppf(rng.random(m)))
        X = np.stack(cols, axis=1)
        if antithetic:
            X = np.concatenate([X, -X])[:count]
        return SampleCloud(seed, X)

    def check_normalisation(self, nodes: int = 40) -> float:
        """Largest deviation of a 1-d factor's integral from 1 (adaptive quadrature)."""
        worst = 0.0
        for fac in self.factors:
            z, _ = integrate.quad(lambda x: float(fac.pdf(x)), -np.inf, np.inf, limit=200)
            worst = max(worst, abs(z - 1.0))
        return worst


@dataclass(frozen=True, eq=False)
class SmoothFunction:
    """Evaluator and gradient on ``(M, d)`` point arrays.

    ``hessian`` (optional) returns ``(M, d, d)``; ``bounded`` declares ``|f| <= 1``.
    """

    value: Callable[[np.ndarray], np.ndarray]
    grad: Callable[[np.ndarray], np.ndarray]
    hessian: Callable[[np.ndarray], np.ndarray] | None = None
    bounded: bool = False
    name: str = "f"

    def __call__(self, X):
        return self.value(np.atleast_2d(X))


def finite_difference_error(f: SmoothFunction, X: np.ndarray, h: float = 1e-5) -> float:
    """Max relative deviation of ``f.grad`` from central differences at ``X``."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    G = f.grad(X)
    worst = 0.0
    for k in range(X.shape[1]):
        e = np.zeros(X.shape[1])
        e[k] = h
        fd = (f.value(X + e) - f.value(X - e)) / (2 * h)
        scale = np.maximum(1.0, np.abs(G[:, k]))
        worst = max(worst, float(np.max(np.abs(fd - G[:, k]) / scale)))
    return worst


# ---------------------------------------------------------------------------
# function families


def polynomial(terms: Sequence[tuple[float, Sequence[int]]], name: str = "poly") -> SmoothFunction:
    """``sum c * prod x_k^{e_k}`` from ``(c, exponents)`` pairs."""
    coefs = np.array([float(c) for c, _ in terms])
    exps = np.array([list(e) for _, e in terms], dtype=np.int64)

    def value(X):
        return np.prod(X[:, None, :] ** exps[None, :, :], axis=2) @ coefs

    def grad(X):
        d = X.shape[1]
        out = np.zeros((X.shape[0], d))
        for k in range(d):
            e = exps.copy()
            c = coefs * e[:, k]
            e[:, k] = np.maximum(e[:, k] - 1, 0)
            out[:, k] = np.prod(X[:, None, :] ** e[None, :, :], axis=2) @ c
        return out

    def hessian(X):
        d = X.shape[1]
        out = np.zeros((X.shape[0], d, d))
        for a in range(d):
            for b in range(d):
                e = exps.copy()
                c = coefs * e[:, a]
                e[:, a] = np.maximum(e[:, a] - 1, 0)
                c = c * e[:, b]
                e[:, b] = np.maximum(e[:, b] - 1, 0)
                out[:, a, b] = np.prod(X[:, None, :] ** e[None, :, :], axis=2) @ c
        return out

    return SmoothFunction(value, grad, hessian, False, name)


def random_polynomial(dim: int, degree: int, rng: np.random.Generator) -> SmoothFunction:
    """Random polynomial of total degree ``<= degree`` with gaussian coefficients."""
    import itertools

    monos = [e for e in itertools.product(range(degree + 1), repeat=dim) if 0 < sum(e) <= degree]
    keep = rng.random(len(monos)) < rng.uniform(0.3, 1.0)
    if not keep.any():
        keep[rng.integers(len(monos))] = True
    terms = [(rng.normal(), e) for e, k in zip(monos, keep) if k]
    return polynomial(terms, name=f"poly(d={degree})")


def hermite(k: int, coord: int, dim: int) -> SmoothFunction:
    """Probabilists' Hermite polynomial ``He_k`` of coordinate ``coord``."""
    c = np.zeros(k + 1)
    c[k] = 1.0
    He = np.polynomial.hermite_e.HermiteE(c)
    dHe = He.deriv()
    d2He = dHe.deriv()

    def value(X):
        return He(X[:, coord])

    def grad(X):
        G = np.zeros_like(X, dtype=np.float64)
        G[:, coord] = dHe(X[:, coord])
        return G

    def hessian(X):
        H = np.zeros((X.shape[0], dim, dim))
        H[:, coord, coord] = d2He(X[:, coord])
        return H

    return SmoothFunction(value, grad, hessian, False, f"He{k}(x{coord})")


def ridge(profile: Callable, dprofile: Callable, direction, offset: float = 0.0, bounded: bool = False, name: str = "ridge") -> SmoothFunction:
    """``x -> profile(u.x - offset)``."""
    u = np.asarray(direction, dtype=np.float64)

    def value(X):
        return profile(X @ u - offset)

    def grad(X):
        return dprofile(X @ u - offset)[:, None] * u[None, :]

    return SmoothFunction(value, grad, None, bounded, name)


def tanh_ridge(direction, offset: float = 0.0) -> SmoothFunction:
    return ridge(np.tanh, lambda s: 1.0 / np.cosh(s) ** 2, direction, offset, True, "tanh-ridge")


def bump_pdf(s):
    """Biweight bump ``15/16 (1 - s^2)^2`` on ``[-1, 1]``."""
    s = np.asarray(s, dtype=np.float64)
    return np.where(np.abs(s) < 1.0, 0.9375 * (1.0 - s * s) ** 2, 0.0)


def bump_cdf(s):
    """Closed form ``1/2 + 15/16 (s - 2 s^3/3 + s^5/5)``, factored so both ends are exact."""
    s = np.clip(np.asarray(s, dtype=np.float64), -1.0, 1.0)
    return (1.0 + s) ** 3 * (8.0 - 9.0 * s + 3.0 * s * s) / 16.0


BUMP_VARIANCE = 1.0 / 7.0


def mollified_halfspace(direction, threshold: float, width: float) -> SmoothFunction:
    """Smoothed indicator of ``{u.x <= t}``: ``B((t - u.x)/eps)`` with ``B`` the bump CDF."""
    u = np.asarray(direction, dtype=np.float64)

    def value(X):
        return bump_cdf((threshold - X @ u) / width)

    def grad(X):
        return (-bump_pdf((threshold - X @ u) / width) / width)[:, None] * u[None, :]

    return SmoothFunction(value, grad, None, True, f"halfspace(eps={width:g})")


def product_function(fs: Sequence[SmoothFunction], coords: Sequence[int]) -> SmoothFunction:
    """``prod_k f_k(x_{c_k})`` for one-dimensional factors acting on distinct coordinates."""

    def value(X):
        out = np.ones(X.shape[0])
        for f, c in zip(fs, coords):
            out = out * f.value(X[:, [c]])
        return out

    def grad(X):
        vals = [f.value(X[:, [c]]) for f, c in zip(fs, coords)]
        G = np.zeros_like(X, dtype=np.float64)
        for k, (f, c) in enumerate(zip(fs, coords)):
            rest = np.ones(X.shape[0])
            for j, v in enumerate(vals):
                if j != k:
                    rest = rest * v
            G[:, c] += f.grad(X[:, [c]])[:, 0] * rest
        return G

    return SmoothFunction(value, grad, None, all(f.bounded for f in fs), "product")


def constant(c: float) -> SmoothFunction:
    return SmoothFunction(
        lambda X: np.full(X.shape[0], float(c)),
        lambda X: np.zeros_like(X, dtype=np.float64),
        lambda X: np.zeros((X.shape[0], X.shape[1], X.shape[1])),
        abs(c) <= 1.0,
        f"const({c:g})",
    )

