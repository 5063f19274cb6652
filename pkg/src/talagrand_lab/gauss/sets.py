"""Subsets of ``R^d`` used for influences, boundary measures and sections."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import stats

from .measures import ProductMeasure


def _vec(v, name: str) -> np.ndarray:
    a = np.atleast_1d(np.asarray(v, dtype=np.float64))
    if a.ndim != 1:
        raise ValueError(f"{name} must be a vector")
    return a


@dataclass(frozen=True, eq=False)
class HalfSpace:
    """``{x : u.x <= t}`` with ``|u| = 1``; ``axis`` set when ``u`` is a coordinate vector."""

    normal: np.ndarray
    threshold: float

    def __post_init__(self):
        u = _vec(self.normal, "normal")
        n = np.linalg.norm(u)
        if n == 0:
            raise ValueError("normal must be nonzero")
        object.__setattr__(self, "normal", u / n)
        object.__setattr__(self, "threshold", float(self.threshold) / n)

    @classmethod
    def along_axis(cls, axis: int, threshold: float, dim: int) -> "HalfSpace":
        if not 0 <= axis < dim:
            raise ValueError("axis out of range")
        u = np.zeros(dim)
        u[axis] = 1.0
        return cls(u, threshold)

    @property
    def dim(self) -> int:
        return self.normal.size

    @property
    def axis(self) -> int | None:
        nz = np.flatnonzero(self.normal)
        return int(nz[0]) if nz.size == 1 and self.normal[nz[0]] > 0 else None

    def contains(self, X) -> np.ndarray:
        return np.atleast_2d(X) @ self.normal <= self.threshold

    def measure(self, mu: ProductMeasure) -> float:
        if self.axis is not None:
            return float(mu.coordinate_factors[self.axis].cdf(self.threshold))
        _require_gaussian(mu)
        return float(stats.norm.cdf(self.threshold))

    def enlargement_measure(self, mu: ProductMeasure, eps: float) -> float:
        _require_gaussian(mu)
        return float(stats.norm.cdf(self.threshold + eps))

    def fiber_crossings(self, X, i: int):
        """Boundary points along coordinate ``i`` for each row of ``X`` (``x_i`` ignored)."""
        X = np.atleast_2d(X)
        u = self.normal
        if u[i] == 0.0:
            return [np.empty(0) for _ in range(X.shape[0])]
        rest = X @ u - X[:, i] * u[i]
        return [np.array([c]) for c in (self.threshold - rest) / u[i]]

    def bounding_box(self):
        lo = np.full(self.dim, -np.inf)
        hi = np.full(self.dim, np.inf)
        if self.axis is not None:
            lo[self.axis] = self.threshold - 1.0
            hi[self.axis] = self.threshold + 1.0
        return lo, hi


@dataclass(frozen=True, eq=False)
class Box:
    """Axis box ``prod [lo_k, hi_k]``; infinite bounds allowed."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo, hi = _vec(self.lo, "lo"), _vec(self.hi, "hi")
        if lo.shape != hi.shape:
            raise ValueError("lo and hi must have the same length")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self) -> int:
        return self.lo.size

    @property
    def is_empty(self) -> bool:
        return bool(np.any(self.hi <= self.lo))

    def contains(self, X) -> np.ndarray:
        X = np.atleast_2d(X)
        return np.all((X >= self.lo) & (X <= self.hi), axis=1)

    def side_masses(self, mu: ProductMeasure) -> np.ndarray:
        facs = mu.coordinate_factors
        return np.array([max(float(f.cdf(h) - f.cdf(l)), 0.0) for f, l, h in zip(facs, self.lo, self.hi)])

    def measure(self, mu: ProductMeasure) -> float:
        return 0.0 if self.is_empty else float(np.prod(self.side_masses(mu)))

    def influence(self, mu: ProductMeasure, k: int) -> float:
        """Fiber-boundary average along coordinate ``k``."""
        if self.is_empty:
            return 0.0
        f = mu.coordinate_factors[k]
        ends = sum(float(f.pdf(b)) for b in (self.lo[k], self.hi[k]) if np.isfinite(b))
        m = self.side_masses(mu)
        return ends * float(np.prod(np.delete(m, k)))

    def distance(self, X) -> np.ndarray:
        X = np.atleast_2d(X)
        gap = np.maximum(np.maximum(self.lo - X, X - self.hi), 0.0)
        return np.linalg.norm(gap, axis=1)

    def fiber_crossings(self, X, i: int):
        X = np.atleast_2d(X)
        others = np.delete(np.arange(self.dim), i)
        inside = np.all((X[:, others] >= self.lo[others]) & (X[:, others] <= self.hi[others]), axis=1)
        ends = np.array([b for b in (self.lo[i], self.hi[i]) if np.isfinite(b)])
        if self.is_empty:
            inside[:] = False
        return [ends if ok else np.empty(0) for ok in inside]

    def bounding_box(self):
        lo = np.where(np.isfinite(self.lo), self.lo - 1.0, -np.inf)
        hi = np.where(np.isfinite(self.hi), self.hi + 1.0, np.inf)
        return lo, hi


@dataclass(frozen=True, eq=False)
class Ball:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", _vec(self.center, "center"))
        if self.radius < 0:
            raise ValueError("radius must be nonnegative")

    @property
    def dim(self) -> int:
        return self.center.size

    def contains(self, X) -> np.ndarray:
        return np.linalg.norm(np.atleast_2d(X) - self.center, axis=1) <= self.radius

    def measure(self, mu: ProductMeasure, radius: float | None = None) -> float:
        _require_gaussian(mu)
        r = self.radius if radius is None else radius
        if r <= 0:
            return 0.0
        return float(stats.ncx2.cdf(r * r, self.dim, float(self.center @ self.center)))

    def enlargement_measure(self, mu: ProductMeasure, eps: float) -> float:
        return self.measure(mu, self.radius + eps)

    def fiber_crossings(self, X, i: int):
        X = np.atleast_2d(X)
        d = X - self.center
        d[:, i] = 0.0
        h2 = self.radius ** 2 - np.sum(d * d, axis=1)
        out = []
        for h in h2:
            if h > 0:
                r = math.sqrt(h)
                out.append(np.array([self.center[i] - r, self.center[i] + r]))
            else:
                out.append(np.empty(0))
        return out

    def bounding_box(self):
        return self.center - self.radius - 1.0, self.center + self.radius + 1.0


@dataclass(frozen=True, eq=False)
class PredicateSet:
    """Membership predicate with a box known to contain the boundary."""

    name: str
    predicate: Callable[[np.ndarray], np.ndarray]
    dim: int
    box: tuple | None = None
    exact_measure: Callable | None = field(default=None, compare=False)

    def contains(self, X) -> np.ndarray:
        return np.asarray(self.predicate(np.atleast_2d(X)), dtype=bool)

    def bounding_box(self):
        if self.box is None:
            raise ValueError(f"predicate {self.name!r} has no bounding box")
        return tuple(np.asarray(b, dtype=np.float64) for b in self.box)

    def measure(self, mu: ProductMeasure, samples: int = 200000, seed: int = 0) -> float:
        if self.exact_measure is not None:
            return float(self.exact_measure(mu))
        return float(np.mean(self.contains(mu.sample(samples, seed).points)))


def _require_gaussian(mu: ProductMeasure):
    if not mu.is_gaussian:
        raise ValueError("this computation needs a standard gaussian measure")


# ---------------------------------------------------------------------------
# named predicates


def _slab(dim: int, t: float = 1.0) -> PredicateSet:
    lo = np.full(dim, -np.inf)
    hi = np.full(dim, np.inf)
    lo[0], hi[0] = -t - 1.0, t + 1.0
    return PredicateSet("slab", lambda X: np.abs(X[:, 0]) <= t, dim, (lo, hi),
                        lambda mu: float(mu.coordinate_factors[0].cdf(t) - mu.coordinate_factors[0].cdf(-t)))


def _empty(dim: int) -> PredicateSet:
    return PredicateSet("empty", lambda X: np.zeros(X.shape[0], dtype=bool), dim,
                        (np.full(dim, -1.0), np.full(dim, 1.0)), lambda mu: 0.0)


def _unit_ball(dim: int) -> PredicateSet:
    b = Ball(np.zeros(dim), 1.0)
    return PredicateSet("unit-ball", b.contains, dim, (np.full(dim, -2.0), np.full(dim, 2.0)), b.measure)


def _halfspace(dim: int) -> PredicateSet:
    h = HalfSpace.along_axis(0, 0.0, dim)
    return PredicateSet("halfspace", h.contains, dim, h.bounding_box(), h.measure)


def _quadrant(dim: int) -> PredicateSet:
    lo = np.full(dim, -np.inf)
    hi = np.full(dim, np.inf)
    lo[:2], hi[:2] = -1.0, 1.0
    return PredicateSet("quadrant", lambda X: np.all(X[:, :2] <= 0.0, axis=1), dim, (lo, hi), lambda mu: 0.25)


PREDICATES = {
    "empty": _empty,
    "slab": _slab,
    "unit-ball": _unit_ball,
    "halfspace": _halfspace,
    "quadrant": _quadrant,
}


def named_predicate(name: str, dim: int) -> PredicateSet:
    try:
        make = PREDICATES[name]
    except KeyError:
        raise ValueError(f"unknown predicate {name!r}; known: {', '.join(sorted(PREDICATES))}") from None
    if name == "quadrant" and dim < 2:
        raise ValueError("quadrant needs dimension >= 2")
    return make(dim)


def _floats(text: str) -> np.ndarray:
    return np.array([float(v) for v in text.replace(",", " ").split()])


def parse_set_spec(text: str, dim: int):
    """Parse ``halfspace axis=<i> threshold=<t>``, ``box lo=<vec> hi=<vec>``,
    ``ball center=<vec> radius=<r>`` or ``predicate <name>``.

    Vectors are comma separated.
    """
    parts = text.split()
    if not parts:
        raise ValueError("empty set specification")
    kind, rest = parts[0], parts[1:]
    if kind == "predicate":
        if len(rest) != 1:
            raise ValueError("expected 'predicate <name>'")
        return named_predicate(rest[0], dim)
    kv = {}
    for tok in rest:
        if "=" not in tok:
            raise ValueError(f"expected key=value, got {tok!r}")
        k, v = tok.split("=", 1)
        kv[k] = v
    expected = {"halfspace": {"axis", "threshold"}, "box": {"lo", "hi"}, "ball": {"center", "radius"}}
    if kind not in expected:
        raise ValueError(f"unknown set kind {kind!r}")
    if set(kv) != expected[kind]:
        raise ValueError(f"{kind} needs keys {sorted(expected[kind])}, got {sorted(kv)}")
    if kind == "halfspace":
        return HalfSpace.along_axis(int(kv["axis"]), float(kv["threshold"]), dim)
    if kind == "box":
        lo, hi = _floats(kv["lo"]), _floats(kv["hi"])
        if lo.size != dim or hi.size != dim:
            raise ValueError(f"box vectors must have length {dim}")
        return Box(lo, hi)
    c = _floats(kv["center"])
    if c.size != dim:
        raise ValueError(f"ball center must have length {dim}")
    return Ball(c, float(kv["radius"]))
