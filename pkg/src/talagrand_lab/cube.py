"""The biased discrete cube {-1,+1}^N with its product measure.

Functions are stored densely: a ``CubeFunction`` holds ``2**N`` values and
bit ``i`` of an index is set iff ``x_i = +1``. Coordinates are 0-based.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np
from scipy import optimize

from . import kernels

MAX_DIM = 24  # 2**24 doubles = 128 MiB per stored function


def memory_estimate(n: int) -> int:
    """Bytes held by one function plus the cached weights on an ``n``-cube."""
    return 2 * 8 * (1 << n)


@dataclass(frozen=True)
class BiasedCube:
    N: int
    p: float = 0.5

    def __post_init__(self):
        if not (isinstance(self.N, (int, np.integer)) and 1 <= self.N <= MAX_DIM):
            raise ValueError(
                f"dimension must be in [1, {MAX_DIM}] "
                f"(a function needs {memory_estimate(MAX_DIM) // 2**20} MiB at the cap)"
            )
        if not 0.0 < self.p < 1.0:
            raise ValueError("p must lie in (0, 1)")

    @property
    def q(self) -> float:
        return 1.0 - self.p

    @property
    def size(self) -> int:
        return 1 << self.N

    @cached_property
    def weights(self) -> np.ndarray:
        w = kernels.point_weights(self.N, float(self.p))
        w.setflags(write=False)
        return w

    @cached_property
    def points(self) -> np.ndarray:
        """``(2**N, N)`` array of +-1 coordinates in index order."""
        idx = np.arange(self.size)[:, None]
        bits = (idx >> np.arange(self.N)[None, :]) & 1
        return (2 * bits - 1).astype(np.int8)

    def function(self, values) -> "CubeFunction":
        return CubeFunction(self, values)

    def from_callable(self, fn: Callable[[np.ndarray], np.ndarray]) -> "CubeFunction":
        """Evaluate ``fn`` on the ``(2**N, N)`` point array (as float64, so ufuncs keep full precision)."""
        return CubeFunction(self, np.asarray(fn(self.points.astype(np.float64)), dtype=np.float64))

    def indicator(self, predicate: Callable[[np.ndarray], np.ndarray]) -> "CubeFunction":
        """Indicator of the set of points where ``predicate`` is true."""
        mask = np.asarray(predicate(self.points), dtype=bool)
        return CubeFunction(self, mask.astype(np.float64))

    def coordinate(self, i: int) -> "CubeFunction":
        return self.from_callable(lambda x: x[:, i])

    def parity(self) -> "CubeFunction":
        return self.from_callable(lambda x: np.prod(x, axis=1))

    def dictator_set(self, i: int = 0) -> "CubeFunction":
        return self.indicator(lambda x: x[:, i] > 0)

    def majority_set(self) -> "CubeFunction":
        """Majority; ties (even N) are broken by the first coordinate."""
        def maj(x):
            s = x.sum(axis=1).astype(float)
            return s + 0.5 * x[:, 0] > 0
        return self.indicator(maj)

    def tribes_set(self, width: int) -> "CubeFunction":
        """OR of ANDs over disjoint blocks of ``width`` coordinates."""
        def tribes(x):
            blocks = [x[:, j:j + width] for j in range(0, self.N, width)]
            return np.any([np.all(b > 0, axis=1) for b in blocks], axis=0)
        return self.indicator(tribes)

    def mass(self, f: "CubeFunction") -> float:
        return float(self.weights @ f.values)


@dataclass(frozen=True, eq=False)
class CubeFunction:
    cube: BiasedCube
    values: np.ndarray

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=np.float64)
        if v.shape != (self.cube.size,):
            raise ValueError(f"expected {self.cube.size} values, got shape {v.shape}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def is_indicator(self) -> bool:
        return bool(np.all((self.values == 0.0) | (self.values == 1.0)))

    def mean(self) -> float:
        return float(self.cube.weights @ self.values)

    def __add__(self, other):
        if isinstance(other, CubeFunction):
            return CubeFunction(self.cube, self.values + other.values)
        return CubeFunction(self.cube, self.values + other)

    def __mul__(self, c):
        return CubeFunction(self.cube, self.values * c)

    __rmul__ = __mul__

    def __sub__(self, other):
        return self + (other * -1.0 if isinstance(other, CubeFunction) else -other)

    def map(self, fn) -> "CubeFunction":
        return CubeFunction(self.cube, fn(self.values))


def variance(f: CubeFunction) -> float:
    w = f.cube.weights
    m = w @ f.values
    return max(float(w @ (f.values - m) ** 2), 0.0)


def entropy(f: CubeFunction) -> float:
    """``E[f log f] - E[f] log E[f]`` for nonnegative ``f``, with ``0 log 0 = 0``."""
    v = f.values
    if np.any(v < 0.0):
        raise ValueError("entropy requires a nonnegative function")
    w = f.cube.weights
    m = float(w @ v)
    if m == 0.0:
        return 0.0
    pos = v > 0
    flogf = float(w[pos] @ (v[pos] * np.log(v[pos])))
    return max(flogf - m * math.log(m), 0.0)


def lp_norm(f: CubeFunction, r: float) -> float:
    if r == math.inf:
        return float(np.max(np.abs(f.values)))
    if r < 1.0:
        raise ValueError("L^r norms need r >= 1")
    return float(f.cube.weights @ np.abs(f.values) ** r) ** (1.0 / r)


def _check_coordinate(cube: BiasedCube, i: int):
    if not 0 <= i < cube.N:
        raise IndexError(f"coordinate {i} out of range for N={cube.N}")


def discrete_derivative(f: CubeFunction, i: int) -> CubeFunction:
    """``D_i f(x) = f(tau_i x) - f(x)`` with ``tau_i`` flipping coordinate i."""
    _check_coordinate(f.cube, i)
    flipped = f.values[np.arange(f.cube.size) ^ (1 << i)]
    return CubeFunction(f.cube, flipped - f.values)


def derivative_norms(f: CubeFunction, r: float) -> np.ndarray:
    """``||D_i f||_r`` for every coordinate, via the kernel backend."""
    if r < 1.0:
        raise ValueError("L^r norms need r >= 1")
    m = kernels.derivative_moments(f.values, f.cube.weights, f.cube.N, float(r))
    return np.maximum(m, 0.0) ** (1.0 / r)


def derivative_moments(f: CubeFunction, r: float) -> np.ndarray:
    """``int |D_i f|^r dmu`` for every coordinate."""
    return kernels.derivative_moments(f.values, f.cube.weights, f.cube.N, float(r))


def _require_indicator(A: CubeFunction):
    if not A.is_indicator:
        raise ValueError("expected an indicator function (values in {0, 1})")


def influence(A: CubeFunction, i: int) -> float:
    """``mu({x in A, tau_i x not in A})``."""
    _require_indicator(A)
    _check_coordinate(A.cube, i)
    return float(influences(A)[i])


def influences(A: CubeFunction) -> np.ndarray:
    _require_indicator(A)
    return kernels.influences(A.values, A.cube.weights, A.cube.N)


def biased_prefactor(p: float) -> float:
    """``pq (log p - log q) / (p - q)``, continuous through ``p = 1/2``."""
    q = 1.0 - p
    if abs(p - q) < 1e-9:
        return 2.0 * p * q
    return p * q * (math.log(p) - math.log(q)) / (p - q)


DEFAULT_CUBE_CONSTANT = 2.0 * math.e


def talagrand_terms(f: CubeFunction) -> np.ndarray:
    """Per-coordinate summands ``||D_i f||_2^2 / (1 + log(||D_i f||_2 / 2 sqrt(pq) ||D_i f||_1))``."""
    cube = f.cube
    n2 = derivative_norms(f, 2.0)
    n1 = derivative_norms(f, 1.0)
    s = 2.0 * math.sqrt(cube.p * cube.q)
    out = np.zeros(cube.N)
    nz = n2 > 0.0
    out[nz] = n2[nz] ** 2 / (1.0 + np.log(n2[nz] / (s * n1[nz])))
    return out


def talagrand_rhs(f: CubeFunction, C: float = DEFAULT_CUBE_CONSTANT) -> float:
    """Right-hand side of the biased-cube Talagrand inequality.

    ``C * pq (log p - log q)/(p - q) * sum_i talagrand_terms``. The default
    ``C = 2e`` is what the general semigroup bound gives on the product
    two-point chain.
    """
    if C <= 0:
        raise ValueError("C must be positive")
    return C * biased_prefactor(f.cube.p) * float(np.sum(talagrand_terms(f)))


@dataclass(frozen=True)
class KKLResult:
    coordinate: int
    influence: float
    bound: float
    strong_bound: float
    case: str  # "large" (threshold exceeded) or "summand" (argmax of the sum)

    @property
    def holds(self) -> bool:
        return self.influence >= self.bound * (1 - 1e-12)


def kkl_extract(A: CubeFunction, C: float = 4 * math.e) -> KKLResult:
    """Find a coordinate whose influence meets the KKL lower bound.

    Either some influence exceeds ``sqrt(a(1-a)/N)``, or the largest
    summand of the influence sum is used; the bound is
    ``a(1-a) log N / (8 C N)``.
    """
    I = influences(A)
    a = A.mean()
    if a <= 0.0 or a >= 1.0:
        raise ValueError("the set must have measure strictly between 0 and 1")
    n = A.cube.N
    v = a * (1.0 - a)
    bound = v * math.log(n) / (8.0 * C * n)
    strong = v * math.log(n / v) / (8.0 * C * n)
    threshold = math.sqrt(v / n)
    big = np.flatnonzero(I > threshold)
    if big.size:
        i = int(big[np.argmax(I[big])])
        return KKLResult(i, float(I[i]), bound, strong, "large")
    # the summand 2I / (1 + log(1/sqrt(2I))) is increasing in I
    i = int(np.argmax(I))
    return KKLResult(i, float(I[i]), bound, strong, "summand")


_PHI_SLOPE = 1.0 / math.log(math.e + 1.0)


def young_phi(x):
    """``x^2 / log(e + x)`` for ``x >= 1``, linear on ``[0, 1]`` (convex)."""
    x = np.asarray(x, dtype=np.float64)
    big = x >= 1.0
    out = x * _PHI_SLOPE
    xb = x[big]
    out[big] = xb * xb / np.log(math.e + xb)
    return out


def orlicz_norm_values(values: np.ndarray, weights: np.ndarray, rtol: float = 1e-10) -> float:
    g = np.abs(np.asarray(values, dtype=np.float64))
    if not np.any(g > 0):
        return 0.0

    def excess(c):
        return float(weights @ young_phi(g / c)) - 1.0

    hi = float(np.max(g))
    lo = hi
    # phi(x) >= x/log(e+1) bounds the norm within [.., max|g| * large]
    while excess(hi) > 0:
        hi *= 2.0
    while excess(lo) <= 0:
        lo /= 2.0
    return optimize.brentq(excess, lo, hi, rtol=rtol, xtol=1e-300)


def orlicz_norm(g: CubeFunction) -> float:
    """Luxemburg norm ``inf{c > 0 : E phi(|g|/c) <= 1}``."""
    return orlicz_norm_values(g.values, g.cube.weights)


def _check_uniform(cube: BiasedCube):
    if abs(cube.p - 0.5) > 1e-15:
        raise ValueError("Walsh spectrum is only defined here for p = 1/2")


def walsh_spectrum(f: CubeFunction) -> np.ndarray:
    """Coefficients ``E[f chi_S]`` indexed by the bitmask of ``S``."""
    _check_uniform(f.cube)
    a = np.array(f.values, dtype=np.float64)
    kernels.fwht(a)
    a /= f.cube.size
    # bit set means x_i = +1, so chi_S picks up (-1)^{|S|} against the Hadamard sign
    sizes = np.array([bin(s).count("1") for s in range(f.cube.size)])
    a[sizes % 2 == 1] *= -1.0
    return a


def random_function(cube: BiasedCube, rng: np.random.Generator, kind: str | None = None) -> CubeFunction:
    """Draw a test function from a mixture of shapes."""
    kinds = ("gaussian", "sparse", "boolean", "lowdeg", "heavy", "junta")
    kind = kind or kinds[rng.integers(len(kinds))]
    n, size = cube.N, cube.size
    if kind == "gaussian":
        v = rng.normal(size=size)
    elif kind == "sparse":
        v = np.zeros(size)
        k = max(1, int(rng.integers(1, max(2, size // 8))))
        v[rng.choice(size, k, replace=False)] = rng.normal(size=k)
    elif kind == "boolean":
        v = (rng.random(size) < rng.uniform(0.05, 0.95)).astype(float)
    elif kind == "lowdeg":
        x = cube.points.astype(float)
        v = rng.normal() + x @ rng.normal(size=n)
        i, j = rng.integers(n, size=2)
        v = v + rng.normal() * x[:, i] * x[:, j]
    elif kind == "heavy":
        v = rng.standard_cauchy(size=size)
    elif kind == "junta":
        k = int(rng.integers(1, min(n, 4) + 1))
        coords = rng.choice(n, k, replace=False)
        table = rng.normal(size=1 << k)
        key = np.zeros(size, dtype=np.int64)
        for j, c in enumerate(coords):
            key |= ((np.arange(size) >> c) & 1) << j
        v = table[key]
    else:
        raise ValueError(f"unknown kind {kind!r}")
    return CubeFunction(cube, v)


def random_monotone_set(cube: BiasedCube, rng: np.random.Generator) -> CubeFunction:
    """Monotone set from a weighted threshold or a positive DNF, nontrivial."""
    x = cube.points.astype(float)
    for _ in range(100):
        if rng.random() < 0.5:
            w = rng.exponential(size=cube.N)
            s = x @ w
            theta = rng.uniform(s.min(), s.max())
            A = cube.indicator(lambda _: s >= theta)
        else:
            terms = int(rng.integers(1, 2 * cube.N + 1))
            mask = np.zeros(cube.size, dtype=bool)
            for _ in range(terms):
                k = int(rng.integers(1, cube.N + 1))
                lits = rng.choice(cube.N, k, replace=False)
                mask |= np.all(x[:, lits] > 0, axis=1)
            A = CubeFunction(cube, mask.astype(float))
        if 0.0 < A.mean() < 1.0:
            return A
    raise RuntimeError("could not draw a nontrivial monotone set")


def to_text(f: CubeFunction) -> str:
    lines = [f"cube N={f.cube.N} p={f.cube.p!r}"]
    lines += [f"{i} {v!r}" for i, v in enumerate(f.values.tolist())]
    return "\n".join(lines) + "\n"


def from_text(text: str) -> CubeFunction:
    rows = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows:
        raise ValueError("empty cube function text")
    head = rows[0].split()
    if head[0] != "cube":
        raise ValueError("first line must be 'cube N=<int> p=<decimal>'")
    fields = dict(tok.split("=", 1) for tok in head[1:])
    try:
        cube = BiasedCube(int(fields["N"]), float(fields["p"]))
    except KeyError as exc:
        raise ValueError(f"header missing {exc}") from None
    if len(rows) - 1 != cube.size:
        raise ValueError(f"expected {cube.size} value lines, got {len(rows) - 1}")
    values = np.empty(cube.size)
    for lineno, row in enumerate(rows[1:], start=2):
        idx, val = row.split()
        if int(idx) != lineno - 2:
            raise ValueError(f"line {lineno}: indices must be in binary-counter order")
        values[int(idx)] = float(val)
    return CubeFunction(cube, values)
