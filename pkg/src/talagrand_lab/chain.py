"""Finite reversible Markov chains and their semigroups ``P_t = exp(t(K - Id))``."""
from __future__ import annotations

import io
import math
from dataclasses import dataclass
from functools import cached_property, partial
from typing import Iterator, Sequence

import numpy as np
from scipy import optimize
from scipy.sparse import csgraph

from .report import InequalityReport

MAX_STATES = 4096


class ChainError(ValueError):
    """Raised when a kernel fails a chain invariant."""


@dataclass(frozen=True, eq=False)
class GeneratorSpectrum:
    """Eigenpairs of ``L = rate (K - Id)``; eigenvectors are mu-orthonormal columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def to_csv(self) -> str:
        lines = ["index,eigenvalue"]
        lines += [f"{k},{v!r}" for k, v in enumerate(self.eigenvalues.tolist())]
        return "\n".join(lines) + "\n"


@dataclass(frozen=True, eq=False)
class FiniteChain:
    kernel: np.ndarray
    measure: np.ndarray
    labels: tuple = ()
    rate: float = 1.0  # jump rate: the generator is rate * (K - I)

    @property
    def n(self) -> int:
        return self.measure.shape[0]

    @cached_property
    def generator(self) -> np.ndarray:
        return self.rate * (self.kernel - np.eye(self.n))

    @cached_property
    def is_aperiodic(self) -> bool:
        """Self-loop or odd cycle in the (connected) support graph."""
        adj = (self.kernel > 0) | (self.kernel.T > 0)
        if np.any(np.diag(adj)):
            return True
        # a connected graph is bipartite iff 2-colouring succeeds
        colour = np.full(self.n, -1)
        colour[0] = 0
        stack = [0]
        while stack:
            u = stack.pop()
            for v in np.flatnonzero(adj[u]):
                if colour[v] < 0:
                    colour[v] = 1 - colour[u]
                    stack.append(v)
                elif colour[v] == colour[u]:
                    return True
        return False

    @cached_property
    def spectrum(self) -> GeneratorSpectrum:
        s = np.sqrt(self.measure)
        sym = (s[:, None] * self.generator) / s[None, :]
        sym = 0.5 * (sym + sym.T)
        vals, vecs = np.linalg.eigh(sym)
        order = np.argsort(-vals)
        vals = vals[order]
        vecs = vecs[:, order] / s[:, None]
        vals[0] = 0.0
        vals = np.minimum(vals, 0.0)
        return GeneratorSpectrum(vals, vecs)

    def expect(self, f) -> float:
        return float(self.measure @ np.asarray(f, dtype=np.float64))

    def variance(self, f) -> float:
        f = np.asarray(f, dtype=np.float64)
        m = self.measure @ f
        return max(float(self.measure @ (f - m) ** 2), 0.0)

    def norm(self, f, r: float) -> float:
        f = np.abs(np.asarray(f, dtype=np.float64))
        if r == math.inf:
            return float(f.max())
        return float(self.measure @ f ** r) ** (1.0 / r)

    def entropy(self, f) -> float:
        f = np.asarray(f, dtype=np.float64)
        if np.any(f < 0):
            raise ValueError("entropy requires a nonnegative function")
        m = float(self.measure @ f)
        if m == 0.0:
            return 0.0
        with np.errstate(divide="ignore", invalid="ignore"):
            flogf = np.where(f > 0, f * np.log(np.where(f > 0, f, 1.0)), 0.0)
        return max(float(self.measure @ flogf) - m * math.log(m), 0.0)


def stationary_vector(K: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eig(K.T)
    k = int(np.argmin(np.abs(vals - 1.0)))
    v = np.real(vecs[:, k])
    v = v / v.sum()
    return v


def build_chain(K, mu=None, labels: Sequence = (), rate: float = 1.0) -> FiniteChain:
    """Validate a kernel (and optional invariant measure) as a reversible ergodic chain.

    The stationary vector is computed when ``mu`` is omitted. Ergodicity is
    taken as connectivity of the support graph; periodicity is recorded in
    ``FiniteChain.is_aperiodic`` but not required, since the continuous-time
    semigroup mixes regardless.  The generator is ``rate * (K - I)``.
    """
    K = np.array(K, dtype=np.float64)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ChainError("kernel must be a square matrix")
    n = K.shape[0]
    if n > MAX_STATES:
        raise ChainError(f"at most {MAX_STATES} states are supported")
    if np.any(K < -1e-15) or np.max(np.abs(K.sum(axis=1) - 1.0)) > 1e-12:
        raise ChainError("kernel is not row-stochastic")
    K = np.clip(K, 0.0, None)
    if n > 1:
        ncomp, _ = csgraph.connected_components((K > 0).astype(np.int8), directed=True, connection="strong")
        if ncomp != 1:
            raise ChainError("chain is not ergodic: support graph is disconnected")
    mu = stationary_vector(K) if mu is None else np.array(mu, dtype=np.float64)
    if mu.shape != (n,) or np.any(mu <= 0) or abs(mu.sum() - 1.0) > 1e-12:
        raise ChainError("measure must be a strictly positive probability vector")
    if np.max(np.abs(mu @ K - mu)) > 1e-10:
        raise ChainError("measure is not invariant for the kernel")
    flow = mu[:, None] * K
    if np.max(np.abs(flow - flow.T)) > 1e-10:
        raise ChainError("kernel is not reversible with respect to the measure")
    if not rate > 0:
        raise ChainError("rate must be positive")
    return FiniteChain(K, mu, tuple(labels), float(rate))


def two_point_chain(p: float) -> FiniteChain:
    """``{-1,+1}`` with ``mu = (q, p)`` (index 1 is ``+1``) and ``K(x, y) = mu(y)``."""
    mu = np.array([1.0 - p, p])
    return build_chain(np.tile(mu, (2, 1)), mu, labels=(-1, 1))


def _check_vec(chain: FiniteChain, f) -> np.ndarray:
    f = np.asarray(f, dtype=np.float64)
    if f.shape != (chain.n,):
        raise ValueError(f"function must have {chain.n} entries, got shape {f.shape}")
    return f


def dirichlet_form(chain: FiniteChain, f, g) -> float:
    """``rate/2 sum_{x,y} (f(x)-f(y)) (g(x)-g(y)) K(x,y) mu(x)``."""
    f, g = _check_vec(chain, f), _check_vec(chain, g)
    df = f[:, None] - f[None, :]
    dg = g[:, None] - g[None, :]
    return 0.5 * chain.rate * float(np.sum(df * dg * chain.kernel * chain.measure[:, None]))


def generator_form(chain: FiniteChain, f, g) -> float:
    """``int f (-L g) dmu``; equals the Dirichlet form for reversible chains."""
    f, g = _check_vec(chain, f), _check_vec(chain, g)
    return -float(chain.measure @ (f * (chain.generator @ g)))


def semigroup_apply(chain: FiniteChain, f, t: float) -> np.ndarray:
    """``P_t f`` from the mu-orthonormal eigenbasis of the generator."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    f = _check_vec(chain, f)
    if t == 0:
        return f.copy()
    sp = chain.spectrum
    coef = sp.eigenvectors.T @ (chain.measure * f)
    return sp.eigenvectors @ (np.exp(t * sp.eigenvalues) * coef)


def spectral_gap(chain: FiniteChain) -> float:
    if chain.n < 2:
        return math.inf
    return float(-chain.spectrum.eigenvalues[1])


def two_point_logsob(p: float) -> float:
    """``2(p - q)/(log p - log q)``, equal to 1 at ``p = q``."""
    q = 1.0 - p
    if abs(p - q) < 1e-12:
        return 1.0
    return 2.0 * (p - q) / (math.log(p) - math.log(q))


def _is_two_point_mean_chain(chain: FiniteChain) -> bool:
    return chain.n == 2 and chain.rate == 1.0 and np.allclose(chain.kernel, np.tile(chain.measure, (2, 1)), atol=1e-12)


def logsob_ratio(chain: FiniteChain, u: np.ndarray) -> float:
    f = np.exp(u - u.max())
    ent = chain.entropy(f * f)
    if ent <= 0:
        return math.inf
    return 2.0 * dirichlet_form(chain, f, f) / ent


def _logsob_objective(chain: FiniteChain):
    mu, K = chain.measure, chain.kernel
    W = mu[:, None] * K  # symmetric by reversibility
    rate = chain.rate

    def fun(u):
        u = u - u.max()
        f = np.exp(u)
        g = f * f
        m = mu @ g
        ent = mu @ (g * 2.0 * u) - m * math.log(m)
        # E(f,f) = sum_x mu f^2 - sum_{x,y} W f(x) f(y)
        Wf = W @ f
        energy = rate * (m - f @ Wf)
        if ent <= 1e-300:
            return math.inf, np.zeros_like(u)
        val = 2.0 * energy / ent
        # gradients w.r.t. u (chain rule through f = e^u)
        d_energy = 2.0 * rate * (mu * g - f * Wf)
        d_ent = mu * g * (4.0 * u + 2.0) - 2.0 * mu * g * (math.log(m) + 1.0)
        grad = (2.0 * d_energy - val * d_ent) / ent
        return val, grad

    return fun


def logsob_constant(
    chain: FiniteChain,
    mode: str = "numeric",
    restarts: int = 32,
    seed: int = 0,
    max_states: int = 256,
) -> float:
    """Log-Sobolev constant ``inf 2E(f,f) / Ent(f^2)``.

    ``mode="exact"`` applies the closed form for two-point mean chains.
    ``mode="numeric"`` minimises over ``f = exp(u)`` with L-BFGS from
    ``restarts`` random starts plus small perturbations along the spectral-gap
    eigenvector; the result is capped by the gap, which is the limit of the
    ratio at nearly constant functions.
    """
    if mode == "exact":
        if not _is_two_point_mean_chain(chain):
            raise ValueError("exact mode only covers the two-point chain K(x, y) = mu(y)")
        return two_point_logsob(float(chain.measure[1]))
    if mode != "numeric":
        raise ValueError(f"unknown mode {mode!r}")
    if chain.n > max_states:
        raise ValueError(f"numeric log-Sobolev search is capped at {max_states} states")
    gap = spectral_gap(chain)
    fun = _logsob_objective(chain)
    rng = np.random.default_rng(seed)
    phi = chain.spectrum.eigenvectors[:, 1]
    phi = phi / np.max(np.abs(phi))
    starts = [s * phi for s in (0.05, -0.05, 0.5, -0.5, 2.0, -2.0)]
    scale = np.linspace(0.1, 4.0, restarts)
    starts += [rng.normal(size=chain.n) * s for s in scale]
    best = gap
    for u0 in starts:
        res = optimize.minimize(fun, u0, jac=True, method="L-BFGS-B", options={"ftol": 1e-14, "gtol": 1e-10, "maxiter": 2000})
        u = res.x
        f = np.exp(u - u.max())
        if chain.variance(f) / max(chain.norm(f, 2) ** 2, 1e-300) < 1e-6:
            continue  # nearly constant: ratio tends to the gap, which is already a candidate
        val = logsob_ratio(chain, u)
        if val < best:
            best = val
    return float(best)


def hypercontractivity_check(chain: FiniteChain, rho: float, t: float, f) -> InequalityReport:
    """``||P_t f||_2 <= ||f||_p`` with ``p = 1 + exp(-2 rho t)``."""
    if rho <= 0 or t < 0:
        raise ValueError("need rho > 0 and t >= 0")
    f = _check_vec(chain, f)
    p = 1.0 + math.exp(-2.0 * rho * t)
    lhs = chain.norm(semigroup_apply(chain, f, t), 2.0)
    rhs = chain.norm(f, p)
    return InequalityReport("hypercontractivity", f"chain n={chain.n} t={t:g}", lhs, rhs, rho, extra={"p": p})


def variance_decay_check(chain: FiniteChain, lam: float, f, t: float) -> InequalityReport:
    """``Var f <= (||f||_2^2 - ||P_t f||_2^2) / (1 - exp(-lam t))``."""
    if t <= 0:
        raise ValueError("t must be positive")
    f = _check_vec(chain, f)
    lhs = chain.variance(f)
    ptf = semigroup_apply(chain, f, t)
    drop = chain.norm(f, 2.0) ** 2 - chain.norm(ptf, 2.0) ** 2
    rhs = drop / (1.0 - math.exp(-lam * t))
    return InequalityReport("variance-decay", f"chain n={chain.n} t={t:g}", lhs, rhs, lam)


@dataclass(frozen=True, eq=False)
class DirichletDecomposition:
    """Direction operators ``Gamma_i`` with commutation rate ``kappa``.

    Each entry of ``directions`` maps a function vector to a nonnegative
    function vector.
    """

    directions: tuple
    kappa: float = 0.0

    @property
    def N(self) -> int:
        return len(self.directions)

    def apply(self, f) -> list[np.ndarray]:
        return [np.asarray(g(f), dtype=np.float64) for g in self.directions]

    def energy(self, chain: FiniteChain, f) -> float:
        return sum(float(chain.measure @ (g * g)) for g in self.apply(f))


def _local_apply(factors: tuple, i: int, f) -> np.ndarray:
    shape = tuple(fc.n for fc in reversed(factors))
    f = np.asarray(f, dtype=np.float64).reshape(shape)
    axis = len(factors) - 1 - i
    out = np.tensordot(factors[i].generator, np.moveaxis(f, axis, 0), axes=(1, 0))
    return np.moveaxis(out, 0, axis).reshape(-1)


def _abs_local(factors: tuple, i: int, f) -> np.ndarray:
    return np.abs(_local_apply(factors, i, f))


@dataclass(frozen=True, eq=False)
class ProductChain:
    """Product of factor chains with coordinate 0 varying fastest in the state index."""

    chain: FiniteChain
    factors: tuple
    decomposition: DirichletDecomposition

    def local_generator(self, i: int, f) -> np.ndarray:
        """``L_i f``: the i-th factor generator acting on coordinate i."""
        return _local_apply(self.factors, i, f)


def product_chain(factors: Sequence[FiniteChain], max_states: int = MAX_STATES) -> ProductChain:
    """Kronecker-sum generator ``L = sum_i L_i`` with ``Gamma_i f = |L_i f|``, kappa = 0.

    The direction family realises the Dirichlet decomposition only for
    factors with ``K(x, y) = mu(y)`` (then ``int f(-L_i f) = int (L_i f)^2``);
    other factors still get a valid product chain.
    """
    factors = tuple(factors)
    if not factors:
        raise ValueError("need at least one factor")
    size = int(np.prod([fc.n for fc in factors]))
    if size > max_states:
        raise ChainError(f"product has {size} states, above the cap {max_states}")
    L = np.zeros((1, 1))
    mu = np.ones(1)
    for fc in factors:
        # each new factor becomes the slowest-varying index
        L = np.kron(np.eye(fc.n), L) + np.kron(fc.generator, np.eye(L.shape[0]))
        mu = np.kron(fc.measure, mu)
    # uniformise: K = I + L / N is stochastic since every diagonal entry of L_i is >= -1
    rate = float(len(factors))
    chain = build_chain(np.eye(size) + L / rate, mu, rate=rate)
    directions = tuple(partial(_abs_local, factors, i) for i in range(len(factors)))
    return ProductChain(chain, factors, DirichletDecomposition(directions, 0.0))


def binary_cube_chain(N: int, p: float = 0.5) -> ProductChain:
    """Product of ``N`` two-point mean chains; states follow the cube index convention."""
    return product_chain([two_point_chain(p)] * N)


def generators_commute(pc: ProductChain, atol: float = 1e-10) -> bool:
    """Check ``L_i L = L L_i`` for every coordinate on the standard basis."""
    L = pc.chain.generator
    eye = np.eye(pc.chain.n)
    for i in range(len(pc.factors)):
        Li = np.column_stack([pc.local_generator(i, e) for e in eye])
        if np.max(np.abs(Li @ L - L @ Li)) > atol:
            return False
    return True


def decomposition_identity_gap(chain: FiniteChain, decomp: DirichletDecomposition, f) -> float:
    """``|sum_i int Gamma_i(f)^2 - E(f,f)|``."""
    return abs(decomp.energy(chain, f) - dirichlet_form(chain, f, f))


@dataclass(frozen=True)
class CommutationReport:
    max_violation: float
    direction: int
    t: float

    @property
    def passed(self) -> bool:
        return self.max_violation <= 1e-10


def commutation_check(chain: FiniteChain, decomp: DirichletDecomposition, f, t: float) -> CommutationReport:
    """Pointwise ``Gamma_i(P_t f) <= exp(kappa t) P_t(Gamma_i f)`` for every i."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    ptf = semigroup_apply(chain, f, t)
    worst, where = -math.inf, -1
    for i, g in enumerate(decomp.directions):
        lhs = g(ptf)
        rhs = math.exp(decomp.kappa * t) * semigroup_apply(chain, g(f), t)
        v = float(np.max(lhs - rhs))
        if v > worst:
            worst, where = v, i
    return CommutationReport(max(worst, 0.0), where, t)


def parse_chain_text(text: str) -> FiniteChain:
    """Read ``n=<int>``, ``n`` rows of ``n`` decimals, optional ``mu: ...`` and ``rate: ...`` lines."""
    rows = [(k, ln.strip()) for k, ln in enumerate(text.splitlines(), start=1) if ln.strip()]
    if not rows or not rows[0][1].startswith("n="):
        raise ValueError("line 1: expected 'n=<int>'")
    n = int(rows[0][1][2:])
    if len(rows) < n + 1:
        raise ValueError(f"expected {n} kernel rows")
    K = []
    for lineno, row in rows[1:n + 1]:
        vals = [float(v) for v in row.split()]
        if len(vals) != n:
            raise ValueError(f"line {lineno}: expected {n} entries")
        K.append(vals)
    mu, rate = None, 1.0
    for lineno, row in rows[n + 1:]:
        if row.startswith("mu:") and mu is None:
            mu = [float(v) for v in row[3:].split()]
        elif row.startswith("rate:"):
            rate = float(row[5:])
        else:
            raise ValueError(f"line {lineno}: expected a 'mu:' or 'rate:' line")
    return build_chain(K, mu, rate=rate)


def chain_to_text(chain: FiniteChain) -> str:
    buf = io.StringIO()
    buf.write(f"n={chain.n}\n")
    for row in chain.kernel:
        buf.write(" ".join(repr(float(v)) for v in row) + "\n")
    buf.write("mu: " + " ".join(repr(float(v)) for v in chain.measure) + "\n")
    if chain.rate != 1.0:
        buf.write(f"rate: {chain.rate!r}\n")
    return buf.getvalue()


def random_functions(n: int, count: int, rng: np.random.Generator) -> Iterator[np.ndarray]:
    """Iterator over ``count`` random test vectors of mixed shapes."""
    for k in range(count):
        kind = k % 4
        if kind == 0:
            yield rng.normal(size=n)
        elif kind == 1:
            yield (rng.random(n) < rng.uniform(0.1, 0.9)).astype(float)
        elif kind == 2:
            yield np.exp(rng.normal(size=n) * rng.uniform(0.1, 3.0))
        else:
            v = np.zeros(n)
            v[rng.integers(n)] = rng.normal() * 5
            yield v + rng.normal(size=n) * 0.01
