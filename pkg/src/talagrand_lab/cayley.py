"""Finite groups given by multiplication tables, and random walks on their Cayley graphs."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import partial
from typing import Sequence

import numpy as np

from .chain import DirichletDecomposition, FiniteChain, build_chain

MAX_ORDER = 720


class GroupError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class GroupTable:
    """``mul[a, b]`` is the index of the product ``a * b``."""

    mul: np.ndarray
    identity: int
    inv: np.ndarray
    labels: tuple = ()

    @property
    def order(self) -> int:
        return self.mul.shape[0]


def group_from_table(mul, labels: Sequence = (), check_associativity: bool = True, samples: int = 20000, seed: int = 0) -> GroupTable:
    """Validate a Cayley table and derive identity and inverses.

    Associativity is checked exhaustively up to order 64, on random triples above.
    """
    mul = np.asarray(mul, dtype=np.int64)
    n = mul.shape[0]
    if mul.shape != (n, n) or n > MAX_ORDER or n < 1:
        raise GroupError(f"table must be square with order <= {MAX_ORDER}")
    if mul.min() < 0 or mul.max() >= n:
        raise GroupError("table entries out of range")
    ar = np.arange(n)
    ids = [e for e in range(n) if np.array_equal(mul[e], ar) and np.array_equal(mul[:, e], ar)]
    if not ids:
        raise GroupError("no identity element")
    e = ids[0]
    inv = np.full(n, -1)
    for a in range(n):
        hits = np.flatnonzero(mul[a] == e)
        if hits.size != 1 or mul[hits[0], a] != e:
            raise GroupError(f"element {a} has no two-sided inverse")
        inv[a] = hits[0]
    if check_associativity:
        if n <= 64:
            left = mul[mul[:, :, None], ar[None, None, :]]  # (ab)c
            right = mul[ar[:, None, None], mul[None, :, :]]  # a(bc)
            ok = np.array_equal(left, right)
        else:
            rng = np.random.default_rng(seed)
            a, b, c = rng.integers(n, size=(3, samples))
            ok = np.array_equal(mul[mul[a, b], c], mul[a, mul[b, c]])
        if not ok:
            raise GroupError("table is not associative")
    return GroupTable(mul, e, inv, tuple(labels))


def symmetric_group(n: int) -> tuple[GroupTable, tuple[int, ...]]:
    """``S_n`` with composition ``(a * b)(k) = a(b(k))`` and its transpositions."""
    if not 2 <= n <= 6:
        raise ValueError("n must be between 2 and 6")
    perms = list(itertools.permutations(range(n)))
    index = {p: k for k, p in enumerate(perms)}
    mul = np.array([[index[tuple(a[b[k]] for k in range(n))] for b in perms] for a in perms])
    group = group_from_table(mul, labels=perms)
    transpositions = []
    for i, j in itertools.combinations(range(n), 2):
        p = list(range(n))
        p[i], p[j] = p[j], p[i]
        transpositions.append(index[tuple(p)])
    return group, tuple(transpositions)


def hypercube_group(N: int) -> tuple[GroupTable, tuple[int, ...]]:
    """``Z_2^N`` (xor on bitmasks) with the coordinate flips as generators."""
    size = 1 << N
    ar = np.arange(size)
    group = group_from_table(ar[:, None] ^ ar[None, :], check_associativity=N <= 6)
    return group, tuple(1 << i for i in range(N))


def is_symmetric_set(G: GroupTable, S: Sequence[int]) -> bool:
    Sset = set(int(s) for s in S)
    return all(int(G.inv[s]) in Sset for s in Sset)


def generated_subgroup(G: GroupTable, S: Sequence[int]) -> set:
    seen = {G.identity}
    frontier = [G.identity]
    while frontier:
        nxt = []
        for x in frontier:
            for s in S:
                y = int(G.mul[s, x])
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
    return seen


def conjugacy_closed(G: GroupTable, S: Sequence[int]) -> bool:
    """``u S u^{-1} = S`` for every ``u`` in ``S``."""
    Sset = set(int(s) for s in S)
    for u in Sset:
        conj = {int(G.mul[G.mul[u, s], G.inv[u]]) for s in Sset}
        if conj != Sset:
            return False
    return True


def _check_generators(G: GroupTable, S: Sequence[int]) -> tuple[int, ...]:
    S = tuple(sorted(set(int(s) for s in S)))
    if not S:
        raise GroupError("generator set is empty")
    if not is_symmetric_set(G, S):
        raise GroupError("generator set is not symmetric")
    if len(generated_subgroup(G, S)) != G.order:
        raise GroupError("generator set does not generate the group")
    return S


@dataclass(frozen=True, eq=False)
class CayleyChain:
    group: GroupTable
    generators: tuple
    chain: FiniteChain

    def decomposition(self) -> DirichletDecomposition:
        """Directions ``|D_s f| / sqrt(2|S|)``, one per generator, kappa = 0."""
        scale = 1.0 / math.sqrt(2.0 * len(self.generators))
        dirs = tuple(partial(_scaled_abs_derivative, self.group, s, scale) for s in self.generators)
        return DirichletDecomposition(dirs, 0.0)


def _scaled_abs_derivative(G: GroupTable, s: int, scale: float, f) -> np.ndarray:
    f = np.asarray(f, dtype=np.float64)
    return scale * np.abs(f[G.mul[s]] - f)


def build_cayley_chain(G: GroupTable, S: Sequence[int]) -> CayleyChain:
    """Kernel ``K(x, y) = 1_S(y x^{-1}) / |S|`` with the uniform measure."""
    S = _check_generators(G, S)
    n = G.order
    K = np.zeros((n, n))
    x = np.arange(n)
    for s in S:
        K[x, G.mul[s, x]] += 1.0 / len(S)
    chain = build_chain(K, np.full(n, 1.0 / n), labels=G.labels)
    return CayleyChain(G, S, chain)


def edge_derivative(G: GroupTable, s: int, f, S: Sequence[int] | None = None) -> np.ndarray:
    """``D_s f(x) = f(s x) - f(x)``."""
    if S is not None and int(s) not in set(int(v) for v in S):
        raise GroupError(f"{s} is not in the generator set")
    f = np.asarray(f, dtype=np.float64)
    if f.shape != (G.order,):
        raise ValueError("function must have one value per group element")
    return f[G.mul[s]] - f


def influence_s(G: GroupTable, A, s: int) -> float:
    """``mu({x in A, s x not in A})`` under the uniform measure."""
    A = np.asarray(A, dtype=np.float64)
    if not np.all((A == 0.0) | (A == 1.0)):
        raise ValueError("expected an indicator vector")
    inside = A != 0
    return float(np.sum(inside & ~inside[G.mul[s]])) / G.order


def max_influence(cc: CayleyChain, A) -> float:
    return max(influence_s(cc.group, A, s) for s in cc.generators)


def parse_group_text(text: str) -> GroupTable:
    """Read ``order=<n>`` followed by ``n`` rows of ``n`` element indices."""
    rows = [(k, ln.strip()) for k, ln in enumerate(text.splitlines(), start=1) if ln.strip()]
    if not rows or not rows[0][1].startswith("order="):
        raise ValueError("line 1: expected 'order=<n>'")
    n = int(rows[0][1].split("=", 1)[1])
    if len(rows) != n + 1:
        raise ValueError(f"expected {n} table rows, got {len(rows) - 1}")
    table = []
    for lineno, row in rows[1:]:
        vals = [int(v) for v in row.split()]
        if len(vals) != n:
            raise ValueError(f"line {lineno}: expected {n} entries")
        table.append(vals)
    return group_from_table(table)


def group_to_text(G: GroupTable) -> str:
    lines = [f"order={G.order}"] + [" ".join(str(int(v)) for v in row) for row in G.mul]
    return "\n".join(lines) + "\n"
