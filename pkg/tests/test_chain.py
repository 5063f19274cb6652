import math

import numpy as np
import pytest

import oracles
from talagrand_lab import chain as CH
from talagrand_lab import cube as C


def test_two_point_chain_is_valid():
    c = CH.two_point_chain(0.3)
    np.testing.assert_allclose(c.measure, [0.7, 0.3])
    np.testing.assert_allclose(c.kernel, [[0.7, 0.3], [0.7, 0.3]])


def test_build_chain_errors():
    with pytest.raises(CH.ChainError, match="ergodic"):
        CH.build_chain(np.eye(3))
    K = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]]) * 0.5 + np.eye(3) * 0.5
    with pytest.raises(CH.ChainError, match="reversible"):
        CH.build_chain(K)
    with pytest.raises(CH.ChainError, match="row-stochastic"):
        CH.build_chain([[0.5, 0.4], [0.5, 0.5]])
    with pytest.raises(CH.ChainError):
        CH.build_chain([[0.5, 0.5], [0.5, 0.5]], [0.2, 0.8])


def test_dirichlet_form_examples(rng):
    c = CH.two_point_chain(0.3)
    assert CH.dirichlet_form(c, [2.0, 2.0], [2.0, 2.0]) == 0.0
    f = rng.normal(size=2)
    assert CH.dirichlet_form(c, f, f) == pytest.approx(c.variance(f), rel=1e-12)
    N = 4
    pc = CH.binary_cube_chain(N, 0.5)
    g = C.random_function(C.BiasedCube(N), rng, "gaussian")
    D2 = C.derivative_moments(g, 2.0)
    assert CH.dirichlet_form(pc.chain, g.values, g.values) == pytest.approx(0.25 * D2.sum(), rel=1e-12)
    assert CH.generator_form(pc.chain, g.values, g.values) == pytest.approx(0.25 * D2.sum(), rel=1e-12)


def test_semigroup_examples(rng):
    c = CH.two_point_chain(0.3)
    f = rng.normal(size=2)
    np.testing.assert_array_equal(CH.semigroup_apply(c, f, 0.0), f)
    for t in (0.1, 1.0, 3.0):
        expected = math.exp(-t) * f + (1 - math.exp(-t)) * c.expect(f)
        np.testing.assert_allclose(CH.semigroup_apply(c, f, t), expected, atol=1e-14)
    pc = CH.binary_cube_chain(3, 0.7)
    g = rng.normal(size=8)
    np.testing.assert_allclose(CH.semigroup_apply(pc.chain, g, 50.0), pc.chain.expect(g), atol=1e-12)
    with pytest.raises(ValueError):
        CH.semigroup_apply(c, f, -1.0)


def test_semigroup_matches_matrix_exponential(rng):
    from scipy.linalg import expm

    pc = CH.binary_cube_chain(3, 0.6)
    g = rng.normal(size=8)
    np.testing.assert_allclose(CH.semigroup_apply(pc.chain, g, 0.7), expm(0.7 * pc.chain.generator) @ g, atol=1e-12)


def test_spectral_gap_examples():
    assert CH.spectral_gap(CH.two_point_chain(0.3)) == pytest.approx(1.0)
    pc = CH.product_chain([CH.two_point_chain(0.5), CH.two_point_chain(0.8)])
    assert CH.spectral_gap(pc.chain) == pytest.approx(1.0)
    from talagrand_lab.cayley import build_cayley_chain, symmetric_group

    G, S = symmetric_group(3)
    assert CH.spectral_gap(build_cayley_chain(G, S).chain) == pytest.approx(1.0, abs=1e-12)


def test_product_gap_is_min_of_factor_gaps():
    # a slow three-state factor next to a two-point factor
    K = np.array([[0.9, 0.1, 0.0], [0.1, 0.8, 0.1], [0.0, 0.1, 0.9]])
    slow = CH.build_chain(K, np.full(3, 1 / 3))
    pc = CH.product_chain([slow, CH.two_point_chain(0.5)])
    assert CH.spectral_gap(pc.chain) == pytest.approx(min(CH.spectral_gap(slow), 1.0), rel=1e-10)


@pytest.mark.parametrize("p", [0.5, 0.6, 0.7, 0.8, 0.9])
def test_two_point_logsob_formula_against_scan(p):
    exact = CH.two_point_logsob(p)
    assert exact == pytest.approx(oracles.two_point_logsob_scan(p), rel=1e-4)
    assert CH.logsob_constant(CH.two_point_chain(p), "exact") == exact


def test_logsob_examples():
    assert CH.two_point_logsob(0.5) == 1.0
    assert CH.two_point_logsob(0.9) == pytest.approx(1.6 / math.log(9), rel=1e-12)
    assert CH.two_point_logsob(0.9) == pytest.approx(0.72818, abs=2e-5)
    pc = CH.product_chain([CH.two_point_chain(0.5), CH.two_point_chain(0.9)])
    assert CH.logsob_constant(pc.chain) == pytest.approx(CH.two_point_logsob(0.9), rel=1e-3)
    with pytest.raises(ValueError):
        CH.logsob_constant(pc.chain, "exact")
    with pytest.raises(ValueError):
        CH.logsob_constant(pc.chain, "numeric", max_states=2)


def test_logsob_below_gap(rng):
    for _ in range(5):
        n = 4
        W = rng.random((n, n))
        W = W + W.T
        mu = W.sum(axis=1) / W.sum()
        K = W / W.sum(axis=1, keepdims=True)
        c = CH.build_chain(K, mu)
        assert CH.logsob_constant(c, restarts=8) <= CH.spectral_gap(c) + 1e-6


def test_hypercontractivity_examples(rng):
    c = CH.two_point_chain(0.5)
    f = np.array([0.5, 1.5])  # 1 + 0.5 x
    r0 = CH.hypercontractivity_check(c, 1.0, 0.0, f)
    assert r0.lhs == pytest.approx(r0.rhs) and r0.passed
    for t in np.linspace(0.01, 3, 30):
        assert CH.hypercontractivity_check(c, 1.0, t, f).passed
    pc = CH.binary_cube_chain(6, 0.5)
    for _ in range(200):
        g = np.exp(rng.normal(size=64))
        for t in (0.1, 0.5, 1.0, 2.0):
            assert CH.hypercontractivity_check(pc.chain, 1.0, t, g).passed
    with pytest.raises(ValueError):
        CH.hypercontractivity_check(c, 0.0, 1.0, f)


def test_hypercontractivity_fails_with_too_large_rho(rng):
    c = CH.two_point_chain(0.9)
    f = np.array([0.1, 2.0])
    assert any(not CH.hypercontractivity_check(c, 5.0, t, f).passed for t in (0.05, 0.1, 0.2))


def test_variance_decay_examples(rng):
    c = CH.two_point_chain(0.3)
    assert CH.variance_decay_check(c, 1.0, [1.0, 1.0], 0.5).passed
    f = rng.normal(size=2)
    for t in (0.1, 1.0):
        r = CH.variance_decay_check(c, 1.0, f, t)
        # two-point chain: ||f||^2 - ||P_t f||^2 = (1 - e^{-2t}) Var f
        assert r.rhs == pytest.approx(c.variance(f) * (1 - math.exp(-2 * t)) / (1 - math.exp(-t)), rel=1e-10)
    from talagrand_lab.cayley import build_cayley_chain, symmetric_group

    G, S = symmetric_group(3)
    s3 = build_cayley_chain(G, S).chain
    lam = CH.spectral_gap(s3)
    for _ in range(500):
        assert CH.variance_decay_check(s3, lam, rng.normal(size=6), float(rng.exponential())+1e-3).passed


def test_product_chain_examples(rng):
    single = CH.product_chain([CH.two_point_chain(0.3)])
    f = rng.normal(size=2)
    np.testing.assert_allclose(single.decomposition.apply(f)[0], np.abs(single.chain.generator @ f), atol=1e-14)
    pc = CH.product_chain([CH.two_point_chain(0.5)] * 2)
    assert pc.chain.n == 4
    assert CH.spectral_gap(pc.chain) == pytest.approx(1.0)
    assert CH.logsob_constant(pc.chain) == pytest.approx(1.0, rel=1e-3)
    big = CH.binary_cube_chain(8, 0.7)
    assert CH.generators_commute(big)
    for _ in range(5):
        g = rng.normal(size=256)
        assert CH.decomposition_identity_gap(big.chain, big.decomposition, g) < 1e-10 * max(1.0, big.chain.variance(g))
    with pytest.raises(CH.ChainError):
        CH.binary_cube_chain(13)


def test_commutation_examples(rng):
    pc = CH.binary_cube_chain(5, 0.5)
    f = rng.normal(size=32)
    assert CH.commutation_check(pc.chain, pc.decomposition, f, 0.0).passed
    for t in (0.1, 0.5, 1.0):
        assert CH.commutation_check(pc.chain, pc.decomposition, f, t).passed


def test_commutation_detects_wrong_decomposition(rng):
    # directions built from a generator that does not commute with the chain
    K = np.array([[0.5, 0.5, 0.0], [0.25, 0.5, 0.25], [0.0, 0.5, 0.5]])
    chain = CH.build_chain(K)
    P = chain.generator
    bad = CH.DirichletDecomposition((lambda f: np.abs(np.diag([1.0, 0.0, 0.0]) @ P @ f),), 0.0)
    worst = max(CH.commutation_check(chain, bad, rng.normal(size=3), 0.5).max_violation for _ in range(50))
    assert worst > 1e-6


def test_chain_text_round_trip():
    text = "n=2\n0.7 0.3\n0.7 0.3\nmu: 0.7 0.3\n"
    c = CH.parse_chain_text(text)
    np.testing.assert_allclose(c.measure, [0.7, 0.3])
    c2 = CH.parse_chain_text(CH.chain_to_text(c))
    np.testing.assert_array_equal(c2.kernel, c.kernel)
    with pytest.raises(ValueError):
        CH.parse_chain_text("n=2\n1 0\n")
    with pytest.raises(ValueError):
        CH.parse_chain_text("2\n1 0\n0 1\n")


def test_spectrum_csv():
    csv = CH.two_point_chain(0.5).spectrum.to_csv()
    lines = csv.strip().splitlines()
    assert lines[0] == "index,eigenvalue"
    assert len(lines) == 3
