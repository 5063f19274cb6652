import math

import numpy as np
import pytest
from scipy import special

import oracles
from talagrand_lab.gauss import measures as M
from talagrand_lab.gauss import ou


@pytest.fixture(scope="module")
def grid1():
    return M.gaussian_grid(1, 20)


def test_linear_function(grid1):
    x = np.linspace(-2, 2, 9)[:, None]
    f = M.polynomial([(1.0, (1,))])
    np.testing.assert_allclose(ou.ou_semigroup_apply(f, 0.7, x, grid1), math.exp(-0.7) * x[:, 0], atol=1e-14)
    np.testing.assert_array_equal(ou.ou_semigroup_apply(f, 0.0, x, grid1), x[:, 0])


@pytest.mark.parametrize("k", range(5))
@pytest.mark.parametrize("t", [0.01, 0.3, 1.0, 4.0])
def test_hermite_eigenfunctions(grid1, k, t):
    h = M.hermite(k, 0, 1)
    x = np.linspace(-4, 4, 17)[:, None]
    np.testing.assert_allclose(ou.ou_semigroup_apply(h, t, x, grid1), math.exp(-k * t) * h.value(x), atol=1e-8)


def test_semigroup_against_mehler_quadrature(grid1):
    f = M.tanh_ridge([1.5], 0.2)
    fine = M.ProductMeasure.standard_gaussian(1).panel_grid(400)
    for t in (0.05, 0.5, 2.0):
        for x in (-1.0, 0.3, 2.0):
            ref = oracles.ou_apply_1d(lambda s: math.tanh(1.5 * s - 0.2), t, x)
            assert ou.ou_semigroup_apply(f, t, np.array([x]), fine) == pytest.approx(ref, abs=1e-9)


def test_gradient_routes_agree(rng):
    grid = M.gaussian_grid(2, 24)
    X = rng.normal(size=(10, 2))
    for _ in range(5):
        f = M.random_polynomial(2, 3, rng)
        for t in (0.1, 1.0):
            a = ou.ou_gradient(f, t, X, grid, "parts")
            b = ou.ou_gradient(f, t, X, grid, "chain")
            np.testing.assert_allclose(a, b, atol=1e-10)


def test_non_gaussian_grid_rejected():
    mu = M.ProductMeasure((M.exp_power(1.5),))
    with pytest.raises(ValueError):
        ou.ou_semigroup_apply(M.constant(1.0), 0.5, np.zeros((1, 1)), mu.grid(16))


def test_gradient_norm_examples(rng):
    mu = M.ProductMeasure.standard_gaussian(1)
    grid = mu.grid(20)
    x1 = M.polynomial([(1.0, (1,))])
    assert ou.gradient_lp_norm(x1, mu, 0, 1, grid).value == pytest.approx(1.0)
    assert ou.gradient_lp_norm(x1, mu, 0, 2, grid).value == pytest.approx(1.0)
    sq = M.polynomial([(1.0, (2,))])
    assert ou.gradient_lp_norm(sq, mu, 0, 2, grid).value == pytest.approx(2.0, rel=1e-12)
    l1 = ou.gradient_lp_norm(sq, mu, 0, 1, mu.panel_grid(240)).value
    assert l1 == pytest.approx(2 * oracles.gaussian_abs_moment(1), rel=1e-6)


def test_cloud_agrees_with_grid(rng):
    mu = M.ProductMeasure.standard_gaussian(2)
    grid = mu.grid(20)
    cloud = mu.sample(200000, seed=3)
    for _ in range(5):
        f = M.random_polynomial(2, 2, rng)
        for r in (1.0, 2.0):
            for b in range(2):
                g = ou.gradient_lp_norm(f, mu, b, r, mu.panel_grid(128) if r == 1 else grid)
                c = ou.gradient_lp_norm(f, mu, b, r, cloud)
                assert abs(g.value - c.value) <= 3 * c.std_error + 1e-12


def test_commutation_examples(rng):
    grid = M.gaussian_grid(1, 24)
    X = np.linspace(-3, 3, 25)[:, None]
    lin = M.polynomial([(2.0, (1,))])
    r = ou.gradient_commutation_check(lin, 0.5, grid, X, kappa=-1)
    assert r.passed and r.lhs == pytest.approx(r.rhs)
    cube = M.polynomial([(1.0, (3,))])
    for t in (0.1, 1.0):
        assert ou.gradient_commutation_check(cube, t, grid, X, kappa=-1).passed
    assert not ou.gradient_commutation_check(lin, 0.5, grid, X, kappa=-2).passed


def test_gradient_bound_examples():
    mu = M.ProductMeasure.standard_gaussian(1)
    grid = mu.panel_grid(2000)
    X = np.linspace(-2, 2, 81)[:, None]
    f = M.tanh_ridge([10.0])
    for t in (0.01, 0.1, 1.0):
        assert ou.gradient_bound_check(f, t, grid, X).passed
    g = ou.ou_gradient(M.constant(0.5), 0.3, X, grid)
    assert np.max(np.abs(g)) < 1e-12
    with pytest.raises(ValueError):
        ou.gradient_bound_check(M.polynomial([(1.0, (1,))]), 0.5, grid, X)
    with pytest.raises(ValueError):
        ou.gradient_bound_check(f, 2.0, grid, X)


def test_admissible_time():
    assert ou.admissible_time(0.0) == 1.0
    assert ou.admissible_time(2.0) == 0.25
    with pytest.raises(ValueError):
        ou.admissible_time(-1.0)


def test_sign_probe_closed_form_matches_quadrature():
    grid = M.ProductMeasure.standard_gaussian(1).panel_grid(4000)
    w = 0.05
    f = M.SmoothFunction(
        lambda X: special.erf(X[:, 0] / (w * math.sqrt(2))),
        lambda X: (math.sqrt(2 / math.pi) / w * np.exp(-X[:, 0] ** 2 / (2 * w * w)))[:, None],
        None,
        True,
        "erf",
    )
    for t in (0.05, 0.3):
        g = ou.ou_gradient(f, t, np.zeros((1, 1)), grid)
        assert abs(g[0, 0]) * math.sqrt(t) == pytest.approx(ou.sign_probe(t, w), rel=1e-6)


@pytest.mark.parametrize("t", [1e-4, 1e-2, 0.2])
def test_sign_probe_matches_mehler_oracle(t):
    # central difference of P_t sign at 0, each value by adaptive Mehler quadrature
    def sign(y):
        return 1.0 if y > 0 else -1.0

    h = 1e-4 * math.sqrt(t)
    d = (oracles.ou_apply_1d(sign, t, h, jumps=[0.0]) - oracles.ou_apply_1d(sign, t, -h, jumps=[0.0])) / (2 * h)
    assert d * math.sqrt(t) == pytest.approx(ou.sign_probe(t), rel=1e-5)


def test_sign_probe_limit():
    # t -> 0 limit of sqrt(t) |grad P_t sign|(0) is 1/sqrt(pi)
    assert ou.sign_probe(1e-10) == pytest.approx(1 / math.sqrt(math.pi), rel=1e-8)
    assert ou.sign_probe_limit() == pytest.approx(0.5641895835)
    ts = np.logspace(-6, 0, 20)
    vals = [ou.sign_probe(t) for t in ts]
    assert all(v <= 1.0 for v in vals)
