import math

import numpy as np
import pytest
from scipy import integrate, special

import oracles
from talagrand_lab.gauss import measures as M


@pytest.mark.parametrize("k", range(0, 10))
def test_hermite_grid_reproduces_even_moments(k):
    grid = M.gaussian_grid(1, 20)
    moment = grid.integrate(grid.points[:, 0] ** (2 * k))
    double_fact = math.prod(range(2 * k - 1, 0, -2)) if k else 1
    assert moment == pytest.approx(double_fact, rel=1e-12)


def test_grid_is_tensor_product():
    grid = M.gaussian_grid(2, 5)
    assert grid.points.shape == (25, 2)
    assert grid.weights.sum() == pytest.approx(1.0)
    assert grid.integrate(grid.points[:, 0] ** 2 * grid.points[:, 1] ** 2) == pytest.approx(1.0)


def test_panel_grid_handles_kinks():
    mu = M.ProductMeasure.standard_gaussian(1)
    grid = mu.panel_grid(240)
    assert grid.integrate(np.abs(grid.points[:, 0])) == pytest.approx(math.sqrt(2 / math.pi), abs=1e-6)


@pytest.mark.parametrize("alpha", [1.25, 1.5, 2.0, 3.0])
def test_exp_power_factor(alpha):
    f = M.exp_power(alpha)
    z, _ = integrate.quad(lambda x: float(f.pdf(x)), -np.inf, np.inf)
    assert z == pytest.approx(1.0, abs=1e-10)
    for x in (-1.3, 0.0, 0.4, 2.5):
        c, _ = integrate.quad(lambda s: float(f.pdf(s)), -40, x, points=[0.0] if x > 0 else None, epsabs=1e-13, limit=200)
        assert float(f.cdf(x)) == pytest.approx(c, abs=1e-9)
    u = np.array([1e-4, 0.2, 0.5, 0.9])
    np.testing.assert_allclose(f.cdf(f.ppf(u)), u, atol=1e-12)
    mu = M.ProductMeasure((f, f))
    assert abs(mu.check_normalisation()) < 1e-8
    assert not mu.is_gaussian


def test_exp_power_flags():
    assert M.exp_power(2.0).rho == 2.0
    assert M.exp_power(1.5).rho is None
    mu = M.ProductMeasure((M.exp_power(1.5),))
    assert mu.rho is None


def test_custom_factor_quartic():
    f = M.custom(lambda x: x ** 4 / 4, rho=None, kappa=0.0, support=8)
    assert float(f.cdf(0.0)) == pytest.approx(0.5, abs=1e-6)
    assert float(f.ppf(0.5)) == pytest.approx(0.0, abs=1e-3)
    xs, ws = f.rule(64)
    assert ws.sum() == pytest.approx(1.0)
    assert ws @ xs == pytest.approx(0.0, abs=1e-12)


def test_product_measure_properties():
    mu = M.ProductMeasure.standard_gaussian(4, block=2)
    assert mu.dim == 4 and mu.N == 2
    assert [list(b) for b in mu.blocks] == [[0, 1], [2, 3]]
    assert mu.is_gaussian and mu.rho == 1.0 and mu.commutation_rate == -1.0
    with pytest.raises(ValueError):
        M.ProductMeasure.standard_gaussian(3, block=2)
    with pytest.raises(ValueError):
        M.ProductMeasure(())


def test_sampling_is_seeded_and_antithetic():
    mu = M.ProductMeasure.standard_gaussian(3)
    a = mu.sample(1000, seed=5)
    b = mu.sample(1000, seed=5)
    np.testing.assert_array_equal(a.points, b.points)
    c = mu.sample(1000, seed=5, antithetic=True)
    assert abs(c.points.mean(axis=0)).max() < 1e-12
    assert abs(np.mean(a.points ** 2) - 1) < 0.1


def test_function_families_have_correct_gradients(rng):
    X = rng.normal(size=(50, 3))
    fams = [
        M.random_polynomial(3, 3, rng),
        M.hermite(4, 1, 3),
        M.tanh_ridge([0.5, -1.0, 2.0], 0.3),
        M.mollified_halfspace([0.6, 0.8, 0.0], 0.2, 0.5),
        M.product_function([M.tanh_ridge([2.0]), M.tanh_ridge([0.5], 1.0)], [0, 2]),
        M.constant(0.3),
    ]
    for f in fams:
        assert M.finite_difference_error(f, X) < 1e-6, f.name


def test_polynomial_hessian(rng):
    f = M.polynomial([(1.0, (2, 1)), (-0.5, (0, 3))])
    X = rng.normal(size=(10, 2))
    H = f.hessian(X)
    x, y = X[:, 0], X[:, 1]
    np.testing.assert_allclose(H[:, 0, 0], 2 * y)
    np.testing.assert_allclose(H[:, 0, 1], 2 * x)
    np.testing.assert_allclose(H[:, 1, 1], -3 * y)


def test_hermite_matches_reference():
    x = np.linspace(-3, 3, 13)[:, None]
    for k in range(6):
        np.testing.assert_allclose(M.hermite(k, 0, 1).value(x), oracles.hermite_prob(k, x[:, 0]), atol=1e-12)


def test_bump():
    s = np.linspace(-1, 1, 2001)
    assert integrate.trapezoid(M.bump_pdf(s), s) == pytest.approx(1.0, abs=1e-6)
    assert integrate.trapezoid(s * s * M.bump_pdf(s), s) == pytest.approx(M.BUMP_VARIANCE, abs=1e-6)
    assert M.bump_cdf(-1.0) == 0.0 and M.bump_cdf(1.0) == 1.0
    assert M.mollified_halfspace([1.0], 0.0, 0.1).bounded
