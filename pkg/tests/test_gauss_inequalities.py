import math

import numpy as np
import pytest

from talagrand_lab.calibration import frozen_constant
from talagrand_lab.gauss import inequalities as GI
from talagrand_lab.gauss import measures as M
from talagrand_lab.talagrand import talagrand_summand


def test_summands():
    assert GI.l1_summand(0.0) == 0.0
    b = 0.1
    assert GI.l1_summand(b) == pytest.approx(b * (1 + b) / math.sqrt(1 + math.log(10)))
    assert GI.l1_summand(3.0) == pytest.approx(12.0)
    assert GI.q_summand(0.0, 0.0, 1.5) == 0.0
    # at q = 1 the L^q summand is the L1 summand: Q = b
    for b in (0.01, 0.3, 2.0):
        assert GI.q_summand(b, b, 1.0) == pytest.approx(GI.l1_summand(b))
    # at q = 2 the log term matches the L2 summand's
    n2, n1 = 0.7, 0.2
    assert GI.q_summand(n2 ** 2, n1, 2.0) == pytest.approx((n2 ** 2 + n1 ** 2) / (1 + math.log(n2 ** 2 / n1 ** 2)))


def test_gaussian_l2_bound_examples():
    mu1 = M.ProductMeasure.standard_gaussian(1)
    r = GI.corollary3_report(M.constant(2.0), mu1)
    assert r.passed and r.lhs == pytest.approx(0, abs=1e-15)
    r = GI.corollary3_report(M.polynomial([(1.0, (1,))]), mu1)
    assert r.constant == pytest.approx(4.0)
    assert r.lhs == pytest.approx(1.0, rel=1e-9)
    assert r.rhs == pytest.approx(4.0, rel=1e-6)


def test_gaussian_l2_bound_random_polynomials(rng):
    mu = M.ProductMeasure.standard_gaussian(3)
    grid = mu.grid(12)
    for _ in range(200):
        f = M.random_polynomial(3, 3, rng)
        assert GI.corollary3_report(f, mu, 4.0, backend=grid).passed


def test_gaussian_l2_bound_needs_hypercontractive_measure():
    mu = M.ProductMeasure((M.exp_power(1.5),))
    with pytest.raises(ValueError):
        GI.corollary3_report(M.constant(1.0), mu)


def test_gaussian_l2_bound_cloud_backend(rng):
    mu = M.ProductMeasure.standard_gaussian(2)
    cloud = mu.sample(50000, seed=1)
    r = GI.corollary3_report(M.tanh_ridge([1.0, 0.5]), mu, backend=cloud)
    assert r.passed and r.slack > 0


def test_gaussian_l1_bound_constant():
    mu = M.ProductMeasure.standard_gaussian(2)
    # gaussian: rho = 1, kappa = 0 -> T = min(1, 1/2) = 1/2
    assert GI.theorem6_constant(mu, 1.0) == pytest.approx(2.0)


def test_gaussian_l1_bound_examples():
    mu1 = M.ProductMeasure.standard_gaussian(1)
    assert GI.theorem6_report(M.constant(0.5), mu1).passed
    r = GI.theorem6_report(M.tanh_ridge([1.0]), mu1)
    assert r.passed and r.lhs > 0 and r.rhs > r.lhs
    with pytest.raises(ValueError):
        GI.theorem6_report(M.polynomial([(1.0, (1,))]), mu1)


@pytest.mark.parametrize("eps", [0.3, 0.1, 0.03])
def test_gaussian_l1_bound_mollified_halfspaces(eps, rng):
    for N in (1, 2, 3):
        mu = M.ProductMeasure.standard_gaussian(N)
        axis = int(rng.integers(N))
        fine = M.gaussian_panel_rule(-8.5, 8.5, 1700, 4)
        grid = mu.grid(8, {axis: fine})
        f = M.mollified_halfspace(np.eye(N)[axis], float(rng.uniform(-2, 2)), eps)
        assert GI.theorem6_report(f, mu, backend=grid).passed


def test_interpolated_q_reductions():
    mu = M.ProductMeasure.standard_gaussian(2)
    grid = mu.panel_grid(120)
    f = M.tanh_ridge([1.0, 0.5])
    r1 = GI.interpolated_q_report(f, mu, 1.0, C=1.0, backend=grid)
    c0 = 1.0 / GI.theorem6_constant(mu, 1.0)
    t6 = GI.theorem6_report(f, mu, c0=c0, backend=grid)
    assert r1.rhs == pytest.approx(t6.rhs, rel=1e-12)
    assert r1.lhs == pytest.approx(t6.lhs)
    r15 = GI.interpolated_q_report(M.mollified_halfspace([1.0, 0.0], 0.3, 0.3), mu, 1.5, backend=grid)
    assert r15.passed and r15.constant == frozen_constant("interp-q")
    with pytest.raises(ValueError):
        GI.interpolated_q_report(f, mu, 2.5)


def test_l2_summand_matches_talagrand_summand():
    assert talagrand_summand(0.0, 0.0) == 0.0
    with pytest.raises(ArithmeticError):
        talagrand_summand(1.0, 0.0)
