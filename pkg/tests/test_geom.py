import math

import numpy as np
import pytest
from scipy import stats

from talagrand_lab import geom
from talagrand_lab.gauss import inequalities as GI
from talagrand_lab.gauss import measures as M
from talagrand_lab.gauss import sets as S

import oracles


@pytest.fixture(scope="module")
def s3():
    return geom.SphereModel(3, samples=100000, seed=7)


def const(n=3, bounded=False):
    return M.SmoothFunction(lambda X: np.full(len(X), 0.7), np.zeros_like, lambda X: np.zeros(X.shape + (X.shape[1],)), bounded, "const")


def test_sphere_model_moments(s3):
    X = s3.points
    tol = 4 / math.sqrt(s3.samples)
    np.testing.assert_allclose(X.mean(axis=0), 0.0, atol=tol)
    np.testing.assert_allclose((X ** 2).mean(axis=0), 1 / 3, atol=tol)
    np.testing.assert_allclose(X[0], -X[1])
    with pytest.raises(ValueError):
        geom.SphereModel(1)


def test_dij_examples():
    f = geom.linear([1.0, 0.0, 0.0])
    x = np.array([0.6, 0.0, 0.8])
    assert geom.dij_derivative(f, 0, 1, x) == pytest.approx(-x[1])
    assert geom.dij_derivative(f, 0, 2, x) == pytest.approx(-x[2])
    assert geom.dij_derivative(f, 1, 2, x) == 0.0
    assert geom.dij_derivative(f, 2, 0, x) == pytest.approx(x[2])
    with pytest.raises(ValueError):
        geom.dij_derivative(f, 0, 1, np.array([1.0, 1.0, 0.0]))
    with pytest.raises(ValueError):
        geom.dij_derivative(f, 0, 3, x)


def test_dij_vanishes_on_radial_and_constant(s3):
    X = s3.points[:500]
    np.testing.assert_allclose(geom.all_dij(geom.radial_square(), X), 0.0, atol=1e-13)
    np.testing.assert_allclose(geom.all_dij(const(), X), 0.0)


def test_dij_bounded_by_gradient(s3, rng):
    f = M.random_polynomial(3, 3, rng)
    X = s3.points[:2000]
    D = geom.all_dij(f, X)
    assert np.all(np.abs(D) <= np.linalg.norm(f.grad(X), axis=1)[:, None] + 1e-12)


def test_dirichlet_identity_linear(s3):
    r = geom.sphere_dirichlet_identity_check(geom.linear([1.0, 0.0, 0.0]), s3)
    assert r.passed
    # degree-1 harmonics have eigenvalue n-1
    assert r.extra["pair_side"] == pytest.approx(1 - np.mean(s3.points[:, 0] ** 2), abs=1e-12)
    assert r.extra["pair_side"] == pytest.approx(2 / 3, abs=4 / math.sqrt(s3.samples))
    assert r.extra["laplacian_side"] == pytest.approx(2 * np.mean(s3.points[:, 0] ** 2))


def test_dirichlet_identity_product_and_constant(s3):
    assert geom.sphere_dirichlet_identity_check(M.polynomial([(1.0, (1, 1, 0))]), s3).passed
    r = geom.sphere_dirichlet_identity_check(const(), s3)
    assert r.passed and r.extra["pair_side"] == 0.0


def test_sphere_l2_bound_linear_closed_form(s3):
    r = geom.corollary4_report(geom.linear([1.0, 0.0, 0.0]), s3)
    assert r.lhs == pytest.approx(1 / 3, abs=5e-3)
    # D_1j x_1 = -x_j: L2 norm sqrt(1/3), L1 norm 1/2 on S^2
    n2 = math.sqrt(oracles.sphere_moment(3, [0, 2]))
    n1 = 0.5
    exact = 2 * (4 * math.e / 3) * 2 * n2 ** 2 / (1 + math.log(n2 / n1))
    assert r.rhs == pytest.approx(exact, rel=1e-2)
    assert r.passed


def test_sphere_l2_bound_constant(s3):
    r = geom.corollary4_report(const(), s3)
    assert r.lhs == pytest.approx(0.0, abs=1e-20) and r.passed


@pytest.mark.parametrize("n", [3, 4])
def test_sphere_l2_bound_random_harmonics(n, rng):
    model = geom.SphereModel(n, samples=20000, seed=n)
    for _ in range(5):
        assert geom.corollary4_report(geom.random_harmonic(n, 2, rng), model).passed


def test_sphere_poincare(s3, rng):
    for _ in range(3):
        assert geom.sphere_poincare_check(M.random_polynomial(3, 2, rng), s3).passed


def test_sphere_l1_bound(s3):
    f = M.tanh_ridge(5.0 * np.array([1.0, 0.0, 0.0]))
    r = geom.theorem8_report(f, s3)
    assert r.passed and len(r.extra["pair_l1"]) == 3
    assert geom.theorem8_report(const(bounded=True), s3).passed
    with pytest.raises(ValueError):
        geom.theorem8_report(geom.linear([1.0, 0.0, 0.0]), s3)


def test_random_harmonic_is_traceless(rng):
    f = geom.random_harmonic(4, 2, rng)
    X = rng.normal(size=(3, 4))
    assert np.allclose(np.trace(f.hessian(X), axis1=1, axis2=2), 0.0)
    with pytest.raises(ValueError):
        geom.random_harmonic(4, 3, rng)


# ---------------------------------------------------------------- decompositions


def test_coordinate_and_loomis_whitney():
    assert geom.coordinate_decomposition(4).identity_error() < 1e-14
    lw = geom.loomis_whitney(3)
    assert all(c == 0.5 and B.shape == (2, 3) for c, B in lw.terms)
    assert lw.identity_error() < 1e-14


def test_random_frame(rng):
    assert geom.random_frame(5, rng).identity_error() < 1e-10


def test_wrong_weights_rejected(rng):
    d = geom.random_frame(3, rng)
    with pytest.raises(geom.DecompositionError, match="trace"):
        geom.validate_decomposition([(0.9, B) for _, B in d.terms])
    # right trace, wrong projections
    I = np.eye(3)
    with pytest.raises(geom.DecompositionError, match="identity"):
        geom.validate_decomposition([(1.5, I[[0]]), (0.5, I[[1]]), (1.0, I[[2]])])
    with pytest.raises(geom.DecompositionError):
        geom.validate_decomposition([(-1.0, I[[0]])])
    with pytest.raises(geom.DecompositionError):
        geom.validate_decomposition([(1.0, np.array([[1.0, 1.0, 0.0]]))])


def test_parse_decomposition():
    lines = ["term c=0.5 basis=0,1,0,0,0,1", "term c=0.5 basis=1,0,0,0,0,1", "term c=0.5 basis=1,0,0,0,1,0"]
    d = geom.parse_decomposition(lines, 3)
    assert len(d.terms) == 3
    for bad in (["term c=1"], ["basis=1,0"], ["term c=1 basis=1,0"]):
        with pytest.raises(geom.DecompositionError):
            geom.parse_decomposition(bad, 3)


def test_decomposition_bound_reduces_to_coordinates():
    f = geom.linear([1.0, 0.0, 0.0])
    mu = M.ProductMeasure.standard_gaussian(3)
    r5 = geom.corollary5_report(f, geom.coordinate_decomposition(3))
    r3 = GI.corollary3_report(f, mu)
    assert r5.lhs == pytest.approx(r3.lhs, rel=1e-8)
    assert r5.rhs == pytest.approx(r3.rhs, rel=1e-6)


def test_decomposition_bound_loomis_whitney_cubics(rng):
    lw = geom.loomis_whitney(3)
    for _ in range(4):
        r = geom.corollary5_report(M.random_polynomial(3, 3, rng), lw)
        assert r.passed and r.constant == 4.0
    assert geom.corollary5_report(const(), lw).passed


def test_decomposition_l1_bound():
    lw = geom.loomis_whitney(3)
    assert geom.proposition9_report(M.tanh_ridge([1.0, 1.0, 0.0]), lw).passed
    f = M.mollified_halfspace([1.0, 0.0], 0.3, 0.2)
    assert geom.proposition9_report(f, geom.coordinate_decomposition(2)).passed
    with pytest.raises(ValueError):
        geom.proposition9_report(geom.linear([1.0, 0.0, 0.0]), lw)


def test_projection_commutation(rng):
    lw = geom.loomis_whitney(3)
    grid = M.ProductMeasure.standard_gaussian(3).grid(12)
    f = M.random_polynomial(3, 3, rng)
    pts = rng.normal(size=(4, 3))
    assert geom.projection_commutation_error(f, lw, 0.4, grid, pts) < 1e-8


# ---------------------------------------------------------------- sections


def test_section_of_halfspace_is_halfspace():
    A = S.HalfSpace.along_axis(0, 0.0, 2)
    for z in (-1.0, 0.0, 2.5):
        assert geom.section_boundary(A, 1, z) == pytest.approx(1 / math.sqrt(2 * math.pi))
    assert geom.averaged_section_boundary(A, 1) == pytest.approx(1 / math.sqrt(2 * math.pi), rel=1e-9)
    assert geom.averaged_section_boundary(A, 0) == 0.0
    r = geom.section_boundary_check(A)
    assert r.passed and r.extra["coordinate"] == 1 and r.extra["halfspace_sections"]
    assert r.rhs == pytest.approx(r.extra["profile"])


def test_section_of_box():
    B = S.Box([-1.0, -0.5], [1.0, 2.0])
    # section along e_0 at |z| <= 1 is [-0.5, 2] in the other coordinate
    expected = (stats.norm.cdf(1) - stats.norm.cdf(-1)) * (stats.norm.pdf(-0.5) + stats.norm.pdf(2.0))
    assert geom.averaged_section_boundary(B, 0) == pytest.approx(expected, rel=1e-8)
    assert geom.section_boundary_check(B).passed


def test_section_degenerate():
    with pytest.raises(ValueError):
        geom.section_boundary_check(S.Box([1.0, 0.0], [0.0, 1.0]))
    with pytest.raises(ValueError):
        geom.section_boundary_check(S.Ball([0.0, 0.0], 1.0))
