import math

import numpy as np
import pytest

from zermelo.hypersurfaces import (
    UnsupportedHypothesis,
    catalog,
    cylinder,
    hyperplane,
    hypersphere,
    induced_metric,
    principal_curvatures,
    shape_operator,
    unit_normals,
    verify_shift,
)
from zermelo.randers import randers_from
from zermelo.riemannian import SpaceForm, affine_field, custom_field, sphere_rotation_field

Q3 = np.array([[0.0, 0.2, -0.1], [-0.2, 0.0, 0.15], [0.1, -0.15, 0.0]])


def test_normals_without_wind(rng):
    m = randers_from(SpaceForm(3), affine_field(3))
    M = hypersphere(3, 0.7)
    u = M.sample(rng, 1)[0]
    p = unit_normals(M, m, u)
    np.testing.assert_allclose(p.n_F, p.n_h, atol=1e-15)
    np.testing.assert_allclose(p.n_h, M(u) / 0.7, atol=1e-14)


def test_hyperplane_normal_with_constant_wind(half_wind):
    p = unit_normals(hyperplane(2), half_wind, [0.3])
    np.testing.assert_allclose(p.n_h, [1.0, 0.0], atol=1e-15)
    np.testing.assert_allclose(p.n_F, [1.5, 0.0], atol=1e-15)
    assert abs(half_wind.F([0.0, 0.3], p.n_F) - 1.0) < 1e-14


def test_orientation_flip_gives_other_normal(funk_disk, rng):
    M = hypersphere(2, 1.0)
    u = M.sample(rng, 1)[0]
    plus, minus = unit_normals(M, funk_disk, u, 1), unit_normals(M, funk_disk, u, -1)
    W = funk_disk.nav.W(M(u))
    np.testing.assert_allclose(plus.n_F, plus.n_h + W, atol=1e-14)
    np.testing.assert_allclose(minus.n_F, -plus.n_h + W, atol=1e-14)
    assert not np.allclose(minus.n_F, -plus.n_F)


def test_induced_metric_factors(half_wind, rng):
    flat = randers_from(SpaceForm(2), affine_field(2))
    assert abs(induced_metric(hyperplane(2), flat, [0.1]).factor - 1.0) < 1e-15
    assert abs(induced_metric(hyperplane(2), half_wind, [0.1]).factor - 2 / 3) < 1e-14
    # wind tangent to the surface: factor 1
    along = randers_from(SpaceForm(2), affine_field(2, e=[0.0, 0.4]))
    assert abs(induced_metric(hyperplane(2), along, [0.2]).factor - 1.0) < 1e-14


def test_shape_operator_examples(rng):
    m = randers_from(SpaceForm(3), affine_field(3, e=[0.3, -0.2, 0.1]))
    M = hyperplane(3, offset=0.1)
    assert np.max(np.abs(shape_operator(M, m, [0.2, -0.3]).A)) < 1e-13
    flat = randers_from(SpaceForm(3), affine_field(3))
    S = hypersphere(3, 0.5)
    A = shape_operator(S, flat, S.sample(rng, 1)[0]).A
    np.testing.assert_allclose(A, -2.0 * np.eye(2), atol=1e-12)


def test_circle_shift_example(funk_disk):
    M = hypersphere(2, 1.0)
    rep = verify_shift(M, funk_disk, [0.7])
    assert abs(rep.principal_h[0] + 1.0) < 1e-12
    assert abs(rep.principal_F[0] + 0.75) < 1e-10
    assert abs(rep.k0 - 0.25) < 1e-12


@pytest.mark.parametrize(
    "wind", [dict(e=[0.2, 0.1, -0.1]), dict(k0=0.25), dict(Q=Q3, e=[0.1, 0.0, 0.0]), dict(k0=0.1, Q=Q3)]
)
@pytest.mark.parametrize("M", [hyperplane(3, 0.1), hypersphere(3, 0.5), hypersphere(3, 1.0), cylinder(3, 1, 0.6)])
def test_shift_on_flat_catalog(M, wind, rng):
    m = randers_from(SpaceForm(3), affine_field(3, **wind))
    for u in M.sample(rng, 2):
        rep = verify_shift(M, m, u)
        assert rep.shift_residual < 1e-8
        assert rep.principal_angle < 1e-6
        assert rep.normal_derivative_residual < 1e-8


def test_catalog_curvatures(rng):
    flat = randers_from(SpaceForm(3), affine_field(3))
    rep = verify_shift(catalog("hypersphere", SpaceForm(3), r=1.0), flat, [0.4, 1.1])
    np.testing.assert_allclose(rep.principal_h, [-1.0, -1.0], atol=1e-12)
    assert rep.multiplicities == (2,)
    rep = verify_shift(catalog("cylinder", SpaceForm(3), m=1, r=0.5), flat, [0.4, 0.2])
    np.testing.assert_allclose(sorted(rep.principal_h), [-2.0, 0.0], atol=1e-12)
    assert rep.distinct == 2


@pytest.mark.parametrize("chart", ["stereographic", "beltrami"])
def test_clifford_torus(chart, rng):
    sp = SpaceForm(3, 1.0, chart)
    M = catalog("clifford_torus", sp, m=1, r=1 / math.sqrt(2))
    Q = np.zeros((4, 4))
    Q[0, 1], Q[1, 0], Q[2, 3], Q[3, 2] = 0.3, -0.3, 0.2, -0.2
    m = randers_from(sp, sphere_rotation_field(sp, Q))
    for u in M.sample(rng, 2):
        rep = verify_shift(M, m, u)
        np.testing.assert_allclose(sorted(rep.principal_h), [-1.0, 1.0], atol=1e-10)
        assert rep.multiplicities == (1, 1)
        assert rep.shift_residual < 1e-8


def test_principal_curvatures_are_generalized_eigenvalues(funk_disk, rng):
    M = hypersphere(2, 0.8)
    op = shape_operator(M, funk_disk, [1.3])
    eig = principal_curvatures(op)
    np.testing.assert_allclose(eig.values, np.linalg.eigvals(op.A).real, atol=1e-12)


def test_non_isotropic_wind_is_rejected():
    m = randers_from(SpaceForm(2), custom_field(2, lambda z: np.array([0.5 * z[0] ** 2, 0.0 * z[1]])))
    with pytest.raises(UnsupportedHypothesis):
        verify_shift(hyperplane(2, 0.2), m, [0.1])


def test_catalog_validation():
    with pytest.raises(ValueError):
        catalog("torus", SpaceForm(3))
    with pytest.raises(ValueError):
        catalog("clifford_torus", SpaceForm(3), m=1, r=0.5)
    with pytest.raises(ValueError):
        hypersphere(3, -1.0)
