import numpy as np
import pytest
from hypothesis import assume, given

from conftest import unit_vectors, vectors
from sphereflock import geometry as g
from sphereflock.dynamics import CommWeight
from sphereflock.errors import AntipodalError, DomainError

E1, E2, E3 = np.eye(3)


def test_tangent_project_examples():
    np.testing.assert_array_equal(g.tangent_project(E3, [1.0, 2.0, 3.0]), [1.0, 2.0, 0.0])
    np.testing.assert_array_equal(g.tangent_project(E1, [5.0, 0.0, 0.0]), [0.0, 0.0, 0.0])


@given(unit_vectors, vectors)
def test_tangent_project_is_tangent(x, v):
    assert abs(np.dot(g.tangent_project(x, v), x)) < 1e-14


def test_tangent_project_rejects_off_sphere():
    with pytest.raises(DomainError):
        g.tangent_project([2.0, 0.0, 0.0], E2)


def test_rotation_same_point_is_identity():
    np.testing.assert_array_equal(g.rotation_matrix(E1, E1), np.eye(3))
    np.testing.assert_array_equal(g.rotation_matrix_rodrigues(E1, E1), np.eye(3))


def test_rotation_quarter_turn():
    expected = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    np.testing.assert_allclose(g.rotation_matrix(E1, E2), expected, atol=1e-15)
    np.testing.assert_allclose(g.rotation_matrix_rodrigues(E1, E2), expected, atol=1e-15)


def test_rotation_antipodal_raises():
    with pytest.raises(AntipodalError):
        g.rotation_matrix(E1, -E1)
    with pytest.raises(AntipodalError):
        g.rotate(E3, -E3, E1)


def test_rotate_examples():
    np.testing.assert_allclose(g.rotate(E1, E2, E1), E2, atol=1e-15)
    np.testing.assert_allclose(g.rotate(E1, E2, E2), [-1.0, 0.0, 0.0], atol=1e-15)
    np.testing.assert_allclose(g.rotate(E1, E2, E3), E3, atol=1e-15)


@given(unit_vectors, unit_vectors, vectors)
def test_rotation_identities(x1, x2, v):
    assume(np.linalg.norm(x1 + x2) > 1e-3)
    R = g.rotation_matrix(x1, x2)
    c = np.dot(x1, x2)
    axis = np.cross(x1, x2)
    np.testing.assert_allclose(R.T @ R, np.eye(3), atol=1e-12)
    np.testing.assert_allclose(R.T, g.rotation_matrix(x2, x1), atol=1e-12)
    np.testing.assert_allclose(R @ x1, x2, atol=1e-12)
    np.testing.assert_allclose(R @ x2, 2 * c * x2 - x1, atol=1e-12)
    np.testing.assert_allclose(R @ axis, axis, atol=1e-12)
    assert abs(np.linalg.norm(R @ v) - np.linalg.norm(v)) <= 1e-12 * max(1.0, np.linalg.norm(v))
    np.testing.assert_allclose(R, g.rotation_matrix_rodrigues(x1, x2), atol=1e-12)


def test_formula_equivalence_batch(rng):
    x1 = rng.normal(size=(1000, 3))
    x2 = rng.normal(size=(1000, 3))
    x1 /= np.linalg.norm(x1, axis=1, keepdims=True)
    x2 /= np.linalg.norm(x2, axis=1, keepdims=True)
    dev = np.abs(g.rotation_matrix(x1, x2) - g.rotation_matrix_rodrigues(x1, x2)).max()
    assert dev < 1e-12


@given(unit_vectors, unit_vectors, vectors)
def test_matrix_free_transport_matches_matrix(x_from, x_to, v):
    assume(np.linalg.norm(x_from + x_to) > 1e-3)
    expected = g.rotation_matrix(x_from, x_to) @ v
    np.testing.assert_allclose(g.transport(x_to, x_from, v), expected, atol=1e-11)


def test_transport_zero_at_antipodal():
    np.testing.assert_array_equal(g.transport(-E1, E1, E2), np.zeros(3))


def test_weighted_transport_examples():
    psi = CommWeight("quadratic")
    np.testing.assert_array_equal(g.weighted_transport(E1, -E1, E2, psi), np.zeros(3))
    np.testing.assert_allclose(g.weighted_transport(E1, E1, [0.0, 2.0, 3.0], psi), [0.0, 2.0, 3.0])


def test_weighted_transport_vanishes_continuously_at_antipodal():
    psi = CommWeight("quadratic")
    v = np.array([0.0, 0.3, 0.4])
    x1 = E1
    prev = np.inf
    for delta in np.logspace(-1, -7, 13):
        # x2 walks along the great circle through e1, e2 towards -x1
        ang = np.pi - delta
        x2 = np.array([np.cos(ang), np.sin(ang), 0.0])
        out = np.linalg.norm(g.weighted_transport(x1, x2, v, psi))
        s = np.linalg.norm(x1 + x2)
        assert out <= 0.5 * s ** 2 * np.linalg.norm(v) + 1e-15
        assert out <= prev
        prev = out


def test_weighted_transport_batches():
    psi = CommWeight("linear", kappa=1.0)
    x1 = np.array([E1, E2, E3])
    x2 = np.array([E2, E3, -E3])
    v = np.array([E3, E1, E1])
    out = g.weighted_transport(x1, x2, v, psi)
    for k in range(3):
        np.testing.assert_allclose(out[k], g.weighted_transport(x1[k], x2[k], v[k], psi))
    np.testing.assert_array_equal(out[2], np.zeros(3))


def test_bad_shape_rejected():
    with pytest.raises(DomainError):
        g.rotation_matrix([1.0, 0.0], [0.0, 1.0])
    with pytest.raises(DomainError):
        g.rotate(E1, E2, [np.nan, 0.0, 0.0])


def test_skew_is_cross_product(rng):
    u, v = rng.normal(size=(2, 3))
    np.testing.assert_allclose(g.skew(u) @ v, np.cross(u, v))


def test_near_coincident_rotation_close_to_identity():
    for d in (1e-3, 1e-6, 1e-9):
        x2 = np.array([np.cos(d), np.sin(d), 0.0])
        assert np.abs(g.rotation_matrix(E1, x2) - np.eye(3)).max() <= 2 * d
