import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hybridsim.spatial import (
    SpatialForce,
    SpatialInertia,
    SpatialMotion,
    SpatialTransform,
    axis_angle_matrix,
    cross_force,
    cross_motion,
    transform_inertia,
    transform_motion,
)

RNG = np.random.default_rng(7)


def rand_rotation(rng):
    axis = rng.normal(size=3)
    return axis_angle_matrix(tuple(axis / np.linalg.norm(axis)), float(rng.uniform(-np.pi, np.pi)))


def rand_transform(rng):
    return SpatialTransform(rand_rotation(rng), tuple(rng.normal(size=3)))


def rand_motion(rng):
    return SpatialMotion(tuple(rng.normal(size=3)), tuple(rng.normal(size=3)))


def rand_force(rng):
    return SpatialForce(tuple(rng.normal(size=3)), tuple(rng.normal(size=3)))


def rand_inertia(rng):
    # principal moments from a random box satisfy the triangle inequality
    a, b, c = rng.uniform(0.1, 1.0, 3)
    m = rng.uniform(0.1, 5.0)
    d = np.diag([b * b + c * c, a * a + c * c, a * a + b * b]) * m / 12
    R = np.array(rand_rotation(rng))
    return SpatialInertia(m, tuple(rng.normal(size=3)), R @ d @ R.T)


def arr(x):
    return x.to_array()


def test_identity_transform_leaves_motion():
    v = rand_motion(RNG)
    assert np.allclose(arr(transform_motion(SpatialTransform.identity(), v)), arr(v), atol=0)


def _homogeneous_oracle(X: SpatialTransform, v: SpatialMotion) -> np.ndarray:
    """Transform a twist by conjugating its 4x4 matrix form."""
    w, u = np.array(v.ang), np.array(v.lin)
    xi = np.zeros((4, 4))
    xi[:3, :3] = np.array([[0, -w[2], w[1]], [w[2], 0, -w[0]], [-w[1], w[0], 0]])
    xi[:3, 3] = u
    T = X.homogeneous()  # B coordinates to A coordinates
    xb = np.linalg.inv(T) @ xi @ T
    wb = np.array([xb[2, 1], xb[0, 2], xb[1, 0]])
    return np.concatenate([wb, xb[:3, 3]])


def test_pure_translation_matches_homogeneous_oracle():
    X = SpatialTransform(r=(0.0, 0.0, 1.0))
    v = SpatialMotion((0.0, 0.0, 1.0), (0.0, 0.0, 0.0))
    out = arr(transform_motion(X, v))
    assert np.allclose(out, _homogeneous_oracle(X, v), atol=1e-12)


def test_random_transforms_match_homogeneous_oracle():
    rng = np.random.default_rng(3)
    for _ in range(50):
        X, v = rand_transform(rng), rand_motion(rng)
        assert np.allclose(arr(X.apply_motion(v)), _homogeneous_oracle(X, v), atol=1e-10)


def test_inverse_round_trip():
    rng = np.random.default_rng(4)
    for _ in range(20):
        X, v, f = rand_transform(rng), rand_motion(rng), rand_force(rng)
        assert np.allclose(arr(X.inverse().apply_motion(X.apply_motion(v))), arr(v), atol=1e-12)
        assert np.allclose(arr(X.inv_apply_motion(X.apply_motion(v))), arr(v), atol=1e-12)
        assert np.allclose(arr(X.inv_apply_force(X.inverse().inv_apply_force(f))), arr(f), atol=1e-12)


def test_rotation_is_orthonormal():
    rng = np.random.default_rng(5)
    for _ in range(20):
        E = np.array(rand_transform(rng).rotation)
        assert np.allclose(E.T @ E, np.eye(3), atol=1e-9)
        assert np.linalg.det(E) == pytest.approx(1.0, abs=1e-9)


def test_six_by_six_matches_apply():
    rng = np.random.default_rng(6)
    X, v = rand_transform(rng), rand_motion(rng)
    assert np.allclose(X.to_matrix() @ arr(v), arr(X.apply_motion(v)), atol=1e-12)


def test_composition_is_associative():
    rng = np.random.default_rng(8)
    for _ in range(30):
        a, b, c = rand_transform(rng), rand_transform(rng), rand_transform(rng)
        left, right = (a * b) * c, a * (b * c)
        assert np.allclose(left.to_matrix(), right.to_matrix(), atol=1e-12)
        # composition applies the right-hand operand first
        v = rand_motion(rng)
        assert np.allclose(arr((a * b).apply_motion(v)), arr(a.apply_motion(b.apply_motion(v))), atol=1e-12)


# -------------------------------------------------------------- inertia

def test_identity_transform_leaves_inertia():
    I = rand_inertia(RNG)
    J = transform_inertia(SpatialTransform.identity(), I)
    assert np.allclose(J.to_matrix(), I.to_matrix(), atol=1e-15)


def test_parallel_axis_point_mass():
    I = SpatialInertia.point_mass(1.0)
    # frame B sits 1 m behind, so the mass lies 1 m along B's x axis
    J = transform_inertia(SpatialTransform(r=(-1.0, 0.0, 0.0)), I)
    rot = J.to_matrix()[:3, :3]
    assert np.allclose(rot, np.diag([0.0, 1.0, 1.0]), atol=1e-15)


def test_kinetic_energy_invariant():
    rng = np.random.default_rng(9)
    for _ in range(50):
        X, I, v = rand_transform(rng), rand_inertia(rng), rand_motion(rng)
        ea = I.kinetic_energy(v)
        eb = transform_inertia(X, I).kinetic_energy(X.apply_motion(v))
        assert eb == pytest.approx(ea, rel=1e-9, abs=1e-12)


def test_inertia_matrix_matches_apply_and_is_psd():
    rng = np.random.default_rng(10)
    for _ in range(20):
        I, v = rand_inertia(rng), rand_motion(rng)
        M = I.to_matrix()
        assert np.allclose(M, M.T, atol=1e-12)
        assert np.linalg.eigvalsh(M).min() > -1e-12
        assert np.allclose(M @ arr(v), arr(I.apply(v)), atol=1e-12)


@given(st.lists(st.floats(-10, 10), min_size=12, max_size=12), st.floats(-5, 5))
@settings(max_examples=50)
def test_inertia_apply_is_linear(xs, s):
    I = rand_inertia(np.random.default_rng(11))
    v, w = SpatialMotion(tuple(xs[:3]), tuple(xs[3:6])), SpatialMotion(tuple(xs[6:9]), tuple(xs[9:]))
    lhs = arr(I.apply(v + w.scaled(s)))
    rhs = arr(I.apply(v)) + s * arr(I.apply(w))
    assert np.all(np.isfinite(lhs))
    assert np.allclose(lhs, rhs, atol=1e-9 * (1 + np.abs(rhs).max()))


# -------------------------------------------------------- cross products

def test_cross_motion_self_annihilates():
    v = rand_motion(RNG)
    assert np.allclose(arr(cross_motion(v, v)), 0.0, atol=1e-14)


def test_cross_motion_pure_angular():
    out = cross_motion(SpatialMotion((0, 0, 1.0)), SpatialMotion((1.0, 0, 0)))
    assert np.allclose(arr(out), [0, 1, 0, 0, 0, 0])


def test_cross_duality():
    rng = np.random.default_rng(12)
    for _ in range(50):
        v, w, f = rand_motion(rng), rand_motion(rng), rand_force(rng)
        lhs = cross_motion(v, w).dot(f)
        rhs = -w.dot(cross_force(v, f))
        assert lhs == pytest.approx(rhs, abs=1e-10)


def test_cross_matches_six_by_six_operator():
    rng = np.random.default_rng(13)
    v, w = rand_motion(rng), rand_motion(rng)
    a, b = np.array(v.ang), np.array(v.lin)
    sk = lambda x: np.array([[0, -x[2], x[1]], [x[2], 0, -x[0]], [-x[1], x[0], 0]])  # noqa: E731
    crm = np.block([[sk(a), np.zeros((3, 3))], [sk(b), sk(a)]])
    assert np.allclose(crm @ arr(w), arr(cross_motion(v, w)), atol=1e-12)
    f = rand_force(rng)
    assert np.allclose(-crm.T @ arr(f), arr(cross_force(v, f)), atol=1e-12)
