"""Model factories and energy helpers shared by the test modules."""
import numpy as np

from hybridsim.multibody import (
    Joint,
    JointState,
    JointType,
    Link,
    MultiBody,
    forward_kinematics,
)
from hybridsim.scalar import ops
from hybridsim.spatial import SpatialInertia, SpatialTransform, axis_angle_matrix


def random_rotation(rng):
    axis = rng.normal(size=3)
    return axis_angle_matrix(tuple(axis / np.linalg.norm(axis)), float(rng.uniform(-np.pi, np.pi)))


def random_chain(rng, n_links, tree=False, prismatic=True):
    """Chain (or tree) of 1-DoF joints with random axes, offsets and inertias."""
    links, joints = [], []
    for i in range(n_links):
        parent = -1 if i == 0 else (int(rng.integers(-1, i)) if tree else i - 1)
        kind = JointType.PRISMATIC if prismatic and rng.uniform() < 0.25 else JointType.REVOLUTE
        X = SpatialTransform(random_rotation(rng), tuple(rng.uniform(-0.5, 0.5, 3)))
        joints.append(Joint(kind, parent, X, tuple(rng.normal(size=3)), name=f"j{i}"))
        a, b, c = rng.uniform(0.05, 0.5, 3)
        m = float(rng.uniform(0.1, 10.0))
        d = np.diag([b * b + c * c, a * a + c * c, a * a + b * b]) * m / 12
        R = np.array(random_rotation(rng))
        links.append(Link(SpatialInertia(m, tuple(rng.uniform(-0.3, 0.3, 3)), R @ d @ R.T)))
    return MultiBody(links, joints)


def random_state(rng, model):
    return JointState(list(rng.uniform(-np.pi, np.pi, model.nq)), list(rng.uniform(-2, 2, model.nv)))


def total_energy(model, state):
    """Kinetic plus gravitational potential energy."""
    kin = forward_kinematics(model, state.q, state.qd)
    g = model.gravity
    e = 0.0
    for i, link in enumerate(model.links):
        I = link.inertia
        e = e + I.kinetic_energy(kin.v[i])
        c = kin.X0[i].point_to_parent(I.com)
        e = e - I.mass * (g[0] * c[0] + g[1] * c[1] + g[2] * c[2])
    return ops.value(e)
