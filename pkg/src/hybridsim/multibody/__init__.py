"""Articulated multibody model, dynamics algorithms, integration and URDF import."""
from hybridsim.multibody.dynamics import (
    DynamicsError,
    Kinematics,
    forward_dynamics_aba,
    forward_kinematics,
    inverse_dynamics,
    ldl_factor,
    ldl_solve,
    mass_matrix,
    solve_spd,
)
from hybridsim.multibody.integrate import integrate_semi_implicit
from hybridsim.multibody.model import (
    Joint,
    JointState,
    JointType,
    KinematicSphere,
    Link,
    ModelError,
    MultiBody,
    Plane,
    PointGrid,
    Sphere,
)

__all__ = [
    "DynamicsError", "Joint", "JointState", "JointType", "KinematicSphere", "Kinematics",
    "Link", "ModelError", "MultiBody", "Plane", "PointGrid", "Sphere",
    "forward_dynamics_aba", "forward_kinematics", "integrate_semi_implicit",
    "inverse_dynamics", "ldl_factor", "ldl_solve", "mass_matrix", "solve_spd",
]
