"""Kinematic-tree data model: joints, links, collision geometry and state."""
from __future__ import annotations

import copy
import enum
import math
from dataclasses import dataclass, field
from typing import Callable

from hybridsim.scalar import ops
from hybridsim.spatial import (
    IDENTITY3,
    ZERO3,
    SpatialInertia,
    SpatialMotion,
    SpatialTransform,
    axis_angle_matrix,
    quat_matrix,
    scale3,
    transpose,
)


class ModelError(ValueError):
    pass


class JointType(str, enum.Enum):
    REVOLUTE = "revolute"
    PRISMATIC = "prismatic"
    FIXED = "fixed"
    FLOATING = "floating"


_NQ = {JointType.REVOLUTE: 1, JointType.PRISMATIC: 1, JointType.FIXED: 0, JointType.FLOATING: 7}
_NV = {JointType.REVOLUTE: 1, JointType.PRISMATIC: 1, JointType.FIXED: 0, JointType.FLOATING: 6}

_UNIT_COLUMNS = tuple(
    SpatialMotion(tuple(1.0 if k == i else 0.0 for k in range(3)), ZERO3) for i in range(3)
) + tuple(SpatialMotion(ZERO3, tuple(1.0 if k == i else 0.0 for k in range(3))) for i in range(3))


@dataclass
class Joint:
    """Joint between link ``i`` and its parent link ``parent`` (``-1`` is the world).

    ``X_tree`` maps parent-link coordinates to the joint frame at ``q = 0``.
    Floating joints keep position ``(x, y, z)`` and an ``(x, y, z, w)``
    quaternion in ``q`` and the body-frame twist ``(ω, v)`` in ``qd``.
    """

    kind: JointType
    parent: int = -1
    X_tree: SpatialTransform = field(default_factory=SpatialTransform)
    axis: tuple = (0.0, 0.0, 1.0)
    stiffness: object = 0.0
    damping: object = 0.0
    name: str = ""

    def __post_init__(self):
        self.kind = JointType(self.kind)
        if self.kind in (JointType.REVOLUTE, JointType.PRISMATIC):
            n = math.sqrt(sum(ops.value(a) ** 2 for a in self.axis))
            if n == 0:
                raise ModelError(f"joint {self.name!r} has a zero axis")
            self.axis = tuple(float(a) / n for a in self.axis)

    @property
    def nq(self) -> int:
        return _NQ[self.kind]

    @property
    def nv(self) -> int:
        return _NV[self.kind]

    def motion_subspace(self) -> tuple[SpatialMotion, ...]:
        """Columns of ``S`` in joint coordinates."""
        if self.kind is JointType.REVOLUTE:
            return (SpatialMotion(self.axis, ZERO3),)
        if self.kind is JointType.PRISMATIC:
            return (SpatialMotion(ZERO3, self.axis),)
        if self.kind is JointType.FLOATING:
            return _UNIT_COLUMNS
        return ()

    def joint_transform(self, q) -> SpatialTransform:
        """``X_J(q)`` from the joint frame to the child-link frame."""
        kind = self.kind
        if kind is JointType.REVOLUTE:
            return SpatialTransform(transpose(axis_angle_matrix(self.axis, q[0])), ZERO3)
        if kind is JointType.PRISMATIC:
            return SpatialTransform(IDENTITY3, scale3(q[0], self.axis))
        if kind is JointType.FLOATING:
            return SpatialTransform(transpose(quat_matrix(q[3], q[4], q[5], q[6])), (q[0], q[1], q[2]))
        return SpatialTransform()


# ``contact`` selects the contact model for pairs involving the geometry:
# "ncp" (impulse level, projected Gauss-Seidel) or "penalty" (force level).
# A pair uses the penalty model if either side asks for it.


@dataclass
class Sphere:
    radius: object
    center: tuple = ZERO3
    contact: str = "ncp"
    name: str = ""


@dataclass
class Plane:
    """Half-space boundary ``n·x = offset`` in the owner's frame; solid side below."""

    normal: tuple = (0.0, 0.0, 1.0)
    offset: object = 0.0
    contact: str = "ncp"
    name: str = "ground"


@dataclass
class PointGrid:
    points: list
    spacing: float | None = None
    contact: str = "ncp"
    name: str = ""

    @classmethod
    def rectangle(cls, size_x: float, size_y: float, spacing: float, z: float = 0.0, **kwargs) -> "PointGrid":
        """Uniform grid covering ``[-sx/2, sx/2] × [-sy/2, sy/2]`` at height ``z``."""
        nx = int(round(size_x / spacing)) + 1
        ny = int(round(size_y / spacing)) + 1
        pts = [
            (-size_x / 2 + i * spacing, -size_y / 2 + j * spacing, z)
            for i in range(nx)
            for j in range(ny)
        ]
        return cls(pts, spacing, **kwargs)


@dataclass
class KinematicSphere:
    """World-owned sphere following a prescribed path ``t -> (position, velocity)``."""

    radius: float
    path: Callable[[float], tuple[tuple, tuple]]
    contact: str = "ncp"
    name: str = "pusher"


@dataclass
class Link:
    inertia: SpatialInertia
    geometry: list = field(default_factory=list)
    name: str = ""


@dataclass
class JointState:
    q: list
    qd: list
    time: float = 0.0

    def copy(self) -> "JointState":
        return JointState(list(self.q), list(self.qd), self.time)

    def values(self) -> tuple[list[float], list[float]]:
        return [ops.value(x) for x in self.q], [ops.value(x) for x in self.qd]


class MultiBody:
    """Links and joints in tree order; joint ``i`` attaches link ``i`` to its parent."""

    def __init__(self, links, joints, gravity=(0.0, 0.0, -9.81), world_geometry=None, name=""):
        if len(links) != len(joints):
            raise ModelError("links and joints must have the same length")
        self.links: list[Link] = list(links)
        self.joints: list[Joint] = list(joints)
        self.gravity = tuple(gravity)
        self.world_geometry: list = list(world_geometry or [])
        self.name = name
        self._index()

    def _index(self):
        self.q_index: list[int] = []
        self.v_index: list[int] = []
        nq = nv = 0
        for i, j in enumerate(self.joints):
            if not -1 <= j.parent < i:
                raise ModelError(f"joint {i} ({j.name!r}) has parent {j.parent}; parents must precede children")
            if j.kind is JointType.FLOATING and j.parent != -1:
                raise ModelError(f"floating joint {j.name!r} must attach to the world")
            self.q_index.append(nq)
            self.v_index.append(nv)
            nq += j.nq
            nv += j.nv
        self.nq = nq
        self.nv = nv
        self.children = [[] for _ in self.joints]
        for i, j in enumerate(self.joints):
            if j.parent >= 0:
                self.children[j.parent].append(i)

    @property
    def dof_count(self) -> int:
        return self.nv

    def __len__(self) -> int:
        return len(self.links)

    def copy(self) -> "MultiBody":
        """Shallow-structured copy whose links and joints may be edited independently."""
        out = copy.copy(self)
        out.links = [copy.copy(link) for link in self.links]
        out.joints = [copy.copy(j) for j in self.joints]
        return out

    def link_index(self, name: str) -> int:
        for i, link in enumerate(self.links):
            if link.name == name:
                return i
        raise KeyError(name)

    def joint_q(self, state_q, i: int):
        k = self.q_index[i]
        return state_q[k:k + self.joints[i].nq]

    def joint_qd(self, state_qd, i: int):
        k = self.v_index[i]
        return state_qd[k:k + self.joints[i].nv]

    def zero_state(self) -> JointState:
        q = []
        for j in self.joints:
            q.extend([0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0] if j.kind is JointType.FLOATING else [0.0] * j.nq)
        return JointState(q, [0.0] * self.nv)

    def passive_forces(self, q, qd) -> list:
        """``-k q - d qd`` for every 1-DoF joint; zero for floating coordinates."""
        out = [0.0] * self.nv
        for i, j in enumerate(self.joints):
            if j.nv == 1:
                qi = q[self.q_index[i]]
                vi = qd[self.v_index[i]]
                out[self.v_index[i]] = -(j.stiffness * qi) - j.damping * vi
        return out
