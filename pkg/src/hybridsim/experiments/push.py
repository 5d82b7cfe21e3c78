"""Planar pushing analog: a box on a penalty-contact floor struck by a kinematic sphere."""
from __future__ import annotations

import math
from dataclasses import dataclass

from hybridsim.contact import ContactParams, PenaltyParams
from hybridsim.estimation.parameters import SimulationSetup
from hybridsim.multibody.builders import box_inertia
from hybridsim.multibody.model import Joint, JointState, JointType, KinematicSphere, Link, MultiBody, Plane, PointGrid
from hybridsim.spatial import SpatialInertia


@dataclass
class PushScene:
    """Box of ``size`` with a bottom contact grid and a ring of side points at mid-height.

    The pusher starts ``gap`` behind the box's ``-x`` face at lateral offset
    ``offset``, travels along ``+x`` at ``speed`` for ``duration`` seconds and
    then stops.
    """

    mass: float = 0.5
    size: tuple = (0.06, 0.06, 0.04)
    grid_spacing: float = 0.02
    pusher_radius: float = 0.01
    stiffness: float = 2000.0
    damping: float = 30.0
    smoothing_velocity: float = 0.01
    mu: float = 0.3

    def model(self, offset: float = 0.0, speed: float = 0.4, duration: float = 0.1, gap: float = 0.005) -> MultiBody:
        sx, sy, sz = self.size
        bottom = PointGrid.rectangle(sx, sy, self.grid_spacing, z=-sz / 2, contact="penalty", name="floor_grid")
        ring = []
        n = int(round(sy / self.grid_spacing))
        for j in range(n + 1):
            y = -sy / 2 + j * self.grid_spacing
            ring += [(-sx / 2, y, 0.0), (sx / 2, y, 0.0)]
        for i in range(1, int(round(sx / self.grid_spacing))):
            x = -sx / 2 + i * self.grid_spacing
            ring += [(x, -sy / 2, 0.0), (x, sy / 2, 0.0)]
        side = PointGrid(ring, self.grid_spacing, contact="ncp", name="side_ring")
        inertia = SpatialInertia(self.mass, (0.0, 0.0, 0.0), box_inertia(self.mass, self.size))
        link = Link(inertia, [bottom, side], name="object")
        start = -sx / 2 - self.pusher_radius - gap
        height = sz / 2

        def path(t):
            tt = min(t, duration)
            moving = t < duration
            return (start + speed * tt, offset, height), (speed if moving else 0.0, 0.0, 0.0)

        world = [Plane(contact="penalty", name="ground"), KinematicSphere(self.pusher_radius, path, contact="ncp", name="pusher")]
        return MultiBody([link], [Joint(JointType.FLOATING, name="object_base")], world_geometry=world, name="push")

    def initial_state(self, model: MultiBody) -> JointState:
        s = model.zero_state()
        n_points = len(model.links[0].geometry[0].points)
        # rest on the floor at the static penalty penetration
        s.q[2] = self.size[2] / 2 - self.mass * 9.81 / (n_points * self.stiffness)
        return s

    def setup(self, model: MultiBody, dt: float) -> SimulationSetup:
        return SimulationSetup(
            model, dt, ContactParams(mu=self.mu), PenaltyParams(self.stiffness, self.damping, self.smoothing_velocity, self.mu)
        )


def planar_pose(state: JointState) -> tuple[float, float, float]:
    """``(x, y, yaw)`` of the box."""
    x, y = state.q[0], state.q[1]
    qx, qy, qz, qw = state.q[3:7]
    yaw = math.atan2(2 * (qw * qz + qx * qy), 1 - 2 * (qy * qy + qz * qz))
    return float(x), float(y), yaw
