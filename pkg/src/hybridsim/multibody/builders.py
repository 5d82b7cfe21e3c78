"""Ready-made models used by tests, experiments and the CLI."""
from __future__ import annotations

from hybridsim.spatial import IDENTITY3, SpatialInertia, SpatialTransform
from hybridsim.multibody.model import Joint, JointType, Link, MultiBody, Plane, PointGrid, Sphere


def pendulum_chain(
    lengths,
    masses=None,
    axis=(0.0, 1.0, 0.0),
    damping=None,
    stiffness=None,
    gravity=(0.0, 0.0, -9.81),
    bob_radius=None,
    ground_height=None,
    name="pendulum",
) -> MultiBody:
    """Serial chain of point-mass links hanging along ``-z`` at ``q = 0``.

    Link ``i`` pivots at the end of link ``i-1``; its mass sits ``lengths[i]``
    below its pivot. Entries may be any scalar realization. With
    ``bob_radius`` each mass carries a contact sphere and, if
    ``ground_height`` is given, a ground plane sits at that height.
    """
    n = len(lengths)
    masses = [1.0] * n if masses is None else list(masses)
    damping = [0.0] * n if damping is None else list(damping)
    stiffness = [0.0] * n if stiffness is None else list(stiffness)
    links, joints = [], []
    for i in range(n):
        offset = (0.0, 0.0, 0.0) if i == 0 else (0.0, 0.0, -lengths[i - 1])
        joints.append(
            Joint(
                JointType.REVOLUTE,
                parent=i - 1,
                X_tree=SpatialTransform(IDENTITY3, offset),
                axis=axis,
                damping=damping[i],
                stiffness=stiffness[i],
                name=f"joint{i}",
            )
        )
        com = (0.0, 0.0, -lengths[i])
        geometry = [Sphere(bob_radius, com)] if bob_radius else []
        links.append(Link(SpatialInertia.point_mass(masses[i], com), geometry, name=f"link{i}"))
    world = [Plane(offset=ground_height)] if bob_radius and ground_height is not None else []
    return MultiBody(links, joints, gravity=gravity, world_geometry=world, name=name)


def box_inertia(mass, size):
    sx, sy, sz = size
    k = mass / 12.0
    return ((k * (sy * sy + sz * sz), 0.0, 0.0), (0.0, k * (sx * sx + sz * sz), 0.0), (0.0, 0.0, k * (sx * sx + sy * sy)))


def floating_box(
    mass=1.0,
    size=(0.1, 0.1, 0.1),
    grid_spacing=None,
    sphere_radius=None,
    ground=True,
    name="box",
    contact="ncp",
) -> MultiBody:
    """Free-floating box with either a bottom point grid or a single sphere for contact."""
    geometry = []
    if grid_spacing is not None:
        geometry.append(PointGrid.rectangle(size[0], size[1], grid_spacing, z=-size[2] / 2, contact=contact, name=f"{name}_grid"))
    if sphere_radius is not None:
        geometry.append(Sphere(sphere_radius, contact=contact, name=f"{name}_sphere"))
    link = Link(SpatialInertia(mass, (0.0, 0.0, 0.0), box_inertia(mass, size)), geometry, name=name)
    joint = Joint(JointType.FLOATING, name=f"{name}_base")
    return MultiBody([link], [joint], world_geometry=[Plane()] if ground else [], name=name)
