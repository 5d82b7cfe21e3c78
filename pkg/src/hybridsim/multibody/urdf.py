"""Subset URDF import: links, joints, inertials, origins, axes and joint damping."""
from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass, field

from hybridsim.spatial import IDENTITY3, SpatialInertia, SpatialTransform, congruence_sym, rpy_matrix, transpose
from hybridsim.multibody.model import Joint, JointType, Link, MultiBody

_JOINT_KINDS = {
    "revolute": JointType.REVOLUTE,
    "continuous": JointType.REVOLUTE,
    "prismatic": JointType.PRISMATIC,
    "fixed": JointType.FIXED,
    "floating": JointType.FLOATING,
}
_SKIPPED = {"visual", "collision", "material", "transmission", "gazebo", "limit", "mimic",
            "calibration", "safety_controller"}


class URDFParseError(ValueError):
    pass


class UnsupportedStructureError(ValueError):
    pass


@dataclass
class URDFResult:
    model: MultiBody
    warnings: list = field(default_factory=list)


def _floats(text, default, n=3):
    if text is None:
        return default
    parts = text.split()
    if len(parts) != n:
        raise URDFParseError(f"expected {n} numbers, got {text!r}")
    return tuple(float(x) for x in parts)


def _origin(el):
    o = el.find("origin") if el is not None else None
    if o is None:
        return IDENTITY3, (0.0, 0.0, 0.0)
    xyz = _floats(o.get("xyz"), (0.0, 0.0, 0.0))
    rpy = _floats(o.get("rpy"), (0.0, 0.0, 0.0))
    R = IDENTITY3 if rpy == (0.0, 0.0, 0.0) else rpy_matrix(*rpy)
    return R, xyz


def _inertia(link_el) -> SpatialInertia:
    inertial = link_el.find("inertial")
    if inertial is None:
        return SpatialInertia(0.0, (0.0, 0.0, 0.0), ((0.0,) * 3,) * 3)
    R, com = _origin(inertial)
    m_el = inertial.find("mass")
    mass = float(m_el.get("value", 0.0)) if m_el is not None else 0.0
    i_el = inertial.find("inertia")
    g = (lambda k: float(i_el.get(k, 0.0))) if i_el is not None else (lambda k: 0.0)
    I = ((g("ixx"), g("ixy"), g("ixz")), (g("ixy"), g("iyy"), g("iyz")), (g("ixz"), g("iyz"), g("izz")))
    if R is not IDENTITY3:
        I = congruence_sym(transpose(R), I)  # R I R^T
    return SpatialInertia(mass, com, I)


def load_urdf(text: str) -> URDFResult:
    """Parse URDF text into a :class:`MultiBody` in depth-first tree order.

    The root link is welded to the world. A floating joint whose parent is the
    root link attaches its child directly to the world.
    """
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        raise URDFParseError(f"malformed XML: {exc}") from exc
    if root.tag != "robot":
        raise URDFParseError(f"root element is <{root.tag}>, expected <robot>")
    warnings: list[str] = []

    links: dict[str, ET.Element] = {}
    for el in root.findall("link"):
        name = el.get("name")
        if not name:
            raise URDFParseError("link without a name")
        if name in links:
            raise URDFParseError(f"duplicate link {name!r}")
        links[name] = el
        for child in el:
            if child.tag in _SKIPPED:
                warnings.append(f"link {name}: ignored <{child.tag}>")
    if not links:
        raise URDFParseError("document has no links")

    joints: dict[str, ET.Element] = {}
    parent_of: dict[str, str] = {}
    children: dict[str, list] = {n: [] for n in links}
    for el in root.findall("joint"):
        name = el.get("name", "")
        kind = el.get("type")
        p_el, c_el = el.find("parent"), el.find("child")
        if p_el is None or c_el is None:
            raise URDFParseError(f"joint {name!r} lacks parent or child")
        parent, child = p_el.get("link"), c_el.get("link")
        for ref in (parent, child):
            if ref not in links:
                raise URDFParseError(f"joint {name!r} references unknown link {ref!r}")
        if kind not in _JOINT_KINDS:
            raise UnsupportedStructureError(f"joint {name!r} has unsupported type {kind!r}")
        if child in parent_of:
            raise UnsupportedStructureError(f"link {child!r} has two parent joints (kinematic loop)")
        parent_of[child] = parent
        joints[child] = el
        children[parent].append(child)
        for sub in el:
            if sub.tag in _SKIPPED:
                warnings.append(f"joint {name}: ignored <{sub.tag}>")
    for tag in {c.tag for c in root} - {"link", "joint"}:
        warnings.append(f"ignored top-level <{tag}>")

    roots = [n for n in links if n not in parent_of]
    if len(roots) != 1:
        raise UnsupportedStructureError(f"expected one root link, found {roots or 'none (kinematic loop)'}")
    order: list[str] = []
    stack = [roots[0]]
    while stack:
        n = stack.pop()
        order.append(n)
        stack.extend(reversed(children[n]))
    if len(order) != len(links):
        missing = sorted(set(links) - set(order))
        raise UnsupportedStructureError(f"links {missing} are not reachable from {roots[0]!r} (kinematic loop)")

    index = {n: i for i, n in enumerate(order)}
    model_links, model_joints = [], []
    for n in order:
        model_links.append(Link(_inertia(links[n]), [], name=n))
        if n == roots[0]:
            model_joints.append(Joint(JointType.FIXED, -1, SpatialTransform(), name=f"{n}_weld"))
            continue
        el = joints[n]
        kind = _JOINT_KINDS[el.get("type")]
        R, p = _origin(el)
        axis = _floats(el.find("axis").get("xyz") if el.find("axis") is not None else None, (1.0, 0.0, 0.0))
        dyn = el.find("dynamics")
        damping = float(dyn.get("damping", 0.0)) if dyn is not None else 0.0
        parent = index[parent_of[n]]
        if kind is JointType.FLOATING:
            if parent != 0:
                raise UnsupportedStructureError(f"floating joint {el.get('name')!r} must hang off the root link")
            parent = -1
        model_joints.append(
            Joint(kind, parent, SpatialTransform.from_pose(R, p), axis=axis, damping=damping, name=el.get("name", ""))
        )
    name = root.get("name", "")
    return URDFResult(MultiBody(model_links, model_joints, name=name), warnings)


def load_urdf_file(path) -> URDFResult:
    with open(path) as fh:
        return load_urdf(fh.read())


def pendulum_urdf(lengths, masses=None, damping=None, name="pendulum") -> str:
    """URDF text for a planar point-mass chain matching ``pendulum_chain``."""
    n = len(lengths)
    masses = [1.0] * n if masses is None else masses
    damping = [0.0] * n if damping is None else damping
    out = [f'<robot name="{name}">', '  <link name="base"/>']
    parent = "base"
    for i in range(n):
        offset = 0.0 if i == 0 else -float(lengths[i - 1])
        out += [
            f'  <joint name="joint{i}" type="revolute">',
            f'    <parent link="{parent}"/>',
            f'    <child link="link{i}"/>',
            f'    <origin xyz="0 0 {offset!r}" rpy="0 0 0"/>',
            '    <axis xyz="0 1 0"/>',
            f'    <dynamics damping="{float(damping[i])!r}"/>',
            "  </joint>",
            f'  <link name="link{i}">',
            "    <inertial>",
            f'      <origin xyz="0 0 {-float(lengths[i])!r}"/>',
            f'      <mass value="{float(masses[i])!r}"/>',
            '      <inertia ixx="0" ixy="0" ixz="0" iyy="0" iyz="0" izz="0"/>',
            "    </inertial>",
            "  </link>",
        ]
        parent = f"link{i}"
    out.append("</robot>")
    return "\n".join(out) + "\n"
