"""Contact generation and the two contact models.

* impulse level: a nonlinear complementarity problem solved by projected
  Gauss-Seidel sweeps, with Baumgarte position correction and constraint
  force mixing (CFM);
* force level: per-point Hunt-Crossley style spring-damper normal force with a
  tanh-smoothed Coulomb friction force.

Normals point from body ``a`` to body ``b``; body ``-1`` is the world.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from hybridsim.scalar import ops
from hybridsim.spatial import SpatialForce, add3, cross3, dot3, matTvec, scale3, sub3
from hybridsim.multibody.dynamics import Kinematics, forward_kinematics, ldl_factor, ldl_solve, mass_matrix
from hybridsim.multibody.model import KinematicSphere, MultiBody, Plane, PointGrid, Sphere


class UnsupportedPairError(TypeError):
    pass


class ContactSolverError(ArithmeticError):
    pass


@dataclass
class ContactParams:
    """Per-contact analytical parameters: friction, Baumgarte gains and CFM."""

    mu: object = 0.5
    alpha: object = 0.0
    beta: object = 0.2
    cfm: object = 0.0


@dataclass
class PenaltyParams:
    stiffness: object = 1e4
    damping: object = 1.0
    smoothing_velocity: object = 1e-2
    mu: object = None
    # optional friction field ``(x, y) -> mu`` evaluated at each contact point
    mu_field: object = None

    def __post_init__(self):
        if not ops.value(self.stiffness) > 0:
            raise ValueError("penalty stiffness must be positive")
        if not ops.value(self.smoothing_velocity) > 0:
            raise ValueError("friction smoothing velocity must be positive")


@dataclass
class ContactPoint:
    body_a: int
    body_b: int
    point: tuple
    normal: tuple
    penetration: object
    mu: object = 0.5
    alpha: object = 0.0
    beta: object = 0.2
    cfm: object = 0.0
    model: str = "ncp"
    source: str = ""
    velocity_a: tuple | None = None


@dataclass
class ContactImpulse:
    normal: object
    tangent: tuple = (0.0, 0.0)


@dataclass
class NcpSolution:
    impulses: list
    qd: list
    residuals: list = field(default_factory=list)


_PAIR_KINDS = {
    (Plane, Sphere),
    (Plane, PointGrid),
    (KinematicSphere, PointGrid),
    (Sphere, PointGrid),
}


def _pair_model(g1, g2) -> str:
    return "penalty" if "penalty" in (g1.contact, g2.contact) else "ncp"


def detect_contacts(
    model: MultiBody,
    state,
    params: ContactParams | None = None,
    margin: float = 1e-3,
    kin: Kinematics | None = None,
) -> list[ContactPoint]:
    """Candidate contacts between world geometry and link geometry."""
    params = params or ContactParams()
    if kin is None:
        kin = forward_kinematics(model, state.q, state.qd, world=True)
    out: list[ContactPoint] = []
    for gw in model.world_geometry:
        for i, link in enumerate(model.links):
            for gl in link.geometry:
                if (type(gw), type(gl)) not in _PAIR_KINDS:
                    raise UnsupportedPairError(f"no contact test for {type(gw).__name__}-{type(gl).__name__}")
                X0 = kin.X0[i]
                mode = _pair_model(gw, gl)
                for point, normal, overlap, va in _collide(gw, gl, X0, state.time):
                    if ops.value(overlap) > -margin:
                        out.append(
                            ContactPoint(
                                -1, i, point, normal, ops.smax0(overlap),
                                params.mu, params.alpha, params.beta, params.cfm,
                                model=mode, source=gw.name, velocity_a=va,
                            )
                        )
    return out


def _collide(gw, gl, X0, t):
    if isinstance(gw, Plane):
        n = gw.normal
        if isinstance(gl, Sphere):
            c = X0.point_to_parent(gl.center)
            overlap = gw.offset + gl.radius - dot3(n, c)
            yield sub3(c, scale3(gl.radius, n)), n, overlap, None
        else:
            for p_local in gl.points:
                p = X0.point_to_parent(p_local)
                yield p, n, gw.offset - dot3(n, p), None
        return
    # static or kinematic sphere against a link point grid
    if isinstance(gw, KinematicSphere):
        centre, vel = gw.path(t)
        vel = tuple(vel)
    else:
        centre, vel = gw.center, None
    for p_local in gl.points:
        p = X0.point_to_parent(p_local)
        d = sub3(p, centre)
        dist = ops.norm3(d)
        if ops.value(dist) < 1e-12:
            continue
        n = scale3(1.0 / dist, d)
        yield p, n, gw.radius - dist, vel


# ------------------------------------------------------------- kinematics

def relative_velocity(kin: Kinematics, c: ContactPoint):
    vb = kin.point_velocity(c.body_b, c.point) if c.body_b >= 0 else (0.0, 0.0, 0.0)
    if c.body_a >= 0:
        vb = sub3(vb, kin.point_velocity(c.body_a, c.point))
    elif c.velocity_a is not None:
        vb = sub3(vb, c.velocity_a)
    return vb


def tangent_basis(n):
    """Two unit vectors completing ``n``, seeded by its smallest component."""
    mags = [abs(ops.value(x)) for x in n]
    k = mags.index(min(mags))
    e = tuple(1.0 if j == k else 0.0 for j in range(3))
    t1 = cross3(n, e)
    t1 = scale3(1.0 / ops.norm3(t1), t1)
    return t1, cross3(n, t1)


def point_jacobian(model: MultiBody, kin: Kinematics, link: int, p, direction) -> list:
    """Row ``d·∂v_p/∂qd`` for the material point of ``link`` at world position ``p``."""
    row = [0.0] * model.nv
    j = link
    while j >= 0:
        X0 = kin.X0[j]
        rel = sub3(p, X0.r)
        k = model.v_index[j]
        for col, s in enumerate(kin.S[j]):
            w = matTvec(X0.E, s.ang)
            v = add3(matTvec(X0.E, s.lin), cross3(w, rel))
            row[k + col] = dot3(direction, v)
        j = model.joints[j].parent
    return row


def contact_jacobian(model, kin, c: ContactPoint, direction) -> list:
    row = point_jacobian(model, kin, c.body_b, c.point, direction) if c.body_b >= 0 else [0.0] * model.nv
    if c.body_a >= 0:
        ra = point_jacobian(model, kin, c.body_a, c.point, direction)
        row = [x - y for x, y in zip(row, ra)]
    return row


def _dot(a, b):
    s = 0.0
    for x, y in zip(a, b):
        s = s + x * y
    return s


# ---------------------------------------------------------- penalty model

def penalty_forces(contacts, kin: Kinematics, params: PenaltyParams) -> list[SpatialForce]:
    """World-frame spatial force on body ``b`` for each contact.

    Normal: ``max(0, k d (1 + c ḋ))`` with ``ḋ`` the penetration rate.
    Friction: ``-μ f_n tanh(|v_t|/v_s) v_t/|v_t|``.
    """
    out = []
    for c in contacts:
        n = c.normal
        v = relative_velocity(kin, c)
        vn = dot3(n, v)
        fn = ops.smax0(params.stiffness * c.penetration * (1.0 - params.damping * vn))
        vt = sub3(v, scale3(vn, n))
        speed = ops.norm3(vt)
        if params.mu_field is not None:
            mu = params.mu_field(ops.value(c.point[0]), ops.value(c.point[1]))
        else:
            mu = c.mu if params.mu is None else params.mu
        if ops.value(speed) > 1e-12:
            gain = -(mu * fn) * ops.tanh(speed / params.smoothing_velocity) / speed
        else:
            gain = -(mu * fn) / params.smoothing_velocity
        force = add3(scale3(fn, n), scale3(gain, vt))
        out.append(SpatialForce.at_point(force, c.point))
    return out


# -------------------------------------------------------------- NCP / PGS

def solve_ncp(contacts, model: MultiBody, q, qd_free, dt: float, iterations: int = 50,
              kin: Kinematics | None = None, H=None, tolerance: float | None = None) -> NcpSolution:
    """Projected Gauss-Seidel on the contact NCP.

    ``qd_free`` is the end-of-step velocity without contact impulses. Each
    sweep visits contacts in list order: the normal impulse is solved against
    the relative normal velocity plus the Baumgarte bias ``(β/dt + α)·d`` with
    CFM ``R`` on the diagonal and clamped at zero; the two tangential impulses
    are then solved and projected onto the disk of radius ``μ·λ_n``.

    By default exactly ``iterations`` sweeps run. With ``tolerance`` the
    sweeps stop early once no impulse component moves by more than it, so
    ``iterations`` becomes a cap.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    if iterations < 1:
        raise ValueError("iterations must be at least 1")
    if not contacts:
        return NcpSolution([], list(qd_free), [])
    if kin is None:
        kin = forward_kinematics(model, q, None, world=True)
    if H is None:
        H = mass_matrix(model, q)
    factor = ldl_factor(H, "contact mass matrix")

    rows = []
    for idx, c in enumerate(contacts):
        t1, t2 = tangent_basis(c.normal)
        blocks = []
        for d in (c.normal, t1, t2):
            J = contact_jacobian(model, kin, c, d)
            MJ = ldl_solve(factor, J)
            blocks.append((J, MJ, _dot(J, MJ), dot3(d, c.velocity_a) if c.velocity_a else 0.0))
        wnn = blocks[0][2] + c.cfm
        if ops.value(wnn) < 1e-14:
            raise ContactSolverError(f"zero effective mass at contact {idx} ({c.source}, body {c.body_b})")
        bias = -(c.beta / dt + c.alpha) * c.penetration
        rows.append((blocks, wnn, bias))

    v = list(qd_free)
    lam_n = [0.0] * len(contacts)
    lam_t = [(0.0, 0.0)] * len(contacts)
    for _ in range(iterations):
        change = 0.0
        for k, (c, (blocks, wnn, bias)) in enumerate(zip(contacts, rows)):
            (Jn, MJn, _, va_n), (J1, MJ1, w1, va_1), (J2, MJ2, w2, va_2) = blocks
            vn = _dot(Jn, v) - va_n
            old = lam_n[k]
            new = ops.smax0(old - (vn + bias + c.cfm * old) / wnn)
            dl = new - old
            if ops.value(dl) != 0.0 or not ops.is_plain(dl):
                v = [x + m * dl for x, m in zip(v, MJn)]
            lam_n[k] = new

            v1 = _dot(J1, v) - va_1
            v2 = _dot(J2, v) - va_2
            o1, o2 = lam_t[k]
            n1 = o1 - v1 / w1
            n2 = o2 - v2 / w2
            limit = c.mu * new
            mag = ops.sqrt(n1 * n1 + n2 * n2)
            over = mag - limit
            if ops.value(over) > 0:
                s = limit / mag if ops.value(mag) > 0 else 0.0
                n1 = ops.select(over, n1 * s, n1)
                n2 = ops.select(over, n2 * s, n2)
            d1 = n1 - o1
            d2 = n2 - o2
            v = [x + m1 * d1 + m2 * d2 for x, m1, m2 in zip(v, MJ1, MJ2)]
            lam_t[k] = (n1, n2)
            change = max(change, abs(ops.value(dl)), abs(ops.value(d1)), abs(ops.value(d2)))
        if tolerance is not None and change <= tolerance:
            break

    residuals = []
    for k, (c, (blocks, wnn, bias)) in enumerate(zip(contacts, rows)):
        Jn, _, _, va_n = blocks[0]
        w = _dot(Jn, v) - va_n + bias + c.cfm * lam_n[k]
        residuals.append(ops.value(lam_n[k]) * ops.value(w))
    impulses = [ContactImpulse(lam_n[k], lam_t[k]) for k in range(len(contacts))]
    return NcpSolution(impulses, v, residuals)


def solve_ncp_pgs(contacts, model: MultiBody, state, dt: float, iterations: int = 50) -> list[ContactImpulse]:
    """Contact impulses for ``state`` whose velocities are the unconstrained end-of-step values."""
    return solve_ncp(contacts, model, state.q, state.qd, dt, iterations).impulses
