"""Forward dynamics (ABA), inverse dynamics (RNEA) and the joint-space mass matrix (CRBA).

External forces are world-frame spatial forces, one per link, expressed about
the world origin; ``None`` entries mean no force.
"""
from __future__ import annotations

from hybridsim.scalar import ops
from hybridsim.spatial import SpatialMotion, ZERO3
from hybridsim.multibody.model import _UNIT_COLUMNS, JointState, ModelError, MultiBody


class DynamicsError(ArithmeticError):
    pass


class Kinematics:
    """Per-link transforms and velocities for one configuration.

    ``X[i]`` maps parent coordinates to link ``i``; ``X0[i]`` maps world
    coordinates to link ``i``; ``v[i]`` is the link twist in link coordinates.
    """

    __slots__ = ("X", "X0", "v", "c", "S")

    def __init__(self, X, X0, v, c, S):
        self.X = X
        self.X0 = X0
        self.v = v
        self.c = c
        self.S = S

    def link_pose(self, i: int):
        """World rotation (link axes as columns) and world origin of link ``i``."""
        X0 = self.X0[i]
        return X0.E, X0.r

    def point_velocity(self, i: int, p):
        """World velocity of the material point of link ``i`` at world position ``p``."""
        from hybridsim.spatial import add3, cross3, matTvec, sub3

        X0 = self.X0[i]
        w = matTvec(X0.E, self.v[i].ang)
        vo = matTvec(X0.E, self.v[i].lin)
        return add3(vo, cross3(w, sub3(p, X0.r)))

    def world_twist(self, i: int) -> tuple:
        from hybridsim.spatial import matTvec

        X0 = self.X0[i]
        return matTvec(X0.E, self.v[i].ang), matTvec(X0.E, self.v[i].lin)


def forward_kinematics(model: MultiBody, q, qd=None, world=True) -> Kinematics:
    n = len(model.joints)
    X = [None] * n
    X0 = [None] * n if world else None
    v = [None] * n
    c = [None] * n
    S = [None] * n
    zero = SpatialMotion()
    for i, joint in enumerate(model.joints):
        qi = model.joint_q(q, i)
        Xi = joint.joint_transform(qi) * joint.X_tree
        X[i] = Xi
        p = joint.parent
        if world:
            X0[i] = Xi if p < 0 else Xi * X0[p]
        cols = joint.motion_subspace()
        S[i] = cols
        if qd is None:
            continue
        vJ = _combine(cols, model.joint_qd(qd, i))
        if p < 0:
            v[i] = vJ
            c[i] = zero
        else:
            vi = Xi.apply_motion(v[p]) + vJ
            v[i] = vi
            c[i] = vi.cross_motion(vJ)
    return Kinematics(X, X0, v, c, S)


def _combine(cols, coeffs) -> SpatialMotion:
    if not cols:
        return SpatialMotion()
    if len(cols) == 1:
        return cols[0].scaled(coeffs[0])
    if cols is _UNIT_COLUMNS:
        return SpatialMotion(tuple(coeffs[:3]), tuple(coeffs[3:6]))
    out = cols[0].scaled(coeffs[0])
    for s, a in zip(cols[1:], coeffs[1:]):
        out = out + s.scaled(a)
    return out


def _gravity_accel(model: MultiBody) -> SpatialMotion:
    g = model.gravity
    return SpatialMotion(ZERO3, (-g[0], -g[1], -g[2]))


def _check_lengths(model: MultiBody, state: JointState, vec, f_ext, what: str):
    if len(state.q) != model.nq or len(state.qd) != model.nv:
        raise ModelError(f"state has {len(state.q)}/{len(state.qd)} entries, model expects {model.nq}/{model.nv}")
    if len(vec) != model.nv:
        raise ModelError(f"{what} has length {len(vec)}, model has {model.nv} DoF")
    if f_ext is not None and len(f_ext) != len(model.links):
        raise ModelError(f"f_ext has {len(f_ext)} entries, model has {len(model.links)} links")


def forward_dynamics_aba(model: MultiBody, state: JointState, tau, f_ext=None, passive=None, kin=None):
    """Joint accelerations from the Articulated Body Algorithm.

    ``passive`` overrides the model's spring/damper generalized forces; by
    default they are ``-k q - d qd`` per joint and are added to ``tau``.
    """
    _check_lengths(model, state, tau, f_ext, "tau")
    q, qd = state.q, state.qd
    if kin is None:
        kin = forward_kinematics(model, q, qd, world=f_ext is not None)
    if passive is None:
        passive = model.passive_forces(q, qd)
    n = len(model.joints)
    joints = model.joints
    X, v, c, S = kin.X, kin.v, kin.c, kin.S

    IA = [None] * n
    pA = [None] * n
    for i in range(n):
        I = model.links[i].inertia
        IA[i] = I.articulated()
        pAi = v[i].cross_force(I.apply(v[i]))
        if f_ext is not None and f_ext[i] is not None:
            pAi = pAi - kin.X0[i].apply_force(f_ext[i])
        pA[i] = pAi

    U = [None] * n
    Dinv = [None] * n
    u = [None] * n
    for i in range(n - 1, -1, -1):
        joint = joints[i]
        p = joint.parent
        nd = joint.nv
        k = model.v_index[i]
        if nd == 1:
            s = S[i][0]
            Ui = IA[i].apply(s)
            d = s.dot(Ui)
            if abs(ops.value(d)) < 1e-12:
                raise DynamicsError(f"singular articulated inertia at joint {i} ({joint.name!r})")
            dinv = 1.0 / d
            ui = tau[k] + passive[k] - s.dot(pA[i])
            U[i], Dinv[i], u[i] = Ui, dinv, ui
            if p >= 0:
                Ia = IA[i].minus_outer(Ui, dinv)
                pa = pA[i] + Ia.apply(c[i]) + Ui.scaled(dinv * ui)
                IA[p] = IA[p] + Ia.to_parent(X[i])
                pA[p] = pA[p] + X[i].inv_apply_force(pa)
        elif nd == 0:
            if p >= 0:
                pa = pA[i] + IA[i].apply(c[i])
                IA[p] = IA[p] + IA[i].to_parent(X[i])
                pA[p] = pA[p] + X[i].inv_apply_force(pa)
        else:
            u[i] = [tau[k + j] + passive[k + j] for j in range(6)]

    qdd = [0.0] * model.nv
    a = [None] * n
    a0 = _gravity_accel(model)
    for i in range(n):
        joint = joints[i]
        p = joint.parent
        ap = X[i].apply_motion(a0 if p < 0 else a[p]) + c[i]
        nd = joint.nv
        k = model.v_index[i]
        if nd == 1:
            s = S[i][0]
            qi = Dinv[i] * (u[i] - U[i].dot(ap))
            qdd[k] = qi
            a[i] = ap + s.scaled(qi)
        elif nd == 0:
            a[i] = ap
        else:
            # S = identity: IA (a' + qdd) = u - pA
            rhs = [u[i][j] - x for j, x in enumerate((*pA[i].ang, *pA[i].lin))]
            x = solve_spd(IA[i].to_rows(), rhs, joint.name or str(i))
            acc = SpatialMotion(tuple(x[:3]), tuple(x[3:]))
            qi = acc - ap
            for j, val in enumerate((*qi.ang, *qi.lin)):
                qdd[k + j] = val
            a[i] = acc
    return qdd


def inverse_dynamics(model: MultiBody, state: JointState, qdd, f_ext=None, passive=None, gravity=True):
    """Generalized forces ``tau`` such that ABA with ``tau`` returns ``qdd`` (RNEA)."""
    _check_lengths(model, state, qdd, f_ext, "qdd")
    q, qd = state.q, state.qd
    kin = forward_kinematics(model, q, qd, world=f_ext is not None)
    if passive is None:
        passive = model.passive_forces(q, qd)
    n = len(model.joints)
    X, v, c, S = kin.X, kin.v, kin.c, kin.S
    a0 = _gravity_accel(model) if gravity else SpatialMotion()
    a = [None] * n
    f = [None] * n
    for i, joint in enumerate(model.joints):
        p = joint.parent
        ai = X[i].apply_motion(a0 if p < 0 else a[p]) + c[i]
        ai = ai + _combine(S[i], model.joint_qd(qdd, i))
        a[i] = ai
        I = model.links[i].inertia
        fi = I.apply(ai) + v[i].cross_force(I.apply(v[i]))
        if f_ext is not None and f_ext[i] is not None:
            fi = fi - kin.X0[i].apply_force(f_ext[i])
        f[i] = fi
    tau = [0.0] * model.nv
    for i in range(n - 1, -1, -1):
        joint = model.joints[i]
        k = model.v_index[i]
        for j, s in enumerate(S[i]):
            tau[k + j] = s.dot(f[i]) - passive[k + j]
        if joint.parent >= 0:
            f[joint.parent] = f[joint.parent] + X[i].inv_apply_force(f[i])
    return tau


def mass_matrix(model: MultiBody, q) -> list[list]:
    """Joint-space inertia matrix ``H(q)`` by the composite-rigid-body algorithm."""
    kin = forward_kinematics(model, q, None, world=False)
    n = len(model.joints)
    IC = [model.links[i].inertia.articulated() for i in range(n)]
    for i in range(n - 1, -1, -1):
        p = model.joints[i].parent
        if p >= 0:
            IC[p] = IC[p] + IC[i].to_parent(kin.X[i])
    nv = model.nv
    H = [[0.0] * nv for _ in range(nv)]
    for i in range(n):
        ki = model.v_index[i]
        for a_, s in enumerate(kin.S[i]):
            F = IC[i].apply(s)
            row = ki + a_
            for b_, s2 in enumerate(kin.S[i]):
                H[row][ki + b_] = s2.dot(F)
            j = i
            while model.joints[j].parent >= 0:
                F = kin.X[j].inv_apply_force(F)
                j = model.joints[j].parent
                kj = model.v_index[j]
                for b_, s2 in enumerate(kin.S[j]):
                    val = s2.dot(F)
                    H[row][kj + b_] = val
                    H[kj + b_][row] = val
    return H


def ldl_factor(A, where: str = ""):
    """``A = L D L^T`` for symmetric positive-definite ``A`` (generic scalars)."""
    n = len(A)
    L = [[0.0] * n for _ in range(n)]
    D = [0.0] * n
    for j in range(n):
        s = A[j][j]
        for k in range(j):
            s = s - L[j][k] * L[j][k] * D[k]
        if abs(ops.value(s)) < 1e-14:
            raise DynamicsError(f"singular inertia at {where}")
        D[j] = s
        for i in range(j + 1, n):
            t = A[i][j]
            for k in range(j):
                t = t - L[i][k] * L[j][k] * D[k]
            L[i][j] = t / s
    return L, D


def ldl_solve(factor, b):
    L, D = factor
    n = len(b)
    y = list(b)
    for i in range(n):
        for k in range(i):
            y[i] = y[i] - L[i][k] * y[k]
    x = [y[i] / D[i] for i in range(n)]
    for i in range(n - 1, -1, -1):
        for k in range(i + 1, n):
            x[i] = x[i] - L[k][i] * x[k]
    return x


def solve_spd(A, b, where: str = ""):
    """Solve ``A x = b`` for symmetric positive-definite ``A``."""
    return ldl_solve(ldl_factor(A, where), b)
