"""Semi-implicit Euler time stepping."""
from __future__ import annotations

from hybridsim.scalar import ops
from hybridsim.spatial import matvec, quat_matrix
from hybridsim.multibody.model import JointState, JointType, MultiBody


def integrate_semi_implicit(model: MultiBody, state: JointState, qdd, dt: float) -> JointState:
    """Velocity first (``qd += qdd dt``), then position with the new velocity.

    Floating-base orientation follows the quaternion derivative and is then
    renormalized.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    qd = [v + a * dt for v, a in zip(state.qd, qdd)]
    return JointState(integrate_positions(model, state.q, qd, dt), qd, state.time + dt)


def integrate_positions(model: MultiBody, q, qd, dt: float) -> list:
    out = list(q)
    for i, joint in enumerate(model.joints):
        k = model.q_index[i]
        m = model.v_index[i]
        if joint.nv == 1:
            out[k] = q[k] + qd[m] * dt
        elif joint.kind is JointType.FLOATING:
            px, py, pz, x, y, z, w = q[k:k + 7]
            wx, wy, wz, vx, vy, vz = qd[m:m + 6]
            R = quat_matrix(x, y, z, w)
            dp = matvec(R, (vx, vy, vz))
            out[k] = px + dp[0] * dt
            out[k + 1] = py + dp[1] * dt
            out[k + 2] = pz + dp[2] * dt
            h = 0.5 * dt
            # q ⊗ (ω, 0) with body-frame ω
            nx = x + h * (w * wx + y * wz - z * wy)
            ny = y + h * (w * wy + z * wx - x * wz)
            nz = z + h * (w * wz + x * wy - y * wx)
            nw = w - h * (x * wx + y * wy + z * wz)
            inv = 1.0 / ops.sqrt(nx * nx + ny * ny + nz * nz + nw * nw)
            out[k + 3] = nx * inv
            out[k + 4] = ny * inv
            out[k + 5] = nz * inv
            out[k + 6] = nw * inv
    return out
