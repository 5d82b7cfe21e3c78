"""Six-dimensional spatial vector algebra (Featherstone convention).

Motion vectors are ``(angular, linear)`` and force vectors ``(torque, force)``.
3-vectors are plain tuples and 3x3 matrices are tuples of row tuples so that
every entry may be any scalar realization (float, dual or tape variable).

A :class:`SpatialTransform` ``X`` from frame A to frame B stores ``E``, the
rotation taking A coordinates to B coordinates, and ``r``, the origin of B
expressed in A coordinates.
"""
from __future__ import annotations

import math

import numpy as np

from hybridsim.scalar import ops

ZERO3 = (0.0, 0.0, 0.0)
IDENTITY3 = ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0))


# ---------------------------------------------------------------- 3-vectors

def add3(a, b):
    return (a[0] + b[0], a[1] + b[1], a[2] + b[2])


def sub3(a, b):
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2])


def scale3(s, a):
    return (s * a[0], s * a[1], s * a[2])


def neg3(a):
    return (-a[0], -a[1], -a[2])


def dot3(a, b):
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def cross3(a, b):
    return (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )


def matvec(m, v):
    return (
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    )


def matTvec(m, v):
    return (
        m[0][0] * v[0] + m[1][0] * v[1] + m[2][0] * v[2],
        m[0][1] * v[0] + m[1][1] * v[1] + m[2][1] * v[2],
        m[0][2] * v[0] + m[1][2] * v[1] + m[2][2] * v[2],
    )


# ------------------------------------------------------------- 3x3 matrices

def transpose(m):
    return ((m[0][0], m[1][0], m[2][0]), (m[0][1], m[1][1], m[2][1]), (m[0][2], m[1][2], m[2][2]))


def matmul(a, b):
    (a00, a01, a02), (a10, a11, a12), (a20, a21, a22) = a
    (b00, b01, b02), (b10, b11, b12), (b20, b21, b22) = b
    return (
        (a00 * b00 + a01 * b10 + a02 * b20, a00 * b01 + a01 * b11 + a02 * b21, a00 * b02 + a01 * b12 + a02 * b22),
        (a10 * b00 + a11 * b10 + a12 * b20, a10 * b01 + a11 * b11 + a12 * b21, a10 * b02 + a11 * b12 + a12 * b22),
        (a20 * b00 + a21 * b10 + a22 * b20, a20 * b01 + a21 * b11 + a22 * b21, a20 * b02 + a21 * b12 + a22 * b22),
    )


def matadd(a, b):
    a0, a1, a2 = a
    b0, b1, b2 = b
    return (
        (a0[0] + b0[0], a0[1] + b0[1], a0[2] + b0[2]),
        (a1[0] + b1[0], a1[1] + b1[1], a1[2] + b1[2]),
        (a2[0] + b2[0], a2[1] + b2[1], a2[2] + b2[2]),
    )


def matsub(a, b):
    a0, a1, a2 = a
    b0, b1, b2 = b
    return (
        (a0[0] - b0[0], a0[1] - b0[1], a0[2] - b0[2]),
        (a1[0] - b1[0], a1[1] - b1[1], a1[2] - b1[2]),
        (a2[0] - b2[0], a2[1] - b2[1], a2[2] - b2[2]),
    )


def skew(v):
    return ((0.0, -v[2], v[1]), (v[2], 0.0, -v[0]), (-v[1], v[0], 0.0))


def outer3(a, b):
    a0, a1, a2 = a
    b0, b1, b2 = b
    return ((a0 * b0, a0 * b1, a0 * b2), (a1 * b0, a1 * b1, a1 * b2), (a2 * b0, a2 * b1, a2 * b2))


def skew_mul(r, m):
    """``r× @ m`` without forming the skew matrix."""
    x, y, z = r
    m0, m1, m2 = m
    return (
        (y * m2[0] - z * m1[0], y * m2[1] - z * m1[1], y * m2[2] - z * m1[2]),
        (z * m0[0] - x * m2[0], z * m0[1] - x * m2[1], z * m0[2] - x * m2[2]),
        (x * m1[0] - y * m0[0], x * m1[1] - y * m0[1], x * m1[2] - y * m0[2]),
    )


def mul_skew(m, r):
    """``m @ r×`` without forming the skew matrix."""
    x, y, z = r
    return tuple((row[1] * z - row[2] * y, row[2] * x - row[0] * z, row[0] * y - row[1] * x) for row in m)


def congruence_sym(e, s):
    """``E^T S E`` for symmetric ``S``; only the upper triangle is computed."""
    (t00, t01, t02), (t10, t11, t12), (t20, t21, t22) = matmul(s, e)
    (e00, e01, e02), (e10, e11, e12), (e20, e21, e22) = e
    o00 = e00 * t00 + e10 * t10 + e20 * t20
    o01 = e00 * t01 + e10 * t11 + e20 * t21
    o02 = e00 * t02 + e10 * t12 + e20 * t22
    o11 = e01 * t01 + e11 * t11 + e21 * t21
    o12 = e01 * t02 + e11 * t12 + e21 * t22
    o22 = e02 * t02 + e12 * t12 + e22 * t22
    return ((o00, o01, o02), (o01, o11, o12), (o02, o12, o22))


def congruence(e, s):
    """``E^T S E`` for a general ``S``."""
    return matmul(transpose(e), matmul(s, e))


def axis_angle_matrix(axis, angle):
    """Active rotation by ``angle`` about the unit ``axis`` (Rodrigues)."""
    c = ops.cos(angle)
    s = ops.sin(angle)
    t = 1.0 - c
    x, y, z = axis
    return (
        (t * (x * x) + c, t * (x * y) - s * z, t * (x * z) + s * y),
        (t * (x * y) + s * z, t * (y * y) + c, t * (y * z) - s * x),
        (t * (x * z) - s * y, t * (y * z) + s * x, t * (z * z) + c),
    )


def quat_matrix(qx, qy, qz, qw):
    """Rotation matrix of a unit quaternion given in ``(x, y, z, w)`` order."""
    return (
        (1.0 - 2.0 * (qy * qy + qz * qz), 2.0 * (qx * qy - qz * qw), 2.0 * (qx * qz + qy * qw)),
        (2.0 * (qx * qy + qz * qw), 1.0 - 2.0 * (qx * qx + qz * qz), 2.0 * (qy * qz - qx * qw)),
        (2.0 * (qx * qz - qy * qw), 2.0 * (qy * qz + qx * qw), 1.0 - 2.0 * (qx * qx + qy * qy)),
    )


def rpy_matrix(roll: float, pitch: float, yaw: float):
    """URDF fixed-axis roll/pitch/yaw: ``Rz(yaw) @ Ry(pitch) @ Rx(roll)``."""
    cr, sr = math.cos(roll), math.sin(roll)
    cp, sp = math.cos(pitch), math.sin(pitch)
    cy, sy = math.cos(yaw), math.sin(yaw)
    return (
        (cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr),
        (sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr),
        (-sp, cp * sr, cp * cr),
    )


# --------------------------------------------------------- spatial vectors

class SpatialMotion:
    __slots__ = ("ang", "lin")

    def __init__(self, ang=ZERO3, lin=ZERO3):
        self.ang = ang
        self.lin = lin

    def __add__(self, o):
        return SpatialMotion(add3(self.ang, o.ang), add3(self.lin, o.lin))

    def __sub__(self, o):
        return SpatialMotion(sub3(self.ang, o.ang), sub3(self.lin, o.lin))

    def __neg__(self):
        return SpatialMotion(neg3(self.ang), neg3(self.lin))

    def scaled(self, s):
        return SpatialMotion(scale3(s, self.ang), scale3(s, self.lin))

    def dot(self, f: "SpatialForce"):
        return dot3(self.ang, f.ang) + dot3(self.lin, f.lin)

    def cross_motion(self, w: "SpatialMotion") -> "SpatialMotion":
        return SpatialMotion(
            cross3(self.ang, w.ang),
            add3(cross3(self.ang, w.lin), cross3(self.lin, w.ang)),
        )

    def cross_force(self, f: "SpatialForce") -> "SpatialForce":
        return SpatialForce(
            add3(cross3(self.ang, f.ang), cross3(self.lin, f.lin)),
            cross3(self.ang, f.lin),
        )

    def to_array(self) -> np.ndarray:
        return np.array([ops.value(x) for x in (*self.ang, *self.lin)])

    @classmethod
    def from_array(cls, a) -> "SpatialMotion":
        return cls(tuple(a[:3]), tuple(a[3:6]))

    def __repr__(self):
        return f"SpatialMotion({self.to_array()})"


class SpatialForce:
    __slots__ = ("ang", "lin")

    def __init__(self, ang=ZERO3, lin=ZERO3):
        self.ang = ang
        self.lin = lin

    def __add__(self, o):
        return SpatialForce(add3(self.ang, o.ang), add3(self.lin, o.lin))

    def __sub__(self, o):
        return SpatialForce(sub3(self.ang, o.ang), sub3(self.lin, o.lin))

    def __neg__(self):
        return SpatialForce(neg3(self.ang), neg3(self.lin))

    def scaled(self, s):
        return SpatialForce(scale3(s, self.ang), scale3(s, self.lin))

    def dot(self, m: SpatialMotion):
        return m.dot(self)

    @classmethod
    def at_point(cls, force, point) -> "SpatialForce":
        """Pure force applied at ``point``, expressed about the frame origin."""
        return cls(cross3(point, force), force)

    def to_array(self) -> np.ndarray:
        return np.array([ops.value(x) for x in (*self.ang, *self.lin)])

    @classmethod
    def from_array(cls, a) -> "SpatialForce":
        return cls(tuple(a[:3]), tuple(a[3:6]))

    def __repr__(self):
        return f"SpatialForce({self.to_array()})"


def cross_motion(v: SpatialMotion, w: SpatialMotion) -> SpatialMotion:
    return v.cross_motion(w)


def cross_force(v: SpatialMotion, f: SpatialForce) -> SpatialForce:
    return v.cross_force(f)


# -------------------------------------------------------------- transforms

class SpatialTransform:
    """Plücker transform ``X = [[E, 0], [-E r×, E]]`` from frame A to frame B."""

    __slots__ = ("E", "r")

    def __init__(self, E=IDENTITY3, r=ZERO3):
        self.E = E
        self.r = r

    @property
    def rotation(self):
        return self.E

    @property
    def translation(self):
        return self.r

    @classmethod
    def identity(cls) -> "SpatialTransform":
        return cls()

    @classmethod
    def from_pose(cls, R, p) -> "SpatialTransform":
        """Transform into a child frame whose axes are ``R`` and origin ``p`` in the parent."""
        return cls(transpose(R), tuple(p))

    def apply_motion(self, v: SpatialMotion) -> SpatialMotion:
        E = self.E
        return SpatialMotion(matvec(E, v.ang), matvec(E, sub3(v.lin, cross3(self.r, v.ang))))

    def apply_force(self, f: SpatialForce) -> SpatialForce:
        E = self.E
        return SpatialForce(matvec(E, sub3(f.ang, cross3(self.r, f.lin))), matvec(E, f.lin))

    def inv_apply_motion(self, v: SpatialMotion) -> SpatialMotion:
        ang = matTvec(self.E, v.ang)
        return SpatialMotion(ang, add3(matTvec(self.E, v.lin), cross3(self.r, ang)))

    def inv_apply_force(self, f: SpatialForce) -> SpatialForce:
        """``X^T f``: map a force from frame B back to frame A."""
        lin = matTvec(self.E, f.lin)
        return SpatialForce(add3(matTvec(self.E, f.ang), cross3(self.r, lin)), lin)

    def __mul__(self, o: "SpatialTransform") -> "SpatialTransform":
        """Composition ``self ∘ o``: apply ``o`` first."""
        if o.E is IDENTITY3:
            return SpatialTransform(self.E, add3(o.r, self.r))
        if self.E is IDENTITY3:
            return SpatialTransform(o.E, add3(o.r, matTvec(o.E, self.r)))
        return SpatialTransform(matmul(self.E, o.E), add3(o.r, matTvec(o.E, self.r)))

    def inverse(self) -> "SpatialTransform":
        return SpatialTransform(transpose(self.E), neg3(matvec(self.E, self.r)))

    def point_to_parent(self, p):
        """Coordinates in A of a point given in B coordinates."""
        return add3(self.r, matTvec(self.E, p))

    def point_to_child(self, p):
        return matvec(self.E, sub3(p, self.r))

    def to_matrix(self) -> np.ndarray:
        E = _np(self.E)
        r = np.array([ops.value(x) for x in self.r])
        X = np.zeros((6, 6))
        X[:3, :3] = E
        X[3:, 3:] = E
        X[3:, :3] = -E @ _skew_np(r)
        return X

    def homogeneous(self) -> np.ndarray:
        """4x4 matrix mapping homogeneous B coordinates to A coordinates."""
        T = np.eye(4)
        T[:3, :3] = _np(self.E).T
        T[:3, 3] = [ops.value(x) for x in self.r]
        return T


def transform_motion(X: SpatialTransform, v: SpatialMotion) -> SpatialMotion:
    return X.apply_motion(v)


def transform_force(X: SpatialTransform, f: SpatialForce) -> SpatialForce:
    return X.apply_force(f)


# ---------------------------------------------------------------- inertias

class SpatialInertia:
    """Rigid-body inertia: mass, centre of mass and rotational inertia about the COM."""

    __slots__ = ("mass", "com", "inertia", "_articulated")

    def __init__(self, mass, com=ZERO3, inertia=None):
        self._articulated = None
        self.mass = mass
        self.com = tuple(com)
        self.inertia = ((0.0, 0.0, 0.0),) * 3 if inertia is None else tuple(tuple(r) for r in inertia)

    @classmethod
    def point_mass(cls, mass, com=ZERO3) -> "SpatialInertia":
        return cls(mass, com, None)

    def apply(self, v: SpatialMotion) -> SpatialForce:
        lin = scale3(self.mass, sub3(v.lin, cross3(self.com, v.ang)))
        return SpatialForce(add3(matvec(self.inertia, v.ang), cross3(self.com, lin)), lin)

    def transform(self, X: SpatialTransform) -> "SpatialInertia":
        """Express this inertia (given in frame A) in frame B of ``X``."""
        return SpatialInertia(
            self.mass,
            X.point_to_child(self.com),
            congruence_sym(transpose(X.E), self.inertia),
        )

    def articulated(self) -> "ArticulatedInertia":
        """6x6 inertia about the frame origin (cached; instances are treated as immutable)."""
        if self._articulated is None:
            self._articulated = self._compute_articulated()
        return self._articulated

    def _compute_articulated(self) -> "ArticulatedInertia":
        m = self.mass
        c = self.com
        mcx = ((0.0, -m * c[2], m * c[1]), (m * c[2], 0.0, -m * c[0]), (-m * c[1], m * c[0], 0.0))
        # I_O = Ic - m cx cx = Ic + m (|c|^2 1 - c c^T)
        cc = dot3(c, c)
        A = tuple(
            tuple(
                self.inertia[i][j] + m * ((cc if i == j else 0.0) - c[i] * c[j])
                for j in range(3)
            )
            for i in range(3)
        )
        M = ((m, 0.0, 0.0), (0.0, m, 0.0), (0.0, 0.0, m))
        return ArticulatedInertia(A, mcx, M)

    def to_matrix(self) -> np.ndarray:
        return self.articulated().to_matrix()

    def kinetic_energy(self, v: SpatialMotion):
        return 0.5 * v.dot(self.apply(v))


def transform_inertia(X: SpatialTransform, inertia: SpatialInertia) -> SpatialInertia:
    return inertia.transform(X)


class ArticulatedInertia:
    """Symmetric 6x6 inertia ``[[A, B], [B^T, M]]`` stored as three 3x3 blocks."""

    __slots__ = ("A", "B", "M")

    def __init__(self, A, B, M):
        self.A = A
        self.B = B
        self.M = M

    def apply(self, v: SpatialMotion) -> SpatialForce:
        return SpatialForce(
            add3(matvec(self.A, v.ang), matvec(self.B, v.lin)),
            add3(matTvec(self.B, v.ang), matvec(self.M, v.lin)),
        )

    def __add__(self, o: "ArticulatedInertia") -> "ArticulatedInertia":
        return ArticulatedInertia(matadd(self.A, o.A), matadd(self.B, o.B), matadd(self.M, o.M))

    def minus_outer(self, u: SpatialForce, inv_d) -> "ArticulatedInertia":
        """``self - u u^T / d`` with ``inv_d = 1/d``."""
        un = scale3(inv_d, u.ang)
        uf = scale3(inv_d, u.lin)
        return ArticulatedInertia(
            _sym_minus_outer(self.A, un, u.ang),
            matsub(self.B, outer3(un, u.lin)),
            _sym_minus_outer(self.M, uf, u.lin),
        )

    def to_parent(self, X: SpatialTransform) -> "ArticulatedInertia":
        """``X^T I X``: express an inertia given in frame B in frame A."""
        E = self.E_rot(X.E)
        A, B, M = E
        Brx = mul_skew(B, X.r)
        rxM = skew_mul(X.r, M)
        rxMrx = mul_skew(rxM, X.r)
        A2 = [[None] * 3 for _ in range(3)]
        for i in range(3):
            for j in range(i, 3):
                A2[i][j] = A2[j][i] = A[i][j] - Brx[i][j] - Brx[j][i] - rxMrx[i][j]
        return ArticulatedInertia(tuple(tuple(r) for r in A2), matadd(B, rxM), M)

    def E_rot(self, E):
        return congruence_sym(E, self.A), congruence(E, self.B), congruence_sym(E, self.M)

    def to_rows(self) -> list[list]:
        """Dense 6x6 as nested lists of scalars."""
        A, B, M = self.A, self.B, self.M
        rows = [list(A[i]) + list(B[i]) for i in range(3)]
        rows += [[B[0][i], B[1][i], B[2][i]] + list(M[i]) for i in range(3)]
        return rows

    def to_matrix(self) -> np.ndarray:
        out = np.zeros((6, 6))
        out[:3, :3] = _np(self.A)
        out[:3, 3:] = _np(self.B)
        out[3:, :3] = _np(self.B).T
        out[3:, 3:] = _np(self.M)
        return out


def _sym_minus_outer(S, a, b):
    out = [[None] * 3 for _ in range(3)]
    for i in range(3):
        for j in range(i, 3):
            out[i][j] = out[j][i] = S[i][j] - a[i] * b[j]
    return tuple(tuple(r) for r in out)


def _np(m) -> np.ndarray:
    return np.array([[ops.value(x) for x in row] for row in m])


def _skew_np(v) -> np.ndarray:
    return np.array([[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]])
