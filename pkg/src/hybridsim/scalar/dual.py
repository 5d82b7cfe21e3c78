"""Multi-directional forward-mode dual numbers."""
from __future__ import annotations

import math

import numpy as np

from hybridsim.scalar.ops import _PLAIN


class Dual:
    """A primal value with a dense tangent vector, one entry per seed direction.

    Multiplication or addition by the plain constants ``0`` and ``1`` is folded
    away without allocating a new tangent.
    """

    __slots__ = ("v", "d")

    def __init__(self, v: float, d: np.ndarray):
        self.v = v
        self.d = d

    @classmethod
    def seed(cls, values) -> list["Dual"]:
        """Seed one dual per value, each with a unit tangent in its own slot."""
        n = len(values)
        eye = np.eye(n)
        return [cls(float(x), eye[i]) for i, x in enumerate(values)]

    def __repr__(self) -> str:
        return f"Dual({self.v!r}, {self.d!r})"

    # arithmetic
    def __add__(self, o):
        if type(o) is Dual:
            return Dual(self.v + o.v, self.d + o.d)
        if o == 0:
            return self
        return Dual(self.v + o, self.d)

    __radd__ = __add__

    def __sub__(self, o):
        if type(o) is Dual:
            return Dual(self.v - o.v, self.d - o.d)
        if o == 0:
            return self
        return Dual(self.v - o, self.d)

    def __rsub__(self, o):
        return Dual(o - self.v, -self.d)

    def __mul__(self, o):
        if type(o) is Dual:
            return Dual(self.v * o.v, self.d * o.v + o.d * self.v)
        if o == 0:
            return 0.0
        if o == 1:
            return self
        return Dual(self.v * o, self.d * o)

    __rmul__ = __mul__

    def __truediv__(self, o):
        if type(o) is Dual:
            inv = 1.0 / o.v
            v = self.v * inv
            return Dual(v, (self.d - o.d * v) * inv)
        if o == 1:
            return self
        return Dual(self.v / o, self.d / o)

    def __rtruediv__(self, o):
        v = o / self.v
        return Dual(v, self.d * (-v / self.v))

    def __neg__(self):
        return Dual(-self.v, -self.d)

    def __pos__(self):
        return self

    def __abs__(self):
        if self.v > 0:
            return self
        if self.v < 0:
            return -self
        return Dual(0.0, self.d * 0.0)

    def __pow__(self, p):
        if type(p) is Dual:
            return (self.log() * p).exp()
        if p == 2:
            return self * self
        v = self.v ** p
        if self.v == 0:
            return Dual(v, self.d * 0.0)
        return Dual(v, self.d * (p * self.v ** (p - 1)))

    def __rpow__(self, base):
        v = base ** self.v
        return Dual(v, self.d * (v * math.log(base)))

    # comparisons act on primal values
    def __lt__(self, o):
        return self.v < (o.v if type(o) is Dual else o)

    def __le__(self, o):
        return self.v <= (o.v if type(o) is Dual else o)

    def __gt__(self, o):
        return self.v > (o.v if type(o) is Dual else o)

    def __ge__(self, o):
        return self.v >= (o.v if type(o) is Dual else o)

    def __float__(self):
        return float(self.v)

    # elementary functions
    def sin(self):
        return Dual(math.sin(self.v), self.d * math.cos(self.v))

    def cos(self):
        return Dual(math.cos(self.v), self.d * -math.sin(self.v))

    def tanh(self):
        t = math.tanh(self.v)
        return Dual(t, self.d * (1.0 - t * t))

    def exp(self):
        e = math.exp(self.v)
        return Dual(e, self.d * e)

    def log(self):
        return Dual(math.log(self.v), self.d / self.v)

    def sqrt(self):
        s = math.sqrt(self.v)
        if s == 0.0:
            return Dual(0.0, self.d * 0.0)
        return Dual(s, self.d * (0.5 / s))

    def elu(self):
        if self.v > 0:
            return self
        e = math.exp(self.v)
        return Dual(e - 1.0, self.d * e)

    def _select(self, cond, a, b):
        c = cond.v if type(cond) is Dual else cond
        return a if c > 0 else b


def tangent(x, n: int) -> np.ndarray:
    """Tangent vector of ``x``; zeros for plain constants."""
    if type(x) in _PLAIN:
        return np.zeros(n)
    return np.array(x.d, dtype=float)
