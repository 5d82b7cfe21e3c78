"""Reverse-mode automatic differentiation on an append-only tape."""
from __future__ import annotations

import math

import numpy as np

from hybridsim.scalar.ops import _PLAIN


class TapeError(ValueError):
    pass


class Tape:
    """Append-only record of elementary operations.

    Node ``k`` is a tuple ``(kind, a, b, pa, pb)``: the operation kind, up to
    two operand indices (``-1`` when absent) and the local partial derivative
    with respect to each operand, computed when the node is recorded. Operand
    indices always precede ``k``.
    """

    __slots__ = ("nodes",)

    def __init__(self):
        self.nodes: list[tuple] = []

    def __len__(self) -> int:
        return len(self.nodes)

    def var(self, value: float) -> "Var":
        """Record an independent input."""
        nodes = self.nodes
        nodes.append(("input", -1, -1, 0.0, 0.0))
        return Var(self, len(nodes) - 1, float(value))

    def vars(self, values) -> list["Var"]:
        return [self.var(x) for x in values]

    def node(self, k: int) -> tuple:
        kind, a, b, pa, pb = self.nodes[k]
        return kind, (a, b), (pa, pb)

    def backward(self, output) -> np.ndarray:
        """Sweep adjoints from ``output`` (a :class:`Var` or node index).

        Returns the adjoint of every node; nodes the output does not depend on
        keep adjoint zero.
        """
        o = output.i if isinstance(output, Var) else int(output)
        nodes = self.nodes
        n = len(nodes)
        if not 0 <= o < n:
            raise TapeError(f"output index {o} out of range for tape of length {n}")
        adj = [0.0] * n
        adj[o] = 1.0
        for k in range(o, -1, -1):
            g = adj[k]
            if g == 0.0:
                continue
            _, i, j, pa, pb = nodes[k]
            if i >= 0:
                adj[i] += g * pa
            if j >= 0:
                adj[j] += g * pb
        return np.array(adj)

    def gradient(self, output, inputs) -> np.ndarray:
        if type(output) in _PLAIN:
            return np.zeros(len(inputs))
        adj = self.backward(output)
        return adj[[x.i for x in inputs]]


def tape_backward(tape: Tape, output_index: int) -> np.ndarray:
    return tape.backward(output_index)


def _push(t: Tape, kind: str, v: float, a: int, pa: float, b: int = -1, pb: float = 0.0) -> "Var":
    nodes = t.nodes
    nodes.append((kind, a, b, pa, pb))
    return Var(t, len(nodes) - 1, v)


def _mixed(x, y):
    raise TapeError("operands belong to different tapes")


class Var:
    """A scalar whose operations are recorded on a :class:`Tape`."""

    __slots__ = ("t", "i", "v")

    def __init__(self, t: Tape, i: int, v: float):
        self.t = t
        self.i = i
        self.v = v

    def __repr__(self) -> str:
        return f"Var(#{self.i}, {self.v!r})"

    def __add__(self, o):
        if type(o) is Var:
            if o.t is not self.t:
                _mixed(self, o)
            nodes = self.t.nodes
            nodes.append(("add", self.i, o.i, 1.0, 1.0))
            return Var(self.t, len(nodes) - 1, self.v + o.v)
        if o == 0:
            return self
        nodes = self.t.nodes
        nodes.append(("add", self.i, -1, 1.0, 0.0))
        return Var(self.t, len(nodes) - 1, self.v + o)

    __radd__ = __add__

    def __sub__(self, o):
        if type(o) is Var:
            if o.t is not self.t:
                _mixed(self, o)
            nodes = self.t.nodes
            nodes.append(("sub", self.i, o.i, 1.0, -1.0))
            return Var(self.t, len(nodes) - 1, self.v - o.v)
        if o == 0:
            return self
        return _push(self.t, "sub", self.v - o, self.i, 1.0)

    def __rsub__(self, o):
        return _push(self.t, "sub", o - self.v, self.i, -1.0)

    def __mul__(self, o):
        if type(o) is Var:
            if o.t is not self.t:
                _mixed(self, o)
            nodes = self.t.nodes
            nodes.append(("mul", self.i, o.i, o.v, self.v))
            return Var(self.t, len(nodes) - 1, self.v * o.v)
        if o == 0:
            return 0.0
        if o == 1:
            return self
        nodes = self.t.nodes
        nodes.append(("mul", self.i, -1, o, 0.0))
        return Var(self.t, len(nodes) - 1, self.v * o)

    __rmul__ = __mul__

    def __truediv__(self, o):
        if type(o) is Var:
            if o.t is not self.t:
                _mixed(self, o)
            inv = 1.0 / o.v
            v = self.v * inv
            return _push(self.t, "div", v, self.i, inv, o.i, -v * inv)
        if o == 1:
            return self
        return _push(self.t, "div", self.v / o, self.i, 1.0 / o)

    def __rtruediv__(self, o):
        v = o / self.v
        return _push(self.t, "div", v, self.i, -v / self.v)

    def __neg__(self):
        return _push(self.t, "neg", -self.v, self.i, -1.0)

    def __pos__(self):
        return self

    def __abs__(self):
        s = 1.0 if self.v > 0 else (-1.0 if self.v < 0 else 0.0)
        return _push(self.t, "abs", abs(self.v), self.i, s)

    def __pow__(self, p):
        if type(p) is Var:
            return (self.log() * p).exp()
        if p == 2:
            return _push(self.t, "pow", self.v * self.v, self.i, 2.0 * self.v)
        v = self.v ** p
        d = 0.0 if self.v == 0 else p * self.v ** (p - 1)
        return _push(self.t, "pow", v, self.i, d)

    def __rpow__(self, base):
        v = base ** self.v
        return _push(self.t, "pow", v, self.i, v * math.log(base))

    def __lt__(self, o):
        return self.v < (o.v if type(o) is Var else o)

    def __le__(self, o):
        return self.v <= (o.v if type(o) is Var else o)

    def __gt__(self, o):
        return self.v > (o.v if type(o) is Var else o)

    def __ge__(self, o):
        return self.v >= (o.v if type(o) is Var else o)

    def __float__(self):
        return float(self.v)

    def sin(self):
        return _push(self.t, "sin", math.sin(self.v), self.i, math.cos(self.v))

    def cos(self):
        return _push(self.t, "cos", math.cos(self.v), self.i, -math.sin(self.v))

    def tanh(self):
        y = math.tanh(self.v)
        return _push(self.t, "tanh", y, self.i, 1.0 - y * y)

    def exp(self):
        y = math.exp(self.v)
        return _push(self.t, "exp", y, self.i, y)

    def log(self):
        return _push(self.t, "log", math.log(self.v), self.i, 1.0 / self.v)

    def sqrt(self):
        y = math.sqrt(self.v)
        return _push(self.t, "sqrt", y, self.i, 0.5 / y if y > 0 else 0.0)

    def elu(self):
        if self.v > 0:
            return _push(self.t, "elu", self.v, self.i, 1.0)
        e = math.exp(self.v)
        return _push(self.t, "elu", e - 1.0, self.i, e)

    def _select(self, cond, a, b):
        c = cond.v if type(cond) is Var else float(cond)
        ia = a.i if type(a) is Var else -1
        ib = b.i if type(b) is Var else -1
        if c > 0:
            return _push(self.t, "select", a.v if ia >= 0 else float(a), ia, 1.0, ib, 0.0)
        return _push(self.t, "select", b.v if ib >= 0 else float(b), ia, 0.0, ib, 1.0)
