"""Elementary functions that dispatch over every scalar realization.

Engine code calls these instead of :mod:`math` so that the same source runs
on plain floats, :class:`~hybridsim.scalar.dual.Dual` numbers and
:class:`~hybridsim.scalar.tape.Var` tape variables.
"""
from __future__ import annotations

import math

import numpy as np

_PLAIN = frozenset({float, int, np.float64, np.float32, np.int64, bool})


def is_plain(x) -> bool:
    return type(x) in _PLAIN


def value(x) -> float:
    """Primal value of any scalar as a Python float."""
    if type(x) in _PLAIN:
        return float(x)
    return x.v


def sin(x):
    if type(x) in _PLAIN:
        return math.sin(x)
    return x.sin()


def cos(x):
    if type(x) in _PLAIN:
        return math.cos(x)
    return x.cos()


def tanh(x):
    if type(x) in _PLAIN:
        return math.tanh(x)
    return x.tanh()


def exp(x):
    if type(x) in _PLAIN:
        return math.exp(x)
    return x.exp()


def log(x):
    if type(x) in _PLAIN:
        return math.log(x)
    return x.log()


def sqrt(x):
    if type(x) in _PLAIN:
        return math.sqrt(x)
    return x.sqrt()


def fabs(x):
    if type(x) in _PLAIN:
        return abs(float(x))
    return abs(x)


def elu(x):
    """ELU activation: ``x`` for positive input, ``exp(x) - 1`` otherwise."""
    if type(x) in _PLAIN:
        return x if x > 0 else math.expm1(x)
    return x.elu()


def select(cond, a, b):
    """Branchless conditional: ``a`` if ``cond > 0`` else ``b``.

    Derivatives flow only through the taken branch. On a tape the choice is
    recorded as a single node so a backward sweep replays the same branch.
    """
    for s in (a, b):
        if type(s) not in _PLAIN and hasattr(s, "_select"):
            return s._select(cond, a, b)
    return a if value(cond) > 0 else b


def smax0(x):
    """``max(0, x)`` through :func:`select`."""
    return select(x, x, 0.0)


def norm3(v):
    return sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
