"""Gradients of scalar objectives through any of the three engines."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from hybridsim.scalar.dual import Dual
from hybridsim.scalar.ops import value
from hybridsim.scalar.tape import Tape


class GradientMode(str, enum.Enum):
    FINITE_DIFFERENCE = "finite-difference"
    FORWARD_DUAL = "forward-dual"
    REVERSE_TAPE = "reverse-tape"


class EvaluationError(ArithmeticError):
    """The objective (or one of its partials) was not finite."""

    def __init__(self, message: str, coordinate: int | None = None):
        super().__init__(message)
        self.coordinate = coordinate


Objective = Callable[[Sequence], object]


@dataclass
class GradientRequest:
    objective: Objective
    parameters: Sequence[float]
    mode: GradientMode | str = GradientMode.REVERSE_TAPE
    fd_epsilon: float = 1e-6

    def __post_init__(self):
        self.mode = GradientMode(self.mode)
        if self.mode is GradientMode.FINITE_DIFFERENCE and not self.fd_epsilon > 0:
            raise ValueError("fd_epsilon must be positive for finite differences")


def _call(f: Objective, x, coordinate: int | None):
    # domain errors (log(0), x/0, overflow) count as a non-finite value
    try:
        return f(x)
    except (ValueError, ZeroDivisionError, OverflowError) as exc:
        raise EvaluationError(f"objective failed: {exc}", coordinate) from exc


def _checked(f: float, coordinate: int | None) -> float:
    if not math.isfinite(f):
        raise EvaluationError(f"objective is not finite ({f})", coordinate)
    return f


def value_and_gradient(request: GradientRequest) -> tuple[float, np.ndarray]:
    """Objective value and gradient at ``request.parameters``."""
    x = [float(p) for p in request.parameters]
    n = len(x)
    f = request.objective
    mode = request.mode

    if mode is GradientMode.FINITE_DIFFERENCE:
        f0 = _checked(value(_call(f, list(x), None)), None)
        grad = np.zeros(n)
        for i in range(n):
            h = request.fd_epsilon * max(1.0, abs(x[i]))
            xp = list(x)
            xm = list(x)
            xp[i] += h
            xm[i] -= h
            fp = _checked(value(_call(f, xp, i)), i)
            fm = _checked(value(_call(f, xm, i)), i)
            grad[i] = (fp - fm) / (2.0 * h)
        return f0, grad

    if mode is GradientMode.FORWARD_DUAL:
        if n == 0:
            return _checked(value(_call(f, [], None)), None), np.zeros(0)
        out = _call(f, Dual.seed(x), None)
        f0 = _checked(value(out), None)
        grad = np.zeros(n) if type(out) is not Dual else np.array(out.d, dtype=float)
    else:
        tape = Tape()
        inputs = tape.vars(x)
        out = _call(f, inputs, None)
        f0 = _checked(value(out), None)
        grad = tape.gradient(out, inputs)

    bad = np.flatnonzero(~np.isfinite(grad))
    if bad.size:
        raise EvaluationError("non-finite partial derivative", int(bad[0]))
    return f0, grad


def evaluate_gradient(request: GradientRequest) -> np.ndarray:
    """One partial derivative of the objective per parameter."""
    return value_and_gradient(request)[1]
