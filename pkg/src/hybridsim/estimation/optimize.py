"""Bound-constrained local minimizers: projected Adam and projected L-BFGS."""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from hybridsim.estimation.parameters import ParameterBlock
from hybridsim.scalar import EvaluationError, GradientMode, GradientRequest, value_and_gradient

# failures that make a trial point unusable rather than aborting the search
RECOVERABLE = (ArithmeticError, OverflowError, ValueError)


class OptimizerError(ArithmeticError):
    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


def make_oracle(objective, mode=GradientMode.REVERSE_TAPE, fd_epsilon: float = 1e-6):
    """``x -> (f, grad)`` for a generic-scalar objective (or one that computes its own gradient)."""
    if hasattr(objective, "value_and_gradient"):
        return lambda x: objective.value_and_gradient(list(x), mode, fd_epsilon)
    return lambda x: value_and_gradient(GradientRequest(objective, list(x), mode, fd_epsilon))


@dataclass
class LocalResult:
    params: ParameterBlock
    value: float
    history: list = field(default_factory=list)
    evaluations: int = 0


def _start(oracle, x):
    try:
        f, g = oracle(x)
    except EvaluationError as exc:
        raise OptimizerError(str(exc), exc.coordinate) from exc
    return f, np.asarray(g, dtype=float)


def _try(oracle, x):
    try:
        f, g = oracle(x)
    except RECOVERABLE:
        return math.inf, None
    g = np.asarray(g, dtype=float)
    if not math.isfinite(f) or not np.all(np.isfinite(g)):
        return math.inf, None
    return f, g


def minimize_local(
    objective,
    params: ParameterBlock,
    method: str = "lbfgs",
    steps: int = 50,
    lr: float = 1e-2,
    betas: tuple = (0.9, 0.999),
    eps: float = 1e-8,
    memory: int = 10,
    mode=GradientMode.REVERSE_TAPE,
    fd_epsilon: float = 1e-6,
    gtol: float = 1e-12,
    target: float | None = None,
) -> LocalResult:
    if steps < 1:
        raise ValueError("steps must be at least 1")
    oracle = make_oracle(objective, mode, fd_epsilon)
    x = params.project(params.values)
    f, g = _start(oracle, x)
    if method == "adam":
        return _adam(oracle, params, x, f, g, steps, lr, betas, eps, target)
    if method == "lbfgs":
        return _lbfgs(oracle, params, x, f, g, steps, memory, gtol, target)
    raise ValueError(f"unknown method {method!r}")


def local_minimize(objective, params: ParameterBlock, method: str = "lbfgs", steps: int = 50, **kwargs) -> ParameterBlock:
    return minimize_local(objective, params, method, steps, **kwargs).params


def _projected_gradient_norm(params, x, g):
    return float(np.linalg.norm(params.project(x - g) - x))


def _adam(oracle, params, x, f, g, steps, lr, betas, eps, target):
    b1, b2 = betas
    m = np.zeros_like(x)
    v = np.zeros_like(x)
    best_x, best_f = x.copy(), f
    history = [f]
    evals = 1
    for t in range(1, steps + 1):
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        mhat = m / (1 - b1 ** t)
        vhat = v / (1 - b2 ** t)
        x = params.project(x - lr * mhat / (np.sqrt(vhat) + eps))
        f_new, g_new = _try(oracle, x)
        evals += 1
        if g_new is None:
            break
        f, g = f_new, g_new
        history.append(f)
        if f < best_f:
            best_x, best_f = x.copy(), f
        if target is not None and best_f <= target:
            break
    return LocalResult(params.with_values(best_x), best_f, history, evals)


def _lbfgs(oracle, params, x, f, g, steps, memory, gtol, target):
    S: deque = deque(maxlen=memory)
    Y: deque = deque(maxlen=memory)
    history = [f]
    evals = 1
    for _ in range(steps):
        if _projected_gradient_norm(params, x, g) <= gtol or (target is not None and f <= target):
            break
        d = _two_loop(g, S, Y)
        if not g @ d < 0:
            S.clear()
            Y.clear()
            d = -g
        accepted = False
        for attempt in range(2):
            alpha = 1.0
            if not S:
                # first step along the raw gradient: cap its length
                alpha = min(1.0, 1.0 / max(np.linalg.norm(d), 1e-300))
            for _ls in range(40):
                x_new = params.project(x + alpha * d)
                step = x_new - x
                if not np.any(step):
                    break
                f_new, g_new = _try(oracle, x_new)
                evals += 1
                if g_new is not None and f_new <= f + 1e-4 * (g @ step):
                    accepted = True
                    break
                alpha *= 0.5
            if accepted or attempt == 1 or not S:
                break
            S.clear()
            Y.clear()
            d = -g
        if not accepted:
            break
        s_vec = x_new - x
        y_vec = g_new - g
        if s_vec @ y_vec > 1e-12 * max(1.0, float(y_vec @ y_vec)):
            S.append(s_vec)
            Y.append(y_vec)
        x, f, g = x_new, f_new, g_new
        history.append(f)
    return LocalResult(params.with_values(x), f, history, evals)


def _two_loop(g, S, Y):
    q = g.copy()
    alphas = []
    for s, y in zip(reversed(S), reversed(Y)):
        rho = 1.0 / (y @ s)
        a = rho * (s @ q)
        alphas.append((rho, a))
        q -= a * y
    if S:
        s, y = S[-1], Y[-1]
        q *= (s @ y) / (y @ y)
    for (s, y), (rho, a) in zip(zip(S, Y), reversed(alphas)):
        b = rho * (y @ q)
        q += s * (a - b)
    return -q
