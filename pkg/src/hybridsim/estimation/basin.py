"""Basin hopping over a pool of local optimizers.

Every evolution launches ``workers`` local searches: worker 0 restarts from
the incumbent, the others from Gaussian mutations of it with per-coordinate
scale ``sigma * (hi - lo)``, projected onto the bounds. The best local result
becomes the new incumbent if it improves on it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from hybridsim.estimation.optimize import RECOVERABLE, make_oracle, minimize_local
from hybridsim.estimation.parameters import ParameterBlock
from hybridsim.scalar import GradientMode


@dataclass
class BasinHoppingConfig:
    workers: int = 8
    evolutions: int = 10
    local_steps: int = 50
    sigma: float = 0.1
    seed: int = 0
    method: str = "lbfgs"
    lr: float = 1e-2
    mode: str = "reverse-tape"
    # stop as soon as any local search reaches this objective value
    target_objective: float | None = None

    def __post_init__(self):
        if self.workers < 1:
            raise ValueError("worker count must be at least 1")
        if self.evolutions < 1:
            raise ValueError("evolutions must be at least 1")
        if self.sigma < 0:
            raise ValueError("mutation scale must be non-negative")


@dataclass
class BasinHoppingResult:
    params: ParameterBlock
    value: float
    history: list = field(default_factory=list)
    diverged: int = 0
    evaluations: int = 0
    runs: int = 0


def _mutate(init: ParameterBlock, x, sigma, rng) -> np.ndarray:
    width = init.upper - init.lower
    width = np.where(np.isfinite(width), width, 1.0)
    return init.project(x + sigma * width * rng.standard_normal(len(x)))


def _run_worker(objective, init, start, cfg):
    p = init.with_values(start)
    try:
        r = minimize_local(objective, p, cfg.method, cfg.local_steps, lr=cfg.lr,
                           mode=GradientMode(cfg.mode), target=cfg.target_objective)
    except RECOVERABLE:
        return None
    return r


def basin_hopping(objective, init: ParameterBlock, config: BasinHoppingConfig, executor=None) -> BasinHoppingResult:
    """Run the evolutions; ``executor`` (a ``concurrent.futures`` executor) runs workers concurrently.

    Starting points come from per-worker generators seeded with
    ``(seed, evolution, worker)``, so results do not depend on scheduling.
    """
    cfg = config
    x_inc = init.project(init.values)

    try:
        f_inc = float(make_oracle(objective, GradientMode(cfg.mode))(x_inc)[0])
    except RECOVERABLE:
        f_inc = math.inf
    history = [f_inc]
    diverged = 0
    evaluations = 1
    runs = 0
    done = cfg.target_objective is not None and f_inc <= cfg.target_objective
    for evo in range(cfg.evolutions):
        if done:
            break
        starts = []
        for w in range(cfg.workers):
            if w == 0:
                starts.append(x_inc.copy())
            else:
                rng = np.random.default_rng([cfg.seed, evo, w])
                starts.append(_mutate(init, x_inc, cfg.sigma, rng))
        if executor is not None:
            futures = [executor.submit(_run_worker, objective, init, s, cfg) for s in starts]
            results = [fu.result() for fu in futures]
        else:
            results = []
            for s in starts:
                r = _run_worker(objective, init, s, cfg)
                results.append(r)
                if r is not None and cfg.target_objective is not None and r.value <= cfg.target_objective:
                    break
        best = None
        for r in results:
            runs += 1
            if r is None or not math.isfinite(r.value):
                diverged += 1
                continue
            evaluations += r.evaluations
            if best is None or r.value < best.value:
                best = r
        if best is not None and best.value < f_inc:
            x_inc, f_inc = best.params.values.copy(), best.value
        history.append(f_inc)
        if cfg.target_objective is not None and f_inc <= cfg.target_objective:
            done = True
    return BasinHoppingResult(init.with_values(x_inc), f_inc, history, diverged, evaluations, runs)


def parallel_basin_hop(objective, init: ParameterBlock, config: BasinHoppingConfig, executor=None) -> ParameterBlock:
    return basin_hopping(objective, init, config, executor).params
