"""Trajectory losses over named parameters."""
from __future__ import annotations

import math

import numpy as np

from hybridsim.estimation.data import TrajectoryDataset
from hybridsim.estimation.parameters import ParameterBlock, SimulationSetup
from hybridsim.neural import Augmentation, spinn_loss
from hybridsim.scalar import GradientMode, GradientRequest, ops, value_and_gradient


class LossError(ArithmeticError):
    """A rollout produced a non-finite state."""

    def __init__(self, message: str, step: int, trajectory: int = 0):
        super().__init__(message)
        self.step = step
        self.trajectory = trajectory


class TrajectoryLoss:
    """Mean squared error between simulated and recorded ``(q, qd)``.

    ``kind="rollout"`` simulates each trajectory from its first state under the
    recorded controls; ``kind="one-step"`` restarts every step from the
    recorded state. ``horizon`` limits the number of steps used per
    trajectory. With ``spinn=(kappa, lam)`` the sparse-group penalty on the
    augmentation weights is added. ``per_dt`` divides each residual by ``dt``
    (one-step errors then read as velocity and acceleration errors).
    ``reduction="sum"`` sums squared errors instead of averaging them.
    ``setups`` gives each trajectory its own simulation setup (for example a
    different prescribed pusher path); ``setup`` then only supplies the
    augmentation used by the sparsity penalty.
    """

    def __init__(
        self,
        setup: SimulationSetup,
        names,
        data: TrajectoryDataset,
        kind: str = "rollout",
        horizon: int | None = None,
        spinn: tuple | None = None,
        per_dt: bool = False,
        reduction: str = "mean",
        setups: list | None = None,
    ):
        if reduction not in ("mean", "sum"):
            raise ValueError(f"unknown reduction {reduction!r}")
        self.reduction = reduction
        if kind not in ("rollout", "one-step"):
            raise ValueError(f"unknown loss kind {kind!r}")
        if len(data) == 0:
            raise ValueError("dataset is empty")
        data.check_model(setup.model)
        if setups is not None and len(setups) != len(data):
            raise ValueError("need one setup per trajectory")
        self.setup = setup
        self.setups = setups
        self.names = list(names)
        self.data = data
        self.kind = kind
        self.horizon = horizon
        self.spinn = spinn
        self.scale = 1.0 / setup.dt if per_dt else 1.0
        self.evaluations = 0

    def __call__(self, values):
        self.evaluations += 1
        setup = self._bind(self.setup, values)
        sim = setup.simulator()
        total = 0.0
        count = 0
        scale = self.scale
        for ti, tr in enumerate(self.data):
            if self.setups is not None:
                sim = self._bind(self.setups[ti], values).simulator()
            steps = tr.steps if self.horizon is None else min(self.horizon, tr.steps)
            s = tr.state(0)
            for k in range(steps):
                if self.kind == "one-step":
                    s = tr.state(k)
                s = sim.step(s, tr.tau[k])
                for x in s.qd:
                    if not math.isfinite(ops.value(x)):
                        raise LossError(f"trajectory {ti} diverged at step {k + 1}", k + 1, ti)
                for x, y in zip(s.q, tr.q[k + 1]):
                    e = (x - y) * scale
                    total = total + e * e
                for x, y in zip(s.qd, tr.qd[k + 1]):
                    e = (x - y) * scale
                    total = total + e * e
                count += len(s.q) + len(s.qd)
        if count == 0:
            raise ValueError("no steps to compare")
        loss = total / count if self.reduction == "mean" else total
        if self.spinn is not None and setup.augmentation is not None:
            kappa, lam = self.spinn
            loss = spinn_loss(loss, [bp.parameters for bp in setup.augmentation.blueprints], kappa, lam)
        return loss

    def _bind(self, setup, values):
        return setup.bind(self.names, values) if self.names else setup

    def value_and_gradient(self, x, mode=GradientMode.REVERSE_TAPE, fd_epsilon: float = 1e-6):
        return value_and_gradient(GradientRequest(self, list(x), mode, fd_epsilon))


def rollout_loss(model, blueprints, params: ParameterBlock, data: TrajectoryDataset, dt=None, **setup_kwargs):
    """Rollout MSE of ``model`` augmented by ``blueprints`` with ``params`` bound.

    ``params.values`` may hold any scalar realization, so the result can be
    differentiated through the scalar engines.
    """
    setup = SimulationSetup(model, dt or data.dt, augmentation=Augmentation(blueprints) if blueprints else None, **setup_kwargs)
    return TrajectoryLoss(setup, params.names, data)(list(params.values))


def to_array(x) -> np.ndarray:
    return np.array([ops.value(v) for v in x])
