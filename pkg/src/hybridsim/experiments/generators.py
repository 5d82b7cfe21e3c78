"""Synthetic ground truth: hidden effects added to the analytical engine.

The generated datasets stand in for measured data. The effect is applied
while simulating but never recorded, so a fitted model has to recover it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from hybridsim.contact import PenaltyParams
from hybridsim.estimation.data import Trajectory, TrajectoryDataset
from hybridsim.estimation.parameters import SimulationSetup
from hybridsim.multibody.model import JointState
from hybridsim.simulation import DivergenceError

# dynamic viscosity (Pa s) and density (kg/m^3)
MEDIA = {
    "water-5C": (0.001518, 1000.0),
    "water-25C": (0.00089, 997.0),
    "air-25C": (0.00001849, 1.184),
}
# geometry factors turning (viscosity, density) into joint-space drag
# coefficients: c1 = LINEAR_DRAG_FACTOR * mu, c2 = QUADRATIC_DRAG_FACTOR * rho
LINEAR_DRAG_FACTOR = 100.0
QUADRATIC_DRAG_FACTOR = 1e-4

KINDS = ("none", "joint-damping", "viscous-drag", "position-dependent-friction")


@dataclass
class GroundTruthGenerator:
    kind: str = "none"
    coefficients: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown generator kind {self.kind!r}")
        for k, v in self.coefficients.items():
            vals = v if isinstance(v, (list, tuple)) else [v]
            if isinstance(v, str):
                continue
            if not all(math.isfinite(float(x)) for x in vals):
                raise ValueError(f"coefficient {k} is not finite")

    @classmethod
    def drag_for_medium(cls, medium: str, dof: int, seed: int = 0) -> "GroundTruthGenerator":
        mu, rho = MEDIA[medium]
        c1 = LINEAR_DRAG_FACTOR * mu
        c2 = QUADRATIC_DRAG_FACTOR * rho
        return cls("viscous-drag", {"c1": [c1] * dof, "c2": [c2] * dof, "medium": medium}, seed)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "coefficients": self.coefficients, "seed": self.seed}

    @classmethod
    def from_dict(cls, d: dict) -> "GroundTruthGenerator":
        if d.get("medium") and d.get("kind", "viscous-drag") == "viscous-drag" and "coefficients" not in d:
            return cls.drag_for_medium(d["medium"], int(d.get("dof", 2)), int(d.get("seed", 0)))
        return cls(d.get("kind", "none"), dict(d.get("coefficients", {})), int(d.get("seed", 0)))

    # -------------------------------------------------------------- effects
    def generalized_force(self, q, qd) -> list | None:
        """Hidden joint-space force for the current state, if any."""
        c = self.coefficients
        if self.kind == "joint-damping":
            d = _per_joint(c.get("damping", 0.0), len(qd))
            return [-di * v for di, v in zip(d, qd)]
        if self.kind == "viscous-drag":
            c1 = _per_joint(c.get("c1", 0.0), len(qd))
            c2 = _per_joint(c.get("c2", 0.0), len(qd))
            return [-a * v - b * v * abs(v) for a, b, v in zip(c1, c2, qd)]
        return None

    def friction_field(self):
        """``(x, y) -> mu`` for the position-dependent friction generator."""
        if self.kind != "position-dependent-friction":
            return None
        c = self.coefficients
        base = float(c.get("mu", 0.3))
        amp = float(c.get("amplitude", 0.2))
        scale = float(c.get("length_scale", 0.1))
        return lambda x, y: base + amp * math.tanh(x / scale)

    def apply_to_setup(self, setup: SimulationSetup) -> SimulationSetup:
        field_fn = self.friction_field()
        if field_fn is None:
            return setup
        pen = setup.penalty
        penalty = PenaltyParams(pen.stiffness, pen.damping, pen.smoothing_velocity, pen.mu, field_fn)
        return SimulationSetup(setup.model, setup.dt, setup.contact, penalty, setup.augmentation, setup.pgs_iterations)


def _per_joint(v, n):
    if isinstance(v, (list, tuple)):
        if len(v) != n:
            raise ValueError(f"expected {n} coefficients, got {len(v)}")
        return [float(x) for x in v]
    return [float(v)] * n


def random_controls(nv: int, steps: int, rng, std: float = 0.5, hold: int = 20, mask=None) -> list:
    """Zero-order-hold Gaussian torques resampled every ``hold`` steps."""
    out = []
    u = [0.0] * nv
    for k in range(steps):
        if k % hold == 0:
            u = [float(x) for x in rng.normal(0.0, std, nv)]
            if mask is not None:
                u = [x if m else 0.0 for x, m in zip(u, mask)]
        out.append(u)
    return out


def rollout_with_effect(setup: SimulationSetup, generator: GroundTruthGenerator, state: JointState, controls) -> list:
    """Simulate ``setup`` with the generator's hidden effect; returns the visited states."""
    setup = generator.apply_to_setup(setup)
    sim = setup.simulator()
    states = [state]
    s = state
    for k, u in enumerate(controls):
        extra = generator.generalized_force(s.q, s.qd)
        applied = u if extra is None else [a + b for a, b in zip(u, extra)]
        s = sim.step(s, applied)
        if not all(math.isfinite(x) for x in s.qd):
            raise DivergenceError(f"ground-truth rollout diverged at step {k + 1}", k + 1)
        states.append(s)
    return states


def generate_dataset(
    setup: SimulationSetup,
    generator: GroundTruthGenerator,
    trajectories: int,
    steps: int,
    seed: int = 0,
    control_std: float = 0.5,
    hold: int = 20,
    initial_spread: float = 0.5,
    initial_state: JointState | None = None,
    control_mask=None,
) -> TrajectoryDataset:
    """Random-control trajectories of the analytical engine plus the hidden effect.

    Initial joint angles of 1-DoF joints are drawn uniformly from
    ``±initial_spread`` unless ``initial_state`` is given.
    """
    rng = np.random.default_rng(seed)
    model = setup.model
    out = []
    for _ in range(trajectories):
        if initial_state is None:
            s0 = model.zero_state()
            s0.q = [float(x) for x in rng.uniform(-initial_spread, initial_spread, model.nq)]
        else:
            s0 = initial_state.copy()
        controls = random_controls(model.nv, steps, rng, control_std, hold, control_mask)
        states = rollout_with_effect(setup, generator, s0, controls)
        out.append(Trajectory.from_states(states, controls))
    return TrajectoryDataset(out, setup.dt, {"generator": generator.to_dict()})
