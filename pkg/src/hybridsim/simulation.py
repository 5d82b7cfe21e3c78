"""Time stepping with contact and neural-scalar augmentation.

Per step: kinematics, contact detection, registry update, passive and
penalty forces, articulated-body forward dynamics, velocity update, NCP
impulses, then the position update with the corrected velocity.

Registered variable names (all step-scoped):

``t``, ``q{k}``, ``qd{k}``, ``u{k}`` (applied control),
``{geometry}.normal_x|y|z`` and ``{geometry}.penetration`` for each world
geometry (deepest contact, zeros when there is none), and ``link{i}.x|y|z``
and ``link{i}.vx|vy|vz`` (world position and velocity of each link origin).

Augmentable targets: ``tau{k}`` (passive generalized force on DoF ``k``,
analytical value ``-k q - d qd``) and ``link{i}.friction_x|y`` (extra
horizontal world force at the origin of link ``i``, analytical value 0).
"""
from __future__ import annotations

import math

from hybridsim.contact import (
    ContactParams,
    PenaltyParams,
    detect_contacts,
    penalty_forces,
    solve_ncp,
)
from hybridsim.multibody.dynamics import forward_dynamics_aba, forward_kinematics
from hybridsim.multibody.integrate import integrate_positions
from hybridsim.multibody.model import JointState, MultiBody
from hybridsim.neural import Augmentation, ConfigurationError, VariableRegistry
from hybridsim.scalar import ops
from hybridsim.spatial import SpatialForce


class DivergenceError(ArithmeticError):
    def __init__(self, message: str, step: int):
        super().__init__(message)
        self.step = step


class Simulator:
    def __init__(
        self,
        model: MultiBody,
        dt: float = 1e-3,
        contact: ContactParams | None = None,
        penalty: PenaltyParams | None = None,
        augmentation: Augmentation | None = None,
        pgs_iterations: int = 50,
        margin: float = 1e-3,
        external=None,
    ):
        if not dt > 0:
            raise ValueError("dt must be positive")
        self.model = model
        self.dt = dt
        self.contact = contact or ContactParams()
        self.penalty = penalty or PenaltyParams()
        self.augmentation = augmentation if augmentation else None
        self.pgs_iterations = pgs_iterations
        self.margin = margin
        # optional hook: (model, state, kin) -> list of world-frame SpatialForce or None
        self.external = external
        self.last_contacts: list = []
        self.last_residuals: list = []
        if self.augmentation is not None:
            known = set(self.augmentable(model))
            for t in self.augmentation.targets():
                if t not in known:
                    raise ConfigurationError(f"{t!r} is not an augmentable quantity of this model")
        has_geometry = any(link.geometry for link in model.links)
        self._collide = bool(model.world_geometry) and has_geometry

    @staticmethod
    def augmentable(model: MultiBody) -> list[str]:
        out = [f"tau{k}" for k in range(model.nv)]
        for i in range(len(model.links)):
            out += [f"link{i}.friction_x", f"link{i}.friction_y"]
        return out

    # --------------------------------------------------------------- step
    def step(self, state: JointState, tau=None) -> JointState:
        model = self.model
        dt = self.dt
        nv = model.nv
        tau = [0.0] * nv if tau is None else list(tau)
        if len(tau) != nv:
            raise ValueError(f"control has length {len(tau)}, model has {nv} DoF")
        kin = forward_kinematics(model, state.q, state.qd, world=True)
        contacts = detect_contacts(model, state, self.contact, self.margin, kin) if self._collide else []
        self.last_contacts = contacts

        aug = self.augmentation
        registry = None
        if aug is not None:
            aug.begin_step()
            registry = self._registry(state, tau, kin, contacts)

        passive = model.passive_forces(state.q, state.qd)
        if aug is not None:
            passive = [aug.resolve(registry, f"tau{k}", p) for k, p in enumerate(passive)]

        f_ext = None
        penalty = [c for c in contacts if c.model == "penalty"]
        if penalty:
            f_ext = [SpatialForce() for _ in model.links]
            for c, f in zip(penalty, penalty_forces(penalty, kin, self.penalty)):
                f_ext[c.body_b] = f_ext[c.body_b] + f
        if aug is not None:
            for i in range(len(model.links)):
                fx = aug.resolve(registry, f"link{i}.friction_x", 0.0)
                fy = aug.resolve(registry, f"link{i}.friction_y", 0.0)
                if ops.is_plain(fx) and ops.is_plain(fy) and fx == 0.0 and fy == 0.0:
                    continue
                if f_ext is None:
                    f_ext = [SpatialForce() for _ in model.links]
                origin = kin.X0[i].r
                f_ext[i] = f_ext[i] + SpatialForce.at_point((fx, fy, 0.0), origin)
        if self.external is not None:
            extra = self.external(model, state, kin)
            if extra is not None:
                f_ext = list(extra) if f_ext is None else [a + b for a, b in zip(f_ext, extra)]

        qdd = forward_dynamics_aba(model, state, tau, f_ext, passive=passive, kin=kin)
        qd = [v + a * dt for v, a in zip(state.qd, qdd)]
        ncp = [c for c in contacts if c.model == "ncp"]
        if ncp:
            sol = solve_ncp(ncp, model, state.q, qd, dt, self.pgs_iterations, kin=kin)
            qd = sol.qd
            self.last_residuals = sol.residuals
        else:
            self.last_residuals = []
        q = integrate_positions(model, state.q, qd, dt)
        return JointState(q, qd, state.time + dt)

    def _registry(self, state, tau, kin, contacts) -> VariableRegistry:
        reg = VariableRegistry()
        reg.set("t", state.time)
        for k, x in enumerate(state.q):
            reg.set(f"q{k}", x)
        for k, x in enumerate(state.qd):
            reg.set(f"qd{k}", x)
        for k, x in enumerate(tau):
            reg.set(f"u{k}", x)
        for i in range(len(self.model.links)):
            r = kin.X0[i].r
            v = kin.point_velocity(i, r)
            for a, x, vx in zip("xyz", r, v):
                reg.set(f"link{i}.{a}", x)
                reg.set(f"link{i}.v{a}", vx)
        for g in self.model.world_geometry:
            deepest = None
            for c in contacts:
                if c.source == g.name and (deepest is None or ops.value(c.penetration) > ops.value(deepest.penetration)):
                    deepest = c
            if deepest is None:
                n, d = (0.0, 0.0, 0.0), 0.0
            else:
                n, d = deepest.normal, deepest.penetration
            reg.set(f"{g.name}.normal_x", n[0])
            reg.set(f"{g.name}.normal_y", n[1])
            reg.set(f"{g.name}.normal_z", n[2])
            reg.set(f"{g.name}.penetration", d)
        return reg

    # ------------------------------------------------------------ rollout
    def rollout(self, state: JointState, steps: int, controls=None, check_finite: bool = True) -> list[JointState]:
        """States ``s_0 .. s_steps``; ``controls[k]`` (or ``controls(k, s_k)``) is applied at step ``k``."""
        out = [state]
        s = state
        for k in range(steps):
            if controls is None:
                u = None
            elif callable(controls):
                u = controls(k, s)
            else:
                u = controls[k]
            s = self.step(s, u)
            if check_finite:
                for x in s.qd:
                    if not math.isfinite(ops.value(x)):
                        raise DivergenceError(f"non-finite state at step {k + 1}", k + 1)
            out.append(s)
        return out


def simulate(model: MultiBody, state: JointState, steps: int, dt: float = 1e-3, controls=None, **kwargs) -> list[JointState]:
    return Simulator(model, dt, **kwargs).rollout(state, steps, controls)
