"""Named, bounded parameter vectors and how they bind onto a simulation."""
from __future__ import annotations

import re
from dataclasses import dataclass, field, replace

import numpy as np

from hybridsim.contact import ContactParams, PenaltyParams
from hybridsim.multibody.model import MultiBody
from hybridsim.neural import Augmentation
from hybridsim.scalar import ops
from hybridsim.spatial import SpatialInertia, SpatialTransform, scale3


class BindingError(KeyError):
    pass


@dataclass
class ParameterBlock:
    names: list
    values: np.ndarray
    bounds: list = None
    kind: str = "analytical"

    def __post_init__(self):
        self.names = list(self.names)
        self.values = np.asarray(self.values, dtype=float).copy()
        if self.bounds is None:
            self.bounds = [(-np.inf, np.inf)] * len(self.names)
        self.bounds = [(float(lo), float(hi)) for lo, hi in self.bounds]
        if not (len(self.names) == len(self.values) == len(self.bounds)):
            raise ValueError("names, values and bounds must have the same length")
        if self.kind not in ("analytical", "neural"):
            raise ValueError(f"unknown parameter kind {self.kind!r}")
        for n, v, (lo, hi) in zip(self.names, self.values, self.bounds):
            if not lo <= v <= hi:
                raise ValueError(f"{n}={v} lies outside [{lo}, {hi}]")

    def __len__(self) -> int:
        return len(self.names)

    @property
    def lower(self) -> np.ndarray:
        return np.array([b[0] for b in self.bounds])

    @property
    def upper(self) -> np.ndarray:
        return np.array([b[1] for b in self.bounds])

    def project(self, x) -> np.ndarray:
        return np.clip(np.asarray(x, dtype=float), self.lower, self.upper)

    def with_values(self, x) -> "ParameterBlock":
        return replace(self, values=self.project(x))

    def as_dict(self) -> dict:
        return {n: float(v) for n, v in zip(self.names, self.values)}


_LINK = re.compile(r"link(\d+)\.(mass|length)$")
_JOINT = re.compile(r"joint(\d+)\.(damping|stiffness)$")
_NN = re.compile(r"nn\.(\d+)$")
_CONTACT = {"contact.mu": "mu", "contact.alpha": "alpha", "contact.beta": "beta", "contact.cfm": "cfm"}
_PENALTY = {"penalty.stiffness": "stiffness", "penalty.damping": "damping", "penalty.smoothing_velocity": "smoothing_velocity"}


@dataclass
class SimulationSetup:
    model: MultiBody
    dt: float
    contact: ContactParams = field(default_factory=ContactParams)
    penalty: PenaltyParams = field(default_factory=PenaltyParams)
    augmentation: Augmentation | None = None
    pgs_iterations: int = 50

    def simulator(self):
        from hybridsim.simulation import Simulator

        return Simulator(self.model, self.dt, self.contact, self.penalty, self.augmentation, self.pgs_iterations)

    def bind(self, names, values) -> "SimulationSetup":
        """Copy of this setup with the named parameters replaced by ``values``.

        Names: ``link{i}.mass``; ``link{i}.length`` (rescales the link's
        centre-of-mass offset and its child joint origins to the given norm);
        ``joint{i}.damping`` and ``joint{i}.stiffness``; ``contact.mu|alpha|beta|cfm``;
        ``penalty.stiffness|damping|smoothing_velocity``; ``nn.{k}`` (entry ``k``
        of the flattened augmentation parameters).
        """
        model = self.model.copy()
        contact = replace(self.contact)
        penalty = self.penalty
        pen_updates = {}
        nn_updates = {}
        for name, v in zip(names, values):
            m = _LINK.match(name)
            if m:
                i = int(m.group(1))
                self._check_link(i, name)
                if m.group(2) == "mass":
                    _set_mass(model, i, v)
                else:
                    _set_length(self.model, model, i, v)
                continue
            m = _JOINT.match(name)
            if m:
                i = int(m.group(1))
                if not 0 <= i < len(model.joints):
                    raise BindingError(name)
                setattr(model.joints[i], m.group(2), v)
                continue
            if name in _CONTACT:
                setattr(contact, _CONTACT[name], v)
                continue
            if name in _PENALTY:
                pen_updates[_PENALTY[name]] = v
                continue
            m = _NN.match(name)
            if m and self.augmentation is not None and int(m.group(1)) < self.augmentation.size:
                nn_updates[int(m.group(1))] = v
                continue
            raise BindingError(name)
        if pen_updates:
            penalty = replace(penalty, **pen_updates)
        aug = self.augmentation
        if nn_updates:
            flat = aug.flat_parameters()
            for k, v in nn_updates.items():
                flat[k] = v
            aug = aug.with_flat(flat)
        return SimulationSetup(model, self.dt, contact, penalty, aug, self.pgs_iterations)

    def _check_link(self, i, name):
        if not 0 <= i < len(self.model.links):
            raise BindingError(name)


def _set_mass(model, i, m):
    link = model.links[i]
    old = link.inertia
    k = m / old.mass if ops.value(old.mass) > 0 else 1.0
    inertia = tuple(tuple(k * x for x in row) for row in old.inertia)
    link.inertia = SpatialInertia(m, old.com, inertia)


def _set_length(base, model, i, length):
    com0 = base.links[i].inertia.com
    norm = sum(ops.value(x) ** 2 for x in com0) ** 0.5
    if norm == 0:
        raise BindingError(f"link{i}.length: link {i} has no centre-of-mass offset to rescale")
    s = length / norm
    old = model.links[i].inertia
    model.links[i].inertia = SpatialInertia(old.mass, scale3(s, com0), old.inertia)
    for j in base.children[i]:
        X = base.joints[j].X_tree
        model.joints[j].X_tree = SpatialTransform(X.E, scale3(s, X.r))


def nn_names(augmentation: Augmentation) -> list[str]:
    return [f"nn.{k}" for k in range(augmentation.size)]
