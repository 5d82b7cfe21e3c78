"""Neural scalars: named simulation quantities with an additive MLP correction.

A blueprint names the augmented quantity (its *target*), the registered
variables the network reads and the network weights. During a step the
simulator writes every named quantity to a :class:`VariableRegistry`; the
augmented value is ``analytical + MLP(inputs)``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from hybridsim.scalar import ops

ACTIVATIONS = ("elu", "tanh", "identity")


class ConfigurationError(ValueError):
    pass


@dataclass(frozen=True)
class MlpSpec:
    input_names: tuple
    hidden: tuple = ()
    output_dim: int = 1
    activation: str = "elu"

    def __post_init__(self):
        object.__setattr__(self, "input_names", tuple(self.input_names))
        object.__setattr__(self, "hidden", tuple(int(h) for h in self.hidden))
        if not self.input_names:
            raise ValueError("an MLP needs at least one input")
        if len(set(self.input_names)) != len(self.input_names):
            raise ValueError(f"duplicate input names in {self.input_names}")
        if any(h < 1 for h in self.hidden) or self.output_dim < 1:
            raise ValueError("layer widths must be at least 1")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")

    @property
    def layer_sizes(self) -> list[int]:
        return [len(self.input_names), *self.hidden, self.output_dim]


def count_parameters(spec: MlpSpec) -> int:
    sizes = spec.layer_sizes
    return sum(a * b + b for a, b in zip(sizes[:-1], sizes[1:]))


@dataclass
class NetworkParameters:
    """Per-layer weights (``out x in`` nested lists) and biases.

    The flat layout is, layer by layer, the weights in row-major order
    followed by the biases.
    """

    weights: list
    biases: list

    @classmethod
    def zeros(cls, spec: MlpSpec) -> "NetworkParameters":
        return cls.unflatten(spec, [0.0] * count_parameters(spec))

    @classmethod
    def random(cls, spec: MlpSpec, seed=0, scale: float = 1.0) -> "NetworkParameters":
        """Uniform in ``[-r, r]`` with ``r = scale / sqrt(fan_in)``."""
        rng = np.random.default_rng(seed)
        sizes = spec.layer_sizes
        weights, biases = [], []
        for n_in, n_out in zip(sizes[:-1], sizes[1:]):
            r = scale / math.sqrt(n_in)
            weights.append(rng.uniform(-r, r, size=(n_out, n_in)).tolist())
            biases.append(rng.uniform(-r, r, size=n_out).tolist())
        return cls(weights, biases)

    @classmethod
    def unflatten(cls, spec: MlpSpec, flat) -> "NetworkParameters":
        flat = list(flat)
        if len(flat) != count_parameters(spec):
            raise ValueError(f"expected {count_parameters(spec)} parameters, got {len(flat)}")
        sizes = spec.layer_sizes
        weights, biases = [], []
        k = 0
        for n_in, n_out in zip(sizes[:-1], sizes[1:]):
            weights.append([flat[k + r * n_in:k + (r + 1) * n_in] for r in range(n_out)])
            k += n_in * n_out
            biases.append(flat[k:k + n_out])
            k += n_out
        return cls(weights, biases)

    def flatten(self) -> list:
        out = []
        for W, b in zip(self.weights, self.biases):
            for row in W:
                out.extend(row)
            out.extend(b)
        return out

    def first_layer_weights(self) -> list:
        return [w for row in self.weights[0] for w in row]

    def upper_layer_weights(self) -> list:
        return [w for W in self.weights[1:] for row in W for w in row]

    def column_l1(self) -> list[float]:
        """L1 mass of each input's first-layer weight column."""
        W = self.weights[0]
        return [sum(abs(ops.value(row[j])) for row in W) for j in range(len(W[0]))]


def _activate(kind: str, x):
    if kind == "elu":
        return ops.elu(x)
    if kind == "tanh":
        return ops.tanh(x)
    return x


def mlp_forward(spec: MlpSpec, params: NetworkParameters, inputs) -> list:
    """Affine layers with ``spec.activation`` after each hidden layer and a linear output."""
    if len(inputs) != len(spec.input_names):
        raise ValueError(f"MLP expects {len(spec.input_names)} inputs, got {len(inputs)}")
    x = list(inputs)
    last = len(params.weights) - 1
    for li, (W, b) in enumerate(zip(params.weights, params.biases)):
        if len(W[0]) != len(x):
            raise ValueError(f"layer {li} expects {len(W[0])} inputs, got {len(x)}")
        y = []
        for row, bias in zip(W, b):
            s = bias
            for w, xi in zip(row, x):
                s = s + w * xi
            y.append(s if li == last else _activate(spec.activation, s))
        x = y
    return x


@dataclass
class NeuralBlueprint:
    """Additive network correction of the quantity named ``target``.

    Networks with several outputs augment ``target0``, ``target1``, ...
    """

    target: str
    spec: MlpSpec
    parameters: NetworkParameters | None = None

    def __post_init__(self):
        if self.parameters is None:
            self.parameters = NetworkParameters.zeros(self.spec)
        flat = self.parameters.flatten()
        if len(flat) != count_parameters(self.spec):
            raise ValueError(f"parameters do not match the architecture of {self.target!r}")

    @property
    def targets(self) -> list[str]:
        if self.spec.output_dim == 1:
            return [self.target]
        return [f"{self.target}{k}" for k in range(self.spec.output_dim)]

    @property
    def size(self) -> int:
        return count_parameters(self.spec)

    def with_flat(self, flat) -> "NeuralBlueprint":
        return NeuralBlueprint(self.target, self.spec, NetworkParameters.unflatten(self.spec, flat))

    def to_dict(self) -> dict:
        return {
            "target": self.target,
            "inputs": list(self.spec.input_names),
            "hidden": list(self.spec.hidden),
            "outputs": self.spec.output_dim,
            "activation": self.spec.activation,
            "parameters": [float(ops.value(x)) for x in self.parameters.flatten()],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NeuralBlueprint":
        spec = MlpSpec(tuple(d["inputs"]), tuple(d.get("hidden", ())), int(d.get("outputs", 1)), d.get("activation", "elu"))
        params = d.get("parameters")
        return cls(d["target"], spec, None if params is None else NetworkParameters.unflatten(spec, [float(x) for x in params]))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path) -> "NeuralBlueprint":
        return cls.from_dict(json.loads(Path(path).read_text()))


class VariableRegistry:
    """Named scalar values visible to blueprints during one step."""

    def __init__(self):
        self._values: dict = {}

    def set(self, name: str, value) -> None:
        self._values[name] = value

    def update(self, items) -> None:
        self._values.update(items)

    def get(self, name: str):
        try:
            return self._values[name]
        except KeyError:
            raise ConfigurationError(f"variable {name!r} has not been written in this step") from None

    def __contains__(self, name) -> bool:
        return name in self._values

    def names(self) -> list[str]:
        return list(self._values)

    def clear(self) -> None:
        self._values.clear()


def resolve_neural_scalar(registry: VariableRegistry, blueprint: NeuralBlueprint, analytical, output: int = 0):
    inputs = [registry.get(n) for n in blueprint.spec.input_names]
    return analytical + mlp_forward(blueprint.spec, blueprint.parameters, inputs)[output]


class Augmentation:
    """A set of blueprints with unique targets, evaluated lazily per step."""

    def __init__(self, blueprints=()):
        self.blueprints: list[NeuralBlueprint] = list(blueprints)
        self._owner: dict[str, tuple[int, int]] = {}
        for bi, bp in enumerate(self.blueprints):
            for k, t in enumerate(bp.targets):
                if t in self._owner:
                    raise ConfigurationError(f"target {t!r} is augmented twice")
                self._owner[t] = (bi, k)
        self._cache: dict[int, list] = {}

    def __bool__(self) -> bool:
        return bool(self.blueprints)

    def targets(self) -> list[str]:
        return list(self._owner)

    def has(self, target: str) -> bool:
        return target in self._owner

    def begin_step(self) -> None:
        self._cache.clear()

    def resolve(self, registry: VariableRegistry, target: str, analytical):
        where = self._owner.get(target)
        if where is None:
            return analytical
        bi, k = where
        out = self._cache.get(bi)
        if out is None:
            bp = self.blueprints[bi]
            out = mlp_forward(bp.spec, bp.parameters, [registry.get(n) for n in bp.spec.input_names])
            self._cache[bi] = out
        return analytical + out[k]

    @property
    def size(self) -> int:
        return sum(bp.size for bp in self.blueprints)

    def flat_parameters(self) -> list:
        out = []
        for bp in self.blueprints:
            out.extend(bp.parameters.flatten())
        return out

    def with_flat(self, flat) -> "Augmentation":
        flat = list(flat)
        if len(flat) != self.size:
            raise ValueError(f"expected {self.size} parameters, got {len(flat)}")
        out, k = [], 0
        for bp in self.blueprints:
            out.append(bp.with_flat(flat[k:k + bp.size]))
            k += bp.size
        return Augmentation(out)


def spinn_loss(data_error, params, kappa: float, lam: float):
    """Data error plus ``κ·‖W_first‖₁ + λ·‖W_upper‖₂²``; biases are not penalized.

    ``params`` is one :class:`NetworkParameters` or a list of them.
    """
    if kappa < 0 or lam < 0:
        raise ValueError("kappa and lambda must be non-negative")
    if isinstance(params, NetworkParameters):
        params = [params]
    l1 = 0.0
    l2 = 0.0
    for p in params:
        for w in p.first_layer_weights():
            l1 = l1 + ops.fabs(w)
        for w in p.upper_layer_weights():
            l2 = l2 + w * w
    return data_error + kappa * l1 + lam * l2
