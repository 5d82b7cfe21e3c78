"""Experiment configuration files (YAML or JSON)."""
from __future__ import annotations

from dataclasses import dataclass, field, fields
from pathlib import Path

import yaml


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    """Settings shared by the CLI commands.

    ``model`` is ``{"urdf": path}`` or a built-in model
    (``{"builtin": "pendulum", "lengths": [...]}``, ``{"builtin": "push", ...}``).
    ``dataset`` is a dataset directory, or for ``gen-data`` the ground-truth
    generator spec. Relative paths resolve against the config file's folder.
    """

    model: dict = field(default_factory=lambda: {"builtin": "pendulum", "lengths": [1.0, 1.0]})
    dataset: object = None
    blueprints: list = field(default_factory=list)
    optimizer: dict = field(default_factory=lambda: {"method": "lbfgs", "steps": 50, "lr": 1e-2})
    basin_hopping: dict = field(default_factory=dict)
    loss: dict = field(default_factory=lambda: {"kind": "mse"})
    dt: float = 1e-3
    steps: int = 1000
    training_cutoff: int | None = None
    trajectories: int = 1
    controls: dict = field(default_factory=lambda: {"std": 0.5, "hold": 20})
    initial_state: dict | None = None
    initial_spread: float = 0.5
    parameters: list = field(default_factory=list)
    grid: dict | None = None
    truth: dict | None = None
    benchmark: dict = field(default_factory=dict)
    contact: dict = field(default_factory=dict)
    penalty: dict = field(default_factory=dict)
    base_dir: Path = field(default_factory=Path.cwd)

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigError("dt must be positive")
        if self.steps < 0:
            raise ConfigError("steps must be non-negative")
        if self.training_cutoff is not None and self.training_cutoff > self.steps:
            raise ConfigError(f"training_cutoff {self.training_cutoff} exceeds steps {self.steps}")
        if self.trajectories < 1:
            raise ConfigError("trajectories must be at least 1")

    @classmethod
    def from_dict(cls, d: dict, base_dir=None) -> "ExperimentConfig":
        d = dict(d or {})
        d = {k.replace("-", "_"): v for k, v in d.items()}
        known = {f.name for f in fields(cls)} - {"base_dir"}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d, base_dir=Path(base_dir) if base_dir else Path.cwd())

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file {path} does not exist")
        data = yaml.safe_load(path.read_text())
        if data is not None and not isinstance(data, dict):
            raise ConfigError("config must be a mapping")
        return cls.from_dict(data or {}, path.parent)

    def path(self, p) -> Path:
        p = Path(p)
        return p if p.is_absolute() else self.base_dir / p

    def existing(self, p) -> Path:
        out = self.path(p)
        if not out.exists():
            raise ConfigError(f"path {out} does not exist")
        return out
