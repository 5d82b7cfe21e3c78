"""Trajectory datasets and their CSV files."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

from hybridsim.multibody.model import JointState


class DatasetError(ValueError):
    pass


@dataclass
class Trajectory:
    """States ``(q_k, qd_k)`` at ``times[k]`` and the control applied from ``times[k]`` on."""

    times: list
    q: list
    qd: list
    tau: list

    def __post_init__(self):
        n = len(self.times)
        if not (len(self.q) == len(self.qd) == len(self.tau) == n):
            raise DatasetError("times, q, qd and tau must have the same number of rows")
        if n == 0:
            raise DatasetError("empty trajectory")

    def __len__(self) -> int:
        return len(self.times)

    @property
    def steps(self) -> int:
        return len(self.times) - 1

    def state(self, k: int) -> JointState:
        return JointState(list(self.q[k]), list(self.qd[k]), self.times[k])

    def truncate(self, steps: int) -> "Trajectory":
        k = steps + 1
        return Trajectory(self.times[:k], self.q[:k], self.qd[:k], self.tau[:k])

    @classmethod
    def from_states(cls, states, controls) -> "Trajectory":
        controls = list(controls)
        if len(controls) == len(states) - 1:
            controls.append(controls[-1] if controls else [0.0] * len(states[0].qd))
        return cls(
            [float(s.time) for s in states],
            [[float(x) for x in s.q] for s in states],
            [[float(x) for x in s.qd] for s in states],
            [[float(x) for x in u] for u in controls],
        )

    # ------------------------------------------------------------ CSV
    def to_csv(self) -> str:
        nq, nv, nu = len(self.q[0]), len(self.qd[0]), len(self.tau[0])
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t"] + [f"q{i}" for i in range(nq)] + [f"qd{i}" for i in range(nv)] + [f"tau{i}" for i in range(nu)])
        for t, q, qd, u in zip(self.times, self.q, self.qd, self.tau):
            w.writerow([repr(float(x)) for x in (t, *q, *qd, *u)])
        return buf.getvalue()

    def save(self, path) -> None:
        Path(path).write_text(self.to_csv())

    @classmethod
    def from_csv(cls, text: str) -> "Trajectory":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows:
            raise DatasetError("empty CSV")
        header = rows[0]
        if not header or header[0] != "t":
            raise DatasetError("first column must be 't'")
        cols = {"q": [], "qd": [], "tau": []}
        for j, name in enumerate(header[1:], start=1):
            for prefix in ("tau", "qd", "q"):
                if name.startswith(prefix) and name[len(prefix):].isdigit():
                    cols[prefix].append(j)
                    break
            else:
                raise DatasetError(f"unknown column {name!r}")
        times, q, qd, tau = [], [], [], []
        for r in rows[1:]:
            if not r:
                continue
            vals = [float(x) for x in r]
            times.append(vals[0])
            q.append([vals[j] for j in cols["q"]])
            qd.append([vals[j] for j in cols["qd"]])
            tau.append([vals[j] for j in cols["tau"]])
        return cls(times, q, qd, tau)

    @classmethod
    def load(cls, path) -> "Trajectory":
        return cls.from_csv(Path(path).read_text())


@dataclass
class TrajectoryDataset:
    trajectories: list
    dt: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.dt > 0:
            raise DatasetError("dt must be positive")
        for i, tr in enumerate(self.trajectories):
            for a, b in zip(tr.times, tr.times[1:]):
                if not math.isclose(b - a, self.dt, rel_tol=1e-6, abs_tol=1e-12):
                    raise DatasetError(f"trajectory {i} is not sampled at dt={self.dt}")

    def __len__(self) -> int:
        return len(self.trajectories)

    def __iter__(self):
        return iter(self.trajectories)

    def truncate(self, steps: int) -> "TrajectoryDataset":
        return TrajectoryDataset([t.truncate(steps) for t in self.trajectories], self.dt, dict(self.meta))

    def check_model(self, model) -> None:
        for i, tr in enumerate(self.trajectories):
            if len(tr.q[0]) != model.nq or len(tr.qd[0]) != model.nv:
                raise DatasetError(f"trajectory {i} has state size ({len(tr.q[0])}, {len(tr.qd[0])}), model has ({model.nq}, {model.nv})")
