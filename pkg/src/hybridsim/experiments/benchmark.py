"""Gradient-engine benchmark: finite differences, forward duals and reverse tape.

Workloads: an MLP regression loss swept over parameter counts, a 5-link
pendulum hitting the ground (NCP contact) and a contact-free double pendulum.
"""
from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from hybridsim.estimation import SimulationSetup
from hybridsim.multibody.builders import pendulum_chain
from hybridsim.multibody.model import JointState
from hybridsim.neural import MlpSpec, NetworkParameters, count_parameters, mlp_forward
from hybridsim.scalar import GradientMode, GradientRequest, value_and_gradient

MODES = (GradientMode.FINITE_DIFFERENCE, GradientMode.FORWARD_DUAL, GradientMode.REVERSE_TAPE)


class GradientMismatch(AssertionError):
    pass


@dataclass
class Workload:
    name: str
    objective: object
    x: list

    @property
    def size(self) -> int:
        return len(self.x)


def mlp_workload(hidden: int, seed: int = 0, batch: int = 8) -> Workload:
    """Squared-error loss of a 4-input, one-hidden-layer network (``6 h + 1`` parameters)."""
    spec = MlpSpec(("x0", "x1", "x2", "x3"), (hidden,), 1, "tanh")
    rng = np.random.default_rng([seed, hidden])
    xs = rng.normal(size=(batch, 4)).tolist()
    ys = rng.normal(size=batch).tolist()
    theta = NetworkParameters.random(spec, [seed, hidden]).flatten()

    def f(p):
        net = NetworkParameters.unflatten(spec, p)
        total = 0.0
        for x, y in zip(xs, ys):
            e = mlp_forward(spec, net, x)[0] - y
            total = total + e * e
        return total / batch

    return Workload(f"mlp-{count_parameters(spec)}", f, theta)


def _pendulum_objective(model_fn, names, state, steps, dt):
    def f(p):
        setup = SimulationSetup(model_fn(), dt).bind(names, p)
        sim = setup.simulator()
        s = state
        for _ in range(steps):
            s = sim.step(s)
        total = 0.0
        for x in s.q:
            total = total + x * x
        for x in s.qd:
            total = total + x * x
        return total

    return f


def pendulum_contact_workload(steps: int = 5000, dt: float = 1e-3) -> Workload:
    """5-link chain with contact spheres swinging into a ground plane; gradient w.r.t. link masses."""
    lengths = [0.2] * 5
    names = [f"link{i}.mass" for i in range(5)]
    state = JointState([0.8, 0.3, 0.2, 0.1, 0.0], [0.0] * 5)
    f = _pendulum_objective(lambda: pendulum_chain(lengths, bob_radius=0.03, ground_height=-0.9), names, state, steps, dt)
    return Workload(f"pendulum5-contact-{steps}", f, [1.0, 0.8, 0.6, 0.4, 0.2])


def double_pendulum_workload(steps: int = 500, dt: float = 1e-3) -> Workload:
    names = ["link0.length", "link1.length", "link0.mass", "link1.mass"]
    state = JointState([1.0, 0.5], [0.0, 0.0])
    f = _pendulum_objective(lambda: pendulum_chain([1.0, 1.0]), names, state, steps, dt)
    return Workload(f"double-pendulum-{steps}", f, [1.0, 1.2, 1.0, 0.7])


def relative_difference(a, b) -> float:
    a, b = np.asarray(a), np.asarray(b)
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300))


def check_agreement(w: Workload, tol: float = 1e-4, fd_epsilon: float = 1e-6) -> dict:
    """Gradients in every mode; raises :class:`GradientMismatch` beyond ``tol`` relative to the tape."""
    grads = {m.value: value_and_gradient(GradientRequest(w.objective, w.x, m, fd_epsilon))[1] for m in MODES}
    ref = grads[GradientMode.REVERSE_TAPE.value]
    diffs = {m: relative_difference(g, ref) for m, g in grads.items()}
    worst = max(diffs.values())
    if not worst <= tol:
        raise GradientMismatch(f"{w.name}: gradient modes disagree (max relative difference {worst:.3e})")
    return {"gradients": grads, "differences": diffs}


def time_gradient(w: Workload, mode: GradientMode, repeats: int = 3) -> float:
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        value_and_gradient(GradientRequest(w.objective, w.x, mode))
        best = min(best, time.perf_counter() - t0)
    return best


def scaling_exponent(sizes, seconds) -> float:
    """Least-squares slope of log(time) against log(parameter count)."""
    return float(np.polyfit(np.log(sizes), np.log(seconds), 1)[0])


def run_benchmark(settings: dict, seed: int, out: Path) -> dict:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    widths = settings.get("mlp_hidden", [2, 5, 10, 20, 29])
    repeats = int(settings.get("repeats", 3))
    tol = float(settings.get("tolerance", 1e-4))
    workloads = [mlp_workload(h, seed) for h in widths]
    if settings.get("pendulum_contact_steps", 5000):
        workloads.append(pendulum_contact_workload(int(settings.get("pendulum_contact_steps", 5000))))
    if settings.get("double_pendulum_steps", 500):
        workloads.append(double_pendulum_workload(int(settings.get("double_pendulum_steps", 500))))

    rows = []
    report_rows = []
    for w in workloads:
        agree = check_agreement(w, tol)
        report_rows.append({"workload": w.name, "parameters": w.size,
                            "max_relative_difference": max(agree["differences"].values()),
                            "gradient": agree["gradients"][GradientMode.REVERSE_TAPE.value]})
        for m in MODES:
            rows.append({"workload": w.name, "parameters": w.size, "mode": m.value,
                         "seconds": time_gradient(w, m, repeats)})

    with open(out / "benchmark.csv", "w", newline="") as fh:
        wr = csv.DictWriter(fh, fieldnames=["workload", "parameters", "mode", "seconds"], lineterminator="\n")
        wr.writeheader()
        for r in rows:
            wr.writerow({**r, "seconds": f"{r['seconds']:.6e}"})

    mlp_rows = [r for r in rows if r["workload"].startswith("mlp-")]
    exps = {}
    for m in MODES:
        pts = [(r["parameters"], r["seconds"]) for r in mlp_rows if r["mode"] == m.value]
        if len(pts) >= 2:
            exps[m.value] = scaling_exponent(*zip(*pts))
    summary = {"mlp_scaling_exponents": exps}
    from hybridsim.experiments.runners import write_json

    write_json(out / "timing_summary.json", summary)
    report = {"command": "benchmark-ad", "tolerance": tol, "workloads": report_rows}
    write_json(out / "report.json", report)
    return {**report, **summary}
