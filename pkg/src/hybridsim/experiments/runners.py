"""The experiment pipelines behind the CLI commands.

Each ``run_*`` function reads an :class:`ExperimentConfig`, writes its files
under ``out`` and returns the report it wrote. Reports hold no timestamps or
timings, so equal seeds give byte-identical files.
"""
from __future__ import annotations

import itertools
import json
import math
from pathlib import Path

import numpy as np

from hybridsim.contact import ContactParams, PenaltyParams
from hybridsim.estimation import (
    BasinHoppingConfig,
    ParameterBlock,
    SimulationSetup,
    Trajectory,
    TrajectoryDataset,
    TrajectoryLoss,
    basin_hopping,
    minimize_local,
    nn_names,
)
from hybridsim.experiments.config import ConfigError, ExperimentConfig
from hybridsim.experiments.generators import GroundTruthGenerator, generate_dataset, rollout_with_effect
from hybridsim.experiments.push import PushScene, planar_pose
from hybridsim.multibody.builders import floating_box, pendulum_chain
from hybridsim.multibody.model import JointState
from hybridsim.multibody.urdf import load_urdf_file
from hybridsim.neural import Augmentation, NetworkParameters, NeuralBlueprint
from hybridsim.scalar import GradientMode

MANIFEST = "manifest.json"


# ------------------------------------------------------------------ helpers

def _clean(obj):
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else repr(obj)
    if isinstance(obj, (np.floating,)):
        return _clean(float(obj))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [_clean(x) for x in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(x) for x in obj]
    if isinstance(obj, Path):
        return str(obj)
    return obj


def write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n")


def _is_push(cfg: ExperimentConfig) -> bool:
    return cfg.model.get("builtin") == "push"


def _push_scene(cfg: ExperimentConfig) -> PushScene:
    kw = {k: v for k, v in cfg.model.items() if k not in ("builtin", "speed_range", "offset_range", "duration")}
    if "size" in kw:
        kw["size"] = tuple(kw["size"])
    return PushScene(**kw)


def build_model(cfg: ExperimentConfig):
    spec = cfg.model
    if "urdf" in spec:
        model = load_urdf_file(cfg.existing(spec["urdf"])).model
        if "gravity" in spec:
            model.gravity = tuple(spec["gravity"])
        return model
    kind = spec.get("builtin")
    if kind == "pendulum":
        return pendulum_chain(
            spec["lengths"],
            spec.get("masses"),
            damping=spec.get("damping"),
            stiffness=spec.get("stiffness"),
            gravity=tuple(spec.get("gravity", (0.0, 0.0, -9.81))),
            bob_radius=spec.get("bob_radius"),
            ground_height=spec.get("ground_height"),
        )
    if kind == "box":
        return floating_box(spec.get("mass", 1.0), tuple(spec.get("size", (0.1, 0.1, 0.1))), spec.get("grid_spacing"),
                            spec.get("sphere_radius"), contact=spec.get("contact", "ncp"))
    if kind == "push":
        return _push_scene(cfg).model()
    raise ConfigError(f"unknown model spec {spec!r}")


def make_setup(cfg: ExperimentConfig, model, augmentation=None) -> SimulationSetup:
    return SimulationSetup(model, cfg.dt, ContactParams(**cfg.contact), PenaltyParams(**cfg.penalty), augmentation)


def _push_setups(cfg, pushes, augmentation=None) -> list:
    scene = _push_scene(cfg)
    out = []
    for p in pushes:
        m = scene.model(offset=p["offset"], speed=p["speed"], duration=p["duration"])
        base = scene.setup(m, cfg.dt)
        out.append(SimulationSetup(m, cfg.dt, base.contact, base.penalty, augmentation))
    return out


def load_dataset(path: Path) -> tuple[TrajectoryDataset, dict]:
    path = Path(path)
    mpath = path / MANIFEST
    if not mpath.exists():
        raise ConfigError(f"{path} has no {MANIFEST}")
    manifest = json.loads(mpath.read_text())
    trajs = [Trajectory.load(path / f) for f in manifest["files"]]
    return TrajectoryDataset(trajs, float(manifest["dt"]), manifest), manifest


def _generator(cfg: ExperimentConfig, nv: int) -> GroundTruthGenerator:
    spec = dict(cfg.dataset or {"kind": "none"})
    if "medium" in spec:
        return GroundTruthGenerator.drag_for_medium(spec["medium"], nv, int(spec.get("seed", 0)))
    return GroundTruthGenerator.from_dict(spec)


def _initial_state(cfg, model) -> JointState | None:
    if cfg.initial_state is None:
        return None
    s = model.zero_state()
    s.q = [float(x) for x in cfg.initial_state.get("q", s.q)]
    s.qd = [float(x) for x in cfg.initial_state.get("qd", s.qd)]
    if len(s.q) != model.nq or len(s.qd) != model.nv:
        raise ConfigError("initial_state does not match the model")
    return s


# ------------------------------------------------------------------ gen-data

def run_gen_data(cfg: ExperimentConfig, seed: int, out: Path) -> dict:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    model = build_model(cfg)
    gen = _generator(cfg, model.nv)
    manifest = {
        "dt": cfg.dt,
        "steps": cfg.steps,
        "seed": seed,
        "model": cfg.model,
        "generator": gen.to_dict(),
        "controls": cfg.controls,
        "initial_state": cfg.initial_state,
        "initial_spread": cfg.initial_spread,
        "truth": cfg.truth,
        "tag": (cfg.dataset or {}).get("medium") or (cfg.dataset or {}).get("tag") or gen.kind,
    }
    if _is_push(cfg):
        rng = np.random.default_rng(seed)
        lo_o, hi_o = cfg.model.get("offset_range", (-0.02, 0.02))
        lo_s, hi_s = cfg.model.get("speed_range", (0.2, 0.5))
        duration = float(cfg.model.get("duration", 0.1))
        pushes = [
            {"offset": float(rng.uniform(lo_o, hi_o)), "speed": float(rng.uniform(lo_s, hi_s)), "duration": duration}
            for _ in range(cfg.trajectories)
        ]
        scene = _push_scene(cfg)
        trajs = []
        for setup in _push_setups(cfg, pushes):
            zeros = [[0.0] * setup.model.nv] * cfg.steps
            states = rollout_with_effect(setup, gen, scene.initial_state(setup.model), zeros)
            trajs.append(Trajectory.from_states(states, zeros))
        data = TrajectoryDataset(trajs, cfg.dt)
        manifest["pushes"] = pushes
    else:
        data = generate_dataset(
            make_setup(cfg, model),
            gen,
            cfg.trajectories,
            cfg.steps,
            seed=seed,
            control_std=float(cfg.controls.get("std", 0.5)),
            hold=int(cfg.controls.get("hold", 20)),
            initial_spread=cfg.initial_spread,
            initial_state=_initial_state(cfg, model),
        )
    files = []
    for i, tr in enumerate(data):
        name = f"traj_{i:03d}.csv"
        tr.save(out / name)
        files.append(name)
    manifest["files"] = files
    write_json(out / MANIFEST, manifest)
    return manifest


# ------------------------------------------------------------------ identify

def _grid_points(cfg, names) -> list:
    grid = cfg.grid or {}
    if "points" in grid:
        return [list(map(float, p)) for p in grid["points"]]
    if "axes" in grid:
        return [list(p) for p in itertools.product(*[[float(v) for v in ax] for ax in grid["axes"]])]
    return [[float(p.get("init", 0.5 * (p["lo"] + p["hi"]))) for p in cfg.parameters]]


def run_identify(cfg: ExperimentConfig, seed: int, out: Path) -> dict:
    if cfg.dataset is None:
        raise ConfigError("identify needs a dataset directory")
    data, manifest = load_dataset(cfg.existing(cfg.dataset))
    if not cfg.parameters:
        raise ConfigError("identify needs a parameter list")
    names = [p["name"] for p in cfg.parameters]
    bounds = [(float(p.get("lo", -math.inf)), float(p.get("hi", math.inf))) for p in cfg.parameters]
    model = build_model(cfg)
    setup = make_setup(cfg, model)
    if cfg.training_cutoff is not None:
        data = data.truncate(cfg.training_cutoff)
    objective = TrajectoryLoss(setup, names, data)
    bh = BasinHoppingConfig(**{**cfg.basin_hopping, "seed": seed})
    truth_map = cfg.truth or manifest.get("truth")
    truth = [float(truth_map[n]) for n in names] if truth_map else None
    tol = float((cfg.grid or {}).get("tolerance", 0.05))
    runs = []
    for init in _grid_points(cfg, names):
        start = ParameterBlock(names, np.clip(init, [b[0] for b in bounds], [b[1] for b in bounds]), bounds)
        res = basin_hopping(objective, start, bh)
        row = {"init": init, "final": res.params.values, "loss": res.value,
               "history": res.history, "local_runs": res.runs, "diverged": res.diverged}
        if truth is not None:
            err = float(np.linalg.norm(res.params.values - np.array(truth)))
            row["error"] = err
            row["success"] = err < tol
        runs.append(row)
    best = min(runs, key=lambda r: r["loss"])
    report = {
        "command": "identify",
        "parameters": names,
        "bounds": bounds,
        "basin_hopping": bh.__dict__,
        "truth": truth,
        "tolerance": tol,
        "runs": runs,
        "best": {"params": dict(zip(names, best["final"])), "loss": best["loss"]},
    }
    if truth is not None:
        report["success_rate"] = sum(r["success"] for r in runs) / len(runs)
    write_json(Path(out) / "report.json", report)
    return report


# ------------------------------------------------------------ augmentation

def load_blueprints(cfg: ExperimentConfig, seed: int) -> list[NeuralBlueprint]:
    out = []
    for i, item in enumerate(cfg.blueprints):
        if isinstance(item, str):
            bp = NeuralBlueprint.load(cfg.existing(item))
        else:
            spec = dict(item)
            init = spec.pop("init_scale", 1.0)
            bp = NeuralBlueprint.from_dict(spec)
            if "parameters" not in spec:
                bp = NeuralBlueprint(bp.target, bp.spec, NetworkParameters.random(bp.spec, [seed, i], init))
        out.append(bp)
    if not out:
        raise ConfigError("no blueprints declared")
    return out


def _trajectory_setups(cfg, data, manifest, model, aug):
    if _is_push(cfg):
        return _push_setups(cfg, manifest["pushes"], aug)
    return None


def _final_pose_error(setups, data, names, values) -> float:
    errs = []
    for s, tr in zip(setups, data):
        sim = (s.bind(names, values) if names else s).simulator()
        st = tr.state(0)
        for k in range(tr.steps):
            st = sim.step(st, tr.tau[k])
        x, y, _ = planar_pose(st)
        errs.append(math.hypot(x - tr.q[-1][0], y - tr.q[-1][1]))
    return float(np.mean(errs))


def _train(cfg, seed, out, discover: bool) -> dict:
    if cfg.dataset is None:
        raise ConfigError("a dataset directory is required")
    data, manifest = load_dataset(cfg.existing(cfg.dataset))
    model = build_model(cfg)
    bps = load_blueprints(cfg, seed)
    aug = Augmentation(bps)
    hybrid = make_setup(cfg, model, aug)
    analytic = make_setup(cfg, model)
    if _is_push(cfg):
        hybrid_setups = _push_setups(cfg, manifest["pushes"], aug)
        analytic_setups = _push_setups(cfg, manifest["pushes"])
        hybrid, analytic = hybrid_setups[0], analytic_setups[0]
    else:
        hybrid_setups = analytic_setups = None
    hybrid.simulator()  # rejects unknown targets early
    names = nn_names(aug)
    cutoff = cfg.training_cutoff if cfg.training_cutoff is not None else data.trajectories[0].steps
    loss_cfg = dict(cfg.loss)
    kind = loss_cfg.get("kind", "mse")
    if discover:
        if kind != "spinn":
            raise ConfigError("discover needs loss.kind = spinn")
        spinn = (float(loss_cfg.get("kappa", 1e-2)), float(loss_cfg.get("lambda", 1e-3)))
        train = TrajectoryLoss(hybrid, names, data, kind=loss_cfg.get("rollout", "one-step"), horizon=cutoff,
                               spinn=spinn, per_dt=bool(loss_cfg.get("per_dt", True)),
                               reduction=loss_cfg.get("reduction", "sum"), setups=hybrid_setups)
    else:
        spinn = (float(loss_cfg["kappa"]), float(loss_cfg["lambda"])) if kind == "spinn" else None
        train = TrajectoryLoss(hybrid, names, data, kind=loss_cfg.get("rollout", "rollout"), horizon=cutoff,
                               spinn=spinn, setups=hybrid_setups)
    x0 = np.array([float(v) for v in aug.flat_parameters()])
    opt = dict(cfg.optimizer)
    steps = int(opt.get("steps", 50))
    initial_loss = float(train(list(x0)))
    if steps > 0:
        res = minimize_local(train, ParameterBlock(names, x0, kind="neural"), opt.get("method", "lbfgs"), steps,
                             lr=float(opt.get("lr", 1e-2)), mode=GradientMode(opt.get("mode", "reverse-tape")))
        x, final_loss = res.params.values, res.value
        evaluations = res.evaluations
    else:
        x, final_loss, evaluations = x0, initial_loss, 0
    trained = aug.with_flat(list(x))
    bp_dir = Path(out) / "blueprints"
    files = []
    for bp in trained.blueprints:
        name = f"{bp.target}.json"
        bp.save(_ensure(bp_dir) / name)
        files.append(f"blueprints/{name}")
    full_h = TrajectoryLoss(hybrid, names, data, setups=hybrid_setups)
    full_a = TrajectoryLoss(analytic, [], data, setups=analytic_setups)
    report = {
        "command": "discover" if discover else "augment-train",
        "dataset": manifest.get("tag"),
        "training_cutoff": cutoff,
        "optimizer": opt,
        "loss": loss_cfg,
        "parameter_count": len(x0),
        "initial_training_loss": initial_loss,
        "final_training_loss": final_loss,
        "evaluations": evaluations,
        "blueprints": files,
        "hybrid_mse": float(full_h(list(x))),
        "analytical_mse": float(full_a([])),
    }
    report["mse_ratio"] = report["hybrid_mse"] / report["analytical_mse"] if report["analytical_mse"] > 0 else None
    if _is_push(cfg):
        report["hybrid_final_pose_error"] = _final_pose_error(hybrid_setups, data, names, list(x))
        report["analytical_final_pose_error"] = _final_pose_error(analytic_setups, data, [], [])
        report["pose_error_ratio"] = report["hybrid_final_pose_error"] / report["analytical_final_pose_error"]
    if discover:
        floor = float(loss_cfg.get("floor", 1e-3))
        share = float(loss_cfg.get("active_share", 0.1))
        sparsity = {}
        for bp in trained.blueprints:
            cols = bp.parameters.column_l1()
            top = max(cols)
            sparsity[bp.target] = {
                "column_l1": dict(zip(bp.spec.input_names, cols)),
                "active": [n for n, c in zip(bp.spec.input_names, cols) if c > share * top and c > floor],
            }
        report["sparsity"] = sparsity
        report["active_inputs"] = sorted({n for s in sparsity.values() for n in s["active"]})
    write_json(Path(out) / "report.json", report)
    return report


def _ensure(p: Path) -> Path:
    p.mkdir(parents=True, exist_ok=True)
    return p


def run_augment_train(cfg: ExperimentConfig, seed: int, out: Path) -> dict:
    return _train(cfg, seed, out, discover=False)


def run_discover(cfg: ExperimentConfig, seed: int, out: Path) -> dict:
    return _train(cfg, seed, out, discover=True)


# ------------------------------------------------------------------ simulate

def run_simulate(cfg: ExperimentConfig, seed: int, out: Path) -> dict:
    out = Path(out)
    model = build_model(cfg)
    setup = make_setup(cfg, model)
    if cfg.blueprints:
        setup = make_setup(cfg, model, Augmentation(load_blueprints(cfg, seed)))
    sim = setup.simulator()
    state = _initial_state(cfg, model) or model.zero_state()
    rng = np.random.default_rng(seed)
    from hybridsim.experiments.generators import random_controls

    std = float(cfg.controls.get("std", 0.0))
    controls = random_controls(model.nv, cfg.steps, rng, std, int(cfg.controls.get("hold", 20))) if std > 0 else [[0.0] * model.nv] * cfg.steps
    states = [state]
    residual = 0.0
    contacts = 0
    for u in controls:
        state = sim.step(state, u)
        states.append(state)
        if sim.last_residuals:
            residual = max(residual, max(abs(r) for r in sim.last_residuals))
        contacts = max(contacts, len(sim.last_contacts))
    tr = Trajectory.from_states(states, controls)
    _ensure(out)
    tr.save(out / "trajectory.csv")
    report = {
        "command": "simulate",
        "steps": cfg.steps,
        "dt": cfg.dt,
        "final_q": tr.q[-1],
        "final_qd": tr.qd[-1],
        "max_contacts": contacts,
        "max_complementarity_residual": residual,
    }
    write_json(out / "report.json", report)
    return report
