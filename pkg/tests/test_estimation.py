import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hybridsim.estimation import (
    BasinHoppingConfig,
    BindingError,
    DatasetError,
    LossError,
    OptimizerError,
    ParameterBlock,
    SimulationSetup,
    Trajectory,
    TrajectoryDataset,
    TrajectoryLoss,
    basin_hopping,
    local_minimize,
    minimize_local,
    parallel_basin_hop,
    rollout_loss,
)
from hybridsim.multibody import JointState
from hybridsim.multibody.builders import pendulum_chain
from hybridsim.neural import Augmentation, MlpSpec, NetworkParameters, NeuralBlueprint
from hybridsim.scalar import GradientRequest, ops, value_and_gradient
from hybridsim.simulation import Simulator


def pendulum_data(lengths=(3.0, 4.0), masses=(1.0, 1.0), damping=(0.0, 0.0), dt=0.05, steps=60, starts=((1.0, 0.5),)):
    model = pendulum_chain(list(lengths), list(masses), damping=list(damping))
    sim = Simulator(model, dt)
    trs = []
    for q0 in starts:
        states = sim.rollout(JointState(list(q0), [0.0, 0.0]), steps)
        trs.append(Trajectory.from_states(states, [[0.0, 0.0]] * steps))
    return TrajectoryDataset(trs, dt)


def length_block(x, lo=0.5, hi=8.0):
    return ParameterBlock(["link0.length", "link1.length"], x, [(lo, hi)] * 2)


# ----------------------------------------------------------------- data

def test_csv_round_trip_is_lossless(tmp_path):
    data = pendulum_data(steps=10)
    tr = data.trajectories[0]
    path = tmp_path / "t.csv"
    tr.save(path)
    back = Trajectory.load(path)
    assert back == tr
    assert path.read_text().splitlines()[0] == "t,q0,q1,qd0,qd1,tau0,tau1"


def test_dataset_validation():
    tr = Trajectory([0.0, 0.1, 0.3], [[0.0]] * 3, [[0.0]] * 3, [[0.0]] * 3)
    with pytest.raises(DatasetError):
        TrajectoryDataset([tr], 0.1)
    with pytest.raises(DatasetError):
        Trajectory([0.0], [[0.0]], [], [[0.0]])
    good = TrajectoryDataset([Trajectory([0.0, 0.1], [[0.0]] * 2, [[0.0]] * 2, [[0.0]] * 2)], 0.1)
    with pytest.raises(DatasetError):
        good.check_model(pendulum_chain([1.0, 1.0]))


def test_bad_csv_header():
    with pytest.raises(DatasetError):
        Trajectory.from_csv("time,q0\n0,0\n")
    with pytest.raises(DatasetError):
        Trajectory.from_csv("t,zz0\n0,0\n")


# ----------------------------------------------------------- parameters

def test_parameter_block_bounds():
    with pytest.raises(ValueError):
        ParameterBlock(["a"], [2.0], [(0.0, 1.0)])
    p = ParameterBlock(["a", "b"], [0.5, 0.5], [(0, 1), (0, 1)])
    assert list(p.project([3.0, -1.0])) == [1.0, 0.0]
    assert p.with_values([3.0, 0.2]).as_dict() == {"a": 1.0, "b": 0.2}


def test_bind_names():
    spec = MlpSpec(("q0",), (), 1)
    setup = SimulationSetup(
        pendulum_chain([1.0, 2.0]), 0.01,
        augmentation=Augmentation([NeuralBlueprint("tau0", spec)]),
    )
    b = setup.bind(
        ["link1.mass", "link0.length", "joint1.damping", "contact.mu", "penalty.stiffness", "nn.1"],
        [3.0, 1.5, 0.2, 0.9, 500.0, 0.25],
    )
    assert b.model.links[1].inertia.mass == 3.0
    assert b.model.links[0].inertia.com == pytest.approx((0, 0, -1.5))
    assert b.model.joints[1].X_tree.r == pytest.approx((0, 0, -1.5))
    assert b.model.joints[1].damping == 0.2
    assert b.contact.mu == 0.9 and b.penalty.stiffness == 500.0
    assert b.augmentation.flat_parameters() == [0.0, 0.25]
    # the original setup is untouched
    assert setup.model.links[1].inertia.mass == 1.0 and setup.model.joints[1].X_tree.r == (0, 0, -1.0)
    for bad in ["link9.mass", "joint5.damping", "contact.friction", "nn.5"]:
        with pytest.raises(BindingError):
            setup.bind([bad], [1.0])


# ---------------------------------------------------------------- losses

def test_loss_zero_at_truth_positive_elsewhere():
    data = pendulum_data()
    model = pendulum_chain([1.0, 1.0])
    assert rollout_loss(model, [], length_block([3.0, 4.0]), data) < 1e-12
    assert rollout_loss(model, [], length_block([2.0, 2.0]), data) > 1e-3


def test_empty_blueprints_equal_analytical_loss():
    data = pendulum_data()
    model = pendulum_chain([1.0, 1.0])
    spec = MlpSpec(("q0", "qd1"), (4,), 2)
    a = rollout_loss(model, [], length_block([2.5, 4.5]), data)
    b = rollout_loss(model, [NeuralBlueprint("tau", spec)], length_block([2.5, 4.5]), data)
    assert a == b


def test_loss_is_mse_over_q_and_qd():
    data = pendulum_data(steps=5)
    model = pendulum_chain([3.0, 4.0])
    sim = Simulator(pendulum_chain([2.0, 4.0]), data.dt)
    states = sim.rollout(data.trajectories[0].state(0), 5)
    tr = data.trajectories[0]
    errs = []
    for k in range(1, 6):
        errs += list(np.subtract(states[k].q, tr.q[k])) + list(np.subtract(states[k].qd, tr.qd[k]))
    expected = float(np.mean(np.square(errs)))
    got = rollout_loss(model, [], ParameterBlock(["link0.length"], [2.0]), data)
    assert got == pytest.approx(expected, rel=1e-12)


def test_one_step_and_horizon():
    data = pendulum_data(steps=20)
    setup = SimulationSetup(pendulum_chain([3.0, 4.0]), data.dt)
    assert TrajectoryLoss(setup, [], data, kind="one-step")([]) < 1e-20
    long = TrajectoryLoss(setup, ["link0.length"], data)([2.9])
    short = TrajectoryLoss(setup, ["link0.length"], data, horizon=5)([2.9])
    assert short < long
    with pytest.raises(ValueError):
        TrajectoryLoss(setup, [], data, kind="teleport")


def test_divergent_rollout_raises_loss_error():
    data = pendulum_data(steps=30, dt=0.05)
    setup = SimulationSetup(pendulum_chain([3.0, 4.0]), data.dt)
    loss = TrajectoryLoss(setup, ["joint0.stiffness"], data)
    with pytest.raises(LossError) as exc:
        loss([-1e12])
    assert exc.value.step >= 1


def test_rollout_gradient_wrt_mass_matches_fd():
    data = pendulum_data(masses=(1.0, 2.0), damping=(0.3, 0.1), dt=0.01, steps=100)
    setup = SimulationSetup(pendulum_chain([3.0, 4.0], damping=[0.3, 0.1]), data.dt)
    loss = TrajectoryLoss(setup, ["link1.mass"], data)
    x = [1.4]
    _, gt = loss.value_and_gradient(x, "reverse-tape")
    _, gd = loss.value_and_gradient(x, "forward-dual")
    _, gf = loss.value_and_gradient(x, "finite-difference", 1e-6)
    assert abs(gf[0]) > 1e-6
    assert gt[0] == pytest.approx(gf[0], rel=1e-3)
    assert gd[0] == pytest.approx(gt[0], rel=1e-9)


# ------------------------------------------------------------ optimizers

def quad(x):
    return (x[0] - 3.0) ** 2


def test_adam_quadratic():
    r = minimize_local(quad, ParameterBlock(["x"], [0.0]), "adam", 100, lr=0.1)
    assert abs(r.params.values[0] - 3.0) < 1e-2


def test_lbfgs_rosenbrock():
    def rosen(x):
        return (1 - x[0]) ** 2 + 100 * (x[1] - x[0] * x[0]) ** 2

    r = minimize_local(rosen, ParameterBlock(["a", "b"], [-1.2, 1.0]), "lbfgs", 200)
    assert np.allclose(r.params.values, [1.0, 1.0], atol=1e-5)


@pytest.mark.parametrize("method", ["adam", "lbfgs"])
def test_start_at_minimum_stays(method):
    r = minimize_local(quad, ParameterBlock(["x"], [3.0]), method, 20)
    assert r.params.values[0] == pytest.approx(3.0, abs=1e-9)


@pytest.mark.parametrize("method", ["adam", "lbfgs"])
def test_projection_onto_bounds(method):
    p = local_minimize(quad, ParameterBlock(["x"], [0.2], [(0.0, 1.0)]), method, 200, lr=0.1)
    assert p.values[0] == 1.0


@given(st.floats(-5, 5), st.floats(-5, 5), st.sampled_from(["adam", "lbfgs"]))
@settings(max_examples=25)
def test_never_worse_than_start(a, b, method):
    def bumpy(x):
        return ops.sin(3 * x[0]) * ops.cos(2 * x[1]) + 0.05 * (x[0] * x[0] + x[1] * x[1])

    p = ParameterBlock(["a", "b"], [a, b], [(-5, 5)] * 2)
    r = minimize_local(bumpy, p, method, 15, lr=0.5)
    assert r.value <= ops.value(bumpy([a, b])) + 1e-15
    assert np.all(r.params.values >= -5) and np.all(r.params.values <= 5)


def test_non_finite_start_raises_with_index():
    def bad(x):
        return ops.log(x[1]) + x[0]

    with pytest.raises(OptimizerError):
        minimize_local(bad, ParameterBlock(["a", "b"], [1.0, 0.0]), "lbfgs", 5, mode="finite-difference")


def test_invalid_steps_and_method():
    p = ParameterBlock(["x"], [0.0])
    with pytest.raises(ValueError):
        minimize_local(quad, p, "adam", 0)
    with pytest.raises(ValueError):
        minimize_local(quad, p, "newton", 5)


# --------------------------------------------------------- basin hopping

def test_config_validation():
    with pytest.raises(ValueError):
        BasinHoppingConfig(workers=0)
    with pytest.raises(ValueError):
        BasinHoppingConfig(sigma=-0.1)


def test_single_basin_matches_local():
    p = ParameterBlock(["x"], [0.0], [(-10, 10)])
    bh = parallel_basin_hop(quad, p, BasinHoppingConfig(workers=3, evolutions=2, local_steps=30, seed=1))
    local = local_minimize(quad, p, "lbfgs", 30)
    assert bh.values[0] == pytest.approx(local.values[0], abs=1e-6)


def test_global_optimum_init_unchanged():
    p = ParameterBlock(["x"], [3.0], [(-10, 10)])
    r = basin_hopping(quad, p, BasinHoppingConfig(workers=4, evolutions=3, local_steps=10))
    assert r.params.values[0] == 3.0 and r.value == 0.0


def _multi_well(x):
    # wells at every integer; the deepest is at x = 2
    return 1.0 - ops.cos(2 * math.pi * x[0]) + 0.05 * (x[0] - 2.0) ** 2


def test_escapes_local_minimum_and_is_monotone():
    p = ParameterBlock(["x"], [-3.0], [(-4.0, 4.0)])
    local = local_minimize(_multi_well, p, "lbfgs", 50)
    r = basin_hopping(_multi_well, p, BasinHoppingConfig(workers=6, evolutions=6, local_steps=30, sigma=0.3, seed=2))
    assert abs(local.values[0] + 3.0) < 0.1
    assert abs(r.params.values[0] - 2.0) < 1e-4
    assert all(b <= a for a, b in zip(r.history, r.history[1:]))
    assert r.value <= _multi_well([-3.0])


def test_deterministic_for_seed():
    p = ParameterBlock(["x"], [-3.0], [(-4.0, 4.0)])
    cfg = BasinHoppingConfig(workers=4, evolutions=3, local_steps=10, sigma=0.3, seed=5)
    a = basin_hopping(_multi_well, p, cfg)
    b = basin_hopping(_multi_well, p, cfg)
    assert a.history == b.history and list(a.params.values) == list(b.params.values)


def test_executor_gives_same_result():
    from concurrent.futures import ThreadPoolExecutor

    p = ParameterBlock(["x"], [-3.0], [(-4.0, 4.0)])
    cfg = BasinHoppingConfig(workers=4, evolutions=3, local_steps=10, sigma=0.3, seed=5)
    serial = basin_hopping(_multi_well, p, cfg)
    with ThreadPoolExecutor(2) as ex:
        pooled = basin_hopping(_multi_well, p, cfg, executor=ex)
    assert pooled.history == serial.history


def test_single_worker_zero_sigma_is_iterated_local():
    p = ParameterBlock(["a", "b"], [-1.2, 1.0])

    def rosen(x):
        return (1 - x[0]) ** 2 + 100 * (x[1] - x[0] * x[0]) ** 2

    r = basin_hopping(rosen, p, BasinHoppingConfig(workers=1, evolutions=3, local_steps=7, sigma=0.0))
    x = p
    for _ in range(3):
        step = minimize_local(rosen, x, "lbfgs", 7)
        if step.value < ops.value(rosen(list(x.values))):
            x = step.params
    assert list(r.params.values) == list(x.values)


def test_all_workers_diverge_returns_incumbent():
    def explode(x):
        if ops.value(x[0]) != 1.0:
            raise ArithmeticError("diverged")
        return x[0] * 0.0 + 5.0

    p = ParameterBlock(["x"], [1.0], [(0, 2)])
    r = basin_hopping(explode, p, BasinHoppingConfig(workers=3, evolutions=2, local_steps=3, sigma=0.5))
    assert r.params.values[0] == 1.0 and r.value == 5.0
    assert r.diverged > 0


def test_neural_parameters_trainable_by_local_search():
    data = pendulum_data(lengths=(1.0, 1.0), damping=(0.4, 0.0), dt=0.02, steps=40)
    spec = MlpSpec(("qd0",), (), 1, "identity")
    setup = SimulationSetup(pendulum_chain([1.0, 1.0]), data.dt, augmentation=Augmentation([NeuralBlueprint("tau0", spec)]))
    loss = TrajectoryLoss(setup, ["nn.0", "nn.1"], data)
    p = ParameterBlock(["nn.0", "nn.1"], [0.0, 0.0], kind="neural")
    r = minimize_local(loss, p, "lbfgs", 60)
    # the linear network learns the missing damping torque -0.4 qd0
    assert r.params.values[0] == pytest.approx(-0.4, abs=1e-4)
    assert r.params.values[1] == pytest.approx(0.0, abs=1e-4)
    assert NetworkParameters.unflatten(spec, list(r.params.values)).weights[0][0][0] == r.params.values[0]
    assert value_and_gradient(GradientRequest(loss, list(r.params.values)))[0] < 1e-12
