import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hybridsim.contact import (
    ContactParams,
    ContactPoint,
    ContactSolverError,
    PenaltyParams,
    UnsupportedPairError,
    detect_contacts,
    penalty_forces,
    relative_velocity,
    solve_ncp,
    solve_ncp_pgs,
    tangent_basis,
)
from hybridsim.multibody import (
    JointState,
    Link,
    MultiBody,
    Plane,
    Sphere,
    forward_dynamics_aba,
    forward_kinematics,
)
from hybridsim.multibody.builders import floating_box, pendulum_chain
from hybridsim.scalar import GradientRequest, ops, value_and_gradient
from hybridsim.simulation import Simulator

G = 9.81


def box_state(z, vx=0.0, vy=0.0, vz=0.0):
    return JointState([0.0, 0.0, z, 0.0, 0.0, 0.0, 1.0], [0.0, 0.0, 0.0, vx, vy, vz])


def corner_box(mass=1.0, contact="ncp"):
    # one contact point per bottom corner
    return floating_box(mass=mass, size=(0.1, 0.1, 0.1), grid_spacing=0.1, contact=contact)


def free_velocity(model, state, dt):
    qdd = forward_dynamics_aba(model, state, [0.0] * model.nv)
    return JointState(state.q, [v + a * dt for v, a in zip(state.qd, qdd)], state.time)


# ------------------------------------------------------------- detection

def test_sphere_penetration():
    model = floating_box(sphere_radius=0.5)
    contacts = detect_contacts(model, box_state(0.4))
    assert len(contacts) == 1
    c = contacts[0]
    assert c.penetration == pytest.approx(0.1, abs=1e-12)
    assert c.normal == (0.0, 0.0, 1.0)
    assert c.point == pytest.approx((0.0, 0.0, -0.1))


def test_sphere_far_away():
    assert detect_contacts(floating_box(sphere_radius=0.5), box_state(2.0)) == []


def test_margin_emits_touching_but_not_separated():
    model = floating_box(sphere_radius=0.5)
    (c,) = detect_contacts(model, box_state(0.5005))
    assert c.penetration == 0.0
    assert detect_contacts(model, box_state(0.502)) == []


def test_point_grid_resting_flat():
    model = floating_box(size=(0.1, 0.1, 0.1), grid_spacing=0.02)
    contacts = detect_contacts(model, box_state(0.05))
    assert len(contacts) == 36  # 6 x 6 grid at 2 cm resolution
    assert all(c.penetration == 0.0 for c in contacts)


def test_static_sphere_against_point_grid():
    model = floating_box(size=(0.1, 0.1, 0.1), grid_spacing=0.1, ground=False)
    model.world_geometry = [Sphere(0.16, (0.05, 0.05, -0.2), name="dome")]
    contacts = detect_contacts(model, box_state(0.0))
    # only the corner above the dome centre overlaps, by 0.16 - 0.15
    (c,) = [c for c in contacts if c.penetration > 0]
    assert c.penetration == pytest.approx(0.01)
    assert c.normal == pytest.approx((0.0, 0.0, 1.0))
    assert c.source == "dome"


def test_unsupported_pair():
    model = MultiBody(
        [Link(floating_box().links[0].inertia, [Plane()])],
        floating_box().joints,
        world_geometry=[Plane()],
    )
    with pytest.raises(UnsupportedPairError):
        detect_contacts(model, box_state(0.0))


@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(0.05, 1))
def test_tangent_basis_orthonormal(a, b, c):
    n = np.array([a, b, c])
    n = tuple(n / np.linalg.norm(n))
    t1, t2 = tangent_basis(n)
    M = np.array([n, t1, t2])
    assert np.allclose(M @ M.T, np.eye(3), atol=1e-12)


# ------------------------------------------------------------- NCP / PGS

def test_no_contacts():
    model = corner_box()
    assert solve_ncp_pgs([], model, box_state(1.0), 0.01) == []


def test_resting_box_weight_balance():
    model = corner_box()
    dt = 0.01
    state = box_state(0.05)
    contacts = detect_contacts(model, state, ContactParams(beta=0.0))
    free = free_velocity(model, state, dt)
    sol = solve_ncp(contacts, model, free.q, free.qd, dt, iterations=100)
    total = sum(ops.value(i.normal) for i in sol.impulses)
    assert total == pytest.approx(1.0 * G * dt, abs=1e-6)
    assert sol.qd[5] == pytest.approx(0.0, abs=1e-9)
    assert max(abs(r) for r in sol.residuals) <= 1e-6


def test_sliding_box_on_cone_boundary():
    model = corner_box()
    dt = 0.01
    state = box_state(0.05, vx=1.0)
    contacts = detect_contacts(model, state, ContactParams(mu=0.5, beta=0.0))
    free = free_velocity(model, state, dt)
    sol = solve_ncp(contacts, model, free.q, free.qd, dt, iterations=100)
    total_t = np.zeros(3)
    total_n = 0.0
    for c, imp in zip(contacts, sol.impulses):
        t1, t2 = tangent_basis(c.normal)
        lt = np.array(t1) * imp.tangent[0] + np.array(t2) * imp.tangent[1]
        assert np.linalg.norm(lt) == pytest.approx(0.5 * imp.normal, rel=1e-9)
        total_t += lt
        total_n += imp.normal
    assert np.linalg.norm(total_t) == pytest.approx(0.5 * total_n, rel=1e-9)
    # friction opposes the +x slip
    assert total_t[0] < 0 and abs(total_t[1]) < 1e-9
    assert total_n == pytest.approx(G * dt, abs=1e-6)


@given(
    st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 0.5),
    st.floats(0.0, 1.0), st.floats(0.0, 0.01),
)
@settings(max_examples=30)
def test_impulse_invariants_random(vx, vy, vz, mu, depth):
    model = corner_box()
    dt = 0.01
    state = box_state(0.05 - depth, vx, vy, vz)
    contacts = detect_contacts(model, state, ContactParams(mu=mu))
    free = free_velocity(model, state, dt)
    sol = solve_ncp(contacts, model, free.q, free.qd, dt, iterations=50)
    for imp in sol.impulses:
        assert imp.normal >= 0.0
        assert math.hypot(*imp.tangent) <= mu * imp.normal + 1e-9
    kin = forward_kinematics(model, free.q, sol.qd)
    for c in contacts:
        vn = float(np.dot(c.normal, relative_velocity(kin, c)))
        assert vn >= -1e-6 - (c.beta / dt) * c.penetration


def test_complementarity_residual_tilted_box():
    model = floating_box(size=(0.2, 0.1, 0.1), grid_spacing=0.05)
    s = math.sin(0.05)
    state = JointState([0.0, 0.0, 0.052, 0.0, s, 0.0, math.cos(0.05)], [0.2, 0.0, 0.0, 0.3, 0.0, -0.4])
    dt = 0.005
    contacts = detect_contacts(model, state)
    free = free_velocity(model, state, dt)
    sol = solve_ncp(contacts, model, free.q, free.qd, dt, iterations=200)
    assert len(contacts) > 2
    assert max(abs(r) for r in sol.residuals) <= 1e-6


def test_cfm_monotonically_softens():
    model = floating_box(sphere_radius=0.05)
    dt = 0.01
    state = box_state(0.049)
    free = free_velocity(model, state, dt)
    values = []
    for cfm in [0.0, 0.01, 0.1, 1.0, 10.0]:
        contacts = detect_contacts(model, state, ContactParams(cfm=cfm))
        values.append(solve_ncp(contacts, model, free.q, free.qd, dt).impulses[0].normal)
    assert all(a > b for a, b in zip(values, values[1:]))


def test_zero_effective_mass_names_contact():
    model = pendulum_chain([1.0], bob_radius=None)
    model.links[0].geometry = [Sphere(0.1, (0.0, 0.0, 0.0))]  # sits on the pivot
    model.world_geometry = [Plane(offset=0.05)]
    state = JointState([0.0], [0.0])
    contacts = detect_contacts(model, state)
    with pytest.raises(ContactSolverError, match="contact 0"):
        solve_ncp(contacts, model, state.q, state.qd, 0.01)


def test_solver_argument_checks():
    model = corner_box()
    with pytest.raises(ValueError):
        solve_ncp([], model, box_state(0).q, box_state(0).qd, 0.0)
    with pytest.raises(ValueError):
        solve_ncp([], model, box_state(0).q, box_state(0).qd, 0.01, iterations=0)


def test_dropped_box_comes_to_rest():
    model = corner_box()
    sim = Simulator(model, dt=0.005)
    states = sim.rollout(box_state(0.5), 1400)  # 2 s fall and settle, 5 s rest
    settle = int(2.0 / 0.005)
    heights = np.array([s.q[2] for s in states[settle:]])
    assert 0.05 - heights.min() < 2e-3
    assert heights.max() - heights.min() < 2e-3
    assert abs(states[-1].qd[5]) < 1e-6


# ------------------------------------------------------------ penalty model

def _penalty_contact(depth, normal_speed=0.0, tangential=(0.0, 0.0)):
    model = floating_box(sphere_radius=0.1, contact="penalty")
    state = box_state(0.1 - depth, tangential[0], tangential[1], -normal_speed)
    kin = forward_kinematics(model, state.q, state.qd)
    (c,) = detect_contacts(model, state, ContactParams(mu=0.4), kin=kin)
    return c, kin


def test_penalty_normal_force():
    c, kin = _penalty_contact(0.01)
    (f,) = penalty_forces([c], kin, PenaltyParams(stiffness=1000.0, damping=7.0))
    assert f.lin == pytest.approx((0.0, 0.0, 10.0))


def test_penalty_damping_term():
    c, kin = _penalty_contact(0.01, normal_speed=0.5)
    (f,) = penalty_forces([c], kin, PenaltyParams(stiffness=1000.0, damping=2.0))
    # penetration rate 0.5 m/s: 1000 * 0.01 * (1 + 2 * 0.5)
    assert f.lin[2] == pytest.approx(20.0)


def test_penalty_separating_clamped():
    c, kin = _penalty_contact(0.01, normal_speed=-10.0)
    (f,) = penalty_forces([c], kin, PenaltyParams(stiffness=1000.0, damping=1.0))
    assert f.lin == (0.0, 0.0, 0.0)


def test_penalty_no_slip_no_friction():
    c, kin = _penalty_contact(0.01)
    (f,) = penalty_forces([c], kin, PenaltyParams(stiffness=1000.0))
    assert f.lin[0] == 0.0 and f.lin[1] == 0.0


def test_penalty_friction_saturates():
    vs = 0.01
    c, kin = _penalty_contact(0.01, tangential=(3 * vs, 0.0))
    (f,) = penalty_forces([c], kin, PenaltyParams(stiffness=1000.0, smoothing_velocity=vs))
    fn = f.lin[2]
    ft = math.hypot(f.lin[0], f.lin[1])
    assert ft == pytest.approx(0.4 * fn, rel=0.01)
    assert ft < 0.4 * fn
    assert f.lin[0] < 0


def test_penalty_params_validated():
    with pytest.raises(ValueError):
        PenaltyParams(stiffness=0.0)
    with pytest.raises(ValueError):
        PenaltyParams(smoothing_velocity=-1.0)


def test_penalty_friction_field():
    c, kin = _penalty_contact(0.01, tangential=(1.0, 0.0))
    params = PenaltyParams(stiffness=1000.0, mu_field=lambda x, y: 0.9)
    (f,) = penalty_forces([c], kin, params)
    assert abs(f.lin[0]) == pytest.approx(0.9 * f.lin[2], rel=1e-6)


def test_penalty_height_gradient_wrt_stiffness():
    model = floating_box(sphere_radius=0.05, contact="penalty")

    def final_height(p):
        sim = Simulator(model, dt=1e-3, penalty=PenaltyParams(stiffness=p[0], damping=2.0))
        s = sim.rollout(box_state(0.06, vx=0.2), 150, check_finite=False)
        return s[-1].q[2]

    x = [3000.0]
    _, gd = value_and_gradient(GradientRequest(final_height, x, "forward-dual"))
    _, gt = value_and_gradient(GradientRequest(final_height, x, "reverse-tape"))
    _, gf = value_and_gradient(GradientRequest(final_height, x, "finite-difference"))
    assert gf[0] != 0.0
    assert gd[0] == pytest.approx(gf[0], rel=1e-3)
    assert gt[0] == pytest.approx(gf[0], rel=1e-3)


def test_contact_point_defaults():
    c = ContactPoint(-1, 0, (0, 0, 0), (0, 0, 1.0), 0.0)
    assert c.mu >= 0 and c.cfm >= 0 and c.beta == 0.2 and c.alpha == 0.0


def test_tolerance_stops_once_converged():
    model = floating_box(size=(0.2, 0.1, 0.1), grid_spacing=0.05)
    state = box_state(0.049, vx=0.3, vz=-0.2)
    dt = 0.005
    contacts = detect_contacts(model, state)
    free = free_velocity(model, state, dt)
    fixed = solve_ncp(contacts, model, free.q, free.qd, dt, iterations=3000)
    early = solve_ncp(contacts, model, free.q, free.qd, dt, iterations=3000, tolerance=1e-12)
    for a, b in zip(fixed.impulses, early.impulses):
        assert a.normal == pytest.approx(b.normal, abs=1e-9)
    assert max(abs(r) for r in early.residuals) <= 1e-6
