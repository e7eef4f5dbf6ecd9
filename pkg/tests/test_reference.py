import math

import numpy as np
import pytest

from ttflow.errors import ConfigError, ShapeError, StiffnessError
from ttflow.problems import (
    InitialCondition,
    PdeProblem,
    derive_time_step,
    sample_initial,
    velocity_scale,
)
from ttflow.reference import (
    DenseTrajectory,
    euler_rollout_dense,
    euler_step_dense,
    mol_rhs,
    one_step_matrix,
    rk45_solve,
    stencil_matrix_d1,
    stencil_matrix_d2,
)
from ttflow.tensorization import DIRICHLET, PERIODIC, boundary_mask, grid1d, grid2d


def advdiff(dim=1, velocity=(0.5,), nu=0.01, boundary=DIRICHLET, T=0.5, ic=None):
    ic = ic or InitialCondition("gaussian", (0.3, 0.4)[:dim])
    return PdeProblem("advection_diffusion", dim, tuple(velocity), nu, boundary, ic, T)


def burgers(dim=1, nu=0.01, T=0.5):
    return PdeProblem("burgers", dim, (), nu, PERIODIC, InitialCondition("one_plus_sine"), T)


def test_sample_initial_formulas():
    g = grid1d(8, boundary=DIRICHLET)
    x = g.axis_coords()
    u = sample_initial(advdiff(), g)
    assert np.allclose(u, np.exp(-100.0 * (x - 0.3) ** 2))
    gp = grid1d(8)
    xp = gp.axis_coords()
    u = sample_initial(burgers(), gp)
    assert np.allclose(u, 1.0 + 0.5 * np.sin(2 * np.pi * xp))
    g2 = grid2d(4)
    xx, yy = g2.meshgrid()
    u2 = sample_initial(burgers(dim=2), g2)
    assert np.allclose(u2.reshape(4, 4), 1.0 + 0.5 * np.sin(2 * np.pi * xx) * np.sin(2 * np.pi * yy))
    u2g = sample_initial(advdiff(dim=2, velocity=(0.5, 0.2)), g2.__class__(2, (4, 4), ((0.0, 1.0),) * 2, DIRICHLET))


def test_velocity_scale():
    assert velocity_scale(advdiff(velocity=(-0.5,)), grid1d(8, boundary=DIRICHLET)) == 0.5
    assert velocity_scale(advdiff(dim=2, velocity=(0.5, 0.2), boundary=PERIODIC), grid2d(8)) == 0.5
    # nonlinear transport speed is the largest initial magnitude
    assert abs(velocity_scale(burgers(), grid1d(512)) - 1.5) <= 1e-12


def test_derive_time_step_rule():
    p = advdiff()
    g = grid1d(512, boundary=DIRICHLET)
    dt, num = derive_time_step(p, g)
    h = g.spacing()
    limit = 0.4 * min(h / 0.5, h * h / (2 * 0.01))
    assert dt <= limit * (1 + 1e-12)
    assert num == math.ceil(p.final_time / limit - 1e-9)
    assert abs(num * dt - p.final_time) <= 1e-12
    # 2d halves the diffusive limit
    p2 = advdiff(dim=2, velocity=(0.5, 0.2))
    g2 = grid2d(64, boundary=DIRICHLET)
    dt2, _ = derive_time_step(p2, g2)
    h2 = g2.spacing()
    assert dt2 <= 0.4 * min(h2 / 0.5, h2 * h2 / (2 * 0.01 * 2)) * (1 + 1e-12)


def test_derive_time_step_override_and_errors():
    p = advdiff()
    g = grid1d(64, boundary=DIRICHLET)
    dt, num = derive_time_step(p, g, dt_override=0.1)
    assert num == 5 and abs(dt - 0.1) <= 1e-12
    with pytest.raises(ConfigError):
        derive_time_step(p, g, dt_override=-1.0)
    inert = PdeProblem(
        "advection_diffusion", 1, (0.0,), 0.0, PERIODIC, InitialCondition("gaussian"), 1.0
    )
    with pytest.raises(ConfigError):
        derive_time_step(inert, grid1d(64))


@pytest.mark.parametrize("boundary", [PERIODIC, DIRICHLET])
def test_mol_rhs_linear_matches_matrices(rng, boundary):
    npts = 64
    g = grid1d(npts, boundary=boundary)
    p = advdiff(boundary=boundary)
    h = g.spacing()
    gen = -0.5 * stencil_matrix_d1(npts, h, boundary) + 0.01 * stencil_matrix_d2(npts, h, boundary)
    for _ in range(5):
        u = rng.normal(size=npts)
        assert np.allclose(mol_rhs(p, g, u), gen @ u, atol=1e-10)


def test_mol_rhs_burgers_matches_matrices(rng):
    npts = 64
    g = grid1d(npts)
    p = burgers()
    h = g.spacing()
    d1 = stencil_matrix_d1(npts, h, PERIODIC)
    d2 = stencil_matrix_d2(npts, h, PERIODIC)
    u = rng.normal(size=npts)
    assert np.allclose(mol_rhs(p, g, u), -u * (d1 @ u) + 0.01 * (d2 @ u), atol=1e-10)


@pytest.mark.parametrize(
    "problem,grid",
    [
        (advdiff(), grid1d(64, boundary=DIRICHLET)),
        (advdiff(boundary=PERIODIC), grid1d(64)),
        (advdiff(dim=2, velocity=(0.5, 0.2)), grid2d(8, boundary=DIRICHLET)),
        (advdiff(dim=2, velocity=(0.5, 0.2), boundary=PERIODIC), grid2d(8)),
    ],
)
def test_euler_step_equals_explicit_matrix(rng, problem, grid):
    dt, _ = derive_time_step(problem, grid)
    step = one_step_matrix(problem, grid, dt)
    for _ in range(3):
        u = rng.normal(size=grid.num_points)
        assert np.allclose(euler_step_dense(problem, grid, dt, u), step @ u, atol=1e-12)


def test_one_step_matrix_rejects_nonlinear():
    with pytest.raises(ShapeError):
        one_step_matrix(burgers(), grid1d(8), 0.01)


def test_euler_rollout_boundary_and_start():
    p = advdiff()
    g = grid1d(64, boundary=DIRICHLET)
    dt, _ = derive_time_step(p, g)
    traj = euler_rollout_dense(p, g, dt, 20)
    assert np.array_equal(traj.states[0], sample_initial(p, g))
    off = 1.0 - boundary_mask(g)
    assert np.max(np.abs(traj.states[1:] * off[None, :])) == 0.0
    assert np.allclose(traj.times, dt * np.arange(21))


def test_rk45_matches_closed_form_semidiscrete_solution():
    # periodic advection-diffusion of 1 + a sin(2 pi x): the discrete
    # operators act diagonally on that mode, so the semidiscrete solution is
    #   1 + a exp(-nu mu t) sin(k x - k cbar t),
    # with k = 2 pi, mu = 4 sin(kh/2)**2 / h**2, cbar = c sin(kh) / (k h).
    npts = 128
    g = grid1d(npts)
    c, nu = 0.7, 0.02
    p = PdeProblem(
        "advection_diffusion", 1, (c,), nu, PERIODIC, InitialCondition("one_plus_sine"), 0.5
    )
    times = np.linspace(0.0, 0.5, 6)
    traj = rk45_solve(p, g, times, rtol=1e-10, atol=1e-12)
    assert np.array_equal(traj.times, times)
    h = g.spacing()
    k = 2 * np.pi
    mu = 4.0 * np.sin(k * h / 2.0) ** 2 / h**2
    cbar = c * np.sin(k * h) / (k * h)
    x = g.axis_coords()
    for row, t in enumerate(times):
        want = 1.0 + 0.5 * np.exp(-nu * mu * t) * np.sin(k * (x - cbar * t))
        assert np.max(np.abs(traj.states[row] - want)) <= 1e-8


def test_rk45_tolerance_controls_error():
    g = grid1d(64)
    p = PdeProblem(
        "advection_diffusion", 1, (1.0,), 0.0, PERIODIC, InitialCondition("one_plus_sine"), 1.0
    )
    times = np.array([0.0, 1.0])
    tight = rk45_solve(p, g, times, rtol=1e-11, atol=1e-13)
    loose = rk45_solve(p, g, times, rtol=1e-5, atol=1e-7)
    mid = rk45_solve(p, g, times, rtol=1e-8, atol=1e-10)
    err_loose = np.linalg.norm(loose.states[1] - tight.states[1])
    err_mid = np.linalg.norm(mid.states[1] - tight.states[1])
    assert err_mid < err_loose
    assert err_mid <= 1e-5


def test_rk45_dirichlet_keeps_boundary_frozen_at_zero():
    p = advdiff()
    g = grid1d(64, boundary=DIRICHLET)
    times = np.linspace(0.0, 0.1, 3)
    traj = rk45_solve(p, g, times)
    off = 1.0 - boundary_mask(g)
    assert np.max(np.abs(traj.states * off[None, :])) == 0.0


def test_rk45_validates_times():
    p = advdiff(boundary=PERIODIC)
    g = grid1d(16)
    with pytest.raises(ShapeError):
        rk45_solve(p, g, np.array([0.1, 0.2]))
    with pytest.raises(ShapeError):
        rk45_solve(p, g, np.array([0.0, 0.2, 0.2]))


def test_rk45_stiffness_error():
    p = advdiff(nu=1e280, boundary=PERIODIC)
    g = grid1d(16)
    with pytest.raises(StiffnessError):
        rk45_solve(p, g, np.array([0.0, 1.0]))


def test_trajectory_at_time():
    times = np.array([0.0, 0.5, 1.0])
    traj = DenseTrajectory(times, np.arange(6.0).reshape(3, 2), "euler")
    assert np.array_equal(traj.at_time(0.5001, tol=1e-2), [2.0, 3.0])
    with pytest.raises(ShapeError):
        traj.at_time(0.25, tol=1e-3)
    with pytest.raises(ShapeError):
        DenseTrajectory(times, np.zeros((2, 2)), "euler")
