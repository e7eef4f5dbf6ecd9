"""Dense reference solvers used to judge the compressed stepper.

Two references share the same spatial discretization as the compressed path:
an explicit Euler rollout (the discrete ground truth the compressed stepper
approximates step by step) and an adaptive embedded Runge-Kutta 4(5) solve of
the method-of-lines system (an accurate-in-time yardstick).  Neither touches
the chain machinery, so agreement is meaningful.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import ShapeError, StiffnessError
from .problems import ADVECTION_DIFFUSION, PdeProblem, sample_initial
from .tensorization import DIRICHLET, PERIODIC, GridSpec, boundary_mask


@dataclass(frozen=True)
class DenseTrajectory:
    """States on a fixed time grid; states[k] is flat in grid order."""

    times: np.ndarray
    states: np.ndarray
    solver: str

    def __post_init__(self):
        if self.states.shape[0] != self.times.shape[0]:
            raise ShapeError("one state per sample time required")

    def at_time(self, t: float, tol: float) -> np.ndarray:
        k = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[k] - t) > tol:
            raise ShapeError(f"no sample within {tol} of t={t}")
        return self.states[k]


def _shift(u: np.ndarray, offset: int, axis: int, boundary: str) -> np.ndarray:
    """v[i] = u[i + offset] along one axis; open boundaries read zeros."""
    v = np.roll(u, -offset, axis=axis)
    if boundary == DIRICHLET:
        index = [slice(None)] * u.ndim
        index[axis] = -1 if offset > 0 else 0
        v[tuple(index)] = 0.0
    return v


def _grid_view(u: np.ndarray, grid: GridSpec) -> np.ndarray:
    return u.reshape(grid.points_per_axis)


def mol_rhs(problem: PdeProblem, grid: GridSpec, u: np.ndarray) -> np.ndarray:
    """Semi-discrete right side with centered differences, flat in grid order.

    For zero boundaries the open stencil is used as-is; boundary rows are
    frozen by the mask in the integrators, not here.
    """
    v = _grid_view(np.asarray(u, dtype=float), grid)
    out = np.zeros_like(v)
    for axis in range(grid.spatial_dim):
        h = grid.spacing(axis)
        up = _shift(v, +1, axis, grid.boundary)
        um = _shift(v, -1, axis, grid.boundary)
        d1 = (up - um) / (2.0 * h)
        if problem.kind == ADVECTION_DIFFUSION:
            out -= problem.velocity[axis] * d1
        else:
            out -= v * d1
        if problem.viscosity > 0:
            out += problem.viscosity * (up - 2.0 * v + um) / h**2
    return out.reshape(-1)


def euler_step_dense(problem: PdeProblem, grid: GridSpec, dt: float, u: np.ndarray) -> np.ndarray:
    """One explicit Euler step; zero-boundary nodes are re-zeroed afterwards."""
    out = np.asarray(u, dtype=float) + dt * mol_rhs(problem, grid, u)
    if grid.boundary == DIRICHLET:
        out = out * boundary_mask(grid)
    return out


def euler_rollout_dense(
    problem: PdeProblem, grid: GridSpec, dt: float, num_steps: int
) -> DenseTrajectory:
    """Explicit Euler trajectory including the (unmasked) initial state.

    Zero-boundary nodes are re-zeroed by every step, so states 1..K carry
    exact zeros there; state 0 is the raw sampled profile.
    """
    u = sample_initial(problem, grid)
    states = np.empty((num_steps + 1, u.size))
    states[0] = u
    for k in range(num_steps):
        u = euler_step_dense(problem, grid, dt, u)
        states[k + 1] = u
    times = dt * np.arange(num_steps + 1)
    return DenseTrajectory(times, states, "euler")


# Dormand-Prince 4(5) tableau; the last stage row doubles as the 5th-order
# weights (first-same-as-last).
_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_DP_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_DP_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_B4 = np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)
_DP_E = _DP_B5 - _DP_B4


def _error_norm(err: np.ndarray, u0: np.ndarray, u1: np.ndarray, rtol: float, atol: float):
    scale = atol + rtol * np.maximum(np.abs(u0), np.abs(u1))
    return float(np.sqrt(np.mean((err / scale) ** 2)))


def _initial_step(f, u0, f0, rtol, atol):
    # standard two-trial-step heuristic; overflow in the trial quantities is
    # expected for very stiff right sides and handled by the fallbacks
    with np.errstate(over="ignore", invalid="ignore"):
        scale = atol + rtol * np.abs(u0)
        d0 = float(np.sqrt(np.mean((u0 / scale) ** 2)))
        d1 = float(np.sqrt(np.mean((f0 / scale) ** 2)))
        h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
        if not np.isfinite(h0) or h0 <= 0:
            h0 = 1e-6
        u1 = u0 + h0 * f0
        f1 = f(u1)
        d2 = float(np.sqrt(np.mean(((f1 - f0) / scale) ** 2))) / h0
        if d1 <= 1e-15 and d2 <= 1e-15:
            h1 = max(1e-6, h0 * 1e-3)
        else:
            h1 = (0.01 / max(d1, d2)) ** 0.2
        h = min(100 * h0, h1)
    return h if np.isfinite(h) and h > 0 else 1e-6


def rk45_solve(
    problem: PdeProblem,
    grid: GridSpec,
    sample_times: np.ndarray,
    rtol: float = 1e-8,
    atol: float = 1e-10,
) -> DenseTrajectory:
    """Adaptive embedded RK in time for the method-of-lines system.

    The step is clipped to land exactly on every requested sample time, so no
    interpolation is involved.  For zero boundaries the boundary rows are
    frozen at their initial values by masking the right side.
    """
    sample_times = np.asarray(sample_times, dtype=float)
    if sample_times.ndim != 1 or sample_times.size < 1:
        raise ShapeError("sample_times must be a non-empty 1D array")
    if np.any(np.diff(sample_times) <= 0) or sample_times[0] != 0.0:
        raise ShapeError("sample_times must start at 0 and increase strictly")

    mask = boundary_mask(grid) if grid.boundary == DIRICHLET else None

    def f(u):
        rhs = mol_rhs(problem, grid, u)
        if mask is not None:
            rhs = rhs * mask
        return rhs

    u = sample_initial(problem, grid)
    if mask is not None:
        u = u * mask
    states = np.empty((sample_times.size, u.size))
    states[0] = u
    k1 = f(u)
    h = _initial_step(f, u, k1, rtol, atol)
    t = 0.0
    stages = np.empty((7, u.size))
    for row, target in enumerate(sample_times[1:], start=1):
        while t < target:
            if h < 1e-14 * max(abs(t), 1.0):
                raise StiffnessError(t)
            clipped = h >= target - t
            h_step = min(h, target - t)
            with np.errstate(over="ignore", invalid="ignore"):
                stages[0] = k1
                for s in range(1, 7):
                    du = _DP_A[s] @ stages[:s]
                    stages[s] = f(u + h_step * du)
                u_new = u + h_step * (_DP_B5 @ stages)
                err = h_step * (_DP_E @ stages)
                err_norm = _error_norm(err, u, u_new, rtol, atol)
            if err_norm <= 1.0:
                # a step may only be accepted when it met the tolerance
                assert np.isfinite(err_norm)
                t = target if clipped else t + h_step
                u = u_new
                # copy: the buffer row gets overwritten by rejected retrials
                k1 = stages[6].copy()
            if err_norm == 0.0:
                factor = 5.0
            elif np.isfinite(err_norm):
                factor = min(5.0, max(0.2, 0.9 * err_norm**-0.2))
            else:
                factor = 0.2
            h = h_step * factor
        states[row] = u
    return DenseTrajectory(sample_times.copy(), states, "rk45")


def shift_matrix(npts: int, offset: int, boundary: str) -> sp.csr_matrix:
    """Sparse S[i, j] = 1 iff j = i + offset (wrapping when periodic)."""
    rows = np.arange(npts)
    cols = rows + offset
    if boundary == PERIODIC:
        cols = cols % npts
    else:
        keep = (cols >= 0) & (cols < npts)
        rows, cols = rows[keep], cols[keep]
    data = np.ones(rows.size)
    return sp.csr_matrix((data, (rows, cols)), shape=(npts, npts))


def stencil_matrix_d1(npts: int, h: float, boundary: str) -> sp.csr_matrix:
    sp_ = shift_matrix(npts, +1, boundary)
    sm = shift_matrix(npts, -1, boundary)
    return ((sp_ - sm) / (2.0 * h)).tocsr()


def stencil_matrix_d2(npts: int, h: float, boundary: str) -> sp.csr_matrix:
    sp_ = shift_matrix(npts, +1, boundary)
    sm = shift_matrix(npts, -1, boundary)
    eye = sp.identity(npts, format="csr")
    return ((sp_ - 2.0 * eye + sm) / h**2).tocsr()


def one_step_matrix(problem: PdeProblem, grid: GridSpec, dt: float) -> sp.csr_matrix:
    """Dense-equivalent matrix of one Euler step for the linear kind.

    Includes the boundary re-zeroing, so applying it matches
    euler_step_dense exactly.
    """
    if problem.kind != ADVECTION_DIFFUSION:
        raise ShapeError("one-step matrices exist for the linear kind only")
    mats = []
    for axis in range(grid.spatial_dim):
        p = grid.points_per_axis[axis]
        h = grid.spacing(axis)
        a = -problem.velocity[axis] * stencil_matrix_d1(p, h, grid.boundary)
        if problem.viscosity > 0:
            a = a + problem.viscosity * stencil_matrix_d2(p, h, grid.boundary)
        mats.append(a)
    if grid.spatial_dim == 1:
        gen = mats[0]
    else:
        ny = grid.points_per_axis[1]
        nx = grid.points_per_axis[0]
        gen = sp.kron(mats[0], sp.identity(ny)) + sp.kron(sp.identity(nx), mats[1])
    step = sp.identity(grid.num_points) + dt * gen
    if grid.boundary == DIRICHLET:
        step = sp.diags(boundary_mask(grid)) @ step
    return step.tocsr()
