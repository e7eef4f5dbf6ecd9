"""Error metrics: horizon curves against a reference and one-step bound checks.

The horizon curve restarts the compressed stepper from encoded reference
states and measures how fast it drifts away over m steps.  The bound check
verifies, on actual trajectories, that the accumulated deviation from the
dense explicit Euler map F stays under the geometric sum built from the
one-step operator norm L and the worst observed single-step error e:

    ||q_m - F^m(u_0)|| <= sum_{j<m} L**j * e            (same start)
    ||q_m - F^m(u_0)|| <= L**m d_0 + sum_{j<m} L**j e   (mismatched start d_0)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalFailure, ShapeError
from .mps import TruncationParams, mps_from_dense, mps_to_dense
from .problems import PdeProblem, sample_initial
from .reference import DenseTrajectory, euler_step_dense, one_step_matrix
from .stepper import StepOperators, tt_step
from .tensorization import GridSpec, decode, encode


def relative_l2(u: np.ndarray, ref: np.ndarray) -> float:
    """||u - ref|| / ||ref|| (plain norm of the difference if ref is zero)."""
    u = np.asarray(u, dtype=float).reshape(-1)
    ref = np.asarray(ref, dtype=float).reshape(-1)
    if u.shape != ref.shape:
        raise ShapeError(f"shapes {u.shape} and {ref.shape} differ")
    denom = float(np.linalg.norm(ref))
    diff = float(np.linalg.norm(u - ref))
    return diff if denom == 0.0 else diff / denom


def signed_difference(u: np.ndarray, ref: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    ref = np.asarray(ref, dtype=float)
    if u.shape != ref.shape:
        raise ShapeError(f"shapes {u.shape} and {ref.shape} differ")
    return u - ref


def fit_slope(x, y) -> float:
    """Slope of the least-squares line through (x, y)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size != y.size or x.size < 2:
        raise ShapeError("need at least two points")
    return float(np.polyfit(x, y, 1)[0])


def default_horizons(num_steps: int) -> tuple[int, ...]:
    base = (1, 2, 5, 10, 20, 50, 100)
    return tuple(m for m in base if m <= num_steps)


@dataclass(frozen=True)
class HorizonCurve:
    horizons: tuple[int, ...]
    mean: np.ndarray
    std: np.ndarray  # population spread over restart points
    n_restarts: np.ndarray


def restart_averaged_error(
    ref: DenseTrajectory,
    ops: StepOperators,
    trunc: TruncationParams,
    horizons: tuple[int, ...],
    restart_stride: int = 1,
) -> HorizonCurve:
    """Mean/spread of the m-step relative error over restarts from the reference.

    From every restart index k (strided), the reference state is encoded,
    rolled m compressed steps, and compared against the reference at k + m.
    A restart contributes to horizon m only when k + m stays in range, so
    with stride one the count for horizon m is (num_steps - m + 1).
    """
    horizons = tuple(sorted(set(int(m) for m in horizons)))
    num_steps = ref.times.size - 1
    if not horizons or horizons[0] < 0 or horizons[-1] > num_steps:
        raise ShapeError("horizons must be within 0..num_steps and non-empty")
    if restart_stride < 1:
        raise ShapeError(f"restart stride must be >= 1, got {restart_stride}")
    m_max = horizons[-1]
    errors: dict[int, list[float]] = {m: [] for m in horizons}
    layout = ops.layout
    for k in range(0, num_steps - horizons[0] + 1, restart_stride):
        reach = min(m_max, num_steps - k)
        if 0 in errors:
            # the horizon-0 state is the restart point itself
            errors[0].append(0.0)
        if reach < 1:
            continue
        state = mps_from_dense(encode(ref.states[k], layout), trunc)
        for m in range(1, reach + 1):
            state, _ = tt_step(state, ops, trunc)
            if m in errors:
                errors[m].append(relative_l2(decode(mps_to_dense(state), layout), ref.states[k + m]))
    mean = np.array([float(np.mean(errors[m])) for m in horizons])
    std = np.array([float(np.std(errors[m])) for m in horizons])
    counts = np.array([len(errors[m]) for m in horizons])
    return HorizonCurve(horizons, mean, std, counts)


def spectral_norm(matrix, tol: float = 1e-12, maxiter: int = 500_000) -> tuple[float, int]:
    """Largest singular value by power iteration on M^T M.

    Deterministic start (uniform vector); iterates until successive
    eigenvalue estimates agree to the relative tolerance.  The returned
    value adds the residual radius of the final Rayleigh quotient, so a
    slightly early stop errs on the large side rather than undershooting
    the true norm (it is used as a growth constant in error bounds).
    """
    mt = matrix.T.tocsr()
    v = np.ones(matrix.shape[1]) / np.sqrt(matrix.shape[1])
    lam = -1.0
    for it in range(maxiter):
        w = mt @ (matrix @ v)
        nw = float(np.linalg.norm(w))
        if nw == 0.0:
            return 0.0, it + 1
        v = w / nw
        if abs(nw - lam) <= tol * nw:
            bv = mt @ (matrix @ v)
            theta = float(v @ bv)
            radius = float(np.linalg.norm(bv - theta * v))
            return float(np.sqrt(theta + radius)), it + 1
        lam = nw
    raise NumericalFailure(maxiter, "power iteration did not converge")


@dataclass(frozen=True)
class ErrorBoundReport:
    L: float
    e: float
    delta: np.ndarray  # per-step deviation from the dense Euler trajectory
    bound: np.ndarray  # geometric-sum bound at the same steps
    holds: bool
    restart_delta0: float
    restart_delta: np.ndarray
    restart_bound: np.ndarray
    restart_holds: bool
    power_iterations: int

    @property
    def slack(self) -> float:
        return float(np.min(self.bound - self.delta))


BOUND_SLACK = 1e-12


def one_step_error_bound(
    problem: PdeProblem,
    grid: GridSpec,
    ops: StepOperators,
    trunc: TruncationParams,
    euler: DenseTrajectory,
    compressed_states: np.ndarray | None = None,
    perturbation: float = 1e-3,
) -> ErrorBoundReport:
    """Check the accumulated-deviation bound on actual linear-kind trajectories.

    compressed_states are the decoded per-step states of a compressed rollout
    started from the same initial profile; they are recomputed here when not
    supplied.  The restart form starts the compressed stepper from a smoothly
    perturbed profile and reuses the same L with the mismatch term L**m d_0.
    """
    num_steps = euler.times.size - 1
    dt = float(euler.times[1] - euler.times[0])
    matrix = one_step_matrix(problem, grid, dt)
    L, iterations = spectral_norm(matrix)
    layout = ops.layout

    def compressed_path(u_start: np.ndarray) -> np.ndarray:
        out = np.empty((num_steps + 1, u_start.size))
        state = mps_from_dense(encode(u_start, layout), trunc)
        out[0] = decode(mps_to_dense(state), layout)
        for k in range(num_steps):
            state, _ = tt_step(state, ops, trunc)
            out[k + 1] = decode(mps_to_dense(state), layout)
        return out

    if compressed_states is None:
        compressed_states = compressed_path(sample_initial(problem, grid))
    if compressed_states.shape != euler.states.shape:
        raise ShapeError("compressed and reference trajectories must align")

    def per_step_errors(states: np.ndarray) -> float:
        worst = 0.0
        for k in range(num_steps):
            predicted = euler_step_dense(problem, grid, dt, states[k])
            worst = max(worst, float(np.linalg.norm(states[k + 1] - predicted)))
        return worst

    e = per_step_errors(compressed_states)
    delta = np.linalg.norm(compressed_states - euler.states, axis=1)
    bound = np.empty(num_steps + 1)
    # encoding the start is itself lossy, so the recursion seeds with the
    # measured offset rather than zero
    bound[0] = delta[0]
    for m in range(num_steps):
        bound[m + 1] = e + L * bound[m]
    holds = bool(np.all(delta <= bound + BOUND_SLACK))

    mesh0 = grid.meshgrid()[0]
    u0 = sample_initial(problem, grid)
    perturbed = u0 + perturbation * np.sin(2.0 * np.pi * mesh0).reshape(-1)
    restart_states = compressed_path(perturbed)
    restart_delta = np.linalg.norm(restart_states - euler.states, axis=1)
    d0 = float(restart_delta[0])
    e_restart = per_step_errors(restart_states)
    restart_bound = np.empty(num_steps + 1)
    restart_bound[0] = d0
    for m in range(num_steps):
        restart_bound[m + 1] = e_restart + L * restart_bound[m]
    restart_holds = bool(np.all(restart_delta <= restart_bound + BOUND_SLACK))

    return ErrorBoundReport(
        L=L,
        e=e,
        delta=delta,
        bound=bound,
        holds=holds,
        restart_delta0=d0,
        restart_delta=restart_delta,
        restart_bound=restart_bound,
        restart_holds=restart_holds,
        power_iterations=iterations,
    )
