"""Explicit time stepping on tensor-train compressed states.

One step applies the flow-map operator chain, re-imposes zero boundaries by
an elementwise mask where needed, and rank-truncates.  Truncation also runs
right after each operator application so intermediate bond dimensions stay
bounded by the product of an operator rank and the state cap; with exact
truncation parameters every step reproduces the dense explicit Euler update
to rounding error.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .errors import NumericalFailure, ShapeError
from .mps import (
    Mps,
    TruncationParams,
    add,
    hadamard_truncated,
    mps_from_dense,
    mps_to_dense,
    norm,
    scale,
    truncate,
)
from .mpo import Mpo, apply, d1_mpo, d2_mpo, lift_to_axis, mpo_add, mpo_compress, mpo_identity, mpo_scale
from .problems import ADVECTION_DIFFUSION, PdeProblem, sample_initial
from .tensorization import (
    DIRICHLET,
    GridSpec,
    Layout,
    boundary_mask,
    decode,
    encode,
    grid1d,
    layout_for_grid,
)

SNAPSHOT_TARGET = 96  # auto stride aims for about this many snapshots


@dataclass(frozen=True)
class StepperConfig:
    dt: float
    num_steps: int
    state_truncation: TruncationParams
    mask_truncation: TruncationParams = TruncationParams(None, 1e-12)
    snapshot_stride: int | None = None  # None picks a stride automatically
    keep_states: bool = False
    keep_dense: bool = False

    def __post_init__(self):
        if self.dt <= 0 or self.num_steps < 1:
            raise ShapeError("need dt > 0 and num_steps >= 1")


@dataclass(frozen=True)
class StepDiagnostics:
    step: int
    time: float
    max_bond: int
    discarded_weight: float
    wall_ms: float


@dataclass(frozen=True)
class StepOperators:
    """Chains reused across all steps of one rollout."""

    layout: Layout
    dt: float
    linear_step: Mpo | None  # full one-step operator (linear kind)
    advect: tuple[Mpo, ...]  # first-difference chain per axis (nonlinear kind)
    viscous_step: Mpo | None  # identity + dt * viscosity * laplacian (nonlinear kind)
    mask: Mps | None


def _axis_grid(grid: GridSpec, axis: int) -> GridSpec:
    return grid1d(grid.points_per_axis[axis], grid.extents[axis], grid.boundary)


def build_linear_step_mpo(
    problem: PdeProblem, grid: GridSpec, dt: float, layout: Layout
) -> Mpo:
    """Operator chain of one explicit Euler update for the linear kind."""
    if problem.kind != ADVECTION_DIFFUSION:
        raise ShapeError("single-chain steps exist for the linear kind only")
    op = mpo_identity(layout.n, layout.d)
    for axis in range(grid.spatial_dim):
        ax = _axis_grid(grid, axis)
        op = mpo_add(op, mpo_scale(lift_to_axis(d1_mpo(ax), axis, layout), -problem.velocity[axis] * dt))
        if problem.viscosity > 0:
            op = mpo_add(op, mpo_scale(lift_to_axis(d2_mpo(ax), axis, layout), problem.viscosity * dt))
    return mpo_compress(op)


def dirichlet_mask_mps(grid: GridSpec, params: TruncationParams, layout: Layout) -> Mps:
    """Chain encoding of the zero-boundary indicator (exact rank three per axis)."""
    return mps_from_dense(encode(boundary_mask(grid), layout), params)


def build_step_operators(
    problem: PdeProblem, grid: GridSpec, dt: float, layout: Layout | None = None,
    mask_truncation: TruncationParams = TruncationParams(None, 1e-12),
) -> StepOperators:
    layout = layout if layout is not None else layout_for_grid(grid)
    mask = None
    if grid.boundary == DIRICHLET:
        mask = dirichlet_mask_mps(grid, mask_truncation, layout)
    if problem.kind == ADVECTION_DIFFUSION:
        return StepOperators(layout, dt, build_linear_step_mpo(problem, grid, dt, layout), (), None, mask)
    advect = tuple(
        lift_to_axis(d1_mpo(_axis_grid(grid, axis)), axis, layout)
        for axis in range(grid.spatial_dim)
    )
    visc = mpo_identity(layout.n, layout.d)
    if problem.viscosity > 0:
        for axis in range(grid.spatial_dim):
            lap = lift_to_axis(d2_mpo(_axis_grid(grid, axis)), axis, layout)
            visc = mpo_add(visc, mpo_scale(lap, problem.viscosity * dt))
        visc = mpo_compress(visc)
    return StepOperators(layout, dt, None, advect, visc, mask)


def tt_step(
    state: Mps,
    ops: StepOperators,
    trunc: TruncationParams,
) -> tuple[Mps, float]:
    """One compressed explicit step; returns (state, discarded weight).

    The reported weight combines all truncations of the step in quadrature.
    """
    weight_sq = 0.0
    if ops.linear_step is not None:
        y, w = truncate(apply(ops.linear_step, state), trunc)
        weight_sq += w * w
    else:
        acc = apply(ops.viscous_step, state)
        for d1 in ops.advect:
            slope, w1 = truncate(apply(d1, state), trunc)
            g, w2 = hadamard_truncated(state, slope, trunc)
            acc = add(acc, scale(g, -ops.dt))
            weight_sq += w1 * w1 + w2 * w2
        y, w = truncate(acc, trunc)
        weight_sq += w * w
    if ops.mask is not None:
        y, wm = hadamard_truncated(y, ops.mask, trunc)
        weight_sq += wm * wm
    return y, float(np.sqrt(weight_sq))


@dataclass
class Rollout:
    problem: PdeProblem
    grid: GridSpec
    layout: Layout
    dt: float
    num_steps: int
    final_state: Mps
    snapshot_steps: np.ndarray
    snapshot_times: np.ndarray
    snapshots: np.ndarray  # (num snapshots, num grid points), decoded
    diagnostics: list[StepDiagnostics]
    states: list[Mps] | None = None
    dense_states: np.ndarray | None = None  # (num_steps + 1, N), decoded per step


def snapshot_steps(num_steps: int, stride: int | None) -> np.ndarray:
    """Strided step indices, always including 0, the end, and the quarter points."""
    if stride is None:
        stride = max(1, -(-num_steps // SNAPSHOT_TARGET))
    if stride < 1:
        raise ShapeError(f"snapshot stride must be >= 1, got {stride}")
    steps = set(range(0, num_steps + 1, stride))
    steps.update(round(q * num_steps / 4) for q in range(5))
    return np.array(sorted(steps), dtype=int)


def rollout(
    problem: PdeProblem,
    grid: GridSpec,
    config: StepperConfig,
    layout: Layout | None = None,
    ops: StepOperators | None = None,
) -> Rollout:
    """Roll the compressed stepper from the sampled initial profile."""
    layout = layout if layout is not None else layout_for_grid(grid)
    if ops is None:
        ops = build_step_operators(
            problem, grid, config.dt, layout, mask_truncation=config.mask_truncation
        )
    u0 = sample_initial(problem, grid)
    state = mps_from_dense(encode(u0, layout), config.state_truncation)
    snaps = snapshot_steps(config.num_steps, config.snapshot_stride)
    snap_set = set(int(s) for s in snaps)
    snapshots = np.empty((snaps.size, grid.num_points))
    snap_row = {int(s): i for i, s in enumerate(snaps)}
    diagnostics: list[StepDiagnostics] = []
    states = [state] if config.keep_states else None
    dense_states = None
    if config.keep_dense:
        dense_states = np.empty((config.num_steps + 1, grid.num_points))
        dense_states[0] = decode(mps_to_dense(state), layout)
    if 0 in snap_set:
        snapshots[snap_row[0]] = decode(mps_to_dense(state), layout)
    for k in range(1, config.num_steps + 1):
        t0 = time.perf_counter()
        try:
            state, weight = tt_step(state, ops, config.state_truncation)
        except np.linalg.LinAlgError as exc:
            raise NumericalFailure(k, f"factorization failed at step {k}: {exc}") from exc
        wall_ms = (time.perf_counter() - t0) * 1e3
        state_norm = norm(state)
        if not np.isfinite(state_norm):
            raise NumericalFailure(k)
        diagnostics.append(
            StepDiagnostics(k, k * config.dt, state.max_bond, weight, wall_ms)
        )
        if states is not None:
            states.append(state)
        if dense_states is not None or k in snap_set:
            field = decode(mps_to_dense(state), layout)
            if dense_states is not None:
                dense_states[k] = field
            if k in snap_set:
                snapshots[snap_row[k]] = field
    return Rollout(
        problem=problem,
        grid=grid,
        layout=layout,
        dt=config.dt,
        num_steps=config.num_steps,
        final_state=state,
        snapshot_steps=snaps,
        snapshot_times=snaps * config.dt,
        snapshots=snapshots,
        diagnostics=diagnostics,
        states=states,
        dense_states=dense_states,
    )
