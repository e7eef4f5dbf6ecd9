"""Experiment orchestration and on-disk artifact formats.

A run directory contains:

    manifest.txt                 flat key = value echo of the whole run
    horizon.csv                  m,mean_rel_l2,std_rel_l2,n_restarts
    diagnostics.csv              step,time,max_bond,discarded_weight,wall_ms
    bound.csv                    m,delta_m,bound_m,L,e     (linear kind only)
    summary.csv                  key,value
    snapshots/compressed/step_NNNNNNN.txt
    snapshots/reference/step_NNNNNNN.txt
    snapshots/difference/step_NNNNNNN.txt

Snapshot files carry a ``# t=<time> nx=<nx> [ny=<ny>]`` header followed by
whitespace-separated row-major values with 17 significant digits.  All CSV
content except wall-time columns is byte-reproducible across identical runs.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass

import numpy as np

from . import __version__
from .config import RunConfig, format_flat
from .errors import ShapeError
from .metrics import (
    ErrorBoundReport,
    HorizonCurve,
    one_step_error_bound,
    relative_l2,
    restart_averaged_error,
)
from .problems import ADVECTION_DIFFUSION, derive_time_step
from .reference import DenseTrajectory, euler_rollout_dense, rk45_solve
from .stepper import Rollout, StepperConfig, build_step_operators, rollout
from .tensorization import DIRICHLET, GridSpec, boundary_mask, layout_for_grid

_G = ".17g"


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), _G)
    return str(value)


def write_snapshot(path: str, t: float, field: np.ndarray, grid: GridSpec) -> None:
    shape = grid.points_per_axis
    field = np.asarray(field, dtype=float).reshape(shape)
    header = f"# t={format(float(t), _G)} nx={shape[0]}"
    if len(shape) == 2:
        header += f" ny={shape[1]}"
    rows = field if field.ndim == 2 else field.reshape(1, -1)
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(" ".join(format(v, _G) for v in row) + "\n")


def read_snapshot(path: str) -> tuple[float, np.ndarray]:
    with open(path) as fh:
        header = fh.readline().strip()
        body = fh.read().split()
    if not header.startswith("# "):
        raise ShapeError(f"{path}: missing snapshot header")
    fields = dict(part.split("=", 1) for part in header[2:].split())
    t = float(fields["t"])
    nx = int(fields["nx"])
    values = np.array([float(v) for v in body])
    if "ny" in fields:
        return t, values.reshape(nx, int(fields["ny"]))
    if values.size != nx:
        raise ShapeError(f"{path}: expected {nx} values, found {values.size}")
    return t, values


def write_csv(path: str, header: tuple[str, ...], rows) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def read_csv(path: str) -> tuple[list[str], list[list[str]]]:
    with open(path) as fh:
        lines = [line.rstrip("\n") for line in fh if line.strip()]
    header = lines[0].split(",")
    return header, [line.split(",") for line in lines[1:]]


@dataclass
class RunResult:
    config: RunConfig
    out_dir: str
    dt: float
    num_steps: int
    roll: Rollout
    euler: DenseTrajectory
    rk45: DenseTrajectory
    horizon: HorizonCurve
    bound: ErrorBoundReport | None
    summary: dict[str, float]
    manifest: dict[str, str]


def run_experiment(config: RunConfig, out_dir: str | None = None, log=None) -> RunResult:
    """Execute one configured experiment and write every artifact."""

    def say(msg: str) -> None:
        if log is not None:
            log(msg)

    out_dir = out_dir or config.out_dir
    problem, grid = config.problem, config.grid
    layout = layout_for_grid(grid, config.layout_variant)
    dt, num_steps = derive_time_step(problem, grid, config.safety, config.dt_spec)
    walls: dict[str, float] = {}

    say(f"{config.experiment}: {num_steps} steps of dt={dt:.3e} on {grid.points_per_axis}")
    t0 = time.perf_counter()
    ops = build_step_operators(problem, grid, dt, layout, config.mask_truncation)
    stepcfg = StepperConfig(
        dt=dt,
        num_steps=num_steps,
        state_truncation=config.state_truncation,
        mask_truncation=config.mask_truncation,
        snapshot_stride=config.snapshot_stride,
        keep_states=config.keep_states,
        keep_dense=True,
    )
    roll = rollout(problem, grid, stepcfg, layout, ops)
    walls["rollout"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    euler = euler_rollout_dense(problem, grid, dt, num_steps)
    times = dt * np.arange(num_steps + 1)
    rk45 = rk45_solve(problem, grid, times, config.rtol, config.atol)
    walls["reference"] = time.perf_counter() - t0
    say(f"references done ({walls['reference']:.1f}s)")

    t0 = time.perf_counter()
    horizons = tuple(m for m in config.horizons if m <= num_steps)
    # Restarts are measured against the Euler oracle, which shares the
    # compressed stepper's time discretization, so the curve tracks how
    # truncation error alone accumulates with horizon.
    curve = restart_averaged_error(
        euler, ops, config.state_truncation, horizons, config.restart_stride
    )
    walls["horizon"] = time.perf_counter() - t0

    bound = None
    want_bound = config.bound_check == "on" or (
        config.bound_check == "auto" and problem.kind == ADVECTION_DIFFUSION
    )
    if want_bound:
        t0 = time.perf_counter()
        bound = one_step_error_bound(
            problem,
            grid,
            ops,
            config.state_truncation,
            euler,
            compressed_states=roll.dense_states,
            perturbation=config.bound_perturbation,
        )
        walls["bound"] = time.perf_counter() - t0

    final = roll.dense_states[-1]
    summary: dict[str, float] = {
        "final_rel_l2_vs_euler": relative_l2(final, euler.states[-1]),
        "final_rel_l2_vs_rk45": relative_l2(final, rk45.states[-1]),
        "final_max_abs_diff_vs_rk45": float(np.max(np.abs(final - rk45.states[-1]))),
        "max_bond": max((d.max_bond for d in roll.diagnostics), default=0),
        "max_discarded_weight": max((d.discarded_weight for d in roll.diagnostics), default=0.0),
    }
    if grid.boundary == DIRICHLET:
        off = 1.0 - boundary_mask(grid)
        summary["boundary_max_abs"] = float(
            np.max(np.abs(roll.dense_states[1:] * off[None, :]))
        )
    if bound is not None:
        summary["bound_holds"] = float(bound.holds)
        summary["bound_restart_holds"] = float(bound.restart_holds)
        summary["bound_growth_l"] = bound.L
        summary["bound_step_e"] = bound.e

    os.makedirs(out_dir, exist_ok=True)
    for sub in ("compressed", "reference", "difference"):
        os.makedirs(os.path.join(out_dir, "snapshots", sub), exist_ok=True)
    for i, step in enumerate(roll.snapshot_steps):
        t = roll.snapshot_times[i]
        name = f"step_{int(step):07d}.txt"
        ref_state = rk45.states[int(step)]
        write_snapshot(
            os.path.join(out_dir, "snapshots", "compressed", name), t, roll.snapshots[i], grid
        )
        write_snapshot(os.path.join(out_dir, "snapshots", "reference", name), t, ref_state, grid)
        write_snapshot(
            os.path.join(out_dir, "snapshots", "difference", name),
            t,
            roll.snapshots[i] - ref_state,
            grid,
        )

    write_csv(
        os.path.join(out_dir, "horizon.csv"),
        ("m", "mean_rel_l2", "std_rel_l2", "n_restarts"),
        zip(curve.horizons, curve.mean, curve.std, curve.n_restarts),
    )
    write_csv(
        os.path.join(out_dir, "diagnostics.csv"),
        ("step", "time", "max_bond", "discarded_weight", "wall_ms"),
        (
            (d.step, d.time, d.max_bond, d.discarded_weight, d.wall_ms)
            for d in roll.diagnostics
        ),
    )
    if bound is not None:
        write_csv(
            os.path.join(out_dir, "bound.csv"),
            ("m", "delta_m", "bound_m", "L", "e"),
            (
                (m, bound.delta[m], bound.bound[m], bound.L, bound.e)
                for m in range(1, num_steps + 1)
            ),
        )
    write_csv(os.path.join(out_dir, "summary.csv"), ("key", "value"), sorted(summary.items()))

    manifest: dict[str, str] = {"version": __version__}
    for key, value in config.resolved.items():
        manifest[f"config.{key}"] = value
    manifest.update(
        {
            "derived.dt": format(dt, _G),
            "derived.num_steps": str(num_steps),
            "derived.layout": layout.variant,
            "derived.snapshot_count": str(len(roll.snapshot_steps)),
            "method.truncation_rule": "relative_threshold_with_rank_cap",
            "method.sweep_order": "qr_left_then_svd_right",
            "method.digit_order": "most_significant_first",
            "method.step_order": "apply_truncate_mask_truncate",
            "method.nonlinearity": "elementwise_chain_product",
            "method.zero_boundary": "open_stencil_then_mask",
            "method.periodic_boundary": "wrap_in_stencil",
            "method.reference_sampling": "step_clipping_no_interpolation",
            "method.horizon_reference": "euler_oracle_matched_step",
            "method.horizon_std": "population_over_restarts",
            "method.bound_norm": "power_iteration_spectral",
        }
    )
    for key, value in sorted(summary.items()):
        manifest[f"summary.{key}"] = _fmt(value)
    for key, value in sorted(walls.items()):
        manifest[f"wall_s.{key}"] = format(value, ".3f")
    with open(os.path.join(out_dir, "manifest.txt"), "w") as fh:
        fh.write(format_flat(manifest))

    say(f"wrote {out_dir}")
    return RunResult(
        config=config,
        out_dir=out_dir,
        dt=dt,
        num_steps=num_steps,
        roll=roll,
        euler=euler,
        rk45=rk45,
        horizon=curve,
        bound=bound,
        summary=summary,
        manifest=manifest,
    )
