"""Problem definitions: PDE kinds, initial conditions, and the step-size rule."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ShapeError
from .tensorization import BOUNDARIES, GridSpec

ADVECTION_DIFFUSION = "advection_diffusion"
BURGERS = "burgers"
KINDS = (ADVECTION_DIFFUSION, BURGERS)

GAUSSIAN = "gaussian"
ONE_PLUS_SINE = "one_plus_sine"
IC_KINDS = (GAUSSIAN, ONE_PLUS_SINE)


@dataclass(frozen=True)
class InitialCondition:
    """Named initial profile.

    gaussian: exp(-width * sum_a (x_a - center_a)**2)
    one_plus_sine: 1 + amplitude * prod_a sin(2 pi x_a)
    """

    kind: str
    center: tuple[float, ...] = (0.3,)
    width: float = 100.0
    amplitude: float = 0.5

    def __post_init__(self):
        if self.kind not in IC_KINDS:
            raise ShapeError(f"initial condition must be one of {IC_KINDS}, got {self.kind!r}")
        if self.width <= 0:
            raise ShapeError(f"width must be positive, got {self.width}")


@dataclass(frozen=True)
class PdeProblem:
    """One scalar conservation/transport problem on a box."""

    kind: str
    spatial_dim: int
    velocity: tuple[float, ...]
    viscosity: float
    boundary: str
    initial: InitialCondition
    final_time: float

    def __post_init__(self):
        problems = []
        if self.kind not in KINDS:
            problems.append(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.spatial_dim not in (1, 2):
            problems.append(f"spatial_dim must be 1 or 2, got {self.spatial_dim}")
        if self.kind == ADVECTION_DIFFUSION and len(self.velocity) != self.spatial_dim:
            problems.append("velocity needs one component per axis")
        if self.viscosity < 0:
            problems.append(f"viscosity must be >= 0, got {self.viscosity}")
        if self.boundary not in BOUNDARIES:
            problems.append(f"boundary must be one of {BOUNDARIES}, got {self.boundary!r}")
        if self.final_time <= 0:
            problems.append(f"final_time must be positive, got {self.final_time}")
        if problems:
            raise ConfigError(problems)


def sample_initial(problem: PdeProblem, grid: GridSpec) -> np.ndarray:
    """Pointwise samples of the initial profile, flat in grid order."""
    if grid.spatial_dim != problem.spatial_dim:
        raise ShapeError("grid and problem dimensions differ")
    mesh = grid.meshgrid()
    ic = problem.initial
    if ic.kind == GAUSSIAN:
        if len(ic.center) != grid.spatial_dim:
            raise ShapeError("gaussian center needs one component per axis")
        r2 = sum((x - c) ** 2 for x, c in zip(mesh, ic.center))
        u = np.exp(-ic.width * r2)
    else:
        u = np.ones_like(mesh[0])
        for x in mesh:
            u = u * np.sin(2.0 * np.pi * x)
        u = 1.0 + ic.amplitude * u
    return u.reshape(-1)


def velocity_scale(problem: PdeProblem, grid: GridSpec) -> float:
    """Transport speed entering the step-size rule."""
    if problem.kind == ADVECTION_DIFFUSION:
        return max(abs(c) for c in problem.velocity)
    return float(np.max(np.abs(sample_initial(problem, grid))))


def derive_time_step(
    problem: PdeProblem,
    grid: GridSpec,
    safety: float = 0.4,
    dt_override: float | None = None,
) -> tuple[float, int]:
    """Stable explicit step and step count covering final_time exactly.

    dt_max = safety * min(h / vmax, h**2 / (2 * viscosity * dim)); the step
    actually used divides final_time into an integer number of pieces.
    """
    if dt_override is not None:
        if dt_override <= 0:
            raise ConfigError(f"dt must be positive, got {dt_override}")
        num = max(1, math.ceil(problem.final_time / dt_override - 1e-9))
        return problem.final_time / num, num
    h = min(grid.spacing(a) for a in range(grid.spatial_dim))
    limits = []
    vmax = velocity_scale(problem, grid)
    if vmax > 0:
        limits.append(h / vmax)
    if problem.viscosity > 0:
        limits.append(h**2 / (2.0 * problem.viscosity * grid.spatial_dim))
    if not limits:
        raise ConfigError("no finite step-size limit; give an explicit dt")
    dt_max = safety * min(limits)
    num = max(1, math.ceil(problem.final_time / dt_max - 1e-9))
    return problem.final_time / num, num
