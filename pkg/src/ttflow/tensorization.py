"""Grids, base-d digit addressing, and flat-vector <-> digit-tensor reshaping.

A grid axis with d**k points is addressed by k base-d digits, most significant
first.  A Layout assigns every digit of every axis to one chain site; encoding
a grid function means permuting its flat values into digit-lexicographic order
and reshaping to a (d, d, ..., d) tensor.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import RangeError, ShapeError

PERIODIC = "periodic"
DIRICHLET = "dirichlet_zero"
BOUNDARIES = (PERIODIC, DIRICHLET)


def _digit_count(points: int, d: int) -> int:
    """Number of base-d digits for an axis, or -1 if points is not a power."""
    if points < d:
        return -1
    k = 0
    while points > 1:
        if points % d:
            return -1
        points //= d
        k += 1
    return k


@dataclass(frozen=True)
class GridSpec:
    """Uniform tensor grid on a box, one power-of-two point count per axis."""

    spatial_dim: int
    points_per_axis: tuple[int, ...]
    extents: tuple[tuple[float, float], ...]
    boundary: str

    def __post_init__(self):
        problems = []
        if self.spatial_dim not in (1, 2):
            problems.append(f"spatial_dim must be 1 or 2, got {self.spatial_dim}")
        if len(self.points_per_axis) != self.spatial_dim:
            problems.append("points_per_axis length must equal spatial_dim")
        for p in self.points_per_axis:
            if _digit_count(p, 2) < 0:
                problems.append(f"points per axis must be a power of two >= 2, got {p}")
        if len(self.extents) != self.spatial_dim:
            problems.append("extents length must equal spatial_dim")
        for lo, hi in self.extents:
            if not hi > lo:
                problems.append(f"axis extent must satisfy hi > lo, got ({lo}, {hi})")
        if self.boundary not in BOUNDARIES:
            problems.append(f"boundary must be one of {BOUNDARIES}, got {self.boundary!r}")
        if problems:
            raise ShapeError("; ".join(problems))

    @property
    def num_points(self) -> int:
        n = 1
        for p in self.points_per_axis:
            n *= p
        return n

    def spacing(self, axis: int = 0) -> float:
        # Periodic grids omit the right endpoint; zero-boundary grids keep both.
        lo, hi = self.extents[axis]
        p = self.points_per_axis[axis]
        if self.boundary == PERIODIC:
            return (hi - lo) / p
        return (hi - lo) / (p - 1)

    def axis_coords(self, axis: int = 0) -> np.ndarray:
        lo, _ = self.extents[axis]
        return lo + self.spacing(axis) * np.arange(self.points_per_axis[axis])

    def meshgrid(self) -> tuple[np.ndarray, ...]:
        axes = [self.axis_coords(a) for a in range(self.spatial_dim)]
        return tuple(np.meshgrid(*axes, indexing="ij"))


def grid1d(points: int, extent=(0.0, 1.0), boundary: str = PERIODIC) -> GridSpec:
    return GridSpec(1, (points,), (tuple(extent),), boundary)


def grid2d(points, extent=(0.0, 1.0), boundary: str = PERIODIC) -> GridSpec:
    if isinstance(points, int):
        points = (points, points)
    return GridSpec(2, tuple(points), (tuple(extent),) * 2, boundary)


def boundary_mask(grid: GridSpec) -> np.ndarray:
    """Flat indicator that is 0 on every zero-boundary node, 1 elsewhere.

    All ones for periodic grids.
    """
    if grid.boundary == PERIODIC:
        return np.ones(grid.num_points)
    axis_masks = []
    for a in range(grid.spatial_dim):
        m = np.ones(grid.points_per_axis[a])
        m[0] = 0.0
        m[-1] = 0.0
        axis_masks.append(m)
    full = axis_masks[0]
    for m in axis_masks[1:]:
        full = np.multiply.outer(full, m)
    return full.reshape(-1)


@dataclass(frozen=True)
class Layout:
    """Assignment of base-d digits to chain sites.

    ``ordering[site] = (axis, significance)``: the site carries the digit of
    weight d**significance of that axis index.  Flat grid indices are
    row-major over axes in their natural order.
    """

    d: int
    ordering: tuple[tuple[int, int], ...]
    variant: str
    axis_digits: tuple[int, ...]

    def __post_init__(self):
        expected = {
            (a, s) for a in range(len(self.axis_digits)) for s in range(self.axis_digits[a])
        }
        if set(self.ordering) != expected or len(self.ordering) != len(expected):
            raise ShapeError("ordering must list every (axis, significance) pair exactly once")
        if self.d < 2:
            raise ShapeError(f"local dimension must be >= 2, got {self.d}")

    @property
    def n(self) -> int:
        return len(self.ordering)

    @property
    def num_points(self) -> int:
        return self.d**self.n

    @property
    def grid_shape(self) -> tuple[int, ...]:
        return tuple(self.d**k for k in self.axis_digits)

    @cached_property
    def grid_permutation(self) -> np.ndarray:
        """perm[site_lex] = flat grid index of that digit tuple."""
        d, n = self.d, self.n
        s = np.arange(self.num_points)
        axis_index = [np.zeros(self.num_points, dtype=np.int64) for _ in self.axis_digits]
        for site, (axis, sig) in enumerate(self.ordering):
            digit = (s // d ** (n - 1 - site)) % d
            axis_index[axis] += digit * d**sig
        return np.ravel_multi_index(axis_index, self.grid_shape).astype(np.int64)

    @cached_property
    def inverse_permutation(self) -> np.ndarray:
        """inv[flat grid index] = site-lex index."""
        inv = np.empty(self.num_points, dtype=np.int64)
        inv[self.grid_permutation] = np.arange(self.num_points)
        return inv


def sequential_layout(grid: GridSpec, d: int = 2) -> Layout:
    """All digits of axis 0 first (most significant leading), then axis 1, ..."""
    axis_digits = tuple(_digit_count(p, d) for p in grid.points_per_axis)
    if any(k < 0 for k in axis_digits):
        raise ShapeError(f"grid points {grid.points_per_axis} are not powers of {d}")
    ordering = []
    for axis, k in enumerate(axis_digits):
        ordering.extend((axis, sig) for sig in range(k - 1, -1, -1))
    return Layout(d, tuple(ordering), "sequential", axis_digits)


def interleaved_layout(grid: GridSpec, d: int = 2) -> Layout:
    """Digits of equal significance adjacent: (x_msb, y_msb, x_next, y_next, ...)."""
    axis_digits = tuple(_digit_count(p, d) for p in grid.points_per_axis)
    if any(k < 0 for k in axis_digits):
        raise ShapeError(f"grid points {grid.points_per_axis} are not powers of {d}")
    if len(set(axis_digits)) != 1:
        raise ShapeError("interleaved layout needs the same digit count on every axis")
    k = axis_digits[0]
    ordering = []
    for sig in range(k - 1, -1, -1):
        ordering.extend((axis, sig) for axis in range(len(axis_digits)))
    return Layout(d, tuple(ordering), "interleaved", axis_digits)


def layout_for_grid(grid: GridSpec, variant: str = "auto", d: int = 2) -> Layout:
    if variant == "auto":
        variant = "sequential" if grid.spatial_dim == 1 else "interleaved"
    if variant == "sequential":
        return sequential_layout(grid, d)
    if variant == "interleaved":
        return interleaved_layout(grid, d)
    raise ShapeError(f"unknown layout variant {variant!r}")


def index_to_digits(index, layout: Layout) -> tuple[int, ...]:
    """Per-site digits of a grid index (int for 1D, (i0, i1) for 2D)."""
    if np.isscalar(index):
        index = (int(index),)
    index = tuple(int(i) for i in index)
    if len(index) != len(layout.axis_digits):
        raise ShapeError(f"expected {len(layout.axis_digits)} axis indices, got {len(index)}")
    for a, i in enumerate(index):
        if not 0 <= i < layout.d ** layout.axis_digits[a]:
            raise RangeError(f"axis {a} index {i} out of range")
    return tuple((index[axis] // layout.d**sig) % layout.d for axis, sig in layout.ordering)


def digits_to_index(digits, layout: Layout):
    """Inverse of index_to_digits; returns int for 1D, tuple for 2D."""
    digits = tuple(int(g) for g in digits)
    if len(digits) != layout.n:
        raise ShapeError(f"expected {layout.n} digits, got {len(digits)}")
    if any(not 0 <= g < layout.d for g in digits):
        raise RangeError("digit out of range")
    index = [0] * len(layout.axis_digits)
    for g, (axis, sig) in zip(digits, layout.ordering):
        index[axis] += g * layout.d**sig
    if len(index) == 1:
        return index[0]
    return tuple(index)


def encode(u: np.ndarray, layout: Layout) -> np.ndarray:
    """Flat (or grid-shaped) field -> (d,)*n digit tensor."""
    u = np.asarray(u, dtype=float).reshape(-1)
    if u.size != layout.num_points:
        raise ShapeError(f"field has {u.size} values, layout addresses {layout.num_points}")
    return u[layout.grid_permutation].reshape((layout.d,) * layout.n)


def decode(t: np.ndarray, layout: Layout) -> np.ndarray:
    """(d,)*n digit tensor -> flat field in grid order."""
    t = np.asarray(t, dtype=float)
    if t.shape != (layout.d,) * layout.n:
        raise ShapeError(f"tensor shape {t.shape} does not match layout {(layout.d,) * layout.n}")
    return t.reshape(-1)[layout.inverse_permutation]
