"""Matrix product operators for finite-difference stencils on digit grids.

Cores have shape (R_left, d_out, d_in, R_right).  Applying an operator to a
chain multiplies bond dimensions; no truncation happens inside apply.

Shift operators on a base-2 axis are built directly from carry propagation:
adding one to a big-endian binary number sends a carry from the least
significant site leftwards, so a bond dimension of two (carry yes/no) is
enough for any grid size.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, ShapeError
from .mps import (
    DEFAULT_DENSE_CAP,
    EXACT,
    Mps,
    TruncationParams,
    _qr_left_sweep,
    _svd_right_sweep,
    tt_cores_from_dense,
)
from .tensorization import DIRICHLET, PERIODIC, GridSpec, Layout

# Stencil assembly combines exact rank<=2 shift chains, so a tight relative
# threshold only strips the exact-zero directions introduced by the sum.
STENCIL_COMPRESSION = TruncationParams(chi_max=None, eps_svd=1e-13)

DENSE_OPERATOR_CAP = 2**10  # cap on N for (N, N) densification


@dataclass(frozen=True)
class Mpo:
    """Chain of order-4 cores (left bond, row digit, column digit, right bond)."""

    cores: tuple[np.ndarray, ...]

    def __post_init__(self):
        object.__setattr__(self, "cores", tuple(self.cores))
        if not self.cores:
            raise ShapeError("empty chain")
        d = self.cores[0].shape[1]
        bond = 1
        for i, c in enumerate(self.cores):
            if c.ndim != 4:
                raise ShapeError(f"core {i} must have 4 legs, got {c.ndim}")
            if c.shape[1] != d or c.shape[2] != d:
                raise ShapeError(f"core {i} local dimensions {c.shape[1:3]} != ({d}, {d})")
            if c.shape[0] != bond:
                raise ShapeError(f"core {i} left bond {c.shape[0]} != {bond}")
            bond = c.shape[3]
        if bond != 1:
            raise ShapeError(f"right boundary bond must be 1, got {bond}")

    @property
    def n(self) -> int:
        return len(self.cores)

    @property
    def d(self) -> int:
        return self.cores[0].shape[1]

    @property
    def bond_dims(self) -> tuple[int, ...]:
        return (1,) + tuple(c.shape[3] for c in self.cores)

    @property
    def max_bond(self) -> int:
        return max(self.bond_dims)

    @property
    def num_parameters(self) -> int:
        return sum(c.size for c in self.cores)


def mpo_identity(n: int, d: int = 2) -> Mpo:
    eye = np.eye(d).reshape(1, d, d, 1)
    return Mpo((eye,) * n)


def shift_mpo(n: int, offset: int, boundary: str = PERIODIC, d: int = 2) -> Mpo:
    """Index shift S[i, j] = 1 iff j = i + offset (mod 2**n when periodic).

    Only offsets +1/-1 and d=2 are supported; larger offsets compose.  Open
    (non-periodic) chains drop the wrapped row instead.
    """
    if d != 2:
        raise ShapeError("shift chains are implemented for d=2 only")
    if offset not in (+1, -1):
        raise ShapeError(f"offset must be +1 or -1, got {offset}")
    if n < 1:
        raise ShapeError(f"need at least one site, got {n}")
    # w[carry_out, row, col, carry_in]; carries travel right to left
    w = np.zeros((2, 2, 2, 2))
    w[0, 0, 0, 0] = 1.0  # no carry: digit copied
    w[0, 1, 1, 0] = 1.0
    if offset == +1:
        # col = row + 1: carry flips the digit, continues past a 1
        w[0, 0, 1, 1] = 1.0
        w[1, 1, 0, 1] = 1.0
    else:
        # col = row - 1: borrow flips the digit, continues past a 0
        w[0, 1, 0, 1] = 1.0
        w[1, 0, 1, 1] = 1.0
    last = w[:, :, :, 1:]  # carry enters at the least significant site
    if boundary == PERIODIC:
        first = w.sum(axis=0, keepdims=True)  # overflow wraps around
    elif boundary == DIRICHLET:
        first = w[0:1]  # overflow leaves the grid: drop the row
    else:
        raise ShapeError(f"unknown boundary {boundary!r}")
    if n == 1:
        core = w.sum(axis=0, keepdims=True) if boundary == PERIODIC else w[0:1]
        return Mpo((core[:, :, :, 1:],))
    cores = [first] + [w] * (n - 2) + [last]
    return Mpo(tuple(cores))


def mpo_scale(o: Mpo, alpha: float) -> Mpo:
    cores = list(o.cores)
    cores[0] = cores[0] * float(alpha)
    return Mpo(tuple(cores))


def mpo_add(a: Mpo, b: Mpo) -> Mpo:
    if a.n != b.n or a.d != b.d:
        raise ShapeError("chains must have matching length and local dimension")
    n, d = a.n, a.d
    if n == 1:
        return Mpo((a.cores[0] + b.cores[0],))
    cores = [np.concatenate([a.cores[0], b.cores[0]], axis=3)]
    for i in range(1, n - 1):
        al = a.cores[i].shape[0]
        ar = a.cores[i].shape[3]
        bl = b.cores[i].shape[0]
        br = b.cores[i].shape[3]
        c = np.zeros((al + bl, d, d, ar + br))
        c[:al, :, :, :ar] = a.cores[i]
        c[al:, :, :, ar:] = b.cores[i]
        cores.append(c)
    cores.append(np.concatenate([a.cores[-1], b.cores[-1]], axis=0))
    return Mpo(tuple(cores))


def mpo_compress(o: Mpo, params: TruncationParams = STENCIL_COMPRESSION) -> Mpo:
    """Rank-reduce an operator chain by treating (row, col) as one fat leg."""
    d = o.d
    flat = [c.reshape(c.shape[0], d * d, c.shape[3]).copy() for c in o.cores]
    flat = _qr_left_sweep(flat)
    flat, _ = _svd_right_sweep(flat, params)
    return Mpo(tuple(c.reshape(c.shape[0], d, d, c.shape[2]) for c in flat))


def apply(o: Mpo, x: Mps) -> Mps:
    """Operator-times-state; output bond dims are the elementwise products."""
    if o.n != x.n or o.d != x.d:
        raise ShapeError("operator and state must have matching length and local dimension")
    cores = []
    for w, a in zip(o.cores, x.cores):
        rl, _, _, rr = w.shape
        dl, _, dr = a.shape
        c = np.einsum("lsum,aub->lasmb", w, a, optimize=True)
        cores.append(c.reshape(rl * dl, w.shape[1], rr * dr))
    return Mps(tuple(cores))


def d1_mpo(grid: GridSpec) -> Mpo:
    """Centered first difference (u[i+1] - u[i-1]) / (2h) on a 1D grid."""
    if grid.spatial_dim != 1:
        raise ShapeError("d1_mpo builds 1D stencils; lift_to_axis embeds them in 2D")
    n = _grid_digits(grid)
    h = grid.spacing(0)
    sp = shift_mpo(n, +1, grid.boundary)
    sm = shift_mpo(n, -1, grid.boundary)
    op = mpo_add(mpo_scale(sp, 1.0 / (2.0 * h)), mpo_scale(sm, -1.0 / (2.0 * h)))
    return mpo_compress(op)


def d2_mpo(grid: GridSpec) -> Mpo:
    """Second difference (u[i+1] - 2 u[i] + u[i-1]) / h**2 on a 1D grid."""
    if grid.spatial_dim != 1:
        raise ShapeError("d2_mpo builds 1D stencils; lift_to_axis embeds them in 2D")
    n = _grid_digits(grid)
    h = grid.spacing(0)
    sp = shift_mpo(n, +1, grid.boundary)
    sm = shift_mpo(n, -1, grid.boundary)
    op = mpo_add(mpo_add(sp, sm), mpo_scale(mpo_identity(n), -2.0))
    return mpo_compress(mpo_scale(op, 1.0 / h**2))


def _grid_digits(grid: GridSpec) -> int:
    n = 0
    p = grid.points_per_axis[0]
    while p > 1:
        p //= 2
        n += 1
    return n


def lift_to_axis(op1d: Mpo, axis: int, layout: Layout) -> Mpo:
    """Embed a one-axis operator into a multi-axis chain.

    Sites of other axes get identity cores that pass the current operator
    bond through unchanged, so the result equals a Kronecker product with
    identities in the dense picture.
    """
    target_sites = [(site, sig) for site, (a, sig) in enumerate(layout.ordering) if a == axis]
    if len(target_sites) != op1d.n:
        raise ShapeError(
            f"axis {axis} has {len(target_sites)} sites, operator has {op1d.n}"
        )
    sigs = [sig for _, sig in target_sites]
    if sigs != sorted(sigs, reverse=True):
        raise ShapeError("layout must order axis digits most significant first")
    d = layout.d
    cores = []
    k = 0
    bond = 1
    for site in range(layout.n):
        if layout.ordering[site][0] == axis:
            cores.append(op1d.cores[k])
            bond = op1d.cores[k].shape[3]
            k += 1
        else:
            passthrough = np.einsum("lm,su->lsum", np.eye(bond), np.eye(d))
            cores.append(passthrough)
    return Mpo(tuple(cores))


def mpo_from_dense(
    matrix: np.ndarray,
    layout: Layout,
    params: TruncationParams = EXACT,
) -> Mpo:
    """Factor a dense (N, N) grid-ordered matrix into an operator chain."""
    matrix = np.asarray(matrix, dtype=float)
    npts = layout.num_points
    if matrix.shape != (npts, npts):
        raise ShapeError(f"matrix shape {matrix.shape} does not match layout ({npts}, {npts})")
    perm = layout.grid_permutation
    site = matrix[np.ix_(perm, perm)]
    d, n = layout.d, layout.n
    t = site.reshape((d,) * (2 * n))
    order = [k for pair in zip(range(n), range(n, 2 * n)) for k in pair]
    t = t.transpose(order).reshape((d * d,) * n)
    flat = tt_cores_from_dense(t, d * d, params)
    return Mpo(tuple(c.reshape(c.shape[0], d, d, c.shape[2]) for c in flat))


def mpo_to_dense(
    o: Mpo,
    layout: Layout | None = None,
    size_cap: int = DENSE_OPERATOR_CAP,
) -> np.ndarray:
    """Contract to a dense (N, N) matrix.

    Without a layout the matrix acts on digit-lexicographic (site-order)
    vectors; with a layout it is permuted back to grid order.
    """
    npts = o.d**o.n
    if npts > size_cap:
        raise CapacityError(f"dense operator would be ({npts}, {npts}), cap is {size_cap}")
    d, n = o.d, o.n
    acc = np.ones((1, 1))
    for c in o.cores:
        rl, _, _, rr = c.shape
        acc = (acc @ c.reshape(rl, d * d * rr)).reshape(acc.shape[0] * d * d, rr)
    t = acc.reshape((d, d) * n)
    rows_then_cols = list(range(0, 2 * n, 2)) + list(range(1, 2 * n, 2))
    site = t.transpose(rows_then_cols).reshape(npts, npts)
    if layout is None:
        return site
    if layout.num_points != npts:
        raise ShapeError("layout does not match operator size")
    inv = layout.inverse_permutation
    return site[np.ix_(inv, inv)]
