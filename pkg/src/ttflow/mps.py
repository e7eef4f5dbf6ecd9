"""Tensor-train (matrix product state) representation of grid functions.

Cores are numpy arrays of shape (D_left, d, D_right) with boundary bonds of
size one.  All operations return new objects; cores are never mutated in
place.  Truncation is a two-sweep procedure: a left-to-right QR
orthogonalization followed by a right-to-left SVD sweep that discards
singular values relative to the largest one on each bond.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, ShapeError

DEFAULT_DENSE_CAP = 2**20


@dataclass(frozen=True)
class TruncationParams:
    """Bond-rank cap and relative singular-value threshold.

    chi_max=None means unbounded.  On each bond, singular values with
    sigma_i <= eps_svd * sigma_1 are discarded; at least one is kept.
    """

    chi_max: int | None = None
    eps_svd: float = 0.0

    def __post_init__(self):
        if self.chi_max is not None and self.chi_max < 1:
            raise ShapeError(f"chi_max must be >= 1 or None, got {self.chi_max}")
        if not 0.0 <= self.eps_svd < 1.0:
            raise ShapeError(f"eps_svd must be in [0, 1), got {self.eps_svd}")


EXACT = TruncationParams(chi_max=None, eps_svd=0.0)


@dataclass(frozen=True)
class Mps:
    """Chain of order-3 cores; optional orthogonality center.

    When ``center`` is set, cores left of it are left-orthogonal and cores
    right of it are right-orthogonal.  ``center_singular_values`` holds the
    Schmidt spectrum of the bond (center, center+1) when available.
    """

    cores: tuple[np.ndarray, ...]
    center: int | None = None
    center_singular_values: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "cores", tuple(self.cores))
        if not self.cores:
            raise ShapeError("empty chain")
        d = self.cores[0].shape[1]
        bond = 1
        for i, c in enumerate(self.cores):
            if c.ndim != 3:
                raise ShapeError(f"core {i} must have 3 legs, got {c.ndim}")
            if c.shape[1] != d:
                raise ShapeError(f"core {i} local dimension {c.shape[1]} != {d}")
            if c.shape[0] != bond:
                raise ShapeError(f"core {i} left bond {c.shape[0]} != {bond}")
            bond = c.shape[2]
        if bond != 1:
            raise ShapeError(f"right boundary bond must be 1, got {bond}")
        if self.center is not None and not 0 <= self.center < len(self.cores):
            raise ShapeError(f"center {self.center} out of range")
        s = self.center_singular_values
        if s is not None:
            if np.any(s < 0) or np.any(np.diff(s) > 0):
                raise ShapeError("center singular values must be >= 0 and descending")

    @property
    def n(self) -> int:
        return len(self.cores)

    @property
    def d(self) -> int:
        return self.cores[0].shape[1]

    @property
    def bond_dims(self) -> tuple[int, ...]:
        return (1,) + tuple(c.shape[2] for c in self.cores)

    @property
    def max_bond(self) -> int:
        return max(self.bond_dims)


def _kept_rank(s: np.ndarray, params: TruncationParams) -> int:
    if s.size == 0:
        return 1
    keep = int(np.count_nonzero(s > params.eps_svd * s[0]))
    keep = max(keep, 1)
    if params.chi_max is not None:
        keep = min(keep, params.chi_max)
    return keep


def _qr_left_sweep(cores: list[np.ndarray]) -> list[np.ndarray]:
    """Left-orthogonalize sites 0..n-2, pushing the remainder right."""
    for i in range(len(cores) - 1):
        dl, p, dr = cores[i].shape
        q, r = np.linalg.qr(cores[i].reshape(dl * p, dr))
        cores[i] = q.reshape(dl, p, q.shape[1])
        cores[i + 1] = np.tensordot(r, cores[i + 1], axes=(1, 0))
    return cores


def _svd_right_sweep(cores: list[np.ndarray], params: TruncationParams):
    """Truncate bonds n-1..1 right-to-left; returns (cores, discarded_weight).

    Assumes the chain is left-orthogonal up front so the local spectra equal
    the Schmidt spectra of the represented tensor.
    """
    discarded_sq = 0.0
    for i in range(len(cores) - 1, 0, -1):
        dl, p, dr = cores[i].shape
        u, s, vt = np.linalg.svd(cores[i].reshape(dl, p * dr), full_matrices=False)
        keep = _kept_rank(s, params)
        discarded_sq += float(np.sum(s[keep:] ** 2))
        cores[i] = vt[:keep].reshape(keep, p, dr)
        cores[i - 1] = np.tensordot(cores[i - 1], u[:, :keep] * s[:keep], axes=(2, 0))
    return cores, math.sqrt(discarded_sq)


def tt_cores_from_dense(t: np.ndarray, p: int, params: TruncationParams) -> list[np.ndarray]:
    """Sequential SVD factorization of a (p,)*n tensor into order-3 cores."""
    t = np.asarray(t, dtype=float)
    n = t.ndim
    if n < 1 or t.shape != (p,) * n:
        raise ShapeError(f"expected a ({p},)*n tensor, got shape {t.shape}")
    cores = []
    mat = t.reshape(1, -1)
    rank = 1
    for _ in range(n - 1):
        mat = mat.reshape(rank * p, -1)
        u, s, vt = np.linalg.svd(mat, full_matrices=False)
        keep = _kept_rank(s, params)
        cores.append(u[:, :keep].reshape(rank, p, keep))
        mat = s[:keep, None] * vt[:keep]
        rank = keep
    cores.append(mat.reshape(rank, p, 1))
    return cores


def mps_from_dense(t: np.ndarray, params: TruncationParams = EXACT) -> Mps:
    """Compress a (d,)*n digit tensor into a chain; center lands on the last site."""
    cores = tt_cores_from_dense(np.asarray(t, dtype=float), np.asarray(t).shape[0], params)
    m = Mps(tuple(cores), center=len(cores) - 1)
    n, d = m.n, m.d
    for i, dim in enumerate(m.bond_dims):
        # structural cap: bond i separates i sites from n - i sites
        if dim > d ** min(i, n - i):
            raise ShapeError(f"bond {i} dimension {dim} exceeds structural cap")
    return m


def mps_to_dense(m: Mps, size_cap: int = DEFAULT_DENSE_CAP) -> np.ndarray:
    """Contract the chain to a full (d,)*n tensor; refuses above size_cap."""
    if m.d**m.n > size_cap:
        raise CapacityError(f"dense tensor would have {m.d**m.n} entries, cap is {size_cap}")
    acc = np.ones((1, 1))
    for c in m.cores:
        dl, p, dr = c.shape
        acc = (acc @ c.reshape(dl, p * dr)).reshape(acc.shape[0] * p, dr)
    return acc.reshape((m.d,) * m.n)


def canonicalize(m: Mps, center: int) -> Mps:
    """Gauge the chain into mixed-canonical form about ``center``.

    The represented tensor is unchanged.  The Schmidt spectrum of the bond
    (center, center+1) is recorded when that bond exists.
    """
    if not 0 <= center < m.n:
        raise ShapeError(f"center {center} out of range for {m.n} sites")
    cores = [c.copy() for c in m.cores]
    for i in range(center):
        dl, p, dr = cores[i].shape
        q, r = np.linalg.qr(cores[i].reshape(dl * p, dr))
        cores[i] = q.reshape(dl, p, q.shape[1])
        cores[i + 1] = np.tensordot(r, cores[i + 1], axes=(1, 0))
    for i in range(m.n - 1, center, -1):
        dl, p, dr = cores[i].shape
        q, r = np.linalg.qr(cores[i].reshape(dl, p * dr).T)
        k = q.shape[1]
        cores[i] = q.T.reshape(k, p, dr)
        cores[i - 1] = np.tensordot(cores[i - 1], r.T, axes=(2, 0))
    svals = None
    if center < m.n - 1:
        dl, p, dr = cores[center].shape
        svals = np.linalg.svd(cores[center].reshape(dl * p, dr), compute_uv=False)
    return Mps(tuple(cores), center=center, center_singular_values=svals)


def truncate(m: Mps, params: TruncationParams) -> tuple[Mps, float]:
    """Rank-reduce a chain; returns (chain, discarded_weight).

    discarded_weight is the root of the summed squares of all discarded
    singular values across the sweep.  The result is right-orthogonal with
    the center on site 0.
    """
    cores = _qr_left_sweep([c.copy() for c in m.cores])
    cores, weight = _svd_right_sweep(cores, params)
    return Mps(tuple(cores), center=0), weight


def inner(a: Mps, b: Mps) -> float:
    """Euclidean inner product of the represented tensors."""
    if a.n != b.n or a.d != b.d:
        raise ShapeError("chains must have matching length and local dimension")
    env = np.ones((1, 1))
    for x, y in zip(a.cores, b.cores):
        env = np.einsum("xy,xsa,ysb->ab", env, x, y, optimize=True)
    return float(env[0, 0])


def norm(a: Mps) -> float:
    return math.sqrt(max(inner(a, a), 0.0))


def scale(a: Mps, alpha: float) -> Mps:
    """Multiply the represented tensor by a scalar (applied to one core)."""
    cores = list(a.cores)
    cores[0] = cores[0] * float(alpha)
    return Mps(tuple(cores))


def add(a: Mps, b: Mps) -> Mps:
    """Block-diagonal sum; bond dims add, boundary bonds stay one."""
    if a.n != b.n or a.d != b.d:
        raise ShapeError("chains must have matching length and local dimension")
    n, d = a.n, a.d
    if n == 1:
        return Mps((a.cores[0] + b.cores[0],))
    cores = [np.concatenate([a.cores[0], b.cores[0]], axis=2)]
    for i in range(1, n - 1):
        al, _, ar = a.cores[i].shape
        bl, _, br = b.cores[i].shape
        c = np.zeros((al + bl, d, ar + br))
        c[:al, :, :ar] = a.cores[i]
        c[al:, :, ar:] = b.cores[i]
        cores.append(c)
    cores.append(np.concatenate([a.cores[-1], b.cores[-1]], axis=0))
    return Mps(tuple(cores))


def hadamard(a: Mps, b: Mps) -> Mps:
    """Elementwise product; bond dims multiply."""
    if a.n != b.n or a.d != b.d:
        raise ShapeError("chains must have matching length and local dimension")
    cores = []
    for x, y in zip(a.cores, b.cores):
        al, d, ar = x.shape
        bl, _, br = y.shape
        c = np.einsum("isj,ksl->iksjl", x, y, optimize=True)
        cores.append(c.reshape(al * bl, d, ar * br))
    return Mps(tuple(cores))


def hadamard_truncated(a: Mps, b: Mps, params: TruncationParams) -> tuple[Mps, float]:
    """Elementwise product fused with truncation.

    Equivalent to truncate(hadamard(a, b), params) but never materializes the
    product cores of size (Da*Db, d, Da'*Db'); the left QR sweep is performed
    on the fly, so peak cost stays polynomial in the input bond dims.
    """
    if a.n != b.n or a.d != b.d:
        raise ShapeError("chains must have matching length and local dimension")
    n, d = a.n, a.d
    out: list[np.ndarray] = []
    carry = np.ones((1, 1, 1))  # (orthogonal bond, bond of a, bond of b)
    for i in range(n):
        t = np.einsum("rab,asx->rbsx", carry, a.cores[i], optimize=True)
        t = np.einsum("rbsx,bsy->rsxy", t, b.cores[i], optimize=True)
        r, _, ar, br = t.shape
        if i < n - 1:
            q, rr = np.linalg.qr(t.reshape(r * d, ar * br))
            k = q.shape[1]
            out.append(q.reshape(r, d, k))
            carry = rr.reshape(k, ar, br)
        else:
            out.append(t.reshape(r, d, 1))
    cores, weight = _svd_right_sweep(out, params)
    return Mps(tuple(cores), center=0), weight
