import numpy as np
import pytest

from ttflow.errors import CapacityError, ShapeError
from ttflow.mps import EXACT, TruncationParams, mps_from_dense, mps_to_dense
from ttflow.mpo import (
    Mpo,
    apply,
    d1_mpo,
    d2_mpo,
    lift_to_axis,
    mpo_add,
    mpo_compress,
    mpo_from_dense,
    mpo_identity,
    mpo_scale,
    mpo_to_dense,
    shift_mpo,
)
from ttflow.reference import shift_matrix, stencil_matrix_d1, stencil_matrix_d2
from ttflow.tensorization import (
    DIRICHLET,
    PERIODIC,
    grid1d,
    grid2d,
    interleaved_layout,
    sequential_layout,
)


def random_mpo(rng, n, d=2, rank=3):
    """Random low-rank operator built as a sum of Kronecker-factored terms."""
    terms = []
    for _ in range(rank):
        cores = [rng.normal(size=(1, d, d, 1)) for _ in range(n)]
        terms.append(Mpo(tuple(cores)))
    out = terms[0]
    for t in terms[1:]:
        out = mpo_add(out, t)
    return out


def test_identity_application(rng):
    t = rng.normal(size=(2,) * 6)
    m = mps_from_dense(t)
    assert np.allclose(mps_to_dense(apply(mpo_identity(6), m)), t, atol=1e-12)


@pytest.mark.parametrize("boundary", [PERIODIC, DIRICHLET])
@pytest.mark.parametrize("offset", [+1, -1])
def test_shift_chain_matches_sparse_oracle(boundary, offset):
    for n in (1, 2, 3, 4, 6):
        got = mpo_to_dense(shift_mpo(n, offset, boundary))
        want = shift_matrix(2**n, offset, boundary).toarray()
        assert np.array_equal(got, want)
        assert shift_mpo(n, offset, boundary).max_bond <= 2


def test_shift_rejects_unsupported():
    with pytest.raises(ShapeError):
        shift_mpo(4, +2, PERIODIC)
    with pytest.raises(ShapeError):
        shift_mpo(4, +1, PERIODIC, d=3)
    with pytest.raises(ShapeError):
        shift_mpo(0, +1, PERIODIC)


@pytest.mark.parametrize("boundary", [PERIODIC, DIRICHLET])
def test_stencils_match_dense_forms(boundary):
    for npts in (8, 64, 1024):
        g = grid1d(npts, boundary=boundary)
        lay = sequential_layout(g)
        h = g.spacing(0)
        for build, oracle in (
            (d1_mpo, stencil_matrix_d1),
            (d2_mpo, stencil_matrix_d2),
        ):
            op = build(g)
            got = mpo_to_dense(op, lay, size_cap=npts)
            want = oracle(npts, h, boundary).toarray()
            scale_ref = np.max(np.abs(want))
            assert np.max(np.abs(got - want)) <= 1e-12 * scale_ref
            # zero entries of the stencil stay numerically zero
            assert np.max(np.abs(got[want == 0.0])) <= 1e-12 * scale_ref
            assert op.max_bond <= 4


def test_apply_homomorphism_random_pairs(rng):
    # operator-times-state commutes with densification
    for trial in range(50):
        n = int(rng.integers(1, 9))
        op = random_mpo(rng, n, rank=int(rng.integers(1, 4)))
        x = mps_from_dense(rng.normal(size=(2,) * n))
        got = mps_to_dense(apply(op, x)).reshape(-1)
        want = mpo_to_dense(op) @ mps_to_dense(x).reshape(-1)
        scale_ref = max(1.0, float(np.max(np.abs(want))))
        assert np.max(np.abs(got - want)) <= 1e-10 * scale_ref


def test_apply_bond_profile_is_elementwise_product(rng):
    g = grid1d(64)
    op = d2_mpo(g)
    x = mps_from_dense(rng.normal(size=(2,) * 6))
    y = apply(op, x)
    assert y.bond_dims == tuple(a * b for a, b in zip(op.bond_dims, x.bond_dims))


def test_apply_shape_mismatch(rng):
    with pytest.raises(ShapeError):
        apply(mpo_identity(4), mps_from_dense(rng.normal(size=(2,) * 5)))


def test_mpo_add_scale_match_dense(rng):
    a = random_mpo(rng, 5)
    b = random_mpo(rng, 5)
    da, db = mpo_to_dense(a), mpo_to_dense(b)
    assert np.allclose(mpo_to_dense(mpo_add(a, b)), da + db, atol=1e-12)
    assert np.allclose(mpo_to_dense(mpo_scale(a, 3.25)), 3.25 * da, atol=1e-12)
    with pytest.raises(ShapeError):
        mpo_add(a, random_mpo(rng, 6))


def test_compress_preserves_operator_and_cuts_rank(rng):
    doubled = mpo_add(mpo_identity(6), mpo_identity(6))
    assert doubled.max_bond == 2
    squeezed = mpo_compress(doubled)
    assert squeezed.max_bond == 1
    assert np.allclose(mpo_to_dense(squeezed), 2 * np.eye(64), atol=1e-12)
    op = random_mpo(rng, 6, rank=4)
    assert np.allclose(
        mpo_to_dense(mpo_compress(op, TruncationParams(None, 1e-13))),
        mpo_to_dense(op),
        atol=1e-10,
    )


def test_mpo_dense_roundtrip(rng):
    g = grid1d(64, boundary=DIRICHLET)
    lay = sequential_layout(g)
    dense = stencil_matrix_d2(64, g.spacing(0), DIRICHLET).toarray()
    op = mpo_from_dense(dense, lay, TruncationParams(None, 1e-12))
    assert np.allclose(mpo_to_dense(op, lay), dense, atol=1e-10 * np.max(np.abs(dense)))
    # factorization ranks agree with the numerical ranks of the operator
    # tensor unfoldings computed densely
    perm = lay.grid_permutation
    site = dense[np.ix_(perm, perm)]
    t = site.reshape((2,) * 12)
    order = [k for pair in zip(range(6), range(6, 12)) for k in pair]
    t = t.transpose(order).reshape((4,) * 6)
    for bond in range(1, 6):
        s = np.linalg.svd(t.reshape(4**bond, 4 ** (6 - bond)), compute_uv=False)
        expected = max(1, int(np.count_nonzero(s > 1e-12 * s[0])))
        assert op.bond_dims[bond] == expected
        assert expected <= 4


def test_mpo_from_dense_shape_check(rng):
    lay = sequential_layout(grid1d(8))
    with pytest.raises(ShapeError):
        mpo_from_dense(np.zeros((8, 4)), lay)


def test_mpo_to_dense_capacity():
    with pytest.raises(CapacityError):
        mpo_to_dense(mpo_identity(11))
    assert mpo_to_dense(mpo_identity(11), size_cap=2**11).shape == (2048, 2048)


def test_parameter_count_bound():
    for op in (d1_mpo(grid1d(256)), d2_mpo(grid1d(256, boundary=DIRICHLET))):
        r = op.max_bond
        assert op.num_parameters <= op.n * r * r * op.d * op.d


@pytest.mark.parametrize("variant", ["interleaved", "sequential"])
@pytest.mark.parametrize("axis", [0, 1])
def test_lift_to_axis_matches_kronecker(rng, variant, axis):
    g = grid2d(8, boundary=PERIODIC)
    lay = interleaved_layout(g) if variant == "interleaved" else sequential_layout(g)
    op1d = d1_mpo(grid1d(8))
    a = mpo_to_dense(op1d, sequential_layout(grid1d(8)))
    lifted = lift_to_axis(op1d, axis, lay)
    got = mpo_to_dense(lifted, lay)
    eye = np.eye(8)
    want = np.kron(a, eye) if axis == 0 else np.kron(eye, a)
    assert np.allclose(got, want, atol=1e-12 * np.max(np.abs(a)))
    # lifted operator acts only on its axis: apply to a separable state
    ux = rng.normal(size=8)
    uy = rng.normal(size=8)
    u = np.outer(ux, uy).reshape(-1)
    from ttflow.tensorization import decode, encode

    x = mps_from_dense(encode(u, lay))
    got_vec = decode(mps_to_dense(apply(lifted, x)), lay)
    assert np.allclose(got_vec, want @ u, atol=1e-12)


def test_lift_site_count_mismatch():
    lay = interleaved_layout(grid2d(8))
    with pytest.raises(ShapeError):
        lift_to_axis(d1_mpo(grid1d(16)), 0, lay)


def test_mpo_validation():
    with pytest.raises(ShapeError):
        Mpo((np.zeros((1, 2, 2, 2)), np.zeros((3, 2, 2, 1))))
    with pytest.raises(ShapeError):
        Mpo((np.zeros((1, 2, 3, 1)),))
