import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from generators import random_corrected, small_perturbation
from kskeleton.errors import (
    IndexMismatch,
    InfiniteDefect,
    NormExceedsOne,
    NotInvertible,
    NotPartialIsometry,
    ZeroIndex,
)
from kskeleton.factorize import (
    alternative_factor,
    dilation_skeleton,
    family_factor,
    halmos_dilation,
    skeleton_factor,
    verify_factorization,
)
from kskeleton.index import index_of_factorization, numeric_index
from kskeleton.operators import (
    Block,
    CorrectedLaurentOp,
    HardyProjection,
    SparseFinite,
    TruncationWindow,
    compose,
    identity,
    laurent_op,
    scale,
    shift_power,
)
from kskeleton.symbol import LaurentSymbol

z = LaurentSymbol.monomial(1)
p0 = HardyProjection()
seeds = st.integers(0, 2**32 - 1)


def _unilateral(m):
    return Block(shift_power(m), p0, "p", "p")


def test_factor_shift_is_trivial():
    fact = skeleton_factor(shift_power(1))
    assert fact.n == -1
    assert fact.k.rank == 0
    assert fact.residual == 0
    idx = np.arange(-8, 8)
    assert np.array_equal(fact.xp.matrix(idx, idx), np.eye(16))


def test_factor_z_minus_two():
    x = laurent_op(z - 2)
    fact = skeleton_factor(x, w=TruncationWindow(256, 32))
    assert fact.n == 0
    assert fact.k.rank <= 1
    assert fact.residual <= 1e-8
    # reconstruction oracle: multiply the factors explicitly
    idx = np.arange(-256, 256)
    wide = np.arange(-400, 400)
    K = fact.k.matrix(idx, wide)
    XP = fact.xp.matrix(wide, idx)
    prod = fact.xp.matrix(idx, idx) + K @ XP
    assert np.abs(prod - x.matrix(idx, idx)).max() <= 1e-8 * 2


def test_factor_z_plus_half():
    fact = skeleton_factor(laurent_op(z + 0.5))
    assert fact.n == -1
    assert fact.residual <= 1e-8
    assert index_of_factorization(fact) == fact.n


def test_factor_with_nonzero_cut():
    x = laurent_op((z + 0.5) * (z - 3))
    for cut in (-3, 5):
        fact = skeleton_factor(x, HardyProjection(cut))
        assert fact.n == -1 and fact.residual <= 1e-8


def test_factor_not_invertible():
    with pytest.raises(NotInvertible):
        skeleton_factor(laurent_op(z - 1))


@pytest.mark.parametrize(
    "x",
    [shift_power(1), laurent_op(z - 2), laurent_op(z + 0.5)],
    ids=["u0", "z-2", "z+0.5"],
)
def test_verify_examples_at_doubled_window(x):
    rep = verify_factorization(skeleton_factor(x), x)
    assert rep.passed
    assert rep.commutation_defect == 0.0
    assert rep.residual_doubled <= max(10 * rep.residual, 1e-13)


def test_verify_identity():
    rep = verify_factorization(skeleton_factor(identity()), identity())
    assert rep.passed and rep.residual == 0 and rep.k_rank == 0


def test_verify_flags_corrupted_k():
    x = laurent_op(z - 2)
    fact = skeleton_factor(x)
    i = fact.k.rows[0]
    bad = type(fact)(fact.n, fact.k.with_entry(i, 3, 0.1), fact.xp, fact.residual, fact.window, fact.p)
    rep = verify_factorization(bad, x)
    assert rep.residual >= 0.05
    assert not rep.passed


def test_factor_report_fields():
    rep = skeleton_factor(laurent_op(z - 2)).report()
    assert set(rep) == {"n", "k_rank", "k_support_radius", "residual", "window"}


def test_alternative_two_shifts():
    alt = alternative_factor(shift_power(2))
    assert alt.n == -2 and alt.num_shifts == 2 and alt.base.k.rank == 0
    assert alt.residual == 0


def test_alternative_permutation_similarity():
    # relabel i -> (i mod 2, i div 2); each subspace carries a bilateral shift
    alt = alternative_factor(shift_power(2))
    idx = np.arange(-20, 20)
    S = alt.shift_sum_matrix(idx, idx)
    r, t = alt.relabel(idx)
    order = np.lexsort((t, r))
    P = np.eye(idx.size)[order]
    B = P @ S @ P.T
    half = idx.size // 2
    single = np.eye(half, k=-1)
    assert np.array_equal(B[:half, :half], single)
    assert np.array_equal(B[half:, half:], single)
    assert not B[:half, half:].any() and not B[half:, :half].any()
    assert np.array_equal(alt.unlabel(r, t), idx)


def test_alternative_single_shift_matches_skeleton():
    alt = alternative_factor(shift_power(1))
    idx = np.arange(-10, 10)
    assert np.array_equal(alt.matrix(idx, idx), alt.base.matrix(idx, idx))


def test_alternative_positive_index():
    alt = alternative_factor(shift_power(-3))
    assert alt.n == 3 and alt.sign == -1 and alt.residual == 0


def test_alternative_zero_index():
    alt = alternative_factor(laurent_op(z - 2))
    assert alt.zero_index and alt.residual <= 1e-8
    with pytest.raises(ZeroIndex):
        alternative_factor(laurent_op(z - 2), allow_zero_index=False)


def test_alternative_corrected_operator():
    x = random_corrected(np.random.default_rng(4))
    alt = alternative_factor(x)
    assert alt.residual <= 1e-8


@pytest.mark.parametrize("m", [1, 2, 3])
def test_dilation_of_unilateral_powers(m):
    d = dilation_skeleton(_unilateral(m))
    assert d.defect_ranks == (0, m)
    assert d.index == -m
    assert d.unitarity_defect <= 1e-10


def test_dilation_of_identity():
    d = dilation_skeleton(identity())
    assert d.index == 0
    n = d.blocks.shape[0] // 2
    assert np.array_equal(d.blocks[:n, :n], np.eye(n))
    assert np.array_equal(d.blocks[n:, n:], -np.eye(n))
    assert not d.blocks[:n, n:].any()


def test_dilation_off_diagonal_blocks_are_projections():
    d = dilation_skeleton(_unilateral(2))
    for B in d.skeleton_blocks():
        assert np.abs(B @ B - B).max() <= 1e-10
        assert np.abs(B - B.conj().T).max() <= 1e-10


def test_dilation_rejects_non_partial_isometry():
    with pytest.raises(NotPartialIsometry):
        dilation_skeleton(scale(identity(), 0.5))


def test_dilation_rejects_infinite_defect():
    # projection onto even indices: defects grow with the window
    F = {(i, i): -1.0 for i in range(-200, 200) if i % 2}
    with pytest.raises(InfiniteDefect):
        dilation_skeleton(CorrectedLaurentOp(LaurentSymbol.constant(1), SparseFinite.from_dict(F)))


def test_halmos_of_unilateral_shift():
    d = halmos_dilation(_unilateral(1))
    assert d.defect_ranks == (1, 0)
    assert d.unitarity_defect <= 1e-10


def test_halmos_of_half_identity():
    d = halmos_dilation(scale(identity(), 0.5))
    s = np.sqrt(3) / 2
    assert np.allclose(np.diag(d.x), 0.5)
    assert np.allclose(d.top_right, s * np.eye(d.x.shape[0]))
    assert np.allclose(d.bottom_left, s * np.eye(d.x.shape[0]))
    assert np.allclose(np.diag(d.bottom_right), -0.5)
    assert d.unitarity_defect <= 1e-12


def test_halmos_of_zero():
    d = halmos_dilation(scale(identity(), 0))
    n = d.x.shape[0]
    assert np.allclose(d.matrix, np.block([[np.zeros((n, n)), np.eye(n)], [np.eye(n), np.zeros((n, n))]]))
    r_q, r_p = d.defect_ranks
    assert r_p - r_q == 0


def test_halmos_rejects_large_norm():
    with pytest.raises(NormExceedsOne):
        halmos_dilation(laurent_op(z - 2))


def test_family_inside_and_outside_disk():
    x = laurent_op(z)
    inside = [(lam, x - lam) for lam in 0.3 * np.exp(2j * np.pi * np.arange(8) / 8)]
    rep = family_factor(inside, n_expected=-1)
    assert rep.n == -1 and all(f.n == -1 for f in rep.factorizations)
    outside = [(lam, x - lam) for lam in 3 * np.exp(2j * np.pi * np.arange(8) / 8)]
    assert family_factor(outside).n == 0


def test_family_constant_has_zero_jump():
    x = laurent_op(z - 2)
    rep = family_factor([(0.0, x)] * 3, continuity_budget=0.0)
    assert rep.max_jump == 0 and rep.continuous


def test_family_mismatch():
    x = laurent_op(z)
    with pytest.raises(IndexMismatch):
        family_factor([(0.0, x), (3.0, x - 3)], n_expected=-1)


@settings(max_examples=15, deadline=None)
@given(seeds)
def test_reconstruction_and_doubling(seed):
    x = random_corrected(np.random.default_rng(seed))
    fact = skeleton_factor(x)
    rep = verify_factorization(fact, x)
    assert rep.residual <= 1e-8
    assert rep.stable_under_doubling
    assert rep.passed


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_factorization_invariance(seed):
    rng = np.random.default_rng(seed)
    x = random_corrected(rng)
    a = skeleton_factor(x, w=TruncationWindow(96, 24), schedule=(64, 128, 256, 512))
    b = skeleton_factor(x, w=TruncationWindow(160, 40), schedule=(80, 160, 320, 640))
    assert a.n == b.n == index_of_factorization(a) == index_of_factorization(b)
    y = small_perturbation(rng, x)
    assert skeleton_factor(y).n == a.n


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_additivity_of_factor_index(seed):
    rng = np.random.default_rng(seed)
    x, y = random_corrected(rng), random_corrected(rng)
    assert skeleton_factor(compose(x, y)).n == skeleton_factor(x).n + skeleton_factor(y).n


def test_index_agrees_with_numeric_for_corrected():
    x = random_corrected(np.random.default_rng(9))
    assert skeleton_factor(x).n == numeric_index(x)[0]
