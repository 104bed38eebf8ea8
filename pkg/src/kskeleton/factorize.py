"""K-skeleton factorizations ``x = (1 + k) x_p u0**(-n)``.

``n`` is the index of ``pxp``. With ``y = x u0**n`` (index zero) split into
its block-diagonal part ``D`` and its finite off-diagonal part ``H``,
``y = (1 + H D^{-1}) D``, so ``k = H D^{-1}`` has finitely many nonzero rows
and ``x_p = D`` commutes with ``p``. The rows of ``k`` come from windowed
solves with ``D*``.

Also here: the shift direct-sum variant of the factorization, Halmos
dilations of contractions, and the index-map unitary of a partial isometry.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DiagonalBlockSingular,
    IndexMismatch,
    InfiniteDefect,
    NormExceedsOne,
    NotConverged,
    NotInvertible,
    NotPartialIsometry,
    ResidualTooLarge,
    SingularTruncation,
    ZeroIndex,
)
from .index import DEFAULT_SCHEDULE, _rank, analytic_index, index_of_factorization, numeric_index
from .operators import (
    COND_LIMIT,
    Block,
    CorrectedLaurentOp,
    HardyProjection,
    SparseFinite,
    TruncationWindow,
    block_decompose,
    condition_estimate,
    invert_on_window,
    shift_power,
)
from .symbol import MARGIN_TOL, invertibility_margin

__all__ = [
    "LowRankOperator",
    "BlockDiagonalOp",
    "SkeletonFactorization",
    "VerificationReport",
    "AlternativeFactorization",
    "HalmosDilation",
    "DilationUnitary",
    "FamilyReport",
    "operator_index",
    "skeleton_factor",
    "verify_factorization",
    "alternative_factor",
    "halmos_dilation",
    "dilation_skeleton",
    "family_factor",
]

RESIDUAL_TOL = 1e-8
DROP_TOL = 1e-12
# residuals this small are roundoff; doubling comparisons ignore them
RESIDUAL_FLOOR = 1e-13
DEFAULT_WINDOW = TruncationWindow(128, 32)


@dataclass(frozen=True, eq=False)
class LowRankOperator:
    """Finite-rank operator ``sum_a e_{rows[a]} (x) right[a]``.

    ``right[a, t]`` is the entry in column ``start + t`` of row ``rows[a]``;
    entries outside the stored columns are zero.
    """

    rows: tuple
    start: int
    right: np.ndarray

    @classmethod
    def zero(cls, start: int = 0) -> "LowRankOperator":
        return cls((), start, np.zeros((0, 0), dtype=complex))

    @property
    def cols(self) -> np.ndarray:
        return self.start + np.arange(self.right.shape[1] if self.right.size else 0)

    def matrix(self, rows, cols) -> np.ndarray:
        rows = np.asarray(rows)
        cols = np.asarray(cols)
        out = np.zeros((rows.size, cols.size), dtype=complex)
        if not self.rows:
            return out
        t = cols - self.start
        ok = (t >= 0) & (t < self.right.shape[1])
        where = {int(i): a for a, i in enumerate(rows)}
        for a, i in enumerate(self.rows):
            if i in where:
                out[where[i], ok] = self.right[a, t[ok]]
        return out

    @property
    def rank(self) -> int:
        if not self.rows:
            return 0
        s = np.linalg.svd(self.right, compute_uv=False)
        return int(np.count_nonzero(s > DROP_TOL))

    def support_radius(self, cut: int = 0) -> int:
        """Largest distance from the cut of a row or column carrying an
        entry above the drop tolerance (0 when ``k`` vanishes)."""
        if not self.rows:
            return 0
        big = np.abs(self.right) > DROP_TOL
        if not big.any():
            return 0
        r = max(max(i - cut, cut - 1 - i) for a, i in enumerate(self.rows) if big[a].any())
        cols = self.cols[big.any(axis=0)]
        c = int(max((cols - cut).max(), (cut - 1 - cols).max()))
        return int(max(r, c))

    def with_entry(self, i: int, j: int, delta: complex) -> "LowRankOperator":
        """Copy with ``delta`` added at ``(i, j)``; used for fault injection."""
        rows = list(self.rows)
        right = self.right.copy() if self.rows else np.zeros((0, 1), dtype=complex)
        start = self.start if self.rows else j
        if i not in rows:
            rows.append(i)
            right = np.vstack([right, np.zeros((1, right.shape[1]), dtype=complex)])
        right[rows.index(i), j - start] += delta
        return LowRankOperator(tuple(rows), start, right)


@dataclass(frozen=True)
class BlockDiagonalOp:
    """``p D p + (1-p) D (1-p)`` stored as its two diagonal corners.

    Entries across the cut are zero by construction, so this commutes with
    ``p`` exactly.
    """

    op: CorrectedLaurentOp
    p: HardyProjection

    @property
    def upper(self) -> Block:
        return Block(self.op, self.p, "p", "p")

    @property
    def lower(self) -> Block:
        return Block(self.op, self.p, "q", "q")

    def matrix(self, rows, cols) -> np.ndarray:
        return self.upper.matrix(rows, cols) + self.lower.matrix(rows, cols)

    def commutation_defect(self, rows, cols) -> float:
        m = self.matrix(rows, cols)
        side_r = self.p.contains(rows)
        side_c = self.p.contains(cols)
        cross = side_r[:, None] != side_c[None, :]
        return float(np.abs(m[cross]).max()) if cross.any() else 0.0


@dataclass(frozen=True, eq=False)
class SkeletonFactorization:
    """``x = (1 + k) xp u0**(-n)``."""

    n: int
    k: LowRankOperator
    xp: BlockDiagonalOp
    residual: float
    window: TruncationWindow
    p: HardyProjection = field(default_factory=HardyProjection)

    @property
    def skeleton(self) -> CorrectedLaurentOp:
        return shift_power(-self.n)

    def skeleton_blocks(self):
        bd = block_decompose(self.skeleton, self.p)
        b, c = bd.b_support, bd.c_support
        return (
            b.dense(b.rows, b.cols) if b else np.zeros((0, 0)),
            c.dense(c.rows, c.cols) if c else np.zeros((0, 0)),
        )

    def compact_part(self, rows, cols) -> np.ndarray:
        """``(1 + k) xp`` on a window: the factor continuous in a parameter."""
        rows = np.asarray(rows)
        cols = np.asarray(cols)
        out = self.xp.matrix(rows, cols)
        if self.k.rows:
            kc = self.k.cols
            kd = self.k.right @ self.xp.matrix(kc, cols)
            where = {int(i): a for a, i in enumerate(rows)}
            for a, i in enumerate(self.k.rows):
                if i in where:
                    out[where[i]] += kd[a]
        return out

    def matrix(self, rows, cols) -> np.ndarray:
        """The product ``(1 + k) xp u0**(-n)`` on a window."""
        # (A u0^-n)_{ij} = A_{i, j-n}
        return self.compact_part(rows, np.asarray(cols) - self.n)

    def reconstruction_error(self, x: CorrectedLaurentOp, w: TruncationWindow) -> float:
        idx = w.inner
        target = x.matrix(idx, idx)
        scale_ = np.abs(target).max()
        return float(np.abs(self.matrix(idx, idx) - target).max() / scale_)

    def report(self) -> dict:
        return {
            "n": self.n,
            "k_rank": self.k.rank,
            "k_support_radius": self.k.support_radius(self.p.cut),
            "residual": self.residual,
            "window": self.window.N,
        }


def operator_index(
    x: CorrectedLaurentOp,
    p: HardyProjection,
    schedule=DEFAULT_SCHEDULE,
    *,
    margin_tol: float = MARGIN_TOL,
) -> int:
    """``Ind(pxp)``: analytic for pure Laurent operators, numeric otherwise."""
    if x.is_laurent:
        return analytic_index(x.symbol, margin_tol=margin_tol)
    return numeric_index(x, p, schedule)[0]


def skeleton_factor(
    x: CorrectedLaurentOp,
    p: HardyProjection | None = None,
    w: TruncationWindow | None = None,
    *,
    n: int | None = None,
    schedule=DEFAULT_SCHEDULE,
    margin_tol: float = MARGIN_TOL,
    residual_tol: float = RESIDUAL_TOL,
) -> SkeletonFactorization:
    """Factor ``x = (1 + k) xp u0**(-n)`` along ``p``.

    ``n`` may be supplied when already known; otherwise it is computed.
    Raises :class:`DiagonalBlockSingular` when the block-diagonal part of
    ``x u0**n`` is not invertible on the window, and
    :class:`ResidualTooLarge` when the product misses ``x`` on the inner
    window by more than ``residual_tol`` (relative, max entry).
    """
    p = p or HardyProjection()
    w = w or DEFAULT_WINDOW
    if x.is_laurent:
        if invertibility_margin(x.symbol) < margin_tol:
            raise NotInvertible("symbol vanishes on the unit circle")
    elif condition_estimate(x, w.N + w.pad) > COND_LIMIT:
        raise NotInvertible("operator is numerically singular on the window")
    if n is None:
        n = operator_index(x, p, schedule, margin_tol=margin_tol)

    y = x @ shift_power(n)
    bd = block_decompose(y, p)
    H = bd.b_support + bd.c_support
    D = CorrectedLaurentOp(y.symbol, y.correction - H)
    xp = BlockDiagonalOp(D, p)

    reach = max(D.bandwidth, D.radius - w.N, 0)
    wk = TruncationWindow(w.N + reach, max(w.pad, D.bandwidth))
    if H:
        hrows = H.rows
        # column a: H* e_i for i = hrows[a]
        rhs = H.adjoint().dense(wk.inner, hrows)
        try:
            sol = invert_on_window(D.H, wk, rhs)
        except SingularTruncation as exc:
            raise DiagonalBlockSingular(str(exc)) from exc
        right = sol.solution.T.conj().copy()
        right[np.abs(right) < DROP_TOL] = 0
        k = LowRankOperator(tuple(hrows), -wk.N, right)
    else:
        k = LowRankOperator.zero(-wk.N)

    fact = SkeletonFactorization(int(n), k, xp, 0.0, w, p)
    residual = fact.reconstruction_error(x, w)
    if not residual <= residual_tol:
        raise ResidualTooLarge(f"reconstruction residual {residual:.3g} > {residual_tol:g}")
    return SkeletonFactorization(int(n), k, xp, residual, w, p)


@dataclass(frozen=True)
class VerificationReport:
    residual: float
    residual_doubled: float
    k_rank: int
    k_support_radius: int
    commutation_defect: float
    index_consistent: bool
    stable_under_doubling: bool
    residual_tol: float

    @property
    def passed(self) -> bool:
        return (
            self.residual <= self.residual_tol
            and self.residual_doubled <= self.residual_tol
            and self.commutation_defect == 0.0
            and self.index_consistent
            and self.stable_under_doubling
        )

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "residual": self.residual,
            "residual_doubled": self.residual_doubled,
            "k_rank": self.k_rank,
            "k_support_radius": self.k_support_radius,
            "commutation_defect": self.commutation_defect,
            "index_consistent": self.index_consistent,
            "stable_under_doubling": self.stable_under_doubling,
        }


def stable_under_doubling(coarse: float, fine: float) -> bool:
    return fine <= max(10 * coarse, RESIDUAL_FLOOR)


def verify_factorization(
    fact: SkeletonFactorization,
    x: CorrectedLaurentOp,
    w: TruncationWindow | None = None,
    *,
    residual_tol: float = RESIDUAL_TOL,
) -> VerificationReport:
    """Recompute the product on ``w`` and on the doubled window.

    Failures are carried in the report, never raised.
    """
    w = w or fact.window
    r1 = fact.reconstruction_error(x, w)
    r2 = fact.reconstruction_error(x, w.doubled())
    idx = w.inner
    defect = fact.xp.commutation_defect(idx, idx)
    try:
        consistent = index_of_factorization(fact) == fact.n
    except Exception:
        consistent = False
    return VerificationReport(
        r1,
        r2,
        fact.k.rank,
        fact.k.support_radius(fact.p.cut),
        defect,
        consistent,
        stable_under_doubling(r1, r2),
        residual_tol,
    )


@dataclass(frozen=True, eq=False)
class AlternativeFactorization:
    """``x = (1 + k) x' (u_1 + ... + u_m + w)`` with ``m = |n|``.

    ``u_r`` is the bilateral shift (``sign = +1``, index ``n < 0``) or its
    adjoint (``sign = -1``, ``n > 0``) on ``H_r = span{e_{r + m t}}``. The
    subspaces exhaust l2(Z), so the ``w`` block acts on the zero space.
    For ``n = 0`` the form degenerates to ``(1 + k) x'``.
    """

    base: SkeletonFactorization
    residual: float

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def zero_index(self) -> bool:
        return self.base.n == 0

    @property
    def num_shifts(self) -> int:
        return abs(self.base.n)

    @property
    def sign(self) -> int:
        return int(np.sign(-self.base.n))

    @property
    def w_dim(self) -> int:
        return 0

    def relabel(self, i):
        """Index ``i`` in Z to ``(subspace r, position t)``."""
        m = self.num_shifts
        i = np.asarray(i)
        return i % m, (i - i % m) // m

    def unlabel(self, r, t):
        return np.asarray(r) + self.num_shifts * np.asarray(t)

    def shift_sum_matrix(self, rows, cols) -> np.ndarray:
        """``u_1 + ... + u_m`` on a window, assembled subspace by subspace."""
        rows = np.asarray(rows)
        cols = np.asarray(cols)
        out = np.zeros((rows.size, cols.size), dtype=complex)
        if self.zero_index:
            out[rows[:, None] == cols[None, :]] = 1
            return out
        rr, rt = self.relabel(rows)
        cr, ct = self.relabel(cols)
        same = rr[:, None] == cr[None, :]
        step = rt[:, None] == ct[None, :] + self.sign
        out[same & step] = 1
        return out

    def matrix(self, rows, cols) -> np.ndarray:
        rows = np.asarray(rows)
        cols = np.asarray(cols)
        reach = self.num_shifts
        mid = np.arange(cols.min() - reach, cols.max() + reach + 1)
        return self.base.compact_part(rows, mid) @ self.shift_sum_matrix(mid, cols)


def alternative_factor(
    x: CorrectedLaurentOp,
    p: HardyProjection | None = None,
    w: TruncationWindow | None = None,
    *,
    allow_zero_index: bool = True,
    residual_tol: float = RESIDUAL_TOL,
    **kwargs,
) -> AlternativeFactorization:
    """Shift direct-sum form of the skeleton factorization.

    For index zero the direct sum is empty and the two-factor form
    ``(1 + k) x'`` is returned, unless ``allow_zero_index`` is False, in
    which case :class:`ZeroIndex` is raised.
    """
    base = skeleton_factor(x, p, w, residual_tol=residual_tol, **kwargs)
    if base.n == 0 and not allow_zero_index:
        raise ZeroIndex("index is zero; the shift direct sum is empty")
    alt = AlternativeFactorization(base, 0.0)
    idx = base.window.inner
    target = x.matrix(idx, idx)
    residual = float(np.abs(alt.matrix(idx, idx) - target).max() / np.abs(target).max())
    if not residual <= residual_tol:
        raise ResidualTooLarge(f"direct-sum reconstruction residual {residual:.3g}")
    return AlternativeFactorization(base, residual)


# -- dilations -------------------------------------------------------------


def _window_indices(op, w: TruncationWindow):
    """Inner and padded index sets for an operator on l2(Z) or on one side
    of a cut (a diagonal :class:`Block`)."""
    if isinstance(op, Block):
        if op.off_diagonal:
            raise ValueError("dilations act on l2(Z) operators or diagonal corners")
        c = op.p.cut
        size = 2 * w.N
        if op.rows == "p":
            return np.arange(c, c + size), np.arange(c, c + size + w.pad)
        return np.arange(c - size, c), np.arange(c - size - w.pad, c)
    return w.inner, w.padded


def _defects(op, w: TruncationWindow):
    """``1 - x*x`` and ``1 - xx*`` on the inner window, exact for banded ops."""
    inner, padded = _window_indices(op, w)
    X1 = op.matrix(padded, inner)
    X2 = op.matrix(inner, padded)
    eye = np.eye(inner.size)
    return eye - X1.conj().T @ X1, eye - X2 @ X2.conj().T


def _psd_sqrt(A: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh((A + A.conj().T) / 2)
    if vals.min() < -1e-10:
        raise NormExceedsOne(f"defect has eigenvalue {vals.min():.3g} < 0")
    return (vecs * np.sqrt(np.clip(vals, 0, None))) @ vecs.conj().T


def _core(size: int) -> slice:
    return slice(size // 4, size - size // 4)


def _unitarity_defect(U: np.ndarray, half: int) -> float:
    """Max entry of ``U*U - 1`` and ``UU* - 1`` on the central half of each
    block, where window truncation does not reach."""
    n = 2 * half
    core = np.r_[np.arange(n)[_core(n)], n + np.arange(n)[_core(n)]]
    eye = np.eye(core.size)
    a = np.abs((U.conj().T @ U)[np.ix_(core, core)] - eye).max()
    b = np.abs((U @ U.conj().T)[np.ix_(core, core)] - eye).max()
    return float(max(a, b))


@dataclass(frozen=True, eq=False)
class HalmosDilation:
    """``[[x, (1-xx*)^(1/2)], [(1-x*x)^(1/2), -x*]]`` on a window."""

    op: object
    window: TruncationWindow
    x: np.ndarray
    top_right: np.ndarray
    bottom_left: np.ndarray
    bottom_right: np.ndarray
    two_scale_gap: float

    @property
    def matrix(self) -> np.ndarray:
        return np.block([[self.x, self.top_right], [self.bottom_left, self.bottom_right]])

    @property
    def defect_ranks(self) -> tuple:
        """``(rank(1 - xx*), rank(1 - x*x))`` on the window."""
        return _rank(self.top_right @ self.top_right), _rank(self.bottom_left @ self.bottom_left)

    @property
    def unitarity_defect(self) -> float:
        return _unitarity_defect(self.matrix, self.window.N)

    def skeleton_blocks(self):
        return self.top_right, self.bottom_left


def halmos_dilation(op, w: TruncationWindow | None = None, *, tol: float = 1e-8) -> HalmosDilation:
    """Halmos unitary dilation of a contraction ``op``.

    ``op`` is a :class:`CorrectedLaurentOp` or a diagonal :class:`Block`
    (a Toeplitz-type operator on one side of the cut). The defect square
    roots come from Hermitian eigendecompositions on the window and on the
    doubled window, which must agree to ``tol`` on the common part.
    """
    w = w or TruncationWindow(32, 16)
    inner, padded = _window_indices(op, w)
    norm = np.linalg.norm(op.matrix(padded, padded), 2)
    if norm > 1 + 1e-12:
        raise NormExceedsOne(f"windowed norm {norm:.6g} > 1")
    roots = []
    for ww in (w, w.doubled()):
        dp, dq = _defects(op, ww)
        roots.append((_psd_sqrt(dq), _psd_sqrt(dp)))
    big_inner, _ = _window_indices(op, w.doubled())
    pos = np.searchsorted(big_inner, inner)
    sel = np.ix_(pos, pos)
    gap = max(
        float(np.abs(roots[1][0][sel] - roots[0][0]).max()),
        float(np.abs(roots[1][1][sel] - roots[0][1]).max()),
    )
    if gap > tol:
        raise NotConverged(f"defect square roots disagree across windows by {gap:.3g}")
    X = op.matrix(inner, inner)
    sq, sp = roots[0]
    return HalmosDilation(op, w, X, sq, sp, -X.conj().T, gap)


@dataclass(frozen=True, eq=False)
class DilationUnitary:
    """``w = [[v, 1 - vv*], [1 - v*v, -v*]]`` for a partial isometry ``v``."""

    v: object
    window: TruncationWindow
    blocks: np.ndarray
    defect_ranks: tuple
    unitarity_defect: float

    def skeleton_blocks(self):
        n = self.blocks.shape[0] // 2
        return self.blocks[:n, n:], self.blocks[n:, :n]

    @property
    def index(self) -> int:
        return index_of_factorization(self)


def dilation_skeleton(v, w: TruncationWindow | None = None, *, tol: float = 1e-10) -> DilationUnitary:
    """Index-map unitary of a Fredholm partial isometry ``v``.

    ``v*v`` and ``vv*`` must be projections to ``tol`` and the defects
    ``1 - v*v``, ``1 - vv*`` must have the same rank on the window and on
    the doubled window (finitely supported).
    """
    w = w or TruncationWindow(32, 16)
    ranks = []
    for ww in (w, w.doubled()):
        dp, dq = _defects(v, ww)
        for d in (dp, dq):
            if np.abs(d @ d - d).max() > tol:
                raise NotPartialIsometry("v*v or vv* is not a projection on the window")
        ranks.append((_rank(dp), _rank(dq)))
        if ww is w:
            defect_p, defect_q = dp, dq
    if ranks[0] != ranks[1]:
        raise InfiniteDefect(f"defect ranks grow with the window: {ranks[0]} -> {ranks[1]}")
    inner, _ = _window_indices(v, w)
    V = v.matrix(inner, inner)
    W = np.block([[V, defect_q], [defect_p, -V.conj().T]])
    udef = _unitarity_defect(W, w.N)
    if udef > tol:
        raise NotPartialIsometry(f"index-map matrix fails unitarity by {udef:.3g}")
    return DilationUnitary(v, w, W, ranks[0], udef)


# -- families --------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FamilyReport:
    lambdas: tuple
    factorizations: tuple
    n: int
    max_jump: float
    budget: float | None

    @property
    def continuous(self) -> bool:
        return self.budget is None or self.max_jump <= self.budget


def family_factor(
    samples,
    n_expected: int | None = None,
    p: HardyProjection | None = None,
    w: TruncationWindow | None = None,
    *,
    continuity_budget: float | None = None,
    norm_window: int = 32,
    **kwargs,
) -> FamilyReport:
    """Factor ``x - lam = x(lam) u0**(-n)`` along a sampled path of ``lam``.

    ``samples`` is a sequence of ``(lam, x - lam)`` pairs from one component
    of the resolvent set; every sample must share the index ``n_expected``
    (the first sample's index if not given). The continuity report is the
    largest windowed 2-norm distance between consecutive ``x(lam)``.
    """
    p = p or HardyProjection()
    samples = list(samples)
    facts = []
    for lam, op in samples:
        fact = skeleton_factor(op, p, w, **kwargs)
        if n_expected is None:
            n_expected = fact.n
        if fact.n != n_expected:
            raise IndexMismatch(f"sample at lambda={lam} has index {fact.n}, expected {n_expected}")
        facts.append(fact)
    idx = np.arange(-norm_window, norm_window)
    mats = [f.compact_part(idx, idx) for f in facts]
    jumps = [np.linalg.norm(a - b, 2) for a, b in zip(mats, mats[1:])]
    return FamilyReport(
        tuple(lam for lam, _ in samples),
        tuple(facts),
        int(n_expected) if n_expected is not None else 0,
        float(max(jumps)) if jumps else 0.0,
        continuity_budget,
    )
