"""Operators of the form ``M_f + F`` on l2(Z).

``M_f`` is the Laurent (bi-infinite Toeplitz) matrix of a Laurent polynomial
symbol, entry ``(i, j) = c_{i-j}``; ``F`` is a finitely supported matrix.
The class is closed under sums, products and adjoints, so all of that
arithmetic is exact. Inverses leave the class and are only offered as
windowed solves checked against a doubled window.

Indices are integers in Z throughout; a window of half width ``N`` covers
``[-N, N)``.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import NotConverged, SingularTruncation, WindowTooSmall
from .symbol import LaurentSymbol

__all__ = [
    "SparseFinite",
    "CorrectedLaurentOp",
    "HardyProjection",
    "Block",
    "BlockDecomposition",
    "TruncationWindow",
    "SolveReport",
    "laurent_op",
    "shift_power",
    "identity",
    "compose",
    "add",
    "adjoint",
    "scale",
    "commutator_with_p",
    "block_decompose",
    "truncate",
    "invert_on_window",
    "condition_estimate",
    "unit_vector",
    "random_correction",
]

COND_LIMIT = 1e12
SOLVE_TOL = 1e-9


@dataclass(frozen=True)
class SparseFinite:
    """Finitely supported matrix on Z x Z, stored as sorted ``(i, j, value)``."""

    entries: tuple = ()

    @classmethod
    def from_dict(cls, d: Mapping) -> "SparseFinite":
        return cls(tuple(sorted((int(i), int(j), complex(v)) for (i, j), v in d.items() if v != 0)))

    @classmethod
    def from_dense(cls, mat, rows, cols, tol: float = 0.0) -> "SparseFinite":
        mat = np.asarray(mat)
        r, c = np.nonzero(np.abs(mat) > tol)
        rows, cols = np.asarray(rows), np.asarray(cols)
        return cls.from_dict({(rows[a], cols[b]): mat[a, b] for a, b in zip(r, c)})

    def as_dict(self) -> dict:
        return {(i, j): v for i, j, v in self.entries}

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def __bool__(self):
        return bool(self.entries)

    @property
    def rows(self) -> list:
        return sorted({i for i, _, _ in self.entries})

    @property
    def cols(self) -> list:
        return sorted({j for _, j, _ in self.entries})

    @property
    def radius(self) -> int:
        """Smallest ``r`` with the support inside ``[-r, r)`` in both indices."""
        if not self.entries:
            return 0
        return max(max(-i, i + 1, -j, j + 1) for i, j, _ in self.entries)

    def adjoint(self) -> "SparseFinite":
        return SparseFinite(tuple(sorted((j, i, v.conjugate()) for i, j, v in self.entries)))

    def __add__(self, other: "SparseFinite") -> "SparseFinite":
        acc = defaultdict(complex, self.as_dict())
        for i, j, v in other.entries:
            acc[i, j] += v
        return SparseFinite.from_dict(acc)

    def __neg__(self):
        return SparseFinite(tuple((i, j, -v) for i, j, v in self.entries))

    def __sub__(self, other):
        return self + (-other)

    def scaled(self, alpha: complex) -> "SparseFinite":
        return SparseFinite.from_dict({(i, j): alpha * v for i, j, v in self.entries})

    def norm(self) -> float:
        """Operator 2-norm."""
        if not self.entries:
            return 0.0
        rows, cols = self.rows, self.cols
        return float(np.linalg.norm(self.dense(rows, cols), 2))

    def dense(self, rows, cols) -> np.ndarray:
        rows, cols = list(rows), list(cols)
        rpos = {int(i): a for a, i in enumerate(rows)}
        cpos = {int(j): b for b, j in enumerate(cols)}
        out = np.zeros((len(rows), len(cols)), dtype=complex)
        for i, j, v in self.entries:
            if i in rpos and j in cpos:
                out[rpos[i], cpos[j]] += v
        return out


def _sym_matrix(f: LaurentSymbol, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    out = np.zeros((rows.size, cols.size), dtype=complex)
    if f.is_zero:
        return out
    idx = rows[:, None] - cols[None, :] - f.lo
    vals = f.array()
    mask = (idx >= 0) & (idx < vals.size)
    out[mask] = vals[idx[mask]]
    return out


@dataclass(frozen=True)
class CorrectedLaurentOp:
    """``M_f + F``: Laurent part plus finitely supported correction."""

    symbol: LaurentSymbol
    correction: SparseFinite = field(default_factory=SparseFinite)

    @property
    def bandwidth(self) -> int:
        return self.symbol.bandwidth

    @property
    def radius(self) -> int:
        return self.correction.radius

    @property
    def is_laurent(self) -> bool:
        return not self.correction

    def entry(self, i: int, j: int) -> complex:
        return self.symbol.coeff(i - j) + self.correction.as_dict().get((i, j), 0j)

    def matrix(self, rows, cols) -> np.ndarray:
        """Dense block of entries ``(rows[a], cols[b])``."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        out = _sym_matrix(self.symbol, rows, cols)
        if self.correction:
            out += self.correction.dense(rows, cols)
        return out

    def __matmul__(self, other):
        return compose(self, other)

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return add(self, scale(other, -1))

    def __neg__(self):
        return scale(self, -1)

    def __mul__(self, alpha):
        return scale(self, alpha)

    __rmul__ = __mul__

    @property
    def H(self) -> "CorrectedLaurentOp":
        return adjoint(self)


def laurent_op(f: LaurentSymbol) -> CorrectedLaurentOp:
    return CorrectedLaurentOp(f)


def shift_power(n: int) -> CorrectedLaurentOp:
    """``u0**n`` where the bilateral shift ``u0`` sends ``e_i`` to ``e_{i+1}``."""
    return CorrectedLaurentOp(LaurentSymbol.monomial(n))


def identity() -> CorrectedLaurentOp:
    return shift_power(0)


def _as_op(x) -> CorrectedLaurentOp:
    if isinstance(x, CorrectedLaurentOp):
        return x
    if isinstance(x, LaurentSymbol):
        return CorrectedLaurentOp(x)
    return CorrectedLaurentOp(LaurentSymbol.constant(complex(x)))


def compose(x: CorrectedLaurentOp, y: CorrectedLaurentOp) -> CorrectedLaurentOp:
    """``x @ y``: symbol part is the symbol product, corrections stay finite."""
    x, y = _as_op(x), _as_op(y)
    f, g = x.symbol.coeffs, y.symbol.coeffs
    acc = defaultdict(complex)
    # M_f G
    for k, j, v in y.correction:
        for m, c in f.items():
            acc[k + m, j] += c * v
    # F M_g
    for i, k, v in x.correction:
        for m, c in g.items():
            acc[i, k - m] += v * c
    # F G
    by_row = defaultdict(list)
    for k, j, v in y.correction:
        by_row[k].append((j, v))
    for i, k, v in x.correction:
        for j, w in by_row.get(k, ()):
            acc[i, j] += v * w
    return CorrectedLaurentOp(x.symbol * y.symbol, SparseFinite.from_dict(acc))


def add(x: CorrectedLaurentOp, y: CorrectedLaurentOp) -> CorrectedLaurentOp:
    x, y = _as_op(x), _as_op(y)
    return CorrectedLaurentOp(x.symbol + y.symbol, x.correction + y.correction)


def adjoint(x: CorrectedLaurentOp) -> CorrectedLaurentOp:
    return CorrectedLaurentOp(x.symbol.reflected(), x.correction.adjoint())


def scale(x: CorrectedLaurentOp, alpha: complex) -> CorrectedLaurentOp:
    x = _as_op(x)
    return CorrectedLaurentOp(x.symbol * alpha, x.correction.scaled(alpha))


@dataclass(frozen=True)
class HardyProjection:
    """Orthogonal projection onto ``span{e_i : i >= cut}``."""

    cut: int = 0

    def contains(self, i) -> np.ndarray:
        return np.asarray(i) >= self.cut

    def half_line(self, length: int) -> np.ndarray:
        """The first ``length`` indices of the range of ``p``."""
        return np.arange(self.cut, self.cut + length)

    def complement_line(self, length: int) -> np.ndarray:
        """The ``length`` indices of the range of ``1 - p`` nearest the cut."""
        return np.arange(self.cut - length, self.cut)


def commutator_with_p(x: CorrectedLaurentOp, p: HardyProjection) -> SparseFinite:
    """``x p - p x`` as an exact finite matrix."""
    c = p.cut
    acc = {}
    for m, v in x.symbol.coeffs.items():
        # entries (i, j) with i - j = m straddling the cut
        if m > 0:
            for j in range(c - m, c):
                acc[j + m, j] = -v
        elif m < 0:
            for i in range(c + m, c):
                acc[i, i - m] = v
    for i, j, v in x.correction:
        s = int(j >= c) - int(i >= c)
        if s:
            acc[i, j] = acc.get((i, j), 0j) + s * v
    return SparseFinite.from_dict(acc)


_SIDES = ("p", "q")


@dataclass(frozen=True)
class Block:
    """One corner of ``x`` along ``p``: rows restricted to ``rows``, columns
    to ``cols``, each ``"p"`` (range of p) or ``"q"`` (range of 1 - p)."""

    x: CorrectedLaurentOp
    p: HardyProjection
    rows: str
    cols: str

    def __post_init__(self):
        if self.rows not in _SIDES or self.cols not in _SIDES:
            raise ValueError("block sides must be 'p' or 'q'")

    @property
    def off_diagonal(self) -> bool:
        return self.rows != self.cols

    def _mask(self, side, idx):
        inside = self.p.contains(idx)
        return inside if side == "p" else ~inside

    def entry(self, i: int, j: int) -> complex:
        if self._mask(self.rows, i) and self._mask(self.cols, j):
            return self.x.entry(i, j)
        return 0j

    def matrix(self, rows, cols) -> np.ndarray:
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        out = self.x.matrix(rows, cols)
        out[~self._mask(self.rows, rows), :] = 0
        out[:, ~self._mask(self.cols, cols)] = 0
        return out

    def support(self) -> SparseFinite:
        """Exact entries of an off-diagonal corner (always finite here)."""
        if not self.off_diagonal:
            raise ValueError("diagonal corners have infinite support")
        comm = commutator_with_p(self.x, self.p)
        # x p - p x = (1-p) x p - p x (1-p)
        sign = 1 if self.rows == "q" else -1
        return SparseFinite.from_dict(
            {
                (i, j): sign * v
                for i, j, v in comm
                if bool(self.p.contains(i)) == (self.rows == "p")
            }
        )

    def adjoint(self) -> "Block":
        return Block(adjoint(self.x), self.p, self.cols, self.rows)


@dataclass(frozen=True)
class BlockDecomposition:
    """``x = a + b + c + d`` with ``a = pxp``, ``b = px(1-p)``,
    ``c = (1-p)xp``, ``d = (1-p)x(1-p)``."""

    x: CorrectedLaurentOp
    p: HardyProjection
    a: Block
    b: Block
    c: Block
    d: Block

    def entry(self, i: int, j: int) -> complex:
        return sum(blk.entry(i, j) for blk in (self.a, self.b, self.c, self.d))

    def matrix(self, rows, cols) -> np.ndarray:
        return sum(blk.matrix(rows, cols) for blk in (self.a, self.b, self.c, self.d))

    @property
    def b_support(self) -> SparseFinite:
        return self.b.support()

    @property
    def c_support(self) -> SparseFinite:
        return self.c.support()


def block_decompose(x: CorrectedLaurentOp, p: HardyProjection | None = None) -> BlockDecomposition:
    p = p or HardyProjection()
    return BlockDecomposition(
        x,
        p,
        a=Block(x, p, "p", "p"),
        b=Block(x, p, "p", "q"),
        c=Block(x, p, "q", "p"),
        d=Block(x, p, "q", "q"),
    )


@dataclass(frozen=True)
class TruncationWindow:
    """Window ``[-N, N)``; ``pad`` extra indices on each side are used during
    solves and products and discarded on output."""

    N: int
    pad: int = 32

    def __post_init__(self):
        if self.N < 1 or self.pad < 0:
            raise ValueError("window needs N >= 1 and pad >= 0")

    @property
    def inner(self) -> np.ndarray:
        return np.arange(-self.N, self.N)

    @property
    def padded(self) -> np.ndarray:
        return np.arange(-self.N - self.pad, self.N + self.pad)

    def doubled(self) -> "TruncationWindow":
        return TruncationWindow(2 * self.N, self.pad)


def _check_fits(x: CorrectedLaurentOp, half_width: int):
    if x.radius > half_width:
        raise WindowTooSmall(
            f"correction reaches radius {x.radius}, window half width is {half_width}"
        )


def truncate(x: CorrectedLaurentOp, w: TruncationWindow) -> np.ndarray:
    """Dense ``2N x 2N`` block of ``x`` on ``[-N, N)``."""
    _check_fits(x, w.N)
    return x.matrix(w.inner, w.inner)


class _PeriodicSolver:
    """``x`` wrapped onto the ring ``Z / 2M`` (indices ``[-M, M)``).

    The Laurent part becomes a circulant, solved by FFT; the correction is
    folded in with the Sherman-Morrison-Woodbury identity.
    """

    def __init__(self, x: CorrectedLaurentOp, half_width: int):
        M = int(half_width)
        L = 2 * M
        if 2 * x.bandwidth >= L:
            raise WindowTooSmall("ring shorter than the symbol bandwidth")
        _check_fits(x, M)
        self.L = L
        col = np.zeros(L, dtype=complex)
        for m, c in x.symbol.coeffs.items():
            col[m % L] += c
        self.eig = np.fft.fft(col)
        if np.abs(self.eig).min() <= 1e-300:
            raise SingularTruncation("circulant part is singular")
        corr = x.correction
        self.r_idx = np.array([i % L for i in corr.rows], dtype=np.int64)
        self.c_idx = np.array([j % L for j in corr.cols], dtype=np.int64)
        self.F = corr.dense(corr.rows, corr.cols)
        self.cap_lu = None
        self.cap_lu_h = None
        if corr:
            # capacitance I + F E_c^T C^{-1} E_r
            ER = np.zeros((L, self.r_idx.size), dtype=complex)
            ER[self.r_idx, np.arange(self.r_idx.size)] = 1
            self.CinvER = self._circ_solve(ER)
            S = np.eye(self.r_idx.size) + self.F @ self.CinvER[self.c_idx, :]
            self.cap = S
            EC = np.zeros((L, self.c_idx.size), dtype=complex)
            EC[self.c_idx, np.arange(self.c_idx.size)] = 1
            self.CinvHEC = self._circ_solve(EC, adjoint=True)
            self.cap_h = np.eye(self.c_idx.size) + self.F.conj().T @ self.CinvHEC[self.r_idx, :]

    def _circ_solve(self, b, adjoint=False):
        eig = self.eig.conj() if adjoint else self.eig
        b = np.asarray(b, dtype=complex)
        if b.ndim == 1:
            return np.fft.ifft(np.fft.fft(b) / eig)
        return np.fft.ifft(np.fft.fft(b, axis=0) / eig[:, None], axis=0)

    def _circ_apply(self, v, adjoint=False):
        eig = self.eig.conj() if adjoint else self.eig
        if v.ndim == 1:
            return np.fft.ifft(np.fft.fft(v) * eig)
        return np.fft.ifft(np.fft.fft(v, axis=0) * eig[:, None], axis=0)

    def matvec(self, v):
        out = self._circ_apply(v)
        if self.F.size:
            out[self.r_idx] += self.F @ v[self.c_idx]
        return out

    def rmatvec(self, v):
        out = self._circ_apply(v, adjoint=True)
        if self.F.size:
            out[self.c_idx] += self.F.conj().T @ v[self.r_idx]
        return out

    def solve(self, b):
        y = self._circ_solve(b)
        if self.F.size:
            t = np.linalg.solve(self.cap, self.F @ y[self.c_idx])
            y = y - self.CinvER @ t
        return y

    def solve_adjoint(self, b):
        y = self._circ_solve(b, adjoint=True)
        if self.F.size:
            t = np.linalg.solve(self.cap_h, self.F.conj().T @ y[self.r_idx])
            y = y - self.CinvHEC @ t
        return y

    def condition(self, iterations: int = 20) -> float:
        if self.F.size and np.linalg.cond(self.cap) > COND_LIMIT:
            return np.inf
        v = np.cos(np.arange(self.L) * 0.7) + 1j * np.sin(np.arange(self.L) * 1.3)
        v /= np.linalg.norm(v)
        u = v.copy()
        smax = smin_inv = 0.0
        for _ in range(iterations):
            v = self.rmatvec(self.matvec(v))
            smax = np.linalg.norm(v)
            v /= smax
            u = self.solve(self.solve_adjoint(u))
            smin_inv = np.linalg.norm(u)
            if not np.isfinite(smin_inv):
                return np.inf
            u /= smin_inv
        return float(np.sqrt(smax * smin_inv))


def condition_estimate(x: CorrectedLaurentOp, half_width: int, iterations: int = 20) -> float:
    """Condition number of ``x`` wrapped on ``[-half_width, half_width)``,
    estimated by 20 steps of power and inverse power iteration."""
    try:
        return _PeriodicSolver(x, half_width).condition(iterations)
    except (SingularTruncation, np.linalg.LinAlgError):
        return np.inf


@dataclass(frozen=True)
class SolveReport:
    solution: np.ndarray
    disagreement: float
    converged: bool
    condition: float
    window: TruncationWindow


def invert_on_window(
    x: CorrectedLaurentOp,
    w: TruncationWindow,
    rhs,
    *,
    tol: float = SOLVE_TOL,
    cond_limit: float = COND_LIMIT,
    strict: bool = True,
) -> SolveReport:
    """Solve ``x g = rhs`` for right-hand sides given on ``[-N, N)``.

    The operator is wrapped onto rings of half width ``N + pad`` and
    ``2N + pad``; both solutions are restricted to ``[-N, N)`` and their
    relative disagreement must fall below ``tol``. ``rhs`` has shape
    ``(2N,)`` or ``(2N, k)``.
    """
    rhs = np.asarray(rhs, dtype=complex)
    if rhs.shape[0] != 2 * w.N:
        raise ValueError(f"rhs must have {2 * w.N} rows")
    if w.pad < x.bandwidth:
        raise WindowTooSmall(f"pad {w.pad} below bandwidth {x.bandwidth}")
    sols = []
    cond = 0.0
    for M in (w.N + w.pad, 2 * w.N + w.pad):
        solver = _PeriodicSolver(x, M)
        cond = max(cond, solver.condition())
        if not cond <= cond_limit:
            raise SingularTruncation(f"condition estimate {cond:.3g} exceeds {cond_limit:g}")
        b = np.zeros((2 * M,) + rhs.shape[1:], dtype=complex)
        b[w.inner % (2 * M)] = rhs
        g = solver.solve(b)
        sols.append(g[w.inner % (2 * M)])
    coarse, fine = sols
    scale_ = np.abs(fine).max()
    gap = float(np.abs(coarse - fine).max() / scale_) if scale_ > 0 else 0.0
    report = SolveReport(fine, gap, gap <= tol, float(cond), w)
    if strict and not report.converged:
        raise NotConverged(f"window solutions disagree by {gap:.3g}", report)
    return report


def unit_vector(i: int, w: TruncationWindow) -> np.ndarray:
    e = np.zeros(2 * w.N, dtype=complex)
    e[i + w.N] = 1
    return e


def random_correction(
    rng: np.random.Generator, rank: int, radius: int, size: float
) -> SparseFinite:
    """Random finite correction of rank <= ``rank`` supported in
    ``[-radius, radius)`` with operator norm ``size``."""
    idx = np.arange(-radius, radius)
    U = rng.standard_normal((idx.size, rank)) + 1j * rng.standard_normal((idx.size, rank))
    V = rng.standard_normal((idx.size, rank)) + 1j * rng.standard_normal((idx.size, rank))
    F = U @ V.conj().T
    F *= size / np.linalg.norm(F, 2)
    return SparseFinite.from_dense(F, idx, idx)

