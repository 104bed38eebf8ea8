"""Fredholm index of the Toeplitz-like compression ``pxp``.

Three routes are offered and cross-checked:

* analytic: minus the winding number of the symbol (correction-free only);
* numeric: kernel and cokernel dimensions of ``pxp`` counted on rectangular
  windows, with every kernel direction required to decay;
* algebraic: ``rank(cc*) - rank(bb*)`` of the off-diagonal corners of a
  K-skeleton unitary.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DecayCheckFailed,
    IndexDisagreement,
    IndexJump,
    NotSkeleton,
    NotStabilized,
)
from .operators import (
    BlockDecomposition,
    CorrectedLaurentOp,
    HardyProjection,
    adjoint,
)
from .symbol import MARGIN_TOL, LaurentSymbol, winding_number

__all__ = [
    "DEFAULT_SCHEDULE",
    "IndexReport",
    "NumericIndexReport",
    "analytic_index",
    "numeric_index",
    "kernel_dimension",
    "index_of_factorization",
    "skeleton_index",
    "index_report",
    "family_index",
]

DEFAULT_SCHEDULE = (64, 128, 256, 512)
SV_TOL = 1e-8
DECAY_TOL = 1e-6
# Far-end artefacts keep almost all their mass in the last quarter (tail
# fraction above 0.9 in practice); genuine kernel vectors fall below
# DECAY_TOL. Anything in between is a slowly decaying kernel vector the
# window cannot resolve.
AMBIGUOUS_TAIL = 0.5
PROJ_TOL = 1e-10
RANK_TOL = 1e-8


def analytic_index(f: LaurentSymbol, *, margin_tol: float = MARGIN_TOL) -> int:
    """``Ind(p M_f p) = -winding(f)``."""
    return -winding_number(f, margin_tol=margin_tol)


@dataclass(frozen=True)
class WindowCount:
    window: int
    kernel: int
    cokernel: int
    ambiguous: bool

    @property
    def index(self):
        return None if self.ambiguous else self.kernel - self.cokernel


@dataclass(frozen=True)
class NumericIndexReport:
    counts: tuple
    stabilized: bool
    window_used: int
    sv_tol: float
    decay_tol: float

    @property
    def sequence(self) -> list:
        return [c.index for c in self.counts]


def kernel_dimension(
    x: CorrectedLaurentOp,
    p: HardyProjection,
    length: int,
    *,
    sv_tol: float = SV_TOL,
    decay_tol: float = DECAY_TOL,
) -> tuple:
    """``dim ker(pxp)`` on ``pH`` from a ``length``-row window.

    The domain window is longer than the range window by the symbol
    bandwidth plus the correction reach, so every genuine kernel vector
    truncates to an exact null vector of the window matrix. The extra null
    directions this creates live at the far end; they are separated from
    the genuine ones by the singular values of the null basis restricted to
    the last quarter of the domain window.

    Returns ``(dimension, ambiguous)``.
    """
    reach = x.radius + abs(p.cut)
    rows = p.half_line(length)
    cols = p.half_line(length + x.bandwidth + reach)
    A = x.matrix(rows, cols)
    _, s, vh = np.linalg.svd(A, full_matrices=True)
    top = s[0] if s.size else 0.0
    rank = int(np.count_nonzero(s > sv_tol * top)) if top > 0 else 0
    Z = vh[rank:].conj().T
    k = Z.shape[1]
    if k == 0:
        return 0, False
    q = max(1, cols.size // 4)
    tail = np.linalg.svd(Z[-q:], compute_uv=False)
    tail = np.concatenate((tail, np.zeros(max(0, k - tail.size))))
    dim = int(np.count_nonzero(tail <= decay_tol))
    ambiguous = bool(np.any((tail > decay_tol) & (tail < AMBIGUOUS_TAIL)))
    return dim, ambiguous


def numeric_index(
    x: CorrectedLaurentOp,
    p: HardyProjection | None = None,
    schedule=DEFAULT_SCHEDULE,
    *,
    sv_tol: float = SV_TOL,
    decay_tol: float = DECAY_TOL,
) -> tuple:
    """``dim ker(pxp) - dim ker((pxp)*)`` counted on increasing windows.

    Stops as soon as three consecutive windows agree. Returns
    ``(index, report)``.
    """
    p = p or HardyProjection()
    schedule = [int(n) for n in schedule]
    if len(schedule) < 3 or any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise ValueError("schedule must be strictly increasing with at least 3 windows")
    xh = adjoint(x)
    counts = []
    for n in schedule:
        ker, amb1 = kernel_dimension(x, p, n, sv_tol=sv_tol, decay_tol=decay_tol)
        coker, amb2 = kernel_dimension(xh, p, n, sv_tol=sv_tol, decay_tol=decay_tol)
        counts.append(WindowCount(n, ker, coker, amb1 or amb2))
        last = [c.index for c in counts[-3:]]
        if len(last) == 3 and last[0] is not None and last.count(last[0]) == 3:
            report = NumericIndexReport(tuple(counts), True, n, sv_tol, decay_tol)
            return last[0], report
    report = NumericIndexReport(tuple(counts), False, schedule[-1], sv_tol, decay_tol)
    if any(c.ambiguous for c in counts[-3:]):
        raise DecayCheckFailed(
            f"kernel candidates fail to decay; per-window indices {report.sequence}", report
        )
    raise NotStabilized(f"no three consecutive windows agree: {report.sequence}", report)


def _is_projection(P: np.ndarray, tol: float) -> bool:
    if P.size == 0:
        return True
    return bool(
        np.abs(P @ P - P).max() <= tol and np.abs(P - P.conj().T).max() <= tol
    )


def _rank(P: np.ndarray, tol: float = RANK_TOL) -> int:
    if P.size == 0:
        return 0
    return int(np.count_nonzero(np.linalg.svd(P, compute_uv=False) > tol))


def skeleton_index(b: np.ndarray, c: np.ndarray, *, tol: float = PROJ_TOL) -> int:
    """``rank(cc*) - rank(bb*)`` for dense off-diagonal corners.

    Both corners must be partial isometries: ``b*b``, ``bb*``, ``c*c`` and
    ``cc*`` are checked to be projections.
    """
    for name, m in (("b", b), ("c", c)):
        if m.size and not (
            _is_projection(m.conj().T @ m, tol) and _is_projection(m @ m.conj().T, tol)
        ):
            raise NotSkeleton(f"corner {name} is not a partial isometry")
    cc = c @ c.conj().T if c.size else c
    bb = b @ b.conj().T if b.size else b
    return _rank(cc) - _rank(bb)


def index_of_factorization(fact) -> int:
    """Index carried by the K-skeleton unitary of a factorization.

    Accepts a :class:`BlockDecomposition` of a K-skeleton unitary, or any
    object exposing ``skeleton_blocks()`` that returns the dense corners
    ``(b, c)`` (skeleton factorizations and dilation unitaries do).
    """
    if isinstance(fact, BlockDecomposition):
        b, c = fact.b_support, fact.c_support
        b_dense = b.dense(b.rows, b.cols) if b else np.zeros((0, 0))
        c_dense = c.dense(c.rows, c.cols) if c else np.zeros((0, 0))
        return skeleton_index(b_dense, c_dense)
    return skeleton_index(*fact.skeleton_blocks())


@dataclass(frozen=True)
class IndexReport:
    """All available estimates of ``Ind(pxp)``; any two present must agree."""

    analytic: int | None = None
    numeric: int | None = None
    from_factorization: int | None = None
    stabilized: bool = False
    window_used: int = 0
    tolerances: dict = field(default_factory=dict)

    def __post_init__(self):
        present = {v for v in (self.analytic, self.numeric, self.from_factorization) if v is not None}
        if len(present) > 1:
            raise IndexDisagreement(
                f"index estimates disagree: analytic={self.analytic}, "
                f"numeric={self.numeric}, factorization={self.from_factorization}"
            )

    @property
    def value(self) -> int | None:
        for v in (self.numeric, self.analytic, self.from_factorization):
            if v is not None:
                return v
        return None

    def to_json(self) -> dict:
        return {
            "analytic": self.analytic,
            "numeric": self.numeric,
            "from_factorization": self.from_factorization,
            "stabilized": self.stabilized,
            "window": self.window_used,
        }


def index_report(
    x: CorrectedLaurentOp,
    p: HardyProjection | None = None,
    schedule=DEFAULT_SCHEDULE,
    *,
    margin_tol: float = MARGIN_TOL,
    with_factorization: bool = True,
) -> IndexReport:
    """Run every applicable route and assemble an :class:`IndexReport`."""
    from .factorize import skeleton_factor

    p = p or HardyProjection()
    analytic = analytic_index(x.symbol, margin_tol=margin_tol) if x.is_laurent else None
    numeric, rep = numeric_index(x, p, schedule)
    from_fact = None
    if with_factorization:
        fact = skeleton_factor(x, p, n=numeric)
        from_fact = index_of_factorization(fact)
    return IndexReport(
        analytic,
        numeric,
        from_fact,
        rep.stabilized,
        rep.window_used,
        {"margin_tol": margin_tol, "sv_tol": rep.sv_tol, "decay_tol": rep.decay_tol},
    )


def family_index(
    loop,
    p: HardyProjection | None = None,
    schedule=DEFAULT_SCHEDULE,
    *,
    continuity_budget: float | None = None,
    norm_window: int = 32,
) -> int:
    """Common index of a sampled closed loop of operators.

    With ``continuity_budget`` set, consecutive samples (including the
    closing pair) must differ by at most that much in 2-norm on a window.
    """
    p = p or HardyProjection()
    loop = list(loop)
    if not loop:
        raise ValueError("empty loop")
    if continuity_budget is not None:
        idx = np.arange(-norm_window, norm_window)
        for a, b in zip(loop, loop[1:] + loop[:1]):
            gap = np.linalg.norm(a.matrix(idx, idx) - b.matrix(idx, idx), 2)
            if gap > continuity_budget:
                raise ValueError(f"adjacent samples differ by {gap:.3g} > {continuity_budget:g}")
    values = [numeric_index(x, p, schedule)[0] for x in loop]
    for k, (a, b) in enumerate(zip(values, values[1:] + values[:1])):
        if a != b:
            err = IndexJump(f"index jumps from {a} to {b} at sample {k}")
            err.values = values
            raise err
    return values[0]
