"""Laurent polynomial symbols on the unit circle.

A symbol ``f(z) = sum_m c_m z**m`` with finitely many nonzero coefficients.
This module evaluates symbols on uniform grids of the circle, measures how
far they stay from zero, counts their winding about the origin, and splits
them into analytic / coanalytic factors (Wiener-Hopf splitting).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import GridUnderresolved, NotInvertible, TruncationFailure

__all__ = [
    "LaurentSymbol",
    "WienerHopfSplit",
    "evaluate",
    "invertibility_margin",
    "winding_number",
    "wiener_hopf",
    "MARGIN_TOL",
    "GRID_CAP",
]

MARGIN_TOL = 1e-6
GRID_CAP = 2**20


@dataclass(frozen=True)
class LaurentSymbol:
    """Finitely supported Fourier coefficient sequence.

    Stored as the lowest occupied offset ``lo`` and the dense run of
    coefficients ``values`` for offsets ``lo, lo+1, ...``. Both extreme
    coefficients are nonzero; the zero symbol has ``values == ()``.
    Build instances with :meth:`from_coeffs` (or the helpers below) rather
    than the raw constructor.
    """

    lo: int
    values: tuple

    def __post_init__(self):
        vals = tuple(complex(v) for v in self.values)
        start, stop = 0, len(vals)
        while start < stop and vals[start] == 0:
            start += 1
        while stop > start and vals[stop - 1] == 0:
            stop -= 1
        object.__setattr__(self, "values", vals[start:stop])
        object.__setattr__(self, "lo", int(self.lo) + start if stop > start else 0)

    # -- construction -----------------------------------------------------
    @classmethod
    def from_coeffs(cls, coeffs: Mapping[int, complex]) -> "LaurentSymbol":
        items = {int(m): complex(c) for m, c in coeffs.items() if c != 0}
        if not items:
            return cls(0, ())
        lo, hi = min(items), max(items)
        vals = [0j] * (hi - lo + 1)
        for m, c in items.items():
            vals[m - lo] = c
        return cls(lo, tuple(vals))

    @classmethod
    def from_array(cls, lo: int, values) -> "LaurentSymbol":
        return cls(lo, tuple(np.asarray(values, dtype=complex).tolist()))

    @classmethod
    def monomial(cls, n: int, c: complex = 1.0) -> "LaurentSymbol":
        return cls(n, (c,))

    @classmethod
    def constant(cls, c: complex) -> "LaurentSymbol":
        return cls(0, (c,))

    @classmethod
    def from_roots(cls, roots, lead: complex = 1.0, shift: int = 0) -> "LaurentSymbol":
        """``lead * z**shift * prod(z - r)``."""
        poly = np.array([complex(lead)])
        for r in roots:
            poly = np.convolve(poly, np.array([-complex(r), 1.0]))
        return cls.from_array(shift, poly)

    # -- shape ------------------------------------------------------------
    @property
    def hi(self) -> int:
        return self.lo + len(self.values) - 1

    @property
    def d_minus(self) -> int:
        return max(0, -self.lo) if self.values else 0

    @property
    def d_plus(self) -> int:
        return max(0, self.hi) if self.values else 0

    @property
    def bandwidth(self) -> int:
        return max(self.d_minus, self.d_plus)

    @property
    def is_zero(self) -> bool:
        return not self.values

    @property
    def coeffs(self) -> dict:
        return {self.lo + k: c for k, c in enumerate(self.values) if c != 0}

    def coeff(self, m: int) -> complex:
        k = m - self.lo
        if 0 <= k < len(self.values):
            return self.values[k]
        return 0j

    def array(self) -> np.ndarray:
        return np.array(self.values, dtype=complex)

    def __call__(self, z):
        """Evaluate by Horner's rule at arbitrary nonzero points."""
        z = np.asarray(z, dtype=complex)
        acc = np.zeros_like(z)
        for c in reversed(self.values):
            acc = acc * z + c
        return acc * z ** self.lo

    # -- algebra ----------------------------------------------------------
    def __add__(self, other):
        other = _as_symbol(other)
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        lo = min(self.lo, other.lo)
        hi = max(self.hi, other.hi)
        out = np.zeros(hi - lo + 1, dtype=complex)
        out[self.lo - lo : self.hi - lo + 1] += self.array()
        out[other.lo - lo : other.hi - lo + 1] += other.array()
        return LaurentSymbol.from_array(lo, out)

    __radd__ = __add__

    def __neg__(self):
        return LaurentSymbol(self.lo, tuple(-c for c in self.values))

    def __sub__(self, other):
        return self + (-_as_symbol(other))

    def __rsub__(self, other):
        return _as_symbol(other) - self

    def __mul__(self, other):
        if isinstance(other, LaurentSymbol):
            if self.is_zero or other.is_zero:
                return LaurentSymbol(0, ())
            return LaurentSymbol.from_array(
                self.lo + other.lo, np.convolve(self.array(), other.array())
            )
        return LaurentSymbol(self.lo, tuple(complex(other) * c for c in self.values))

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1 / complex(scalar))

    def shift(self, n: int) -> "LaurentSymbol":
        """Multiply by ``z**n``."""
        return LaurentSymbol(self.lo + n, self.values)

    def reflected(self) -> "LaurentSymbol":
        """``conj(f(1/conj(z)))``: the symbol of the adjoint Laurent operator."""
        return LaurentSymbol(-self.hi, tuple(np.conj(self.values[::-1]).tolist()))

    def trimmed(self, rel_tol: float) -> "LaurentSymbol":
        """Drop coefficients below ``rel_tol`` times the largest one."""
        if self.is_zero:
            return self
        a = self.array()
        a[np.abs(a) <= rel_tol * np.abs(a).max()] = 0
        return LaurentSymbol.from_array(self.lo, a)

    def __repr__(self):
        terms = ", ".join(f"{m}: {c:.6g}" for m, c in self.coeffs.items())
        return f"LaurentSymbol({{{terms}}})"


def _as_symbol(x) -> LaurentSymbol:
    if isinstance(x, LaurentSymbol):
        return x
    return LaurentSymbol.constant(complex(x))


def evaluate(f: LaurentSymbol, grid_size: int) -> np.ndarray:
    """Sample ``f`` at the roots of unity ``exp(2j*pi*k/grid_size)``.

    Phases are reduced modulo ``grid_size`` before exponentiation so that
    samples are reproducible bit for bit.
    """
    grid_size = int(grid_size)
    if grid_size < 1:
        raise ValueError("grid_size must be positive")
    table = np.exp(2j * np.pi * np.arange(grid_size) / grid_size)
    j = np.arange(grid_size, dtype=np.int64)
    out = np.zeros(grid_size, dtype=complex)
    for m, c in f.coeffs.items():
        out += c * table[(j * m) % grid_size]
    return out


def _start_grid(f: LaurentSymbol) -> int:
    n = 64
    while n < 16 * (f.d_minus + f.d_plus + 1):
        n *= 2
    return n


def invertibility_margin(f: LaurentSymbol, *, cap: int = GRID_CAP) -> float:
    """Minimum of ``|f|`` on the unit circle.

    The grid doubles until its minimum moves by less than 1%, then the
    minimum is polished by a bounded scalar search around the best sample.
    Values below 1e-14 are reported as exactly zero.
    """
    if f.is_zero:
        return 0.0
    n = _start_grid(f)
    vals = np.abs(evaluate(f, n))
    best = vals.min()
    while n < cap and best >= 1e-14:
        n *= 2
        vals = np.abs(evaluate(f, n))
        new = vals.min()
        settled = abs(new - best) < 0.01 * best
        best = new
        if settled:
            break
    if best >= 1e-14:
        k = int(np.argmin(vals))
        h = 2 * np.pi / n
        res = minimize_scalar(
            lambda t: float(np.abs(f(np.exp(1j * t)))),
            bounds=(k * h - h, k * h + h),
            method="bounded",
            options={"xatol": 1e-12 * max(h, 1e-3)},
        )
        best = min(best, float(res.fun))
    return 0.0 if best < 1e-14 else float(best)


def _phase_steps(samples: np.ndarray) -> np.ndarray:
    return np.angle(np.roll(samples, -1) / samples)


def winding_number(
    f: LaurentSymbol, *, margin_tol: float = MARGIN_TOL, cap: int = GRID_CAP
) -> int:
    """Number of turns ``f(S^1)`` makes around the origin.

    The phase is unwrapped on a grid that doubles until every step between
    adjacent samples is below pi/2.
    """
    if invertibility_margin(f, cap=cap) < margin_tol:
        raise NotInvertible(f"symbol comes within {margin_tol:g} of zero on the circle")
    n = _start_grid(f)
    while True:
        steps = _phase_steps(evaluate(f, n))
        if np.abs(steps).max() < np.pi / 2:
            turns = steps.sum() / (2 * np.pi)
            w = int(round(turns))
            if abs(turns - w) > 1e-6:
                raise GridUnderresolved(f"non-integer phase total {turns!r}")
            return w
        if n >= cap:
            raise GridUnderresolved(f"phase steps exceed pi/2 at grid {n}")
        n *= 2


@dataclass(frozen=True)
class WienerHopfSplit:
    """``f(z) = f_minus(z) * z**n * f_plus(z)``.

    ``f_plus`` holds nonnegative powers and is normalized to constant term 1;
    ``f_minus`` holds nonpositive powers and absorbs the scalar freedom.
    """

    f_plus: LaurentSymbol
    f_minus: LaurentSymbol
    n: int
    residual: float


def _split_on_grid(g: LaurentSymbol, grid: int, degree: int):
    vals = evaluate(g, grid)
    steps = _phase_steps(vals)
    while np.abs(steps).max() >= np.pi / 2:
        if grid >= GRID_CAP:
            raise GridUnderresolved(f"phase steps exceed pi/2 at grid {grid}")
        grid *= 2
        vals = evaluate(g, grid)
        steps = _phase_steps(vals)
    phase = np.angle(vals[0]) + np.concatenate(([0.0], np.cumsum(steps[:-1])))
    log_coef = np.fft.fft(np.log(np.abs(vals)) + 1j * phase) / grid
    half = grid // 2
    plus = np.zeros(grid, dtype=complex)
    plus[1:half] = log_coef[1:half]
    minus = np.zeros(grid, dtype=complex)
    minus[0] = log_coef[0]
    minus[half + 1 :] = log_coef[half + 1 :]
    fp = np.fft.fft(np.exp(np.fft.ifft(plus) * grid)) / grid
    fm = np.fft.fft(np.exp(np.fft.ifft(minus) * grid)) / grid
    f_plus = fp[: degree + 1]
    f_minus = np.concatenate((fm[grid - degree :], fm[:1]))
    scale = f_plus[0]
    return (
        LaurentSymbol.from_array(0, f_plus / scale).trimmed(1e-13),
        LaurentSymbol.from_array(-degree, f_minus * scale).trimmed(1e-13),
    )


def wiener_hopf(
    f: LaurentSymbol,
    *,
    margin_tol: float = MARGIN_TOL,
    residual_tol: float = 1e-8,
    degree_cap: int = 4096,
) -> WienerHopfSplit:
    """Split ``f`` as ``f_minus * z**n * f_plus`` with ``n`` its winding.

    ``log(f z**-n)`` is sampled through the unwrapped phase, its Fourier
    series is cut into positive and nonpositive halves, and each half is
    exponentiated on the grid. The factors are truncated to a degree that
    doubles until the recomposition error drops below ``residual_tol``.
    """
    n = winding_number(f, margin_tol=margin_tol)
    g = f.shift(-n)
    degree = 16
    last = np.inf
    while degree <= degree_cap:
        grid = max(8 * degree, _start_grid(g))
        f_plus, f_minus = _split_on_grid(g, grid, degree)
        check = 2 * grid + 1
        target = evaluate(f, check)
        scale = np.abs(target).max()
        recon = evaluate(f_minus, check) * evaluate(f_plus.shift(n), check)
        last = np.abs(recon - target).max() / scale
        if last <= residual_tol and _zero_winding(f_plus) and _zero_winding(f_minus):
            return WienerHopfSplit(f_plus, f_minus, n, float(last))
        degree *= 2
    raise TruncationFailure(
        f"recomposition residual {last:.3g} above {residual_tol:g} at degree cap {degree_cap}"
    )


def _zero_winding(h: LaurentSymbol) -> bool:
    try:
        return winding_number(h, margin_tol=1e-12) == 0
    except (NotInvertible, GridUnderresolved):
        return False
