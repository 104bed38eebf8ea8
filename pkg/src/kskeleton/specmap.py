"""Component maps of the resolvent set of a Laurent operator.

The essential spectrum of ``M_f`` is the curve ``f(S^1)``. Its complement is
rasterized, cells touching the curve are set aside, the rest is flood-filled
into 4-connected components, and each component gets the index of
``p(M_f - lam)p`` for a representative ``lam``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree

from .errors import GridUnderresolved, InconsistentComponent
from .index import analytic_index
from .symbol import GRID_CAP, LaurentSymbol, evaluate

__all__ = [
    "GridSpec",
    "LabeledGrid",
    "Component",
    "ComponentMap",
    "spectrum_curve",
    "label_components",
    "winding_map",
    "cyclic_metadata",
    "auto_grid",
    "ADJACENT",
]

ADJACENT = -1


@dataclass(frozen=True)
class GridSpec:
    """Cell centers ``re_min..re_max`` by ``im_min..im_max`` (inclusive),
    ``nx`` by ``ny`` of them."""

    re_min: float
    re_max: float
    im_min: float
    im_max: float
    nx: int = 201
    ny: int = 201

    @property
    def re(self) -> np.ndarray:
        return np.linspace(self.re_min, self.re_max, self.nx)

    @property
    def im(self) -> np.ndarray:
        return np.linspace(self.im_min, self.im_max, self.ny)

    @property
    def cell(self) -> tuple:
        return (self.re_max - self.re_min) / (self.nx - 1), (self.im_max - self.im_min) / (self.ny - 1)

    @property
    def diagonal(self) -> float:
        return float(np.hypot(*self.cell))

    def points(self) -> np.ndarray:
        """Complex cell centers, shape ``(ny, nx)``; row index is imaginary part."""
        return self.re[None, :] + 1j * self.im[:, None]

    def refined(self) -> "GridSpec":
        return GridSpec(self.re_min, self.re_max, self.im_min, self.im_max, 2 * self.nx - 1, 2 * self.ny - 1)


def auto_grid(f: LaurentSymbol, resolution: int = 201, margin: float = 0.5) -> GridSpec:
    """Square-ish grid around ``f(S^1)`` with a relative ``margin``."""
    pts = evaluate(f, 1024)
    lo_r, hi_r = pts.real.min(), pts.real.max()
    lo_i, hi_i = pts.imag.min(), pts.imag.max()
    span = max(hi_r - lo_r, hi_i - lo_i, 1e-3)
    pad = margin * span
    return GridSpec(lo_r - pad, hi_r + pad, lo_i - pad, hi_i + pad, resolution, resolution)


def spectrum_curve(
    f: LaurentSymbol, samples: int = 256, cell: float | None = None, *, cap: int = GRID_CAP
) -> np.ndarray:
    """Closed polyline ``f(exp(2j*pi*k/samples))`` (first point repeated at
    the end). With ``cell`` given, samples double until consecutive points
    are closer than ``cell / 2``."""
    if samples < 256:
        raise ValueError("samples must be at least 256")
    while True:
        pts = evaluate(f, samples)
        closed = np.append(pts, pts[0])
        if cell is None or np.abs(np.diff(closed)).max() < cell / 2:
            return closed
        if samples >= cap:
            raise GridUnderresolved(f"curve still coarser than half a cell at {samples} samples")
        samples *= 2


def _segment_distance(points: np.ndarray, curve: np.ndarray, chunk: int = 256) -> np.ndarray:
    a = curve[:-1]
    d = curve[1:] - a
    dd = np.maximum(np.abs(d) ** 2, 1e-300)
    out = np.empty(points.size)
    for s in range(0, points.size, chunk):
        p = points[s : s + chunk, None]
        t = np.clip(((p - a) * d.conj()).real / dd, 0, 1)
        out[s : s + chunk] = np.abs(p - (a + t * d)).min(axis=1)
    return out


def curve_distance(curve: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Distance from every cell center to the polyline, shape ``(ny, nx)``.

    Exact within two cell diagonals of the curve; farther out the nearest
    vertex distance is used (off by at most half a segment).
    """
    pts = grid.points().ravel()
    tree = cKDTree(np.column_stack([curve.real, curve.imag]))
    dv, _ = tree.query(np.column_stack([pts.real, pts.imag]))
    seg = np.abs(np.diff(curve)).max()
    near = dv <= 2 * grid.diagonal + seg
    out = dv.copy()
    if near.any():
        out[near] = _segment_distance(pts[near], curve)
    return out.reshape(grid.ny, grid.nx)


@dataclass(frozen=True, eq=False)
class LabeledGrid:
    """``labels[iy, ix]`` is a component id or :data:`ADJACENT`; id 0 is the
    unbounded component."""

    grid: GridSpec
    labels: np.ndarray
    distance: np.ndarray

    @property
    def ids(self) -> list:
        return sorted(int(v) for v in np.unique(self.labels) if v != ADJACENT)

    @property
    def num_components(self) -> int:
        return len(self.ids)


def label_components(curve: np.ndarray, grid: GridSpec) -> LabeledGrid:
    """Flood-fill the complement of the curve on the grid.

    Cells within one cell diagonal of the curve are marked adjacent and left
    unclassified. Everything touching the grid border belongs to the
    unbounded component, id 0; bounded components are numbered from 1 in
    scan order.
    """
    span = max(np.ptp(curve.real), np.ptp(curve.imag), 1e-3)
    m = 0.1 * span
    if (
        curve.real.min() - m < grid.re_min
        or curve.real.max() + m > grid.re_max
        or curve.imag.min() - m < grid.im_min
        or curve.imag.max() + m > grid.im_max
    ):
        raise ValueError("grid must contain the curve with a 10% margin")
    dist = curve_distance(curve, grid)
    free = dist > grid.diagonal
    raw, count = ndimage.label(free)
    border = set(np.unique(np.concatenate([raw[0], raw[-1], raw[:, 0], raw[:, -1]]))) - {0}
    remap = np.full(count + 1, ADJACENT, dtype=np.int64)
    nxt = 1
    for lab in range(1, count + 1):
        if lab in border:
            remap[lab] = 0
        else:
            remap[lab] = nxt
            nxt += 1
    return LabeledGrid(grid, remap[raw], dist)


def cyclic_metadata(n: int) -> dict:
    """Order of the cyclic quotient attached to a component of index ``n``.

    ``n = 0`` gives the degenerate quotient by the zero subgroup, reported
    as ``"Z"`` and flagged.
    """
    if n == 0:
        return {"n": 0, "quotient": "Z", "degenerate": True}
    return {"n": int(n), "quotient": f"Z_{abs(int(n))}", "degenerate": False}


@dataclass(frozen=True)
class Component:
    id: int
    lam: complex
    n: int
    cells: int

    @property
    def curve_winding(self) -> int:
        return -self.n

    @property
    def cyclic(self) -> str:
        return cyclic_metadata(self.n)["quotient"]

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "lambda": [float(self.lam.real), float(self.lam.imag)],
            "n": self.n,
            "cyclic": self.cyclic,
        }


@dataclass(frozen=True, eq=False)
class ComponentMap:
    symbol: LaurentSymbol
    labeled: LabeledGrid
    components: tuple
    curve: np.ndarray

    @property
    def grid(self) -> GridSpec:
        return self.labeled.grid

    @property
    def labels(self) -> np.ndarray:
        return self.labeled.labels

    def component(self, cid: int) -> Component:
        return next(c for c in self.components if c.id == cid)

    def index_at(self, lam: complex):
        """Index of the component containing the nearest cell, or None."""
        g = self.grid
        ix = int(np.clip(round((lam.real - g.re_min) / g.cell[0]), 0, g.nx - 1))
        iy = int(np.clip(round((lam.imag - g.im_min) / g.cell[1]), 0, g.ny - 1))
        lab = int(self.labels[iy, ix])
        return None if lab == ADJACENT else self.component(lab).n

    def summary(self) -> dict:
        return {"components": [c.to_json() for c in self.components]}

    def cyclic_metadata(self) -> list:
        return [dict(id=c.id, **cyclic_metadata(c.n)) for c in self.components]

    def rows(self):
        """``(re, im, component, n)`` per cell; adjacent cells carry
        ``"spectrum-adjacent"`` and an empty index."""
        by_id = {c.id: c.n for c in self.components}
        g = self.grid
        for iy, im in enumerate(g.im):
            for ix, re in enumerate(g.re):
                lab = int(self.labels[iy, ix])
                if lab == ADJACENT:
                    yield float(re), float(im), "spectrum-adjacent", ""
                else:
                    yield float(re), float(im), lab, by_id[lab]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh, lineterminator="\n")
            out.writerow(["re", "im", "component", "n"])
            for re, im, lab, n in self.rows():
                out.writerow([repr(re), repr(im), lab, n])


def winding_map(
    f: LaurentSymbol,
    grid: GridSpec | None = None,
    *,
    samples: int = 256,
    checks: int = 2,
    seed: int = 0,
    margin_tol: float = 1e-6,
) -> ComponentMap:
    """Index ``n_i = Ind(p(M_f - lam_i)p)`` for every component.

    ``lam_i`` is the cell farthest from the curve; ``checks`` further
    interior cells per component, drawn with a seeded generator, must give
    the same index.
    """
    grid = grid or auto_grid(f)
    curve = spectrum_curve(f, samples, min(grid.cell))
    labeled = label_components(curve, grid)
    pts = grid.points()
    rng = np.random.default_rng(seed)
    comps = []
    for cid in labeled.ids:
        mask = labeled.labels == cid
        flat = np.flatnonzero(mask)
        deepest = flat[np.argmax(labeled.distance.ravel()[flat])]
        lam = complex(pts.ravel()[deepest])
        n = analytic_index(f - lam, margin_tol=margin_tol)
        picks = rng.choice(flat, size=min(checks, flat.size), replace=False)
        for cell in picks:
            other = complex(pts.ravel()[cell])
            m = analytic_index(f - other, margin_tol=margin_tol)
            if m != n:
                raise InconsistentComponent(
                    f"component {cid}: index {n} at {lam:.4g} but {m} at {other:.4g}"
                )
        if cid == 0 and n != 0:
            raise InconsistentComponent(f"unbounded component has index {n}")
        comps.append(Component(cid, lam, int(n), int(flat.size)))
    return ComponentMap(f, labeled, tuple(comps), curve)
