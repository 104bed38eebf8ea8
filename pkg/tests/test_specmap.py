import csv

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from generators import angle_sum_winding, random_symbol
from kskeleton.errors import GridUnderresolved
from kskeleton.index import analytic_index
from kskeleton.specmap import (
    ADJACENT,
    GridSpec,
    auto_grid,
    cyclic_metadata,
    label_components,
    spectrum_curve,
    winding_map,
)
from kskeleton.symbol import LaurentSymbol

z = LaurentSymbol.monomial(1)
zi = LaurentSymbol.monomial(-1)
square = GridSpec(-2, 2, -2, 2, 101, 101)


def test_curve_unit_circle():
    c = spectrum_curve(z, 256)
    assert c.size == 257 and c[0] == c[-1]
    assert np.allclose(np.abs(c), 1)


def test_curve_shifted_circle():
    assert np.allclose(np.abs(spectrum_curve(z - 2) + 2), 1)


def test_curve_segment_traversed_twice():
    c = spectrum_curve(z + zi, 256)[:-1]
    theta = 2 * np.pi * np.arange(256) / 256
    assert np.allclose(c, 2 * np.cos(theta), atol=1e-14)


def test_curve_refines_to_half_cell():
    c = spectrum_curve(LaurentSymbol.monomial(5, 3.0), 256, cell=0.01)
    assert np.abs(np.diff(c)).max() < 0.005
    with pytest.raises(GridUnderresolved):
        spectrum_curve(LaurentSymbol.monomial(5, 3.0), 256, cell=0.01, cap=512)
    with pytest.raises(ValueError):
        spectrum_curve(z, 128)


def test_label_unit_circle():
    lab = label_components(spectrum_curve(z, cell=min(square.cell)), square)
    assert lab.num_components == 2
    assert lab.labels[50, 50] == 1 and lab.labels[0, 0] == 0


def test_label_segment():
    lab = label_components(spectrum_curve(z + zi, cell=0.04), GridSpec(-3, 3, -3, 3, 101, 101))
    assert lab.ids == [0]


def test_label_margin_required():
    with pytest.raises(ValueError):
        label_components(spectrum_curve(z), GridSpec(-1.05, 1.05, -1.05, 1.05, 51, 51))


def test_adjacent_cells_are_near_curve():
    lab = label_components(spectrum_curve(z, cell=min(square.cell)), square)
    pts = square.points()
    d = np.abs(np.abs(pts) - 1)
    assert (d[lab.labels == ADJACENT] <= square.diagonal + 1e-3).all()
    assert (d[lab.labels != ADJACENT] > square.diagonal - 1e-3).all()


@pytest.mark.parametrize(
    "f, inside, n_in",
    [(z, 0, -1), (z - 2, -2, -1), (LaurentSymbol.monomial(3), 0, -3)],
    ids=["z", "z-2", "z^3"],
)
def test_winding_map_examples(f, inside, n_in):
    cmap = winding_map(f, auto_grid(f, 101))
    assert sorted(c.n for c in cmap.components) == sorted([n_in, 0])
    assert cmap.component(0).n == 0
    assert cmap.index_at(inside) == n_in


def test_winding_map_against_angle_sum_oracle():
    f = z * z + zi
    cmap = winding_map(f, auto_grid(f, 81))
    pts = cmap.grid.points()
    curve = cmap.curve[:-1]
    seen = {}
    for iy in range(0, pts.shape[0], 3):
        for ix in range(0, pts.shape[1], 3):
            lab = int(cmap.labels[iy, ix])
            if lab == ADJACENT:
                continue
            w = angle_sum_winding(curve, pts[iy, ix])
            assert w == cmap.component(lab).curve_winding
            seen.setdefault(lab, set()).add(w)
    assert len(seen) == len(cmap.components)
    assert len(cmap.components) == 4


def test_non_separating_curve_has_zero_index():
    f = z + zi
    cmap = winding_map(f, auto_grid(f, 101))
    assert [c.n for c in cmap.components] == [0]


def test_cyclic_metadata_examples():
    assert cyclic_metadata(-1) == {"n": -1, "quotient": "Z_1", "degenerate": False}
    assert cyclic_metadata(-3)["quotient"] == "Z_3"
    zero = cyclic_metadata(0)
    assert zero["quotient"] == "Z" and zero["degenerate"]


def test_summary_and_csv(tmp_path):
    cmap = winding_map(z, square)
    summary = cmap.summary()
    assert summary["components"][1] == {"id": 1, "lambda": [0.0, 0.0], "n": -1, "cyclic": "Z_1"}
    path = tmp_path / "grid.csv"
    cmap.write_csv(path)
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["re", "im", "component", "n"]
    assert len(rows) == 1 + 101 * 101
    assert {r[2] for r in rows[1:]} == {"0", "1", "spectrum-adjacent"}


def test_grid_refinement_stability():
    for f in (z, LaurentSymbol.monomial(3), z * z + zi):
        g = auto_grid(f, 61)
        a = winding_map(f, g)
        b = winding_map(f, g.refined())
        assert len(a.components) == len(b.components)
        assert sorted(c.n for c in a.components) == sorted(c.n for c in b.components)
        for c in a.components:
            assert b.index_at(c.lam) == c.n


seeds = st.integers(0, 2**32 - 1)


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_index_constant_on_components(seed):
    rng = np.random.default_rng(seed)
    f = random_symbol(rng, max_degree=4)
    cmap = winding_map(f, auto_grid(f, 61), seed=seed % 1000)
    pts = cmap.grid.points()
    assert cmap.component(0).n == 0
    for c in cmap.components:
        cells = np.flatnonzero(cmap.labels.ravel() == c.id)
        for cell in rng.choice(cells, size=min(3, cells.size), replace=False):
            assert analytic_index(f - complex(pts.ravel()[cell])) == c.n
