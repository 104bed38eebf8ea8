"""
Component maps of the resolvent set
===================================

The curve f(S^1) cuts the plane into components; each gets the index of
p(M_f - lambda)p for lambda inside it.
"""

# %%
from kskeleton import LaurentSymbol, cyclic_metadata, winding_map
from kskeleton.specmap import auto_grid

z = LaurentSymbol.monomial(1)
zi = LaurentSymbol.monomial(-1)

for name, f in [("z", z), ("z^3", LaurentSymbol.monomial(3)), ("z + 1/z", z + zi), ("z^3 + 1/(2z)", z * z * z + zi / 2)]:
    cmap = winding_map(f, auto_grid(f, 201))
    print(name)
    for c in cmap.components:
        print(f"  component {c.id}: lambda {c.lam:.3f}, n = {c.n}, quotient {cyclic_metadata(c.n)['quotient']}")

# %% [markdown]
# The grid labels can be exported for plotting elsewhere.

# %%
import tempfile, os

with tempfile.TemporaryDirectory() as d:
    cmap.write_csv(os.path.join(d, "grid.csv"))
    print(open(os.path.join(d, "grid.csv")).read().splitlines()[:3])
