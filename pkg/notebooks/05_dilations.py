"""
Dilations and the index map
===========================

A partial isometry v sits in the corner of the unitary
[[v, 1 - vv*], [1 - v*v, -v*]], and the ranks of the off-diagonal
projections give its index. Contractions get the Halmos dilation.
"""

# %%
import numpy as np

from kskeleton import Block, HardyProjection, dilation_skeleton, halmos_dilation, identity, shift_power
from kskeleton.operators import scale

p = HardyProjection()
for m in (1, 2, 3):
    S = Block(shift_power(m), p, "p", "p")  # unilateral shift to the m-th power
    d = dilation_skeleton(S)
    print(f"S^{m}: defect ranks {d.defect_ranks}, index {d.index}, unitarity {d.unitarity_defect:.1e}")

# %%
h = halmos_dilation(scale(identity(), 0.5))
print(np.round([h.x[0, 0].real, h.top_right[0, 0], h.bottom_left[0, 0], h.bottom_right[0, 0].real], 4))
print("unitarity defect", h.unitarity_defect)
