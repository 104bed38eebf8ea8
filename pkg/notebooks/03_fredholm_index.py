"""
Three routes to the index
=========================

Analytic (minus the winding), numeric (kernel and cokernel counts on
growing windows) and algebraic (corner ranks of a skeleton unitary).
"""

# %%
import numpy as np

from kskeleton import (
    CorrectedLaurentOp,
    HardyProjection,
    LaurentSymbol,
    analytic_index,
    index_report,
    laurent_op,
    numeric_index,
    shift_power,
)
from kskeleton.operators import random_correction

z = LaurentSymbol.monomial(1)

# %%
for n in range(-3, 4):
    value, rep = numeric_index(shift_power(n))
    print(f"u0^{n:+d}: index {value:+d}, per-window {rep.sequence}")

# %% [markdown]
# A symbol with one zero inside the disk and one outside.

# %%
f = (z + 0.5) * (z - 2)
print("analytic", analytic_index(f))
print(index_report(laurent_op(f)).to_json())

# %% [markdown]
# Finite corrections leave the index alone as long as the operator stays
# invertible; only the numeric route applies to them.

# %%
rng = np.random.default_rng(0)
x = CorrectedLaurentOp(f, random_correction(rng, 3, 4, 0.3))
print(index_report(x).to_json())
print("cut at 5:", numeric_index(x, HardyProjection(5))[0])
