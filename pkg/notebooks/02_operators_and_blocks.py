"""
Laurent operators and their corners
===================================

Laurent operators plus finite corrections, exact composition, and the
four corners of an operator cut along a Hardy projection.
"""

# %%
import numpy as np

from kskeleton import (
    CorrectedLaurentOp,
    HardyProjection,
    LaurentSymbol,
    SparseFinite,
    TruncationWindow,
    block_decompose,
    commutator_with_p,
    compose,
    invert_on_window,
    laurent_op,
    shift_power,
)
from kskeleton.operators import unit_vector

z = LaurentSymbol.monomial(1)
u0 = shift_power(1)
idx = np.arange(-3, 3)
print(u0.matrix(idx, idx).real)

# %% [markdown]
# Compositions stay in the class: symbols multiply and corrections are
# tracked entry by entry.

# %%
F = SparseFinite.from_dict({(0, 0): 0.3, (1, -1): -0.2j})
x = CorrectedLaurentOp(z - 2, F)
y = compose(x, u0)
print(y.symbol, y.correction)

# %% [markdown]
# Cutting along p = projection onto indices >= 0. The off-diagonal
# corners are finite; the commutator xp - px is exact.

# %%
p = HardyProjection()
print("commutator of u0:", commutator_with_p(u0, p).as_dict())
bd = block_decompose(laurent_op(z * z), p)
b = bd.b_support
print("rank of b for z^2:", np.linalg.matrix_rank(b.dense(b.rows, b.cols)))

# %% [markdown]
# Windowed solves. The ring embedding plus a correction update gives the
# decaying solution of (z - 2) g = e_0: g_k = -(1/2)^(k+1) for k >= 0.

# %%
w = TruncationWindow(16, 8)
rep = invert_on_window(laurent_op(z - 2), w, unit_vector(0, w))
print(np.round(rep.solution[16:22].real, 6), "disagreement", rep.disagreement)
