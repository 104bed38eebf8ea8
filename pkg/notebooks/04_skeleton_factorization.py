"""
Skeleton factorizations
=======================

x = (1 + k) xp u0^(-n) with k finite rank, xp commuting with the cut, and
the shift power carrying the index. Also the shift direct-sum variant and
a family of factorizations along a path in the resolvent set.
"""

# %%
import numpy as np

from kskeleton import (
    CorrectedLaurentOp,
    LaurentSymbol,
    alternative_factor,
    family_factor,
    laurent_op,
    shift_power,
    skeleton_factor,
    verify_factorization,
)
from kskeleton.operators import random_correction

z = LaurentSymbol.monomial(1)
rng = np.random.default_rng(1)
x = CorrectedLaurentOp((z + 0.5) * (z - 3), random_correction(rng, 3, 4, 0.3))

# %%
fact = skeleton_factor(x)
print(fact.report())
print(verify_factorization(fact, x).to_json())

# %% [markdown]
# Tampering with k shows up immediately in the residual.

# %%
bad = type(fact)(fact.n, fact.k.with_entry(fact.k.rows[0], 0, 0.1), fact.xp, 0.0, fact.window, fact.p)
print("tampered residual", verify_factorization(bad, x).residual)

# %% [markdown]
# Index -2: the skeleton u0^2 splits into two bilateral shifts, one on the
# even indices and one on the odd.

# %%
alt = alternative_factor(shift_power(2))
idx = np.arange(-4, 4)
print(alt.relabel(idx))
print(alt.shift_sum_matrix(idx, idx).real)

# %% [markdown]
# Factor M_z - lambda around a small circle of lambda inside the disk. The
# index stays -1 and the compact part moves continuously.

# %%
lams = 0.3 * np.exp(2j * np.pi * np.arange(12) / 12)
rep = family_factor([(lam, laurent_op(z - lam)) for lam in lams], continuity_budget=0.5)
print("n =", rep.n, "largest step", round(rep.max_jump, 4), "continuous", rep.continuous)
