"""
Symbols, margins and winding numbers
====================================

A Laurent polynomial symbol, how far it stays from zero on the unit
circle, its winding number and its Wiener-Hopf split.
"""

# %%
import numpy as np

from kskeleton import LaurentSymbol, evaluate, invertibility_margin, wiener_hopf, winding_number

z = LaurentSymbol.monomial(1)
f = (z + 0.5) * (z - 2) * LaurentSymbol.monomial(-1)
print(f)

# %% [markdown]
# Samples on the circle. ``evaluate`` uses an exact phase table, so
# monomials come out exact at quarter turns.

# %%
print(np.round(evaluate(z, 4), 15))
print(np.round(evaluate(f, 8), 4))

# %% [markdown]
# The margin is min |f| on the circle. Winding numbers need it to be
# above ``margin_tol`` (1e-6 by default).

# %%
print("margin", invertibility_margin(f))
print("winding", winding_number(f))

# root counting gives the same number: zeros of z^(-lo) f inside the disk, plus lo
roots = np.roots(f.array()[::-1])
print("root count", int(np.sum(np.abs(roots) < 1)) + f.lo)

# %% [markdown]
# Wiener-Hopf: f = f_plus * f_minus * z^n with f_plus analytic inside,
# f_minus analytic outside, both of winding zero.

# %%
s = wiener_hopf(f)
print("n =", s.n, "residual =", s.residual)
print("f_plus ", s.f_plus.trimmed(1e-12))
print("f_minus", s.f_minus.trimmed(1e-12))
