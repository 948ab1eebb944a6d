# ---
# jupyter:
#   jupytext:
#     formats: py:percent
#     text_representation:
#       extension: .py
#       format_name: percent
# ---

# %% [markdown]
# # Non-linear Fourier–Padé approximants
#
# S_j/T with the Fourier conditions imposed on sigma_hat_j - S_j/T itself.
# They are found as fixed points of a map on interpolation nodes in Delta_0.

# %%
import numpy as np

from fourier_pade import fixed_point_solve, reference_system
from fourier_pade.nonlinear_fp import omega_polynomial, residual_check

ref = reference_system()
a = fixed_point_solve(ref, (4, 3))
print("node displacement per iteration:", ["%.1e" % d for d in a.trace])
print("Fourier residual:", residual_check(a, ref))

# %% [markdown]
# At the fixed point the zeros of Omega_j reproduce the node sets.

# %%
for j in (1, 2):
    w = np.sort(omega_polynomial(a.mp, ref, j).zeros)
    print(j, np.max(np.abs(w - a.node_sets[j - 1].nodes)))

# %% [markdown]
# Damping slows the iteration but does not change the limit.

# %%
b = fixed_point_solve(ref, (4, 3), damping=0.5)
print(len(a.trace), len(b.trace), np.max(np.abs(a.T.coeffs - b.T.coeffs)))
