# ---
# jupyter:
#   jupytext:
#     formats: py:percent
#     text_representation:
#       extension: .py
#       format_name: percent
# ---

# %% [markdown]
# # Linear Fourier–Padé approximants
#
# Q is monic of degree |n| and the first |n| + n_j Fourier coefficients of
# Q sigma_hat_j - P_j vanish. Q has exactly n_j zeros in each Delta_j, and the
# remainder changes sign |n| + n_j times on Delta_0.

# %%
import numpy as np

from fourier_pade import reference_system, solve_linear_fp
from fourier_pade.linear_fp import remainder, sign_change_polynomial

ref = reference_system()
a = solve_linear_fp(ref, (3, 2))
print("zeros in Delta_1:", a.zeros[0])
print("zeros in Delta_2:", a.zeros[1])
print("max relative Fourier residual:", a.max_residual)

# %%
for j in (1, 2):
    W = sign_change_polynomial(a, ref, j)
    print(j, W.degree, np.max(np.abs(W.zeros - a.node_sets[j - 1].nodes)))

# %% [markdown]
# Three ways to evaluate the remainder sigma_hat_j - P_j/Q. Near Delta_j the
# plain subtraction is swamped by roundoff once |n| grows; the Fourier form and
# the integral over Delta_j stay accurate.

# %%
b = solve_linear_fp(ref, (0, 8))
z = np.array([2.5 + 0.2j, 3.15, 1.9 + 0.1j])
for method in ("direct", "fourier", "integral"):
    print(method, np.abs(remainder(b, ref, 2, z, method=method)))

# %% [markdown]
# Along the diagonal the error at a fixed point decays geometrically.

# %%
for k in range(1, 9):
    e = abs(remainder(solve_linear_fp(ref, (k, k)), ref, 2, 5.0, method="integral"))
    print(2 * k, e, e ** (1 / (2 * k)))
