# ---
# jupyter:
#   jupytext:
#     formats: py:percent
#     text_representation:
#       extension: .py
#       format_name: percent
# ---

# %% [markdown]
# # Quadrature and orthogonal polynomials
#
# The reference system has a Chebyshev measure on [-1, 1] and Lebesgue
# measures on [-3, -2] and [2, 3]. Every later computation rests on Gauss
# rules and recurrence coefficients for these measures.

# %%
import numpy as np

from fourier_pade import gauss_quadrature, recurrence_coefficients, reference_system
from fourier_pade.measures import MeasureSpec, markov_transform
from fourier_pade.orthopoly import orthonormal_values

ref = reference_system()

# %% [markdown]
# A Gauss rule with N nodes integrates polynomials up to degree 2N-1 exactly.
# For the Chebyshev weight the even moments are pi * C(2k, k) / 4^k.

# %%
from math import comb, pi

q = gauss_quadrature(ref.sigma0, 20)
for k in (0, 2, 10, 38):
    print(k, q.integrate(q.nodes**k), pi * comb(k, k // 2) / 4 ** (k // 2))

# %% [markdown]
# Orthonormal polynomials via the three-term recurrence; the Gram matrix up
# to degree 40 should be the identity.

# %%
for spec in (ref.sigma0, *ref.sigmas):
    t = recurrence_coefficients(spec, 40)
    g = gauss_quadrature(spec, 64)
    L = orthonormal_values(t, 40, g.nodes)
    print(spec.interval, np.max(np.abs((L * g.weights) @ L.T - np.eye(41))))

# %% [markdown]
# Markov functions: for the Lebesgue measure on [2, 3],
# sigma_hat(z) = log((z - 2) / (z - 3)).

# %%
z = np.array([0.5j, -1.0, 5.0, 2.5 + 0.1j])
print(markov_transform(MeasureSpec.jacobi(2.0, 3.0), z))
print(np.log((z - 2) / (z - 3)))
