# ---
# jupyter:
#   jupytext:
#     formats: py:percent
#     text_representation:
#       extension: .py
#       format_name: percent
# ---

# %% [markdown]
# # Vector equilibrium problems
#
# The limiting zero distributions solve a constrained energy minimization
# with interaction matrix C1 (linear) or C2 (non-linear). A single interval
# with C = [[2]] gives the arcsine law with constant 2 log 2.

# %%
import math

import numpy as np

from fourier_pade import Interval, InteractionMatrix, reference_system, solve_equilibrium
from fourier_pade.equilibrium import (interaction_matrix_linear, interaction_matrix_nonlinear, principal_minor_check,
                                      rate_function, standard_intervals)

sol = solve_equilibrium(InteractionMatrix([[2.0]]), [Interval(-1, 1)], grid_size=400)
print(sol.constants[0], 2 * math.log(2), sol.kkt_violation)

# %% [markdown]
# Interaction matrices for the ray p = (1/2, 1/2) and their leading minors
# against the closed forms (C1 with the (j+1) factor for orders above m).

# %%
p = (0.5, 0.5)
C1, C2 = interaction_matrix_linear(p), interaction_matrix_nonlinear(p)
print(C1.entries)
print(principal_minor_check(C1, p))
print(principal_minor_check(C2, p))

# %% [markdown]
# Symmetric reference system: mu_1 mirrors mu_2, and the two Delta_0
# components mirror each other (each leans toward its own Delta_j).

# %%
ref = reference_system()
eq = solve_equilibrium(C1, standard_intervals(ref), grid_size=400)
for c in eq.components:
    print(c.grid[0], c.grid[-1], c.grid @ c.masses, c.support().size)

# %% [markdown]
# The theoretical rate G_j(z) = exp((W_j(z) - omega_j)/p_j) is below one off
# the supports.

# %%
z = np.array([5.0, -5.0, 2j, 0.5j])
print(rate_function(eq, C1, p, 2, z))
