# ---
# jupyter:
#   jupytext:
#     formats: py:percent
#     text_representation:
#       extension: .py
#       format_name: percent
# ---

# %% [markdown]
# # Zero distributions and convergence rates
#
# Along the ray p = (1/2, 1/2) the zero-counting measures of Q_{n,j} and of the
# node polynomials approach the equilibrium components, and the n-th root of
# the error approaches G_j (linear) or H_j (non-linear).

# %%
from fourier_pade import RaySchedule, reference_system
from fourier_pade.asymptotics import equilibrium_for, rate_experiment, zero_distribution_experiment

ref = reference_system()
sched = RaySchedule((0.5, 0.5), (4, 8, 12, 16, 20, 24))
print(sched.multi_indices())

# %%
eq, C = equilibrium_for(ref, sched.p, "linear", grid_size=800)
rep = zero_distribution_experiment(ref, sched, "linear", equilibrium=eq)
for row in rep.rows:
    print(row)

# %% [markdown]
# Fitted rates over the top half of the schedule versus theory.

# %%
rates = rate_experiment(ref, sched, "nonlinear", [5.0, -5.0, 2j, 0.5j, 1.5 + 1j, 4 + 3j])
for (j, z), (fit, theo, dev) in sorted(rates.fits.items(), key=lambda kv: (kv[0][0], kv[0][1].real)):
    print(j, z, round(fit, 5), round(theo, 5), f"{dev:.2%}")
print(rates.divergence_note)

# %% [markdown]
# The normalizing constants trend toward exp(-omega_j/p_j) but are far from it
# at these sizes.

# %%
sizes, vals = rates.gamma_series(1)
print(list(zip(sizes, vals.round(4))), rates.gamma_limit[1], rates.gamma_trend_monotone(1))
