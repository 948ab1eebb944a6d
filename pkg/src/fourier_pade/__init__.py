"""Linear and non-linear Fourier–Padé approximants for Angelesco systems of Markov functions."""

from .asymptotics import RaySchedule, RateReport, cdf_distance, rate_experiment, zero_counting_measure, \
    zero_distribution_experiment
from .equilibrium import (DiscreteMeasure, EquilibriumSolution, InteractionMatrix, RayVector,
                          interaction_matrix_linear, interaction_matrix_nonlinear, rate_function, solve_equilibrium)
from .errors import (ConfigError, ConvergenceError, DegeneracyError, DegreeCeilingError, DomainError, FPError,
                     FormulaRegressionError, PoleError, QuadratureError, StructureError)
from .linear_fp import LinearFPApproximant, solve_linear_fp
from .measures import AngelescoSystem, Interval, MeasureSpec, gauss_quadrature, markov_transform, reference_system
from .multipoint_pade import MultiIndex, MultipointPade, NodeSet, solve_multipoint
from .nonlinear_fp import NonlinearFPApproximant, fixed_point_solve
from .orthopoly import PolynomialRep, RecurrenceTable, recurrence_coefficients

__version__ = "0.1.0"
