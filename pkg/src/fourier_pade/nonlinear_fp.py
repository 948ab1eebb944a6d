"""Non-linear Fourier–Padé approximants.

``S_j/T`` with ``T`` monic of degree ``|n|`` and

    c_k(sigma_hat_j - S_j/T) = 0,   k = 0, ..., |n| + n_j - 1.

They are constructed as fixed points of a node map on ``Delta_0``: given
interpolation nodes ``X_j``, solve the multipoint Padé problem, then take the
zeros of the degree ``|n|+n_j`` orthogonal polynomial of ``rho_j d sigma_0``
with

    rho_j(y) = 1/(q_j(y)^2 |qt_j(y)|) * int q_j(x)^2/|y-x| |qt_j(x)|/|w_j(x)| d sigma_j(x)

as new nodes. At a fixed point ``T = q`` and ``S_j = p_j``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._recurrence import op_zeros
from .linear_fp import sign_changes
from .measures import AngelescoSystem, gauss_quadrature, markov_transform, required_order
from .multipoint_pade import (MultiIndex, MultipointPade, _branch_order, _orthogonality_residual, _sigma0_order,
                              check_multi_index, direct_remainder, node_density_log, node_fixed_point,
                              remainder_integral, solve_multipoint)
from .orthopoly import PolynomialRep, orthonormal_values, recurrence_coefficients


@dataclass(frozen=True, eq=False)
class NonlinearFPApproximant:
    """Fixed point of the node map.

    ``trace`` holds the max node displacement per iteration;
    ``damping_changes`` lists ``(iteration, new damping)`` pairs; ``start`` is
    the initial node configuration.
    """

    n: MultiIndex
    T: PolynomialRep
    S: tuple
    node_sets: tuple
    splits: tuple
    zeros: tuple
    trace: list = field(default_factory=list)
    damping_changes: list = field(default_factory=list)
    start: tuple = ()
    mp: MultipointPade | None = None


def omega_polynomial(mp: MultipointPade, system: AngelescoSystem, j: int, order0: int | None = None) -> PolynomialRep:
    """Monic ``Omega_j`` of degree ``|n|+n_j``, orthogonal on ``Delta_0`` w.r.t. ``rho_j d sigma_0``.

    Carries its zeros. Raises :class:`StructureError` if the signed density
    changes sign.
    """
    n = mp.n
    K = n.nodes_count(j)
    iv0 = system.sigma0.interval
    if K == 0:
        return PolynomialRep.constant(1.0, iv0)
    q0 = gauss_quadrature(system.sigma0, order0 or _sigma0_order(system, n))
    lr = node_density_log(system, mp.zeros, mp.node_sets[j - 1].nodes, j, q0.nodes, "nonlinear",
                          _branch_order(system, n, j))
    return PolynomialRep.from_roots(op_zeros(q0.nodes, q0.weights * np.exp(lr - lr.max()), K), iv0)


def node_density(mp: MultipointPade, system: AngelescoSystem, j: int, t) -> np.ndarray:
    """``rho_j(t)`` (positive) at points of ``Delta_0``."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    return np.exp(node_density_log(system, mp.zeros, mp.node_sets[j - 1].nodes, j, t, "nonlinear",
                                   _branch_order(system, mp.n, j)))


def _from_mp(mp: MultipointPade, trace=(), changes=(), start=()) -> NonlinearFPApproximant:
    return NonlinearFPApproximant(n=mp.n, T=mp.q, S=mp.p, node_sets=mp.node_sets, splits=mp.splits, zeros=mp.zeros,
                                  trace=list(trace), damping_changes=list(changes), start=tuple(start), mp=mp)


def fixed_point_solve(system: AngelescoSystem, n, damping: float = 1.0, max_iter: int = 200, tol: float = 1e-10,
                      start=None) -> NonlinearFPApproximant:
    """Non-linear approximant by damped fixed-point iteration of the node map.

    Starts from the zeros of the ``sigma0`` orthonormal polynomials of degree
    ``|n|+n_j`` unless ``start`` (one node array per branch) is given. Raises
    :class:`~fourier_pade.errors.ConvergenceError` carrying the trace if
    ``max_iter`` is exhausted.
    """
    n = check_multi_index(system, n)
    res = node_fixed_point(system, n, "nonlinear", damping=damping, max_iter=max_iter, tol=tol, start=start)
    return _from_mp(res.mp, res.trace, res.damping_changes, res.start)


def from_nodes(system: AngelescoSystem, n, node_sets) -> NonlinearFPApproximant:
    """Candidate approximant for given nodes (no iteration); useful for sensitivity checks."""
    mp = solve_multipoint(system, n, node_sets)
    return _from_mp(mp)


def residual_check(approx: NonlinearFPApproximant, system: AngelescoSystem) -> float:
    """``max_{j, k < |n|+n_j} |c_k(sigma_hat_j - S_j/T)|`` by quadrature on ``Delta_0``."""
    n = approx.n
    worst = 0.0
    for j in range(1, n.m + 1):
        K = n.nodes_count(j)
        if n.size == 0 or K == 0:
            continue
        spec = system.branch(j)
        table = recurrence_coefficients(system.sigma0, K - 1)
        S, T = approx.S[j - 1], approx.T

        gap = spec.interval.gap(system.sigma0.interval)
        # fixed high order: the integrand is at roundoff level, so doubling cannot settle
        q = gauss_quadrature(system.sigma0, 2 * required_order(K + n.size, system.sigma0.interval, gap))
        x = q.nodes
        c = orthonormal_values(table, K - 1, x) @ ((markov_transform(spec, x) - S(x) / T(x)) * q.weights)
        worst = max(worst, float(np.max(np.abs(c))))
    return worst


def remainder(approx: NonlinearFPApproximant, system: AngelescoSystem, j: int, z, method: str = "direct"):
    """``sigma_hat_j(z) - S_j(z)/T(z)``; ``method="integral"`` uses the node
    polynomial form over ``Delta_j``."""
    if method == "direct":
        return direct_remainder(system, approx.T, approx.S[j - 1], j, z)
    if method == "integral":
        return remainder_integral(system, approx.zeros, j, approx.node_sets[j - 1].nodes, z)
    raise ValueError(f"unknown method {method!r}")


def remainder_on_delta0(approx: NonlinearFPApproximant, system: AngelescoSystem, j: int, t) -> np.ndarray:
    """``sigma_hat_j - S_j/T`` on ``Delta_0`` via the interpolation form
    ``w_j(t)/(q_j(t)^2 qt_j(t)) int ...`` (real ``t`` off ``Delta_j``)."""
    return remainder_integral(system, approx.zeros, j, approx.node_sets[j - 1].nodes, np.asarray(t, float))


def sign_change_points(approx: NonlinearFPApproximant, system: AngelescoSystem, j: int) -> np.ndarray:
    """Sign changes of ``sigma_hat_j - S_j/T`` on ``Delta_0`` (at least ``|n|+n_j``)."""
    K = approx.n.nodes_count(j)
    return sign_changes(lambda t: remainder_on_delta0(approx, system, j, t), system.sigma0.interval, K)


def orthogonality_residuals(approx, system: AngelescoSystem, W: list | None = None) -> float:
    """``max |int T_k(x) T(x)/W_j(x) d sigma_j| / int |T/W_j| d sigma_j`` over ``k < n_j``.

    ``W`` defaults to the node polynomials of the approximant.
    """
    nodes = [np.asarray(w.zeros if isinstance(w, PolynomialRep) else w) for w in W] if W is not None else \
        [ns.nodes for ns in approx.node_sets]
    return _orthogonality_residual(system, approx.n, list(approx.zeros), nodes)
