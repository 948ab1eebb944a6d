"""Linear Fourier–Padé approximants.

For a multi-index ``n`` the denominator ``Q`` (monic, degree ``|n|``) and the
numerators ``P_j`` (degree ``<= |n|-1``) satisfy

    c_k(Q sigma_hat_j - P_j) = 0,   k = 0, ..., |n| + n_j - 1,

where ``c_k(f) = int f l_k d sigma_0``. ``P_j`` is the partial Fourier sum of
``Q sigma_hat_j`` of length ``|n|``, so the conditions on ``Q`` are
``c_k(Q sigma_hat_j) = 0`` for ``|n| <= k < |n| + n_j``.

The default solver exploits that ``Q sigma_hat_j - P_j`` vanishes at
``|n|+n_j`` points of ``Delta_0``: ``Q`` is the multipoint Padé denominator
for those points, and the points are recovered as the zeros of an orthogonal
polynomial on ``Delta_0``; iterating this map converges to the (unique)
approximant. The SVD of the moment matrix is available as ``method="moment"``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import chebyshev as cheb

from .errors import PoleError, StructureError
from .measures import AngelescoSystem, adaptive_integral, gauss_quadrature, markov_transform, required_order
from .multipoint_pade import (MultiIndex, NodeSet, check_multi_index, classify_zeros, direct_remainder,
                              node_fixed_point, null_vector, remainder_integral)
from .orthopoly import (PolynomialRep, orthonormal_cheb_coeffs, orthonormal_values, poly_zeros, psi_values,
                        recurrence_coefficients)


@dataclass(frozen=True, eq=False)
class LinearFPApproximant:
    """Solved linear Fourier–Padé approximant.

    ``fourier_residuals[(j, k)]`` is ``|c_k(Q sigma_hat_j - P_j)|`` relative to
    ``||Q sigma_hat_j||`` in ``L^2(sigma_0)``.
    """

    n: MultiIndex
    Q: PolynomialRep
    P: tuple
    fourier_residuals: dict
    zeros: tuple
    method: str = "iterative"
    node_sets: tuple | None = None
    trace: list = field(default_factory=list)

    @property
    def max_residual(self) -> float:
        return max(self.fourier_residuals.values(), default=0.0)


# -- Fourier coefficients ---------------------------------------------------

def _gap(system: AngelescoSystem, j: int) -> float:
    return system.branch(j).interval.gap(system.sigma0.interval)


def fourier_coefficients_direct(system: AngelescoSystem, Q: PolynomialRep, j: int, k_max: int,
                                rtol: float = 1e-12) -> np.ndarray:
    """``c_0..c_{k_max}`` of ``Q sigma_hat_j`` by outer Gauss quadrature on
    ``Delta_0`` with Markov-function values at the outer nodes."""
    spec = system.branch(j)
    table = recurrence_coefficients(system.sigma0, k_max)

    def f(x):
        return orthonormal_values(table, k_max, x) * (Q(x) * markov_transform(spec, x))

    start = required_order(max(Q.degree, 0) + k_max, system.sigma0.interval, _gap(system, j))
    return adaptive_integral(system.sigma0, f, start_order=start, rtol=rtol)


def fourier_coefficients_exchanged(system: AngelescoSystem, Q: PolynomialRep, j: int, ks,
                                   rtol: float = 1e-12) -> np.ndarray:
    """``c_k(Q sigma_hat_j) = -int Q(x) psi_k(x) d sigma_j(x)``, valid for ``k >= deg Q``."""
    ks = np.atleast_1d(np.asarray(ks, dtype=int))
    if ks.size == 0:
        return np.zeros(0)
    if ks.min() < Q.degree:
        raise ValueError("exchanged form needs k >= deg Q")
    spec = system.branch(j)
    kmax = int(ks.max())

    def f(x):
        return -psi_values(system.sigma0, kmax, x)[ks] * Q(x)

    start = max(2 * max(Q.degree, 0) + 40, 64)
    return adaptive_integral(spec, f, start_order=start, rtol=rtol)


def fourier_coefficient(system: AngelescoSystem, Q: PolynomialRep, j: int, k: int, method: str = "auto") -> float:
    """``c_k(Q sigma_hat_j) = int Q(x) sigma_hat_j(x) l_k(x) d sigma_0(x)``.

    ``method``: ``"direct"`` (outer quadrature on ``Delta_0``), ``"exchanged"``
    (integral over ``Delta_j``, free of cancellation, needs ``k >= deg Q``) or
    ``"auto"`` (exchanged when valid).
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    system.branch(j)
    if method == "auto":
        method = "exchanged" if k >= Q.degree else "direct"
    if method == "direct":
        return float(fourier_coefficients_direct(system, Q, j, k)[k])
    if method == "exchanged":
        return float(fourier_coefficients_exchanged(system, Q, j, [k])[0])
    raise ValueError(f"unknown method {method!r}")


def _l2_norm(system: AngelescoSystem, Q: PolynomialRep, j: int) -> float:
    spec = system.branch(j)
    start = required_order(2 * max(Q.degree, 0), system.sigma0.interval, _gap(system, j))
    val = adaptive_integral(system.sigma0, lambda x: (Q(x) * markov_transform(spec, x)) ** 2, start_order=start)
    return float(np.sqrt(val))


def _numerator(system: AngelescoSystem, Q: PolynomialRep, j: int, N: int) -> PolynomialRep:
    iv0 = system.sigma0.interval
    if N == 0:
        return PolynomialRep(iv0, np.zeros(1))
    c = fourier_coefficients_direct(system, Q, j, N - 1)
    C = orthonormal_cheb_coeffs(recurrence_coefficients(system.sigma0, N - 1), N - 1)
    return PolynomialRep(iv0, c @ C)


def _residuals(system: AngelescoSystem, n: MultiIndex, Q: PolynomialRep, P: tuple) -> dict:
    out = {}
    N = n.size
    for j in range(1, n.m + 1):
        K = n.nodes_count(j)
        if K == 0:
            continue
        norm = _l2_norm(system, Q, j)
        if N:
            q0 = gauss_quadrature(system.sigma0, required_order(2 * N, system.sigma0.interval, _gap(system, j)))
            table = recurrence_coefficients(system.sigma0, N - 1)
            cP = orthonormal_values(table, N - 1, q0.nodes) @ (P[j - 1](q0.nodes) * q0.weights)
            cQ = fourier_coefficients_direct(system, Q, j, N - 1)
            for k in range(N):
                out[(j, k)] = abs(cQ[k] - cP[k]) / norm
        ks = np.arange(N, K)
        if ks.size:
            ce = fourier_coefficients_exchanged(system, Q, j, ks)
            for k, v in zip(ks, ce):
                out[(j, int(k))] = abs(v) / norm
    return out


# -- solver -----------------------------------------------------------------

def _moment_denominator(system: AngelescoSystem, n: MultiIndex) -> tuple:
    hull = system.hull
    N = n.size
    rows = []
    for j in range(1, n.m + 1):
        if n[j] == 0:
            continue
        spec = system.branch(j)
        K = n.nodes_count(j)
        q = gauss_quadrature(spec, max(2 * K + 40, required_order(K, spec.interval, _gap(system, j))) * 2)
        psi = psi_values(system.sigma0, K - 1, q.nodes)[N:K]
        B = cheb.chebvander(hull.to_unit(q.nodes), N)
        M = -(psi * q.weights) @ B
        rows.append(M / np.max(np.abs(M), axis=1, keepdims=True))
    v, _ = null_vector(np.vstack(rows))
    Q = PolynomialRep(hull, v).monic()
    zeros = classify_zeros(poly_zeros(Q), system, n)
    return zeros


def solve_linear_fp(system: AngelescoSystem, n, method: str = "iterative", tol: float = 1e-12,
                    max_iter: int = 200) -> LinearFPApproximant:
    """Linear Fourier–Padé approximant ``(Q; P_1..P_m)`` for ``n``.

    ``Q`` is monic of degree ``|n|`` with exactly ``n_j`` zeros inside each
    ``Delta_j``; ``P_j`` is the partial Fourier sum of ``Q sigma_hat_j`` of
    length ``|n|``.
    """
    n = check_multi_index(system, n)
    hull = system.hull
    if n.size == 0:
        Q = PolynomialRep.constant(1.0, hull)
        P = tuple(PolynomialRep(system.sigma0.interval, np.zeros(1)) for _ in range(n.m))
        zeros = tuple(np.zeros(0) for _ in range(n.m))
        return LinearFPApproximant(n, Q, P, _residuals(system, n, Q, P), zeros, method)
    trace: list = []
    node_sets = None
    if method == "iterative":
        res = node_fixed_point(system, n, "linear", tol=tol, max_iter=max_iter)
        zeros = tuple(res.mp.zeros)
        trace = res.trace
        node_sets = tuple(NodeSet(j, x) for j, x in enumerate(res.nodes, start=1))
    elif method == "moment":
        zeros = tuple(_moment_denominator(system, n))
    else:
        raise ValueError(f"unknown method {method!r}")
    Q = PolynomialRep.from_roots(np.concatenate(zeros), hull)
    if Q.degree != n.size:
        raise StructureError(f"deg Q = {Q.degree}, expected {n.size}")
    P = tuple(_numerator(system, Q, j, n.size) for j in range(1, n.m + 1))
    return LinearFPApproximant(n, Q, P, _residuals(system, n, Q, P), zeros, method, node_sets, trace)


# -- remainders and sign changes --------------------------------------------

def remainder_on_delta0(approx: LinearFPApproximant, system: AngelescoSystem, j: int, t) -> np.ndarray:
    """``Q sigma_hat_j - P_j`` on ``Delta_0`` via its Fourier tail.

    Uses ``sum_{i >= K} c_i l_i(t)`` with ``K = |n| + n_j`` in Christoffel–Darboux
    form, which keeps full relative accuracy where direct subtraction loses all
    digits.
    """
    n = approx.n
    K = n.nodes_count(j)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    spec = system.branch(j)
    Q = approx.Q
    if K == 0:
        return Q(t) * markov_transform(spec, t)
    q = gauss_quadrature(spec, required_order(n.size + K, spec.interval, _gap(system, j)) + 32)
    table = recurrence_coefficients(system.sigma0, K)
    psi = psi_values(system.sigma0, K, q.nodes)
    Qx = Q(q.nodes) * q.weights
    a_prev = Qx * psi[K - 1]
    a_cur = Qx * psi[K]
    L = orthonormal_values(table, K, t)
    kern = 1.0 / (q.nodes[None, :] - t[:, None])
    return -table.b[K - 1] * (L[K] * (kern @ a_prev) - L[K - 1] * (kern @ a_cur))


def sign_changes(func, interval, count_hint: int, samples: int | None = None, xtol: float = 1e-13) -> np.ndarray:
    """Sign-change points of ``func`` on ``interval`` by dense sampling and
    vectorized bisection."""
    ns = samples if samples is not None else 64 * max(count_hint, 1)
    t = interval.chebyshev_points(ns)
    f = func(t)
    s = np.sign(f)
    nz = s != 0
    t, s = t[nz], s[nz]
    idx = np.flatnonzero(s[:-1] != s[1:])
    lo, hi = t[idx].copy(), t[idx + 1].copy()
    slo = s[idx].copy()
    width = xtol * max(1.0, interval.length)
    while lo.size and np.max(hi - lo) > width:
        mid = 0.5 * (lo + hi)
        sm = np.sign(func(mid))
        left = sm == slo
        lo = np.where(left, mid, lo)
        hi = np.where(left, hi, mid)
    return 0.5 * (lo + hi)


def sign_change_polynomial(approx: LinearFPApproximant, system: AngelescoSystem, j: int) -> PolynomialRep:
    """Monic ``W_j`` whose zeros are the sign changes of ``Q sigma_hat_j - P_j`` on ``Delta_0``.

    Raises :class:`StructureError` unless exactly ``|n| + n_j`` are found.
    """
    K = approx.n.nodes_count(j)
    iv0 = system.sigma0.interval
    if K == 0:
        return PolynomialRep.constant(1.0, iv0)
    roots = sign_changes(lambda t: remainder_on_delta0(approx, system, j, t), iv0, K)
    if roots.size != K:
        raise StructureError(f"found {roots.size} sign changes of the remainder on Delta_0 for branch {j}, "
                             f"expected {K}")
    return PolynomialRep.from_roots(roots, iv0)


def fourier_remainder(approx: LinearFPApproximant, system: AngelescoSystem, j: int, z, rtol: float = 1e-12):
    """``sigma_hat_j(z) - P_j(z)/Q(z)`` from the Fourier data alone.

    With ``g(z) = int Q(x)/(z-x) d sigma_j(x)`` and ``N = |n|``,
    ``Q sigma_hat_j - P_j = g - sum_{k<N} c_k(g) l_k``, summed in
    Christoffel–Darboux form. Unlike the plain subtraction this does not
    extrapolate ``P_j`` off ``Delta_0``, so it keeps its accuracy near
    ``Delta_j`` where ``Q`` is small.
    """
    N = approx.n.size
    spec = system.branch(j)
    z_arr = np.asarray(z)
    zc = np.atleast_1d(z_arr).astype(complex).ravel()
    if np.any(spec.interval.distance(zc) <= 0):
        raise PoleError("evaluation point on the support of sigma_j")
    Q = approx.Q
    if N == 0:
        val = markov_transform(spec, zc)
    else:
        table = recurrence_coefficients(system.sigma0, N)
        L = orthonormal_values(table, N, zc)

        def f(x):
            psi = psi_values(system.sigma0, N, x)
            Qx = Q(x)
            kern = 1.0 / (x[None, :] - zc[:, None])
            return kern * (L[N][:, None] * (Qx * psi[N - 1])[None, :] - L[N - 1][:, None] * (Qx * psi[N])[None, :])

        dz = float(np.min(spec.interval.distance(zc)))
        start = max(required_order(2 * N, spec.interval, _gap(system, j)),
                    required_order(0, spec.interval, dz, digits=14) // 2)
        val = -table.b[N - 1] * adaptive_integral(spec, f, start_order=start, rtol=rtol) / Q(zc)
    if not np.iscomplexobj(z_arr):
        val = val.real
    return val.reshape(z_arr.shape) if z_arr.ndim else val[0]


def remainder(approx: LinearFPApproximant, system: AngelescoSystem, j: int, z, method: str = "direct"):
    """``sigma_hat_j(z) - P_j(z)/Q(z)``.

    ``method="integral"`` evaluates the equivalent integral over ``Delta_j``
    with the interpolation nodes, which stays accurate when the remainder is
    far below the size of ``sigma_hat_j``. ``method="fourier"`` uses
    :func:`fourier_remainder`.
    """
    if method == "direct":
        return direct_remainder(system, approx.Q, approx.P[j - 1], j, z)
    if method == "fourier":
        return fourier_remainder(approx, system, j, z)
    if method == "integral":
        if approx.node_sets is not None:
            nodes = approx.node_sets[j - 1].nodes
        else:
            W = sign_change_polynomial(approx, system, j)
            nodes = W.zeros
        return remainder_integral(system, approx.zeros, j, nodes, z)
    raise ValueError(f"unknown method {method!r}")
