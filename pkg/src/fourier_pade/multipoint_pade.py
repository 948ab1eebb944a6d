"""Simultaneous multipoint Padé approximants interpolating the Markov
functions at prescribed nodes on ``Delta_0``.

For node polynomials ``w_j`` (degree ``|n|+n_j``) the common denominator
``q`` (monic, degree ``|n|``) satisfies

    int x^k q(x)/w_j(x) d sigma_j(x) = 0,   k < n_j,

and factors as ``q = q_j * qt_j`` with ``q_j`` collecting the ``n_j`` zeros in
``Delta_j``. Each ``q_j`` is then the monic orthogonal polynomial of the
varying measure ``|qt_j|/|w_j| d sigma_j``, which is how the default solver
finds it (block Gauss–Seidel over branches). The numerators ``p_j`` are the
degree ``|n|-1`` Hermite interpolants of ``q sigma_hat_j`` at the nodes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Sequence

import numpy as np
from numpy.polynomial import chebyshev as cheb
from scipy.special import logsumexp

from ._recurrence import op_zeros
from .errors import (DEGREE_CEILING, ConvergenceError, DegeneracyError, DegreeCeilingError, PoleError,
                     StructureError)
from .measures import (AngelescoSystem, Interval, adaptive_integral, gauss_quadrature, markov_transform,
                       min_gap, required_order)
from .orthopoly import PolynomialRep, poly_zeros


# -- multi-indices and node sets -------------------------------------------

@dataclass(frozen=True)
class MultiIndex:
    """Nonnegative integer multi-index ``n = (n_1, ..., n_m)``."""

    n: tuple

    def __post_init__(self):
        vals = tuple(int(v) for v in self.n)
        if any(v != w for v, w in zip(vals, self.n)) or any(v < 0 for v in vals) or not vals:
            raise ValueError(f"multi-index entries must be nonnegative integers, got {self.n}")
        object.__setattr__(self, "n", vals)

    @property
    def size(self) -> int:
        return sum(self.n)

    @property
    def m(self) -> int:
        return len(self.n)

    def __getitem__(self, j: int) -> int:
        """1-based access: ``n[j]`` is ``n_j``."""
        return self.n[j - 1]

    def __iter__(self):
        return iter(self.n)

    def __len__(self) -> int:
        return len(self.n)

    def nodes_count(self, j: int) -> int:
        """``|n| + n_j``."""
        return self.size + self[j]


def as_multi_index(n) -> MultiIndex:
    return n if isinstance(n, MultiIndex) else MultiIndex(tuple(n))


def check_multi_index(system: AngelescoSystem, n) -> MultiIndex:
    n = as_multi_index(n)
    if n.m != system.m:
        raise ValueError(f"multi-index has {n.m} entries but the system has {system.m} branches")
    if n.size > DEGREE_CEILING:
        raise DegreeCeilingError(f"|n| = {n.size} exceeds the supported ceiling {DEGREE_CEILING}")
    return n


@dataclass(frozen=True, eq=False)
class NodeSet:
    """Interpolation nodes on ``Delta_0`` for branch ``j`` (1-based)."""

    j: int
    nodes: np.ndarray

    def __post_init__(self):
        x = np.array(self.nodes, dtype=float).ravel()
        if x.size > 1 and np.any(np.diff(x) < 0):
            raise ValueError("node set must be sorted nondecreasing")
        x.setflags(write=False)
        object.__setattr__(self, "nodes", x)

    def polynomial(self, interval: Interval) -> PolynomialRep:
        return PolynomialRep.from_roots(self.nodes, interval)


@dataclass(frozen=True, eq=False)
class MultipointPade:
    """Solved multipoint Padé approximant.

    ``splits[j-1] = (q_j, qt_j)``; ``zeros[j-1]`` are the zeros of ``q`` in
    ``Delta_j``.
    """

    n: MultiIndex
    q: PolynomialRep
    p: tuple
    node_sets: tuple
    splits: tuple
    zeros: tuple
    analyticity_residuals: tuple = ()
    orthogonality_residual: float = 0.0
    method: str = "iterative"
    sweeps: int = 0

    @property
    def m(self) -> int:
        return self.n.m


# -- quadrature plumbing ----------------------------------------------------

def _branch_order(system: AngelescoSystem, n: MultiIndex, j: int) -> int:
    spec = system.branch(j)
    gap = spec.interval.gap(system.sigma0.interval)
    deg = n.size + n.nodes_count(j)
    return max(required_order(deg, spec.interval, gap), 2 * n.size + 40) + 16


def _sigma0_order(system: AngelescoSystem, n: MultiIndex) -> int:
    kmax = max(n.nodes_count(j) for j in range(1, n.m + 1))
    return max(required_order(kmax, system.sigma0.interval, min_gap(system)), 2 * kmax + 40)


def _log_abs_prod(x: np.ndarray, roots: np.ndarray) -> np.ndarray:
    if roots.size == 0:
        return np.zeros(np.shape(x))
    return np.sum(np.log(np.abs(np.asarray(x)[..., None] - roots)), axis=-1)


def _others(zeros: Sequence[np.ndarray], j: int) -> np.ndarray:
    rest = [z for k, z in enumerate(zeros, start=1) if k != j]
    return np.concatenate(rest) if rest else np.zeros(0)


# -- denominator solvers ----------------------------------------------------

def _initial_zeros(system: AngelescoSystem, n: MultiIndex) -> list:
    out = []
    for j in range(1, n.m + 1):
        nj = n[j]
        out.append(np.array(gauss_quadrature(system.branch(j), nj).nodes) if nj else np.zeros(0))
    return out


def _solve_q_iterative(system, n, nodes, init=None, tol=1e-14, max_sweeps=500):
    m = n.m
    Z = [np.array(z, float) for z in init] if init is not None else _initial_zeros(system, n)
    quads = [gauss_quadrature(system.branch(j), _branch_order(system, n, j)) for j in range(1, m + 1)]
    logw = [_log_abs_prod(quads[j - 1].nodes, nodes[j - 1]) for j in range(1, m + 1)]
    scale = max(1.0, max(max(abs(iv.lo), abs(iv.hi)) for iv in system.intervals))
    active = [j for j in range(1, m + 1) if n[j] > 0]
    sweeps = 0
    if len(active) == 0:
        return Z, 0
    for sweeps in range(1, max_sweeps + 1):
        change = 0.0
        for j in active:
            q = quads[j - 1]
            lw = _log_abs_prod(q.nodes, _others(Z, j)) - logw[j - 1]
            new = op_zeros(q.nodes, q.weights * np.exp(lw - lw.max()), n[j])
            change = max(change, float(np.max(np.abs(new - Z[j - 1]))))
            Z[j - 1] = new
        if len(active) == 1:
            break
        if change <= tol * scale:
            break
    else:
        raise ConvergenceError(f"block Gauss-Seidel for the denominator did not converge in {max_sweeps} sweeps")
    return Z, sweeps


def _moment_matrix(system, n, nodes):
    hull = system.hull
    rows = []
    for j in range(1, n.m + 1):
        if n[j] == 0:
            continue
        spec = system.branch(j)
        q = gauss_quadrature(spec, _branch_order(system, n, j))
        lw = _log_abs_prod(q.nodes, nodes[j - 1])
        sign = np.sign(np.prod(np.sign(q.nodes[:, None] - nodes[j - 1]), axis=1)) if nodes[j - 1].size else 1.0
        wt = q.weights * sign * np.exp(-(lw - lw.min()))
        Tj = cheb.chebvander(spec.interval.to_unit(q.nodes), n[j] - 1)
        B = cheb.chebvander(hull.to_unit(q.nodes), n.size)
        M = (Tj * wt[:, None]).T @ B
        rows.append(M / np.max(np.abs(M), axis=1, keepdims=True))
    return np.vstack(rows)


def null_vector(M: np.ndarray, rank_tol: float = 64 * np.finfo(float).eps) -> tuple[np.ndarray, np.ndarray]:
    """Right singular vector of the smallest singular value of ``M``.

    Raises when the numerical null space has dimension two or more.
    """
    _, s, vt = np.linalg.svd(M)
    full = np.concatenate([s, np.zeros(M.shape[1] - s.size)])
    if full.size >= 2 and full[-2] <= rank_tol * full[0]:
        raise DegeneracyError(f"null space dimension >= 2 (singular values {full[-2]:.3e}, {full[-1]:.3e} "
                              f"vs {full[0]:.3e}); check the quadrature")
    return vt[-1], full


def classify_zeros(zeros: np.ndarray, system: AngelescoSystem, n: MultiIndex, boundary_tol: float = 1e-12) -> list:
    """Split real zeros by interval; enforces exactly ``n_j`` inside each ``Delta_j``."""
    zeros = np.sort(np.asarray(zeros, float))
    out = []
    used = 0
    for j in range(1, n.m + 1):
        iv = system.branch(j).interval
        near = (np.abs(zeros - iv.lo) <= boundary_tol * iv.length) | (np.abs(zeros - iv.hi) <= boundary_tol * iv.length)
        if np.any(near):
            raise StructureError(f"zero {zeros[near][0]!r} is within {boundary_tol} of an endpoint of Delta_{j}; "
                                 "classification is ambiguous")
        inside = zeros[iv.contains(zeros, closed=False)]
        if inside.size != n[j]:
            raise StructureError(f"denominator has {inside.size} zeros in Delta_{j}, expected {n[j]}")
        out.append(inside)
        used += inside.size
    if used != zeros.size:
        raise StructureError(f"denominator has {zeros.size - used} zeros outside the intervals Delta_j")
    return out


# -- numerators -------------------------------------------------------------

def _hermite_numerator(system, n, j, q: PolynomialRep, nodes: np.ndarray) -> tuple[PolynomialRep, float]:
    iv0 = system.sigma0.interval
    N = n.size
    K = nodes.size
    if N == 0:
        return PolynomialRep(iv0, np.zeros(1)), 0.0
    spec = system.branch(j)
    scale = max(iv0.length, 1.0)
    uniq, mult = [], []
    for x in nodes:
        if uniq and abs(x - uniq[-1]) <= 1e-14 * scale:
            mult[-1] += 1
        else:
            uniq.append(float(x))
            mult.append(1)
    A = np.zeros((K, K))
    rhs = np.zeros(K)
    eye = np.eye(K)
    row = 0
    for u, r in zip(uniq, mult):
        t = iv0.to_unit(u)
        sig = [markov_transform(spec, u, derivative=d) for d in range(r)]
        qd = [q(u) if i == 0 else q.deriv(i)(u) for i in range(r)]
        for d in range(r):
            for k in range(K):
                A[row, k] = cheb.chebval(t, cheb.chebder(eye[k], d)) / iv0.half_length**d if d else cheb.chebval(t, eye[k])
            rhs[row] = sum(comb(d, i) * qd[i] * sig[d - i] for i in range(d + 1))
            row += 1
    c = np.linalg.solve(A, rhs)
    resid = float(np.max(np.abs(c[N:])) / np.max(np.abs(c))) if K > N else 0.0
    return PolynomialRep(iv0, c[:N]), resid


def split_factors(zeros: Sequence[np.ndarray], j: int, interval: Interval) -> tuple[PolynomialRep, PolynomialRep]:
    return (PolynomialRep.from_roots(zeros[j - 1], interval),
            PolynomialRep.from_roots(_others(zeros, j), interval))


def _orthogonality_residual(system, n, zeros, nodes) -> float:
    worst = 0.0
    q_all = np.concatenate(zeros) if zeros else np.zeros(0)
    for j in range(1, n.m + 1):
        if n[j] == 0:
            continue
        spec = system.branch(j)
        qd = gauss_quadrature(spec, _branch_order(system, n, j))
        lw = _log_abs_prod(qd.nodes, q_all) - _log_abs_prod(qd.nodes, nodes[j - 1])
        sgn = np.prod(np.sign(qd.nodes[:, None] - q_all), axis=1) * (
            np.prod(np.sign(qd.nodes[:, None] - nodes[j - 1]), axis=1) if nodes[j - 1].size else 1.0)
        f = sgn * np.exp(lw - lw.max()) * qd.weights
        T = cheb.chebvander(spec.interval.to_unit(qd.nodes), n[j] - 1)
        worst = max(worst, float(np.max(np.abs(f @ T)) / np.sum(np.abs(f))))
    return worst


def solve_multipoint(system: AngelescoSystem, n, node_sets: Sequence, method: str = "iterative",
                     initial_zeros=None, tol: float = 1e-14) -> MultipointPade:
    """Multipoint Padé approximant with the given node sets.

    ``node_sets`` is a sequence of :class:`NodeSet` (or arrays), one per branch,
    of length ``|n| + n_j`` inside ``Delta_0``. ``method`` is ``"iterative"``
    (varying-measure OPs, default) or ``"moment"`` (SVD null vector).
    """
    n = check_multi_index(system, n)
    iv0 = system.sigma0.interval
    nodes = []
    for j, ns in enumerate(node_sets, start=1):
        x = np.sort(np.asarray(ns.nodes if isinstance(ns, NodeSet) else ns, dtype=float).ravel())
        if x.size != n.nodes_count(j):
            raise ValueError(f"node set {j} has {x.size} nodes, expected |n|+n_j = {n.nodes_count(j)}")
        if np.any(~iv0.contains(x)):
            raise ValueError(f"node set {j} has nodes outside Delta_0")
        nodes.append(x)
    if len(nodes) != n.m:
        raise ValueError(f"expected {n.m} node sets, got {len(nodes)}")

    sweeps = 0
    if n.size == 0:
        zeros = [np.zeros(0) for _ in range(n.m)]
    elif method == "iterative":
        zeros, sweeps = _solve_q_iterative(system, n, nodes, init=initial_zeros, tol=tol)
    elif method == "moment":
        v, _ = null_vector(_moment_matrix(system, n, nodes))
        qm = PolynomialRep(system.hull, v).monic()
        zeros = classify_zeros(poly_zeros(qm), system, n)
    else:
        raise ValueError(f"unknown method {method!r}")

    hull = system.hull
    q = PolynomialRep.from_roots(np.concatenate(zeros) if zeros else np.zeros(0), hull)
    ps, res = [], []
    for j in range(1, n.m + 1):
        pj, rj = _hermite_numerator(system, n, j, q, nodes[j - 1])
        ps.append(pj)
        res.append(rj)
    splits = tuple(split_factors(zeros, j, hull) for j in range(1, n.m + 1))
    return MultipointPade(
        n=n, q=q, p=tuple(ps), node_sets=tuple(NodeSet(j, nodes[j - 1]) for j in range(1, n.m + 1)),
        splits=splits, zeros=tuple(np.asarray(z) for z in zeros), analyticity_residuals=tuple(res),
        orthogonality_residual=_orthogonality_residual(system, n, zeros, nodes), method=method, sweeps=sweeps,
    )


def split_denominator(mp: MultipointPade, j: int) -> tuple[PolynomialRep, PolynomialRep]:
    """``(q_j, qt_j)`` with ``q = q_j * qt_j`` and ``q_j`` the zeros in ``Delta_j``."""
    return mp.splits[j - 1]


# -- remainder identity -----------------------------------------------------

def remainder_integral(system: AngelescoSystem, zeros: Sequence[np.ndarray], j: int, nodes: np.ndarray, z,
                       rtol: float = 1e-12):
    """Integral side of the remainder identity

        w(z)/(q_j(z)^2 qt_j(z)) * int q_j(x)^2/(z-x) * qt_j(x)/w(x) d sigma_j(x)

    evaluated in log-scaled form (no overflow at high degree).
    """
    spec = system.branch(j)
    zj = np.asarray(zeros[j - 1], float)
    zo = _others(zeros, j)
    nodes = np.asarray(nodes, float)
    z_arr = np.asarray(z)
    zc = np.atleast_1d(z_arr).astype(complex).ravel()
    if np.any(spec.interval.distance(zc) <= 0):
        raise PoleError("evaluation point on the support of sigma_j")
    sgn_nodes = lambda x: (np.prod(np.sign(x[:, None] - zo), axis=1) if zo.size else 1.0) * (
        np.prod(np.sign(x[:, None] - nodes), axis=1) if nodes.size else 1.0)

    # scale by the maximum of |q_j^2 qt_j / w| on a fine rule
    probe = gauss_quadrature(spec, 64).nodes
    lmax = float(np.max(2 * _log_abs_prod(probe, zj) + _log_abs_prod(probe, zo) - _log_abs_prod(probe, nodes)))

    def f(x):
        la = 2 * _log_abs_prod(x, zj) + _log_abs_prod(x, zo) - _log_abs_prod(x, nodes) - lmax
        return (sgn_nodes(x) * np.exp(la))[None, :] / (zc[:, None] - x[None, :])

    deg = 2 * zj.size + zo.size + nodes.size
    gap = spec.interval.gap(system.sigma0.interval)
    start = required_order(deg, spec.interval, gap, digits=14)
    dz = float(np.min(spec.interval.distance(zc)))
    start = max(start, required_order(0, spec.interval, dz, digits=14) // 2)
    integral = adaptive_integral(spec, f, start_order=start, rtol=rtol)

    def logc(roots):
        if roots.size == 0:
            return np.zeros(zc.size, complex)
        with np.errstate(divide="ignore"):
            return np.sum(np.log(zc[:, None] - roots), axis=1)

    pref = logc(nodes) - 2 * logc(zj) - logc(zo) + lmax
    val = np.exp(pref) * integral
    if not np.iscomplexobj(z_arr):
        val = val.real
    return val.reshape(z_arr.shape) if z_arr.ndim else val[0]


def _check_pole(q: PolynomialRep, z: np.ndarray) -> None:
    if q.zeros is None or q.zeros.size == 0:
        return
    d = np.min(np.abs(np.atleast_1d(z)[:, None] - q.zeros[None, :]), axis=1)
    if np.any(d <= 1e-12 * max(1.0, float(np.max(np.abs(q.zeros))))):
        raise PoleError("evaluation point at a zero of the denominator")


def direct_remainder(system: AngelescoSystem, q: PolynomialRep, p: PolynomialRep, j: int, z):
    """``sigma_hat_j(z) - p(z)/q(z)``."""
    zc = np.atleast_1d(np.asarray(z))
    _check_pole(q, zc)
    return markov_transform(system.branch(j), z) - p(z) / q(z)


def remainder_identity_residual(mp: MultipointPade, system: AngelescoSystem, j: int, z):
    """Both sides ``(direct, integral)`` of the remainder identity at ``z``."""
    direct = direct_remainder(system, mp.q, mp.p[j - 1], j, z)
    integral = remainder_integral(system, mp.zeros, j, mp.node_sets[j - 1].nodes, z)
    return direct, integral


# -- node map on Delta_0 ----------------------------------------------------

def node_density_log(system: AngelescoSystem, zeros: Sequence[np.ndarray], nodes: np.ndarray, j: int,
                     t: np.ndarray, kind: str, branch_order: int) -> np.ndarray:
    """``log rho_j(t)`` for the node map.

    ``I(t) = int q_j(x)^2/|t-x| * |qt_j(x)|/|w(x)| d sigma_j(x)``;
    linear: ``rho = I/|q_j(t)|``; nonlinear: ``rho = I/(q_j(t)^2 |qt_j(t)|)``.
    Raises :class:`StructureError` when the signed density would change sign.
    """
    spec = system.branch(j)
    qd = gauss_quadrature(spec, branch_order)
    x = qd.nodes
    zj = np.asarray(zeros[j - 1], float)
    zo = _others(zeros, j)
    s_int = (np.prod(np.sign(x[:, None] - zo), axis=1) if zo.size else np.ones(x.size)) * (
        np.prod(np.sign(x[:, None] - nodes), axis=1) if nodes.size else 1.0)
    if np.any(s_int != s_int[0]):
        raise StructureError(f"qt_{j}/w_{j} changes sign on Delta_{j}")
    if kind == "nonlinear" and zo.size:
        s0 = np.prod(np.sign(t[:, None] - zo), axis=1)
        if np.any(s0 != s0[0]):
            raise StructureError(f"qt_{j} changes sign on Delta_0")
    la = np.log(qd.weights) + 2 * _log_abs_prod(x, zj) + _log_abs_prod(x, zo) - _log_abs_prod(x, nodes)
    logI = logsumexp(la[None, :] - np.log(np.abs(t[:, None] - x[None, :])), axis=1)
    if kind == "linear":
        return logI - _log_abs_prod(t, zj)
    if kind == "nonlinear":
        return logI - 2 * _log_abs_prod(t, zj) - _log_abs_prod(t, zo)
    raise ValueError(f"unknown kind {kind!r}")


def node_map(system: AngelescoSystem, mp: MultipointPade, kind: str, order0: int | None = None) -> list:
    """New node sets: zeros of the degree ``|n|+n_j`` OPs of ``rho_j d sigma_0``."""
    n = mp.n
    if order0 is None:
        order0 = _sigma0_order(system, n)
    q0 = gauss_quadrature(system.sigma0, order0)
    out = []
    for j in range(1, n.m + 1):
        lr = node_density_log(system, mp.zeros, mp.node_sets[j - 1].nodes, j, q0.nodes, kind,
                              _branch_order(system, n, j))
        out.append(op_zeros(q0.nodes, q0.weights * np.exp(lr - lr.max()), n.nodes_count(j)))
    return out


@dataclass
class FixedPointResult:
    mp: MultipointPade
    nodes: list
    trace: list = field(default_factory=list)
    damping_changes: list = field(default_factory=list)
    start: list = field(default_factory=list)
    converged_displacement: float = 0.0


def sigma0_start_nodes(system: AngelescoSystem, n: MultiIndex) -> list:
    """Zeros of the ``sigma0`` orthonormal polynomial of degree ``|n|+n_j``."""
    return [np.array(gauss_quadrature(system.sigma0, n.nodes_count(j)).nodes) if n.nodes_count(j) else np.zeros(0)
            for j in range(1, n.m + 1)]


def node_fixed_point(system: AngelescoSystem, n, kind: str, damping: float = 1.0, max_iter: int = 200,
                     tol: float = 1e-10, start=None) -> FixedPointResult:
    """Iterate ``X -> Y`` (multipoint solve, then node map) to a fixed point.

    Oscillation (displacement growing three iterations in a row) halves the
    damping; each change is recorded. Raises :class:`ConvergenceError` with the
    displacement trace if ``max_iter`` is exhausted.
    """
    n = check_multi_index(system, n)
    if not 0 < damping <= 1:
        raise ValueError("damping must lie in (0, 1]")
    X = [np.sort(np.asarray(s, float)) for s in start] if start is not None else sigma0_start_nodes(system, n)
    start_nodes = [x.copy() for x in X]
    trace: list = []
    changes: list = []
    if n.size == 0:
        mp = solve_multipoint(system, n, X)
        return FixedPointResult(mp, X, trace, changes, start_nodes, 0.0)
    order0 = _sigma0_order(system, n)
    zeros = None
    rises = 0
    for it in range(max_iter):
        mp = solve_multipoint(system, n, X, initial_zeros=zeros)
        zeros = mp.zeros
        Y = node_map(system, mp, kind, order0)
        disp = max(float(np.max(np.abs(y - x))) for x, y in zip(X, Y))
        trace.append(disp)
        if disp < tol:
            return FixedPointResult(mp, X, trace, changes, start_nodes, disp)
        rises = rises + 1 if len(trace) > 1 and disp > trace[-2] else 0
        if rises >= 3:
            damping *= 0.5
            changes.append((it, damping))
            rises = 0
        X = [np.sort(x + damping * (y - x)) for x, y in zip(X, Y)]
    raise ConvergenceError(f"node fixed point ({kind}) not converged after {max_iter} iterations; "
                           f"last displacement {trace[-1]:.3e}", trace)
