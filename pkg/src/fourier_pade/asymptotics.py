"""Empirical checks of the asymptotic theory.

Zero-counting measures and their Kolmogorov distance to equilibrium
components, and ``|n|``-th root error rates compared against
``G_j``/``H_j = exp((W_j - omega_j)/p_j)``.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .equilibrium import (DiscreteMeasure, EquilibriumSolution, RayVector, interaction_matrix_linear,
                          interaction_matrix_nonlinear, rate_function, solve_equilibrium, standard_intervals)
from .errors import DEGREE_CEILING, DegreeCeilingError, StructureError
from .linear_fp import sign_change_polynomial, solve_linear_fp
from .measures import AngelescoSystem, gauss_quadrature
from .multipoint_pade import _branch_order, _log_abs_prod, _others, remainder_integral
from .nonlinear_fp import fixed_point_solve
from .orthopoly import PolynomialRep, poly_zeros


# -- schedules --------------------------------------------------------------

@dataclass(frozen=True)
class RaySchedule:
    """Sizes ``|n|`` along a ray; ``n_j`` by largest-remainder rounding of ``p_j |n|``."""

    p: RayVector
    sizes: tuple

    def __post_init__(self):
        if not isinstance(self.p, RayVector):
            object.__setattr__(self, "p", RayVector(tuple(self.p)))
        s = tuple(int(v) for v in self.sizes)
        if not s or any(b <= a for a, b in zip(s, s[1:])) or s[0] < 1:
            raise ValueError("schedule sizes must be positive and strictly increasing")
        if s[-1] > DEGREE_CEILING:
            raise DegreeCeilingError(f"schedule size {s[-1]} exceeds the ceiling {DEGREE_CEILING}")
        object.__setattr__(self, "sizes", s)

    def multi_index(self, size: int) -> tuple:
        p = np.asarray(self.p.p)
        raw = p * size
        n = np.floor(raw).astype(int)
        rem = raw - n
        # ties go to the lower branch index
        order = sorted(range(p.size), key=lambda i: (-rem[i], i))
        for i in order[: size - int(n.sum())]:
            n[i] += 1
        return tuple(int(v) for v in n)

    def multi_indices(self) -> list:
        return [self.multi_index(s) for s in self.sizes]

    @property
    def max_deviation(self) -> float:
        p = np.asarray(self.p.p)
        return max(float(np.max(np.abs(np.asarray(self.multi_index(s)) / s - p))) for s in self.sizes)


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("FP_THREADS", "1")))
    except ValueError:
        return 1


def _map(func, items):
    w = _workers()
    if w == 1:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=w) as ex:
        return list(ex.map(func, items))


# -- zero counting measures -------------------------------------------------

def zero_counting_measure(poly, imag_tol: float = 1e-7) -> DiscreteMeasure:
    """Unit measure with mass ``1/deg`` at each zero (repeated zeros merged)."""
    if isinstance(poly, PolynomialRep):
        if poly.degree < 1:
            raise ValueError("zero counting measure needs degree >= 1")
        z = poly_zeros(poly, real=True, imag_tol=imag_tol)
    else:
        z = np.sort(np.asarray(poly, dtype=float))
        if z.size == 0:
            raise ValueError("zero counting measure needs at least one zero")
    u, counts = np.unique(z, return_counts=True)
    return DiscreteMeasure(u, counts / z.size)


def cdf_distance(a: DiscreteMeasure, b: DiscreteMeasure) -> float:
    """Kolmogorov distance ``sup_x |F_a(x) - F_b(x)|`` of two unit measures."""
    for name, mu in (("first", a), ("second", b)):
        if abs(float(np.sum(mu.masses)) - 1.0) > 1e-9:
            raise ValueError(f"{name} measure has mass {np.sum(mu.masses)!r}, expected 1")
    pts = np.union1d(a.grid, b.grid)
    return float(np.max(np.abs(a.cdf(pts) - b.cdf(pts))))


# -- equilibrium for a kind --------------------------------------------------

def equilibrium_for(system: AngelescoSystem, p, kind: str, grid_size: int = 400, tol: float = 1e-4):
    """Equilibrium solve with ``C1`` (linear) or ``C2`` (nonlinear) on the system's intervals."""
    C = interaction_matrix_linear(p) if kind == "linear" else interaction_matrix_nonlinear(p)
    return solve_equilibrium(C, standard_intervals(system), grid_size=grid_size, tol=tol), C


def _approximant(system, n, kind):
    """``(zeros by branch, node arrays)`` for one multi-index."""
    if kind == "linear":
        a = solve_linear_fp(system, n)
        return a, list(a.zeros), [ns.nodes for ns in a.node_sets]
    if kind == "nonlinear":
        a = fixed_point_solve(system, n)
        return a, list(a.zeros), [ns.nodes for ns in a.node_sets]
    raise ValueError(f"unknown kind {kind!r}")


@dataclass
class ZeroDistributionReport:
    """``rows``: dicts with ``kind, j, size, dist_q, dist_w`` (sorted by j, size)."""

    kind: str
    rows: list = field(default_factory=list)

    def series(self, j: int, key: str) -> np.ndarray:
        return np.array([r[key] for r in self.rows if r["j"] == j])

    def trend_ok(self, j: int, key: str, threshold: float | None = None) -> bool:
        s = self.series(j, key)
        ok = s[-1] < s[0]
        return bool(ok and (threshold is None or s[-1] < threshold))


def zero_distribution_experiment(system: AngelescoSystem, schedule: RaySchedule, kind: str,
                                 equilibrium: EquilibriumSolution | None = None, grid_size: int = 800,
                                 sign_changes: str = "nodes") -> ZeroDistributionReport:
    """CDF distances ``nu(Q_j) -> mu_j`` and ``nu(W_j) -> mu_{m+j}`` along the schedule.

    ``W_j`` is the node set of the fixed point. For the linear kind
    ``sign_changes="detected"`` locates it instead from the sign changes of the
    remainder tail on ``Delta_0``; that route loses relative accuracy beyond
    ``|n|`` of about 16.
    """
    m = system.m
    if equilibrium is None:
        equilibrium, _ = equilibrium_for(system, schedule.p, kind, grid_size)

    def one(size):
        n = schedule.multi_index(size)
        a, zeros, nodes = _approximant(system, n, kind)
        rows = []
        for j in range(1, m + 1):
            if kind == "linear" and sign_changes == "detected":
                w = sign_change_polynomial(a, system, j).zeros
            else:
                w = nodes[j - 1]
            dq = cdf_distance(zero_counting_measure(zeros[j - 1]), equilibrium.components[j - 1]) if n[j - 1] else np.nan
            dw = cdf_distance(zero_counting_measure(w), equilibrium.components[m + j - 1])
            rows.append({"kind": kind, "j": j, "size": size, "dist_q": dq, "dist_w": dw})
        return rows

    rows = [r for chunk in _map(one, schedule.sizes) for r in chunk]
    rows.sort(key=lambda r: (r["j"], r["size"]))
    return ZeroDistributionReport(kind, rows)


# -- rates ------------------------------------------------------------------

@dataclass
class RateReport:
    """Error rates along a schedule.

    ``rows``: dicts ``kind, j, z, size, err, emp_rate, theo_rate``.
    ``fits[(j, z)]``: ``(fitted_rate, theo_rate, rel_dev)`` from a log-linear fit
    over the top half of the sizes. ``gamma[(j, size)]``: ``(1/gamma^2)^{1/|n|}``
    (``zeta`` for the non-linear kind); ``gamma_limit[j] = exp(-omega_j/p_j)``.
    """

    kind: str
    rows: list = field(default_factory=list)
    fits: dict = field(default_factory=dict)
    gamma: dict = field(default_factory=dict)
    gamma_limit: dict = field(default_factory=dict)
    truncated: dict = field(default_factory=dict)
    divergence_note: str = ""

    def gamma_series(self, j: int) -> tuple[np.ndarray, np.ndarray]:
        items = sorted((s, v) for (jj, s), v in self.gamma.items() if jj == j)
        return np.array([s for s, _ in items]), np.array([v for _, v in items])

    def gamma_trend_monotone(self, j: int) -> bool:
        """Over the top half: monotone and moving toward the limit."""
        sizes, vals = self.gamma_series(j)
        top = vals[len(vals) // 2:] if len(vals) >= 4 else vals
        d = np.diff(top)
        dist = np.abs(top - self.gamma_limit[j])
        return bool((np.all(d <= 0) or np.all(d >= 0)) and np.all(np.diff(dist) < 0))

    def summary(self) -> dict:
        return {
            "kind": self.kind,
            "fits": [{"j": j, "z_re": float(np.real(z)), "z_im": float(np.imag(z)), "fitted_rate": f, "theo_rate": t,
                      "rel_dev": d} for (j, z), (f, t, d) in sorted(self.fits.items(), key=lambda kv: _zkey(kv[0]))],
            "gamma": [{"j": j, "size": s, "value": v} for (j, s), v in sorted(self.gamma.items())],
            "gamma_limit": {str(j): v for j, v in sorted(self.gamma_limit.items())},
            "truncated": [{"j": j, "z_re": float(np.real(z)), "z_im": float(np.imag(z)), "size": s}
                          for (j, z), s in sorted(self.truncated.items(), key=lambda kv: _zkey(kv[0]))],
            "divergence_note": self.divergence_note,
        }


def _zkey(key):
    j, z = key
    return (j, float(np.real(z)), float(np.imag(z)))


def gamma_constant(system: AngelescoSystem, zeros: Sequence[np.ndarray], nodes: np.ndarray, j: int, n) -> float:
    """``1/gamma^2 = int |Q_j|^2 |Qt_j| / |W_j| d sigma_j``."""
    from .multipoint_pade import as_multi_index

    n = as_multi_index(n)
    q = gauss_quadrature(system.branch(j), _branch_order(system, n, j))
    la = 2 * _log_abs_prod(q.nodes, zeros[j - 1]) + _log_abs_prod(q.nodes, _others(zeros, j)) - \
        _log_abs_prod(q.nodes, nodes)
    return float(np.exp(la) @ q.weights)


def fit_rate(sizes: np.ndarray, errs: np.ndarray) -> float:
    """``exp(slope)`` of the least-squares line through ``(|n|, log err)``."""
    return float(np.exp(np.polyfit(np.asarray(sizes, float), np.log(np.asarray(errs, float)), 1)[0]))


def divergence_points(sol: EquilibriumSolution, C, p, j: int, points) -> np.ndarray:
    """Test points where the theoretical rate exceeds one."""
    pts = np.asarray(points, dtype=complex)
    return pts[rate_function(sol, C, p, j, pts) > 1.0]


def rate_experiment(system: AngelescoSystem, schedule: RaySchedule, kind: str, test_points,
                    branches: Sequence[int] | None = None, equilibrium: EquilibriumSolution | None = None,
                    grid_size: int = 400) -> RateReport:
    """``|err|^{1/|n|}`` at the test points versus ``G_j`` (linear) / ``H_j`` (non-linear).

    ``err`` is evaluated from the integral form of the remainder (stable at
    any size). Sizes where ``err`` underflows ``1e-300`` are dropped and
    flagged in ``truncated``.
    """
    pts = [complex(z) for z in test_points]
    for z in pts:
        if min(float(iv.distance(z)) for iv in system.intervals) <= 0.1:
            raise ValueError(f"test point {z} is within 0.1 of a support interval")
    branches = list(branches) if branches is not None else list(range(1, system.m + 1))
    p = schedule.p
    C = interaction_matrix_linear(p) if kind == "linear" else interaction_matrix_nonlinear(p)
    if equilibrium is None:
        equilibrium, C = equilibrium_for(system, p, kind, grid_size)
    report = RateReport(kind)
    theo = {(j, z): float(rate_function(equilibrium, C, p, j, z)) for j in branches for z in pts}
    for j in branches:
        report.gamma_limit[j] = float(np.exp(-equilibrium.constants[j - 1] / p[j]))

    def one(size):
        n = schedule.multi_index(size)
        _, zeros, nodes = _approximant(system, n, kind)
        out, gam = [], {}
        for j in branches:
            if n[j - 1] == 0:
                continue
            vals = np.abs(remainder_integral(system, zeros, j, nodes[j - 1], np.array(pts, dtype=complex)))
            for z, e in zip(pts, vals):
                out.append((j, z, size, float(e)))
            gam[(j, size)] = gamma_constant(system, zeros, nodes[j - 1], j, n) ** (1.0 / size)
        return out, gam

    for out, gam in _map(one, schedule.sizes):
        report.gamma.update(gam)
        for j, z, size, e in out:
            if not e > 1e-300:
                report.truncated.setdefault((j, z), size)
                continue
            if (j, z) in report.truncated and size > report.truncated[(j, z)]:
                continue
            report.rows.append({"kind": kind, "j": j, "z": z, "size": size, "err": e, "emp_rate": e ** (1.0 / size),
                                "theo_rate": theo[(j, z)]})
    report.rows.sort(key=lambda r: (r["j"], r["z"].real, r["z"].imag, r["size"]))
    for j in branches:
        for z in pts:
            rs = [r for r in report.rows if r["j"] == j and r["z"] == z]
            if len(rs) < 2:
                continue
            top = rs[len(rs) // 2:] if len(rs) >= 4 else rs
            f = fit_rate(np.array([r["size"] for r in top]), np.array([r["err"] for r in top]))
            t = theo[(j, z)]
            report.fits[(j, z)] = (f, t, abs(f - t) / t)
    div = [(j, z) for (j, z), t in theo.items() if t > 1.0]
    if div:
        report.divergence_note = f"{len(div)} test point(s) lie in the divergence region"
    else:
        report.divergence_note = "divergence region empty on the tested points; divergence check skipped"
    return report


def check_sign_structure(system: AngelescoSystem, n) -> None:
    """Raise unless the linear approximant has the expected zero and sign-change counts."""
    a = solve_linear_fp(system, n)
    for j in range(1, system.m + 1):
        W = sign_change_polynomial(a, system, j)
        if W.degree != a.n.nodes_count(j):
            raise StructureError(f"branch {j}: {W.degree} sign changes")
