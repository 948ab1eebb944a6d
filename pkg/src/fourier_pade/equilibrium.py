"""Interaction matrices, discrete vector equilibrium problems and rate functions.

For a ray ``p = (p_1, ..., p_m)`` the interaction matrices ``C1`` (linear
approximants) and ``C2`` (non-linear) are ``2m x 2m`` symmetric and positive
definite. The equilibrium vector measure minimizes

    J(mu) = sum_{j,k} c_{jk} I(mu_j, mu_k),   I(a, b) = int int log(1/|x-y|) da db,

over probability measures ``mu_j`` on ``F_j`` (``Delta_j`` for ``j <= m``,
``Delta_0`` otherwise). Its combined potentials ``W_j = sum_k c_jk V^{mu_k}``
equal a constant ``omega_j`` on ``supp mu_j`` and are ``>= omega_j`` on
``F_j``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.sparse.linalg import eigsh

from .errors import ConvergenceError, FormulaRegressionError
from .measures import Interval


# -- rays and interaction matrices ------------------------------------------

@dataclass(frozen=True)
class RayVector:
    """Limit proportions ``p_j = lim n_j/|n|``; ``sum p_j = 1``.

    For ``m >= 2`` each ``p_j`` lies in ``(0, 1)``; for ``m = 1`` the only ray
    is ``p = (1,)``.
    """

    p: tuple

    def __post_init__(self):
        vals = tuple(float(v) for v in self.p)
        if not vals:
            raise ValueError("a ray needs at least one component")
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("ray components must be finite")
        if abs(sum(vals) - 1.0) > 1e-12:
            raise ValueError(f"ray components must sum to 1, got sum {sum(vals)!r}")
        if len(vals) >= 2 and not all(0.0 < v < 1.0 for v in vals):
            raise ValueError("ray components must lie in (0, 1)")
        if len(vals) == 1 and vals[0] != 1.0:
            raise ValueError("a one-branch ray must be (1,)")
        object.__setattr__(self, "p", vals)

    @property
    def m(self) -> int:
        return len(self.p)

    def __iter__(self):
        return iter(self.p)

    def __getitem__(self, j: int) -> float:
        """1-based access."""
        return self.p[j - 1]


def _as_p(p) -> np.ndarray:
    return np.asarray(p.p if isinstance(p, RayVector) else p, dtype=float)


@dataclass(frozen=True, eq=False)
class InteractionMatrix:
    """Symmetric ``2m x 2m`` coupling matrix; ``kind`` is ``"C1"``, ``"C2"`` or ``"custom"``."""

    entries: np.ndarray
    kind: str = "custom"

    def __post_init__(self):
        a = np.array(self.entries, dtype=float)
        if a.ndim == 1 and a.size == 1:
            a = a.reshape(1, 1)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("interaction matrix must be square")
        if not np.allclose(a, a.T, rtol=0, atol=1e-14 * max(1.0, np.max(np.abs(a)))):
            raise ValueError("interaction matrix must be symmetric")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    def leading_minors(self) -> np.ndarray:
        return np.array([np.linalg.det(self.entries[:j, :j]) for j in range(1, self.size + 1)])

    @property
    def is_positive_definite(self) -> bool:
        return bool(np.all(self.leading_minors() > 0))


def _blocks(p: np.ndarray) -> np.ndarray:
    m = p.size
    C = np.zeros((2 * m, 2 * m))
    C[:m, :m] = np.outer(p, p) + np.diag(p**2)
    idx = np.arange(m)
    C[idx, m + idx] = C[m + idx, idx] = -p * (1 + p)
    return C


def interaction_matrix_linear(p) -> InteractionMatrix:
    """``C1``: upper-left ``2p_j^2`` / ``p_j p_k``, off-diagonal blocks
    ``diag(-p_j(1+p_j))``, lower-right ``diag(2(1+p_j)^2)``."""
    p = _as_p(p)
    m = p.size
    C = _blocks(p)
    C[m:, m:] = np.diag(2 * (1 + p) ** 2)
    return InteractionMatrix(C, "C1")


def interaction_matrix_nonlinear(p) -> InteractionMatrix:
    """``C2``: as ``C1`` but the lower-right block has diagonal
    ``2m(1+p_j)^2/(m+1)`` and off-diagonal ``-2(1+p_j)(1+p_k)/(m+1)``."""
    p = _as_p(p)
    m = p.size
    C = _blocks(p)
    B = -2 * np.outer(1 + p, 1 + p) / (m + 1)
    B[np.diag_indices(m)] = 2 * m * (1 + p) ** 2 / (m + 1)
    C[m:, m:] = B
    return InteractionMatrix(C, "C2")


def closed_form_minors(kind: str, p, convention: str = "corrected") -> np.ndarray:
    """Closed-form leading principal minors of ``C1``/``C2``.

    Order ``j <= m``: ``(p_1...p_j)^2 (j+1)``. Order ``j > m``:
    ``[p_1...p_m (1+p_1)...(1+p_{j-m})]^2`` times ``j+1`` for ``C1`` and
    ``2m+1-j`` for ``C2``. ``convention="stated"`` uses ``m+1`` for ``C1``,
    the factor found in the literature, which is only right at ``j = m``.
    """
    p = _as_p(p)
    m = p.size
    out = []
    for j in range(1, 2 * m + 1):
        if j <= m:
            out.append(np.prod(p[:j]) ** 2 * (j + 1))
            continue
        base = (np.prod(p) * np.prod(1 + p[: j - m])) ** 2
        if kind == "C1":
            out.append(base * ((j + 1) if convention == "corrected" else (m + 1)))
        elif kind == "C2":
            out.append(base * (2 * m + 1 - j))
        else:
            raise ValueError(f"no closed form for kind {kind!r}")
    return np.array(out)


def principal_minor_check(C: InteractionMatrix, p, rtol: float = 1e-9, convention: str = "corrected") -> list:
    """``[(computed, closed_form), ...]`` for all leading principal minors.

    Raises :class:`FormulaRegressionError` on a relative mismatch above ``rtol``.
    """
    comp = C.leading_minors()
    closed = closed_form_minors(C.kind, p, convention)
    pairs = [(float(a), float(b)) for a, b in zip(comp, closed)]
    bad = [(j + 1, a, b) for j, (a, b) in enumerate(pairs) if abs(a - b) > rtol * abs(b)]
    if bad:
        j, a, b = bad[0]
        raise FormulaRegressionError(f"{C.kind} minor of order {j}: computed {a!r}, closed form {b!r}")
    return pairs


# -- discrete measures ------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Point masses on a strictly increasing grid."""

    grid: np.ndarray
    masses: np.ndarray
    total: float = 1.0

    def __post_init__(self):
        g = np.array(self.grid, dtype=float).ravel()
        w = np.array(self.masses, dtype=float).ravel()
        if g.shape != w.shape or g.size == 0:
            raise ValueError("grid and masses must be nonempty and of equal length")
        if g.size > 1 and np.any(np.diff(g) <= 0):
            raise ValueError("grid must be strictly increasing")
        if np.any(w < 0):
            raise ValueError("masses must be nonnegative")
        if abs(w.sum() - self.total) > 1e-12 * max(1.0, self.total):
            raise ValueError(f"masses sum to {w.sum()!r}, declared total {self.total!r}")
        g.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "masses", w)

    def cdf(self, x) -> np.ndarray:
        """Right-continuous distribution function."""
        c = np.concatenate([[0.0], np.cumsum(self.masses)])
        return c[np.searchsorted(self.grid, np.asarray(x), side="right")]

    def support(self, threshold: float | None = None) -> np.ndarray:
        """Grid points carrying mass above ``threshold`` (default ``total/N * 1e-3``)."""
        thr = self.total / self.grid.size * 1e-3 if threshold is None else threshold
        return self.grid[self.masses > thr]

    def potential(self, z) -> np.ndarray:
        """``sum_i m_i log(1/|z - x_i|)``."""
        z = np.asarray(z)
        return -np.log(np.abs(z[..., None] - self.grid)) @ self.masses


# -- equilibrium solver -----------------------------------------------------

def chebyshev_grid(interval: Interval, n: int) -> np.ndarray:
    return interval.chebyshev_points(n)


def _half_spacing(g: np.ndarray) -> np.ndarray:
    d = np.empty_like(g)
    if g.size == 1:
        return np.ones(1)
    d[1:-1] = (g[2:] - g[:-2]) / 2
    d[0] = g[1] - g[0]
    d[-1] = g[-1] - g[-2]
    return d / 2


def log_kernel(g1: np.ndarray, g2: np.ndarray, same: bool) -> np.ndarray:
    """``log(1/|x-y|)``; on a shared grid the diagonal is ``log(1/delta_i)`` with
    ``delta_i`` half the local spacing."""
    if same:
        K = -np.log(np.abs(g1[:, None] - g2[None, :]) + np.eye(g1.size))
        K[np.diag_indices(g1.size)] = -np.log(_half_spacing(g1))
        return K
    return -np.log(np.abs(g1[:, None] - g2[None, :]))


def project_simplex(v: np.ndarray, total: float = 1.0) -> np.ndarray:
    """Euclidean projection onto ``{x >= 0, sum x = total}``."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - total
    ind = np.arange(1, v.size + 1)
    r = np.nonzero(u - css / ind > 0)[0][-1]
    return np.maximum(v - css[r] / (r + 1), 0.0)


@dataclass(frozen=True, eq=False)
class EquilibriumSolution:
    """Discrete equilibrium vector measure.

    ``energies`` is the energy of every accepted iterate (nonincreasing).
    """

    components: tuple
    constants: tuple
    kkt_violation: float
    energy: float
    C: InteractionMatrix
    intervals: tuple
    iterations: int = 0
    energies: tuple = ()
    potentials_on_grid: tuple = field(default=())

    @property
    def size(self) -> int:
        return len(self.components)


def _energy(H: np.ndarray, mu: np.ndarray) -> float:
    return float(mu @ (H @ mu))


def _hessian(C: InteractionMatrix, grids: Sequence[np.ndarray], intervals: Sequence[Interval]) -> np.ndarray:
    n, N = C.size, grids[0].size
    c = C.entries
    H = np.zeros((n * N, n * N))
    for j in range(n):
        for k in range(j, n):
            if c[j, k] == 0.0:
                continue
            blk = c[j, k] * log_kernel(grids[j], grids[k], intervals[j] == intervals[k])
            H[j * N:(j + 1) * N, k * N:(k + 1) * N] = blk
            H[k * N:(k + 1) * N, j * N:(j + 1) * N] = blk.T
    return H


def discrete_energy(sol: "EquilibriumSolution", masses: Sequence[np.ndarray]) -> float:
    """Discrete energy ``sum_jk c_jk I(nu_j, nu_k)`` of masses on the solution's grids."""
    grids = [comp.grid for comp in sol.components]
    return _energy(_hessian(sol.C, grids, sol.intervals), np.concatenate([np.asarray(m, float) for m in masses]))


def _kkt(W: np.ndarray, mu: np.ndarray, N: int, n: int) -> tuple[float, np.ndarray]:
    prof = np.zeros(n)
    for j in range(n):
        Wj = W[j * N:(j + 1) * N]
        s = mu[j * N:(j + 1) * N] > 1e-3 / N
        prof[j] = float(np.max(Wj[s]) - Wj.min())
    return float(prof.max()), prof


def solve_equilibrium(C: InteractionMatrix, intervals: Sequence[Interval], grid_size: int = 400, tol: float = 1e-3,
                      max_iter: int = 50000, check_every: int = 50) -> EquilibriumSolution:
    """Minimize the discrete energy over products of simplices.

    Each component lives on ``grid_size`` Chebyshev points of its interval.
    Accelerated projected gradient (step ``1/L``) with restart whenever the
    energy would increase; stops once the KKT violation
    ``max_j (max_{supp} W_j - min W_j)`` drops below ``tol``.
    """
    n = C.size
    intervals = tuple(iv if isinstance(iv, Interval) else Interval(*iv) for iv in intervals)
    if len(intervals) != n:
        raise ValueError(f"{n} components need {n} intervals, got {len(intervals)}")
    N = int(grid_size)
    if N < 2:
        raise ValueError("grid_size must be at least 2")
    grids = [chebyshev_grid(iv, N) for iv in intervals]
    H = _hessian(C, grids, intervals)
    L = float(abs(eigsh(H, k=1, which="LM", return_eigenvectors=False, tol=1e-8, v0=np.ones(n * N))[0])) * 1.01 if n * N > 2 else \
        float(np.max(np.abs(np.linalg.eigvalsh(H))))

    mu = np.full(n * N, 1.0 / N)
    y = mu.copy()
    t = 1.0
    e_mu = _energy(H, mu)
    energies = [e_mu]
    kkt, prof = np.inf, None
    it = 0
    for it in range(1, max_iter + 1):
        z = y - (H @ y) / L
        new = np.concatenate([project_simplex(z[j * N:(j + 1) * N]) for j in range(n)])
        e_new = _energy(H, new)
        tn = 0.5 * (1 + math.sqrt(1 + 4 * t * t))
        if e_new > e_mu:
            # restart momentum
            t, y = 1.0, mu.copy()
            continue
        y = new + (t - 1) / tn * (new - mu)
        mu, e_mu, t = new, e_new, tn
        energies.append(e_mu)
        if it % check_every == 0:
            kkt, prof = _kkt(H @ mu, mu, N, n)
            if kkt < tol:
                break
    else:
        kkt, prof = _kkt(H @ mu, mu, N, n)
        if kkt >= tol:
            raise ConvergenceError(f"equilibrium KKT violation {kkt:.3e} above {tol:.1e} after {max_iter} iterations; "
                                   f"per-component profile {np.round(prof, 6).tolist()}", list(prof))
    W = H @ mu
    comps, consts, pots = [], [], []
    for j in range(n):
        m_j = np.clip(mu[j * N:(j + 1) * N], 0.0, None)
        m_j = m_j / m_j.sum()
        comps.append(DiscreteMeasure(grids[j], m_j))
        Wj = W[j * N:(j + 1) * N]
        consts.append(float(Wj.min()))
        pots.append(Wj.copy())
    return EquilibriumSolution(tuple(comps), tuple(consts), kkt, e_mu, C, intervals, it, tuple(energies), tuple(pots))


def combined_potential(sol: EquilibriumSolution, C: InteractionMatrix, j: int, z) -> np.ndarray:
    """``W_j(z) = sum_k c_jk V^{mu_k}(z)`` (``j`` is 1-based, ``1..2m``).

    Points that coincide with a component's own grid use the desingularized
    diagonal kernel.
    """
    z = np.asarray(z)
    zz = np.atleast_1d(z).ravel()
    out = np.zeros(zz.shape, dtype=float)
    for k, comp in enumerate(sol.components):
        c = C.entries[j - 1, k]
        if c == 0.0:
            continue
        d = np.abs(zz[:, None] - comp.grid[None, :])
        hit = d == 0.0
        if np.any(hit):
            delta = _half_spacing(comp.grid)
            d = np.where(hit, delta[None, :], d)
        out += c * (-np.log(d) @ comp.masses)
    return out.reshape(z.shape) if z.ndim else out[0]


def rate_function(sol: EquilibriumSolution, C: InteractionMatrix, p, j: int, z) -> np.ndarray:
    """``exp((W_j(z) - omega_j)/p_j)`` for branch ``j`` (``G_j`` with ``C1``, ``H_j`` with ``C2``)."""
    pj = _as_p(p)[j - 1]
    return np.exp((combined_potential(sol, C, j, z) - sol.constants[j - 1]) / pj)


def standard_intervals(system) -> list:
    """``F_j``: ``Delta_1..Delta_m`` followed by ``m`` copies of ``Delta_0``."""
    return [s.interval for s in system.sigmas] + [system.sigma0.interval] * system.m


def arcsine_cdf(interval: Interval, x) -> np.ndarray:
    """Distribution function of the arcsine (equilibrium) measure of an interval."""
    t = np.clip(interval.to_unit(x), -1.0, 1.0)
    return np.arcsin(t) / np.pi + 0.5
