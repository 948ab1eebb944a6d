"""Measures on real intervals, Gauss rules and Markov functions.

A :class:`MeasureSpec` pairs an :class:`Interval` with a weight (Jacobi or a
strictly positive tabulated density). An :class:`AngelescoSystem` collects
``sigma0`` on ``Delta_0`` and ``sigma_1..sigma_m`` on pairwise disjoint
intervals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence, Union

import numpy as np
from scipy import special
from scipy.integrate import trapezoid

from ._recurrence import christoffel_weights, gauss_from_recurrence, jacobi_recurrence, lanczos
from .errors import DomainError, QuadratureError

MAX_ORDER = 1 << 14


@dataclass(frozen=True)
class Interval:
    """Closed bounded interval ``[lo, hi]`` with ``lo < hi``."""

    lo: float
    hi: float

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise ValueError(f"interval endpoints must be finite, got [{lo}, {hi}]")
        if not lo < hi:
            raise ValueError(f"interval needs lo < hi, got [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def center(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def half_length(self) -> float:
        return 0.5 * (self.hi - self.lo)

    @property
    def length(self) -> float:
        return self.hi - self.lo

    def to_unit(self, x):
        return (np.asarray(x) - self.center) / self.half_length

    def from_unit(self, t):
        return self.center + self.half_length * np.asarray(t)

    def contains(self, x, closed: bool = True):
        x = np.asarray(x)
        if closed:
            return (x >= self.lo) & (x <= self.hi)
        return (x > self.lo) & (x < self.hi)

    def distance(self, z) -> np.ndarray:
        """Euclidean distance from (complex) points to the segment."""
        z = np.asarray(z, dtype=complex)
        re = np.clip(z.real, self.lo, self.hi)
        return np.abs(z - re)

    def gap(self, other: "Interval") -> float:
        """Distance between two intervals (0 if they intersect)."""
        return max(other.lo - self.hi, self.lo - other.hi, 0.0)

    def mirror(self) -> "Interval":
        return Interval(-self.hi, -self.lo)

    def chebyshev_points(self, n: int) -> np.ndarray:
        """First-kind Chebyshev points of the interval, ascending."""
        k = np.arange(n, 0, -1)
        return self.from_unit(np.cos((2 * k - 1) * np.pi / (2 * n)))


@dataclass(frozen=True)
class Jacobi:
    """Weight ``(1-t)^alpha (1+t)^beta`` with ``t`` the affine image in [-1, 1]."""

    alpha: float
    beta: float

    def __post_init__(self):
        a, b = float(self.alpha), float(self.beta)
        if not (a > -1 and b > -1):
            raise ValueError(f"Jacobi exponents must exceed -1, got ({a}, {b})")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)


@dataclass(frozen=True)
class TabulatedDensity:
    """Strictly positive density sampled on an increasing grid.

    The density is the piecewise-linear interpolant of the samples. The grid
    must start and end at the interval endpoints.
    """

    grid: tuple
    samples: tuple

    def __post_init__(self):
        g = tuple(float(v) for v in self.grid)
        s = tuple(float(v) for v in self.samples)
        if len(g) < 2 or len(g) != len(s):
            raise ValueError("tabulated density needs at least two (grid, sample) pairs of equal length")
        if not all(np.diff(g) > 0):
            raise ValueError("tabulated grid must be strictly increasing")
        if not all(math.isfinite(v) and v > 0 for v in s):
            raise ValueError("tabulated samples must be finite and strictly positive")
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "samples", s)


Weight = Union[Jacobi, TabulatedDensity]


@dataclass(frozen=True)
class MeasureSpec:
    """One measure ``sigma_k``: an interval and a weight family."""

    interval: Interval
    weight: Weight

    def __post_init__(self):
        if not isinstance(self.interval, Interval):
            object.__setattr__(self, "interval", Interval(*self.interval))
        if isinstance(self.weight, TabulatedDensity):
            g = self.weight.grid
            tol = 1e-12 * max(1.0, abs(self.interval.lo), abs(self.interval.hi))
            if abs(g[0] - self.interval.lo) > tol or abs(g[-1] - self.interval.hi) > tol:
                raise ValueError(f"tabulated grid [{g[0]}, {g[-1]}] must span the interval "
                                 f"[{self.interval.lo}, {self.interval.hi}]")
        elif not isinstance(self.weight, Jacobi):
            raise TypeError(f"unsupported weight {self.weight!r}")

    @classmethod
    def jacobi(cls, lo: float, hi: float, alpha: float = 0.0, beta: float = 0.0) -> "MeasureSpec":
        return cls(Interval(lo, hi), Jacobi(alpha, beta))

    @classmethod
    def chebyshev(cls, lo: float = -1.0, hi: float = 1.0) -> "MeasureSpec":
        return cls(Interval(lo, hi), Jacobi(-0.5, -0.5))

    @classmethod
    def tabulated(cls, grid: Sequence[float], samples: Sequence[float]) -> "MeasureSpec":
        return cls(Interval(grid[0], grid[-1]), TabulatedDensity(tuple(grid), tuple(samples)))

    @property
    def is_chebyshev(self) -> bool:
        return isinstance(self.weight, Jacobi) and self.weight.alpha == -0.5 and self.weight.beta == -0.5

    @property
    def mass(self) -> float:
        w = self.weight
        if isinstance(w, Jacobi):
            a, b = w.alpha, w.beta
            log_m = (a + b + 1) * math.log(2.0) + special.betaln(a + 1, b + 1)
            return self.interval.half_length * math.exp(log_m)
        return float(trapezoid(w.samples, w.grid))

    def density(self, x) -> np.ndarray:
        """Density with respect to Lebesgue measure (zero outside the interval)."""
        x = np.asarray(x, dtype=float)
        w = self.weight
        if isinstance(w, Jacobi):
            t = np.clip(self.interval.to_unit(x), -1.0, 1.0)
            with np.errstate(divide="ignore"):
                val = (1 - t) ** w.alpha * (1 + t) ** w.beta
        else:
            val = np.interp(x, w.grid, w.samples)
        return np.where(self.interval.contains(x), val, 0.0)

    def mirror(self) -> "MeasureSpec":
        """Image of the measure under ``x -> -x``."""
        w = self.weight
        if isinstance(w, Jacobi):
            return MeasureSpec(self.interval.mirror(), Jacobi(w.beta, w.alpha))
        grid = tuple(-g for g in reversed(w.grid))
        return MeasureSpec(self.interval.mirror(), TabulatedDensity(grid, tuple(reversed(w.samples))))

    def to_dict(self) -> dict:
        w = self.weight
        if isinstance(w, Jacobi):
            weight = {"jacobi": [w.alpha, w.beta]}
        else:
            weight = {"tabulated": {"grid": list(w.grid), "samples": list(w.samples)}}
        return {"interval": [self.interval.lo, self.interval.hi], "weight": weight}

    @classmethod
    def from_dict(cls, d: dict) -> "MeasureSpec":
        lo, hi = d["interval"]
        w = d["weight"]
        if "jacobi" in w:
            return cls(Interval(lo, hi), Jacobi(*w["jacobi"]))
        tab = w["tabulated"]
        return cls(Interval(lo, hi), TabulatedDensity(tuple(tab["grid"]), tuple(tab["samples"])))


@dataclass(frozen=True)
class AngelescoSystem:
    """``sigma0`` on ``Delta_0`` and ``m >= 1`` measures on disjoint intervals.

    Branches are indexed ``1..m`` in the public API; ``measure(0)`` is ``sigma0``.
    """

    sigma0: MeasureSpec
    sigmas: tuple

    def __post_init__(self):
        sig = tuple(self.sigmas)
        object.__setattr__(self, "sigmas", sig)
        if len(sig) < 1:
            raise ValueError("an Angelesco system needs at least one measure besides sigma0")
        specs = (self.sigma0,) + sig
        names = [f"sigma{k}" for k in range(len(specs))]
        bad = []
        for i in range(len(specs)):
            for k in range(i + 1, len(specs)):
                a, b = specs[i].interval, specs[k].interval
                if a.gap(b) <= 0.0:
                    bad.append(f"{names[i]} on [{a.lo}, {a.hi}] and {names[k]} on [{b.lo}, {b.hi}] "
                               "are not disjoint")
        if bad:
            raise ValueError("intervals must be pairwise disjoint: " + "; ".join(bad))

    @property
    def m(self) -> int:
        return len(self.sigmas)

    def measure(self, k: int) -> MeasureSpec:
        return self.sigma0 if k == 0 else self.sigmas[k - 1]

    def branch(self, j: int) -> MeasureSpec:
        if not 1 <= j <= self.m:
            raise IndexError(f"branch index {j} outside 1..{self.m}")
        return self.sigmas[j - 1]

    @property
    def intervals(self) -> list:
        return [self.sigma0.interval] + [s.interval for s in self.sigmas]

    @property
    def hull(self) -> Interval:
        iv = self.intervals
        return Interval(min(i.lo for i in iv), max(i.hi for i in iv))

    def mirror(self) -> "AngelescoSystem":
        return AngelescoSystem(self.sigma0.mirror(), tuple(s.mirror() for s in self.sigmas))

    def to_dict(self) -> dict:
        return {"sigma0": self.sigma0.to_dict(), "sigmas": [s.to_dict() for s in self.sigmas]}

    @classmethod
    def from_dict(cls, d: dict) -> "AngelescoSystem":
        return cls(MeasureSpec.from_dict(d["sigma0"]), tuple(MeasureSpec.from_dict(s) for s in d["sigmas"]))


def reference_system() -> AngelescoSystem:
    """Chebyshev ``sigma0`` on [-1, 1]; Lebesgue measures on [-3, -2] and [2, 3]."""
    return AngelescoSystem(
        MeasureSpec.chebyshev(-1.0, 1.0),
        (MeasureSpec.jacobi(-3.0, -2.0), MeasureSpec.jacobi(2.0, 3.0)),
    )


@dataclass(frozen=True, eq=False)
class Quadrature:
    """Nodes and positive weights discretizing a measure."""

    nodes: np.ndarray
    weights: np.ndarray
    interval: Interval

    def __len__(self) -> int:
        return self.nodes.size

    def integrate(self, values) -> np.ndarray:
        """``sum_i w_i f_i`` along the last axis."""
        return np.asarray(values) @ self.weights


def min_gap(system: AngelescoSystem) -> float:
    """Smallest distance between any two intervals of the system."""
    iv = system.intervals
    return min(iv[i].gap(iv[k]) for i in range(len(iv)) for k in range(i + 1, len(iv)))


def required_order(degree: int, interval: Interval | None = None, singularity_distance: float | None = None,
                   digits: float = 17.0) -> int:
    """Gauss order for a polynomial of given degree times a function analytic
    up to ``singularity_distance`` from ``interval``.

    Always at least ``2*degree + 8``.
    """
    n = 2 * degree + 8
    if interval is not None and singularity_distance is not None and singularity_distance > 0:
        t = 1.0 + singularity_distance / interval.half_length
        rho = t + math.sqrt(t * t - 1.0)
        n = max(n, degree + int(math.ceil(digits * math.log(10.0) / (2.0 * math.log(rho)))) + 8)
    return n


# -- Gauss rules ------------------------------------------------------------

def _tabulated_discretization(spec: MeasureSpec, per_cell: int) -> tuple[np.ndarray, np.ndarray]:
    w = spec.weight
    g = np.asarray(w.grid)
    t, tw = special.roots_legendre(per_cell)
    lo, hi = g[:-1, None], g[1:, None]
    x = 0.5 * (lo + hi) + 0.5 * (hi - lo) * t[None, :]
    ww = 0.5 * (hi - lo) * tw[None, :]
    x = x.ravel()
    ww = ww.ravel() * np.interp(x, g, w.samples)
    return x, ww


@lru_cache(maxsize=64)
def _tabulated_recurrence(spec: MeasureSpec, n: int) -> tuple[np.ndarray, np.ndarray]:
    cells = len(spec.weight.grid) - 1
    per_cell = max(8, int(math.ceil((n + 2) / cells)) + 4)
    prev = None
    for _ in range(7):
        x, w = _tabulated_discretization(spec, per_cell)
        if x.size <= n:
            per_cell *= 2
            continue
        a, b = lanczos(x, w, n)
        if prev is not None:
            scale = spec.interval.length
            if max(np.max(np.abs(a - prev[0])), np.max(np.abs(b - prev[1]))) <= 1e-13 * scale:
                return a, b
        prev = (a, b)
        per_cell *= 2
    raise QuadratureError(f"recurrence coefficients for {spec!r} did not converge up to degree {n}; "
                          "refine the tabulated density")


def measure_recurrence(spec: MeasureSpec, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal recurrence ``(a, b)`` of length n on the measure's interval."""
    w = spec.weight
    if isinstance(w, Jacobi):
        a, b = jacobi_recurrence(n, w.alpha, w.beta)
        iv = spec.interval
        return iv.center + iv.half_length * a, iv.half_length * b
    return _tabulated_recurrence(spec, n)


@lru_cache(maxsize=256)
def _gauss_cached(spec: MeasureSpec, order: int) -> tuple[np.ndarray, np.ndarray]:
    w = spec.weight
    iv = spec.interval
    if spec.is_chebyshev:
        k = np.arange(order, 0, -1)
        t = np.cos((2 * k - 1) * np.pi / (2 * order))
        x = iv.from_unit(t)
        wt = np.full(order, iv.half_length * np.pi / order)
    elif isinstance(w, Jacobi):
        t, _ = special.roots_jacobi(order, w.alpha, w.beta)
        a, b = jacobi_recurrence(order, w.alpha, w.beta)
        x = iv.from_unit(t)
        wt = christoffel_weights(t, a, b, spec.mass / iv.half_length)
        wt *= spec.mass / wt.sum()
    else:
        a, b = measure_recurrence(spec, order)
        x, wt = gauss_from_recurrence(a, b, spec.mass)
    x = np.asarray(x, dtype=float)
    wt = np.asarray(wt, dtype=float)
    x.setflags(write=False)
    wt.setflags(write=False)
    return x, wt


def gauss_quadrature(spec: MeasureSpec, order: int) -> Quadrature:
    """Order-``order`` Gauss rule for ``spec``.

    Nodes are strictly increasing and interior; weights sum to the mass.
    """
    order = int(order)
    if order < 1:
        raise ValueError(f"quadrature order must be >= 1, got {order}")
    x, w = _gauss_cached(spec, order)
    return Quadrature(x, w, spec.interval)


# -- Markov functions -------------------------------------------------------

def _check_off(spec: MeasureSpec, z: np.ndarray) -> None:
    d = spec.interval.distance(z)
    if np.any(d <= 0.0):
        raise DomainError(f"point(s) {z[d <= 0.0][:3]} lie on the support [{spec.interval.lo}, "
                          f"{spec.interval.hi}]")


def adaptive_integral(spec: MeasureSpec, func: Callable[[np.ndarray], np.ndarray], start_order: int = 32,
                      rtol: float = 1e-13, max_order: int = MAX_ORDER) -> np.ndarray:
    """``int func(x) d spec(x)`` by Gauss rules of doubling order.

    ``func`` maps nodes of shape (N,) to values of shape (..., N). Stops when
    every entry changes by less than ``rtol`` relative to the larger of its
    magnitude and the integral of ``|func|`` (the roundoff floor).
    """
    order = max(int(start_order), 2)
    prev = None
    while order <= max_order:
        q = gauss_quadrature(spec, order)
        vals = np.asarray(func(q.nodes))
        cur = vals @ q.weights
        if prev is not None:
            scale = np.maximum(np.abs(cur), np.abs(vals) @ q.weights)
            if np.all(np.abs(cur - prev) <= rtol * scale):
                return cur
        prev = cur
        order *= 2
    raise QuadratureError(f"integral over {spec!r} did not reach rtol {rtol} with order {max_order}")


def markov_transform(spec: MeasureSpec, z, order: int | None = None, derivative: int = 0,
                     rtol: float = 1e-13):
    """Markov function ``sum_i w_i/(z - x_i)`` (or its ``derivative``-th derivative).

    The order is doubled from ``order`` (default 32) until the relative change
    is below ``rtol``. Real input gives real output.
    """
    z_arr = np.asarray(z)
    is_real = not np.iscomplexobj(z_arr)
    zc = np.atleast_1d(z_arr).astype(complex).ravel()
    _check_off(spec, zc)
    r = int(derivative)
    factor = (-1.0) ** r * math.factorial(r)

    def f(x):
        return factor / (zc[:, None] - x[None, :]) ** (r + 1)

    start = order if order is not None else 32
    # the Gauss error decays like rho^(-2N); pick a start that already resolves
    # the nearest evaluation point so large batches do not double many times
    dmin = float(np.min(spec.interval.distance(zc))) if zc.size else 1.0
    start = max(start, min(required_order(r, spec.interval, dmin, digits=14) // 2, MAX_ORDER // 2))
    val = adaptive_integral(spec, f, start_order=start, rtol=rtol)
    if is_real:
        val = val.real
    return val.reshape(z_arr.shape) if z_arr.ndim else val[0]
