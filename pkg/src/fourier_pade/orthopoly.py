"""Orthonormal polynomials of ``sigma0``, orthogonal polynomials for varying
weights, and a Chebyshev-basis polynomial container."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Chebyshev, Polynomial
from numpy.polynomial import chebyshev as cheb
from scipy.linalg import eigh_tridiagonal

from ._recurrence import lanczos
from .errors import DegeneracyError, QuadratureError, StructureError
from .measures import Interval, MeasureSpec, Quadrature, gauss_quadrature, measure_recurrence, required_order


# -- recurrence tables ------------------------------------------------------

@dataclass(frozen=True, eq=False)
class RecurrenceTable:
    """Orthonormal three-term recurrence.

    ``x l_k = b[k] l_{k+1} + a[k] l_k + b[k-1] l_{k-1}``, ``l_0 = 1/sqrt(norm0)``.
    ``b[0]`` is the first off-diagonal coefficient.
    """

    a: np.ndarray
    b: np.ndarray
    norm0: float
    interval: Interval

    @property
    def max_degree(self) -> int:
        return len(self.a)


def recurrence_coefficients(spec: MeasureSpec, n_max: int) -> RecurrenceTable:
    """Recurrence table able to produce ``l_0, ..., l_{n_max}``."""
    if n_max < 0:
        raise ValueError("n_max must be nonnegative")
    a, b = measure_recurrence(spec, max(n_max, 1))
    a, b = a[:n_max], b[:n_max]
    bad = np.flatnonzero(~(b > 0))
    if bad.size:
        raise QuadratureError(f"non-positive recurrence coefficient at degree {bad[0] + 1} for {spec!r}")
    return RecurrenceTable(np.asarray(a, float), np.asarray(b, float), spec.mass, spec.interval)


def orthonormal_values(table: RecurrenceTable, k: int, x) -> np.ndarray:
    """Values of ``l_0..l_k`` at ``x``; shape ``(k+1,) + x.shape``."""
    if k > table.max_degree:
        raise ValueError(f"degree {k} beyond table range {table.max_degree}")
    x = np.asarray(x)
    out = np.empty((k + 1,) + x.shape, dtype=np.result_type(x, float))
    out[0] = 1.0 / np.sqrt(table.norm0)
    if k >= 1:
        out[1] = (x - table.a[0]) * out[0] / table.b[0]
    for i in range(1, k):
        out[i + 1] = ((x - table.a[i]) * out[i] - table.b[i - 1] * out[i - 1]) / table.b[i]
    return out


def eval_orthonormal(table: RecurrenceTable, k: int, x):
    """``l_k(x)`` by forward recurrence."""
    return orthonormal_values(table, k, x)[k]


def orthonormal_cheb_coeffs(table: RecurrenceTable, k: int) -> np.ndarray:
    """Rows: Chebyshev coefficients (on ``table.interval``) of ``l_0..l_k``."""
    iv = table.interval
    C = np.zeros((k + 1, k + 1))
    C[0, 0] = 1.0 / np.sqrt(table.norm0)
    for i in range(k):
        # x = c + h t
        xi = iv.half_length * cheb.chebmulx(C[i, : i + 1]) + np.pad(iv.center * C[i, : i + 1], (0, 1))
        nxt = xi - table.a[i] * np.pad(C[i, : i + 1], (0, 1))
        if i > 0:
            nxt[:i] -= table.b[i - 1] * C[i - 1, :i]
        C[i + 1, : i + 2] = nxt / table.b[i]
    return C


def psi_values(spec: MeasureSpec, k_max: int, x, order: int | None = None) -> np.ndarray:
    """``psi_k(x) = int l_k(s)^2/(x - s) d spec(s) / l_k(x)`` for ``k = 0..k_max``.

    Equal to ``q_k(x)/l_k(x)`` with ``q_k`` the second-kind function; computed
    without cancellation for ``x`` off the interval. Shape ``(k_max+1, x.size)``.
    """
    x = np.atleast_1d(np.asarray(x))
    iv = spec.interval
    d = float(np.min(iv.distance(x)))
    if d <= 0:
        raise ValueError("psi_k needs points off the interval")
    if order is None:
        order = required_order(k_max, iv, d) + k_max
    q = gauss_quadrature(spec, order)
    table = recurrence_coefficients(spec, k_max)
    Ls = orthonormal_values(table, k_max, q.nodes)
    Lx = orthonormal_values(table, k_max, x)
    kern = 1.0 / (x[None, :] - q.nodes[:, None])
    return ((Ls**2) * q.weights) @ kern / Lx


# -- polynomials ------------------------------------------------------------

def _readonly(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class PolynomialRep:
    """Polynomial stored by Chebyshev coefficients on ``interval``.

    When ``zeros`` (and ``lead``) are known they are kept and used for
    evaluation in product form, which is far more accurate than the
    coefficient sum near clustered zeros.
    """

    interval: Interval
    coeffs: np.ndarray
    zeros: np.ndarray | None = field(default=None)
    lead: float | None = field(default=None)

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=float))
        nz = np.flatnonzero(np.abs(c) > 1e-300)
        c = c[: (nz[-1] + 1 if nz.size else 1)]
        object.__setattr__(self, "coeffs", _readonly(c))
        if self.zeros is not None:
            object.__setattr__(self, "zeros", _readonly(np.sort(np.asarray(self.zeros, float))))

    # constructors
    @classmethod
    def from_roots(cls, roots, interval: Interval, lead: float = 1.0) -> "PolynomialRep":
        r = np.sort(np.asarray(roots, dtype=float))
        if r.size == 0:
            return cls(interval, np.array([lead]), zeros=r, lead=lead)
        c = cheb.chebfromroots(interval.to_unit(r)) * (lead * interval.half_length ** r.size)
        return cls(interval, c, zeros=r, lead=lead)

    @classmethod
    def from_monomial(cls, coeffs, interval: Interval) -> "PolynomialRep":
        c = Polynomial(coeffs).convert(kind=Chebyshev, domain=[interval.lo, interval.hi]).coef
        return cls(interval, c)

    @classmethod
    def constant(cls, value: float, interval: Interval) -> "PolynomialRep":
        if value == 0.0:
            return cls(interval, np.zeros(1))
        return cls(interval, np.array([value]), zeros=np.zeros(0), lead=value)

    # properties
    @property
    def degree(self) -> int:
        if self.coeffs.size == 1 and self.coeffs[0] == 0.0:
            return -1
        return self.coeffs.size - 1

    @property
    def leading_coefficient(self) -> float:
        """Leading coefficient in powers of ``x``."""
        n = self.degree
        if n <= 0:
            return float(self.coeffs[0])
        return float(self.coeffs[n] * 2.0 ** (n - 1) / self.interval.half_length**n)

    @property
    def is_monic(self) -> bool:
        return abs(self.leading_coefficient - 1.0) <= 1e-10

    def as_numpy(self) -> Chebyshev:
        return Chebyshev(self.coeffs, domain=[self.interval.lo, self.interval.hi])

    def __call__(self, x):
        x = np.asarray(x)
        if self.zeros is not None and self.lead is not None:
            if self.zeros.size == 0:
                return np.full(x.shape, self.lead, dtype=np.result_type(x, float))[()]
            return self.lead * np.prod(x[..., None] - self.zeros, axis=-1)
        return cheb.chebval(self.interval.to_unit(x), self.coeffs)

    def log_abs(self, x) -> np.ndarray:
        """``log|p(x)|``; uses the product form when zeros are known."""
        x = np.asarray(x)
        if self.zeros is not None and self.lead is not None:
            return np.log(abs(self.lead)) + np.sum(np.log(np.abs(x[..., None] - self.zeros)), axis=-1)
        with np.errstate(divide="ignore"):
            return np.log(np.abs(self(x)))

    def monic(self) -> "PolynomialRep":
        lc = self.leading_coefficient
        if lc == 0.0:
            raise ValueError("zero polynomial cannot be made monic")
        z = self.zeros if self.zeros is not None else None
        return PolynomialRep(self.interval, self.coeffs / lc, zeros=z, lead=1.0 if z is not None else None)

    def to_monomial(self) -> np.ndarray:
        return self.as_numpy().convert(kind=Polynomial, domain=[-1, 1], window=[-1, 1]).coef

    def on_interval(self, interval: Interval) -> "PolynomialRep":
        c = self.as_numpy().convert(kind=Chebyshev, domain=[interval.lo, interval.hi]).coef
        return PolynomialRep(interval, c, zeros=self.zeros, lead=self.lead)

    def __mul__(self, other: "PolynomialRep") -> "PolynomialRep":
        o = other.on_interval(self.interval) if other.interval != self.interval else other
        c = cheb.chebmul(self.coeffs, o.coeffs)
        z = lead = None
        if self.zeros is not None and o.zeros is not None and self.lead is not None and o.lead is not None:
            z, lead = np.concatenate([self.zeros, o.zeros]), self.lead * o.lead
        return PolynomialRep(self.interval, c, zeros=z, lead=lead)

    def deriv(self, r: int = 1) -> "PolynomialRep":
        if r == 0:
            return self
        return PolynomialRep(self.interval, cheb.chebder(self.coeffs, r) / self.interval.half_length**r)

    def to_dict(self) -> dict:
        return {"interval": [self.interval.lo, self.interval.hi], "cheb_coeffs": self.coeffs.tolist()}


def max_coeff_difference(p: PolynomialRep, q: PolynomialRep) -> float:
    """Max Chebyshev-coefficient difference on ``p.interval``."""
    qq = q.on_interval(p.interval)
    n = max(p.coeffs.size, qq.coeffs.size)
    return float(np.max(np.abs(np.pad(p.coeffs, (0, n - p.coeffs.size)) - np.pad(qq.coeffs, (0, n - qq.coeffs.size)))))


def poly_zeros(p: PolynomialRep, real: bool = True, imag_tol: float = 1e-7) -> np.ndarray:
    """Zeros of ``p`` via the colleague matrix plus one Newton step, sorted.

    With ``real=True`` a zero whose imaginary part exceeds ``imag_tol``
    (relative to the half length of the basis interval) raises.
    """
    if p.degree < 1:
        raise ValueError("poly_zeros needs degree >= 1")
    if p.zeros is not None:
        return np.array(p.zeros)
    t = cheb.chebroots(p.coeffs)
    if real:
        bad = np.abs(t.imag) > imag_tol
        if np.any(bad):
            raise StructureError(f"nonreal zeros {t[bad][:3]} where real zeros were expected")
        t = t.real
        d = cheb.chebder(p.coeffs)
        f0 = cheb.chebval(t, p.coeffs)
        step = f0 / cheb.chebval(t, d)
        t1 = t - np.where(np.isfinite(step), step, 0.0)
        better = np.abs(cheb.chebval(t1, p.coeffs)) <= np.abs(f0)
        t = np.where(better, t1, t)
        return np.sort(p.interval.from_unit(t))
    return p.interval.from_unit(t[np.lexsort((t.imag, t.real))])


def varying_monic_orthogonal(quad: Quadrature, weight_samples, degree: int) -> PolynomialRep:
    """Monic OP of given degree for the discrete measure ``w_i * weight_samples_i``.

    The result carries its zeros (eigenvalues of the Jacobi matrix).
    """
    ws = np.asarray(weight_samples, dtype=float)
    if ws.shape != quad.nodes.shape or not np.all(ws > 0) or not np.all(np.isfinite(ws)):
        raise ValueError("weight samples must be finite, strictly positive, one per node")
    if degree < 0:
        raise ValueError("degree must be nonnegative")
    if degree == 0:
        return PolynomialRep.constant(1.0, quad.interval)
    if degree >= len(quad):
        raise DegeneracyError(f"degree {degree} needs more than {len(quad)} quadrature nodes; "
                              "raise the quadrature order or lower the degree")
    w = quad.weights * ws
    try:
        a, b = lanczos(quad.nodes, w / w.max(), degree)
    except QuadratureError as exc:
        raise DegeneracyError(f"{exc}; raise the quadrature order or lower the degree") from exc
    z = a.copy() if degree == 1 else eigh_tridiagonal(a, b[: degree - 1], eigvals_only=True)
    return PolynomialRep.from_roots(z, quad.interval)


def weighted_orthogonality_residuals(poly: PolynomialRep, quad: Quadrature, weight_samples, k: int) -> np.ndarray:
    """``sum w_i ws_i p(x_i) T_j(x_i)`` for ``j < k``, relative to ``sum w_i ws_i |p(x_i)|``."""
    ws = np.asarray(weight_samples, dtype=float) * quad.weights
    px = poly(quad.nodes)
    T = cheb.chebvander(quad.interval.to_unit(quad.nodes), max(k - 1, 0))[:, :k]
    return (ws * px) @ T / np.sum(ws * np.abs(px))
