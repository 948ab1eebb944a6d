"""Three-term recurrences: closed-form Jacobi coefficients, Lanczos for
discrete measures, Golub–Welsch."""

from __future__ import annotations

import math

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import QuadratureError


def jacobi_recurrence(n: int, alpha: float, beta: float) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal recurrence for (1-t)^alpha (1+t)^beta dt on [-1, 1].

    Returns ``a`` (length n) and ``b`` (length n) with ``b[k]`` the
    off-diagonal coefficient linking degrees k and k+1.
    """
    a = np.zeros(n)
    b = np.zeros(n)
    s = alpha + beta
    for k in range(n):
        if k == 0:
            a[0] = (beta - alpha) / (s + 2.0)
        else:
            a[k] = (beta**2 - alpha**2) / ((2 * k + s) * (2 * k + s + 2))
        kk = k + 1
        if kk == 1:
            b2 = 4.0 * (1 + alpha) * (1 + beta) / ((2 + s) ** 2 * (3 + s))
        else:
            c = 2 * kk + s
            b2 = 4.0 * kk * (kk + alpha) * (kk + beta) * (kk + s) / (c**2 * (c + 1) * (c - 1))
        b[k] = np.sqrt(b2)
    return a, b


def lanczos(x: np.ndarray, w: np.ndarray, n: int, reorth: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Recurrence coefficients of the discrete measure ``sum w_i delta_{x_i}``.

    Stieltjes/Lanczos on the vectors ``sqrt(w) p_k(x)`` with full
    reorthogonalization. Returns ``a`` (n) and ``b`` (n); ``b[n-1]`` is the
    coefficient that would produce degree n.
    """
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    if n > x.size:
        raise QuadratureError(f"discrete measure with {x.size} atoms cannot support degree {n}")
    sw = np.sqrt(w)
    v = sw / np.linalg.norm(sw)
    basis = np.empty((n + 1, x.size))
    basis[0] = v
    v_prev = np.zeros_like(v)
    a = np.zeros(n)
    b = np.zeros(n)
    bprev = 0.0
    for k in range(n):
        u = x * v
        a[k] = v @ u
        u = u - a[k] * v - bprev * v_prev
        if reorth:
            V = basis[: k + 1]
            u -= V.T @ (V @ u)
            u -= V.T @ (V @ u)
        bk = np.linalg.norm(u)
        if not np.isfinite(bk) or bk <= 1e-14 * max(1.0, np.max(np.abs(x))):
            if k == n - 1:
                # degree n is not needed for the first n coefficients
                b[k] = max(bk, 0.0)
                break
            raise QuadratureError(f"recurrence lost positivity at degree {k + 1}")
        b[k] = bk
        v_prev, v = v, u / bk
        basis[k + 1] = v
        bprev = bk
    return a, b


def gauss_from_recurrence(a: np.ndarray, b: np.ndarray, mass: float) -> tuple[np.ndarray, np.ndarray]:
    """Golub–Welsch: nodes and weights from an orthonormal Jacobi matrix."""
    n = len(a)
    if n == 1:
        return np.array([a[0]], dtype=float), np.array([mass])
    nodes, vecs = eigh_tridiagonal(a, b[: n - 1])
    weights = mass * vecs[0] ** 2
    return nodes, weights


def christoffel_weights(x: np.ndarray, a: np.ndarray, b: np.ndarray, mass: float) -> np.ndarray:
    """Gauss weights ``1/sum_k l_k(x_i)^2`` at given nodes.

    Accurate to a few ulps even next to a singular endpoint, where closed-form
    weight formulas lose digits.
    """
    x = np.asarray(x, dtype=float)
    n = len(a)
    prev = np.zeros_like(x)
    cur = np.full_like(x, 1.0 / math.sqrt(mass))
    total = cur**2
    for k in range(n - 1):
        prev, cur = cur, ((x - a[k]) * cur - (b[k - 1] * prev if k else 0.0)) / b[k]
        total += cur**2
    return 1.0 / total


def op_zeros(x: np.ndarray, w: np.ndarray, n: int) -> np.ndarray:
    """Zeros of the degree-n orthogonal polynomial of a discrete measure."""
    if n == 0:
        return np.zeros(0)
    w = np.asarray(w, dtype=float)
    a, b = lanczos(x, w / w.max(), n)
    if n == 1:
        return a.copy()
    return eigh_tridiagonal(a, b[: n - 1], eigvals_only=True)
