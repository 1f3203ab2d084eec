"""Independent reference implementations used to check the library.

Everything here deliberately takes a different route than the package:
least squares goes through the normal equations with hand-rolled Gaussian
elimination, p-values through adaptive quadrature of the density, quantiles
through the direct order-statistic formula.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.integrate import quad


def gaussian_solve(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve A x = b by Gaussian elimination with partial pivoting."""
    A = np.array(A, dtype=np.float64)
    b = np.array(b, dtype=np.float64)
    n = A.shape[0]
    for k in range(n):
        pivot = k + int(np.argmax(np.abs(A[k:, k])))
        if A[pivot, k] == 0.0:
            raise ZeroDivisionError("singular system")
        if pivot != k:
            A[[k, pivot]] = A[[pivot, k]]
            b[[k, pivot]] = b[[pivot, k]]
        for i in range(k + 1, n):
            m = A[i, k] / A[k, k]
            A[i, k:] -= m * A[k, k:]
            b[i] -= m * b[k]
    x = np.zeros(n)
    for i in range(n - 1, -1, -1):
        x[i] = (b[i] - A[i, i + 1:] @ x[i + 1:]) / A[i, i]
    return x


def normal_equations_fit(X: np.ndarray, y: np.ndarray) -> np.ndarray:
    """beta = (X'X)^-1 X'y via explicit elimination on the normal equations."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    return gaussian_solve(X.T @ X, X.T @ y)


def student_t_density(u: float, dof: int) -> float:
    c = math.exp(math.lgamma((dof + 1) / 2.0) - math.lgamma(dof / 2.0))
    c /= math.sqrt(dof * math.pi)
    return c * (1.0 + u * u / dof) ** (-(dof + 1) / 2.0)


def t_pvalue_quadrature(t: float, dof: int) -> float:
    """Two-sided p-value by adaptive quadrature over the upper tail."""
    tail, _ = quad(student_t_density, abs(t), math.inf, args=(dof,),
                   epsabs=1e-14, epsrel=1e-13, limit=200)
    return 2.0 * tail


def quantile_order_statistic(values, q: float) -> float:
    """Linear-interpolation quantile straight from the definition."""
    ordered = sorted(float(v) for v in values)
    n = len(ordered)
    if n == 1:
        return ordered[0]
    h = (n - 1) * q
    lo = math.floor(h)
    hi = min(lo + 1, n - 1)
    return ordered[lo] + (h - lo) * (ordered[hi] - ordered[lo])


def matrix_with_condition(rng: np.random.Generator, n: int, p: int,
                          cond: float) -> np.ndarray:
    """Random n x p matrix with a prescribed 2-norm condition number."""
    A = rng.normal(size=(n, p))
    B = rng.normal(size=(p, p))
    u, _ = np.linalg.qr(A)
    v, _ = np.linalg.qr(B)
    if p == 1:
        singular = np.array([1.0])
    else:
        singular = np.geomspace(1.0, 1.0 / cond, p)
    return u @ np.diag(singular) @ v.T
