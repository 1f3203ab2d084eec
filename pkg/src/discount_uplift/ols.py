"""Self-contained ordinary-least-squares engine with Student-t inference.

The solver uses Householder QR with column pivoting and its own
incomplete-beta evaluation for p-values, so results do not depend on any
linear-algebra or stats library. numpy is used only as the array container.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

# Pivots at or below RANK_RTOL times the largest pivot mark dependent columns.
RANK_RTOL = 1e-10

BASELINE_LABELS = ("Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun",
                   "Forecast", "Stock")
UPLIFT_LABELS = BASELINE_LABELS + ("DS",)


class OlsError(ValueError):
    """Invalid input to the regression engine."""


class DimensionMismatch(OlsError):
    pass


class InvalidDof(OlsError):
    pass


class PredictOnFailedFit(OlsError):
    pass


@dataclass(frozen=True, eq=False)
class DesignMatrix:
    """A labelled, row-major design matrix."""

    values: np.ndarray
    column_labels: tuple[str, ...]

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise DimensionMismatch("design matrix must be two-dimensional")
        if values.shape[1] != len(self.column_labels):
            raise DimensionMismatch(
                f"{values.shape[1]} columns but {len(self.column_labels)} labels")
        object.__setattr__(self, "values", values)

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_cols(self) -> int:
        return self.values.shape[1]

    def validate_pipeline_shape(self) -> None:
        """Check the regression-pipeline invariants: 9 or 10 columns whose
        leading block is a one-hot weekday encoding."""
        if self.column_labels not in (BASELINE_LABELS, UPLIFT_LABELS):
            raise OlsError(f"unexpected column labels {self.column_labels}")
        block = self.values[:, :7]
        if not (np.all((block == 0.0) | (block == 1.0))
                and np.all(block.sum(axis=1) == 1.0)):
            raise OlsError("weekday block must have exactly one 1 per row")


class FitStatus(Enum):
    OK = "ok"
    RANK_DEFICIENT = "rank_deficient"


@dataclass(frozen=True, eq=False)
class FitResult:
    """Coefficients and Student-t inference for one least-squares stage.

    When the design is rank deficient no coefficients are reported and
    ``missing_columns`` names a set of columns that are linear combinations
    of the pivoted ones. A saturated fit (``dof == 0``) reports coefficients
    with NaN standard errors, t statistics and p-values.
    """

    status: FitStatus
    column_labels: tuple[str, ...]
    n_obs: int
    rank: int
    dof: int
    coefficients: np.ndarray | None = None
    std_errors: np.ndarray | None = None
    t_stats: np.ndarray | None = None
    p_values: np.ndarray | None = None
    sigma2: float = math.nan
    residuals: np.ndarray | None = None
    missing_columns: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return self.status is FitStatus.OK


def _labels(X: DesignMatrix | np.ndarray,
            labels: Sequence[str] | None) -> tuple[np.ndarray, tuple[str, ...]]:
    if isinstance(X, DesignMatrix):
        return X.values, X.column_labels
    values = np.asarray(X, dtype=np.float64)
    if values.ndim != 2:
        raise DimensionMismatch("design matrix must be two-dimensional")
    if labels is None:
        names = tuple(f"x{j}" for j in range(values.shape[1]))
    else:
        names = tuple(labels)
        if len(names) != values.shape[1]:
            raise DimensionMismatch("label count does not match column count")
    return values, names


def _householder_qr(A: np.ndarray, qty: np.ndarray
                    ) -> tuple[np.ndarray, np.ndarray, list[int], int]:
    """In-place pivoted QR; returns (R-in-A, Q'y-in-qty, pivots, rank)."""
    n, p = A.shape
    piv = list(range(p))
    tol = None
    rank = 0
    for k in range(min(n, p)):
        norms = np.sqrt((A[k:, k:] ** 2).sum(axis=0))
        j_rel = int(np.argmax(norms))
        pivot_norm = float(norms[j_rel])
        if tol is None:
            tol = RANK_RTOL * pivot_norm
        if pivot_norm <= tol:
            break
        j = k + j_rel
        if j != k:
            A[:, [k, j]] = A[:, [j, k]]
            piv[k], piv[j] = piv[j], piv[k]
        x = A[k:, k]
        alpha = -math.copysign(pivot_norm, x[0]) if x[0] != 0.0 else -pivot_norm
        v = x.copy()
        v[0] -= alpha
        vtv = float(v @ v)
        if vtv > 0.0:
            beta = 2.0 / vtv
            A[k:, k + 1:] -= beta * np.outer(v, v @ A[k:, k + 1:])
            qty[k:] -= beta * v * float(v @ qty[k:])
        A[k, k] = alpha
        A[k + 1:, k] = 0.0
        rank += 1
    return A, qty, piv, rank


def _back_substitute(R: np.ndarray, b: np.ndarray) -> np.ndarray:
    p = R.shape[0]
    x = np.zeros(p)
    for i in range(p - 1, -1, -1):
        x[i] = (b[i] - R[i, i + 1:] @ x[i + 1:]) / R[i, i]
    return x


def _upper_inverse(R: np.ndarray) -> np.ndarray:
    p = R.shape[0]
    inv = np.zeros((p, p))
    for j in range(p):
        e = np.zeros(p)
        e[j] = 1.0
        inv[:, j] = _back_substitute(R, e)
    return inv


def fit_ols(X: DesignMatrix | np.ndarray, y: Sequence[float] | np.ndarray,
            labels: Sequence[str] | None = None) -> FitResult:
    """Least-squares fit of ``y`` on the columns of ``X``.

    Uses column-pivoted Householder QR. If the numerical rank is below the
    column count the fit is reported as rank deficient (no coefficients; the
    unpivoted columns are listed) rather than re-parameterised. With full
    rank, ``sigma2 = ||r||^2 / (n - p)``, standard errors come from the
    diagonal of ``sigma2 * (X'X)^-1`` and p-values are two-sided Student-t
    with ``n - p`` degrees of freedom.
    """
    values, names = _labels(X, labels)
    yv = np.asarray(y, dtype=np.float64).ravel()
    n, p = values.shape
    if yv.shape[0] != n:
        raise DimensionMismatch(f"X has {n} rows but y has {yv.shape[0]}")
    if p == 0:
        raise DimensionMismatch("design matrix has no columns")

    R, qty, piv, rank = _householder_qr(values.copy(), yv.copy())
    dof = n - p
    if rank < p:
        missing = tuple(names[j] for j in sorted(piv[rank:]))
        return FitResult(status=FitStatus.RANK_DEFICIENT, column_labels=names,
                         n_obs=n, rank=rank, dof=dof, missing_columns=missing)

    beta_perm = _back_substitute(R[:p, :p], qty[:p])
    beta = np.zeros(p)
    for k, j in enumerate(piv):
        beta[j] = beta_perm[k]
    residuals = yv - values @ beta

    if dof == 0:
        nan = np.full(p, math.nan)
        return FitResult(status=FitStatus.OK, column_labels=names, n_obs=n,
                         rank=rank, dof=0, coefficients=beta, std_errors=nan,
                         t_stats=nan.copy(), p_values=nan.copy(),
                         sigma2=math.nan, residuals=residuals)

    sigma2 = float(residuals @ residuals) / dof
    r_inv = _upper_inverse(R[:p, :p])
    xtx_inv_perm = r_inv @ r_inv.T
    variances = np.zeros(p)
    for k, j in enumerate(piv):
        variances[j] = sigma2 * xtx_inv_perm[k, k]
    std_errors = np.sqrt(np.maximum(variances, 0.0))

    t_stats = np.empty(p)
    p_values = np.empty(p)
    for j in range(p):
        if std_errors[j] > 0.0:
            t_stats[j] = beta[j] / std_errors[j]
            p_values[j] = t_pvalue(t_stats[j], dof)
        elif beta[j] == 0.0:
            t_stats[j] = 0.0
            p_values[j] = 1.0
        else:
            # Exact fit: nonzero coefficient with zero residual variance.
            t_stats[j] = math.copysign(math.inf, beta[j])
            p_values[j] = 0.0
    return FitResult(status=FitStatus.OK, column_labels=names, n_obs=n,
                     rank=rank, dof=dof, coefficients=beta,
                     std_errors=std_errors, t_stats=t_stats,
                     p_values=p_values, sigma2=sigma2, residuals=residuals)


def predict(fit: FitResult, X_new: DesignMatrix | np.ndarray) -> np.ndarray:
    """Evaluate the fitted linear model on new rows."""
    if not fit.ok or fit.coefficients is None:
        raise PredictOnFailedFit("cannot predict from a rank-deficient fit")
    if isinstance(X_new, DesignMatrix):
        if X_new.column_labels != fit.column_labels:
            raise DimensionMismatch(
                f"columns {X_new.column_labels} do not match fit columns "
                f"{fit.column_labels}")
        values = X_new.values
    else:
        values = np.asarray(X_new, dtype=np.float64)
    if values.ndim != 2 or values.shape[1] != len(fit.column_labels):
        raise DimensionMismatch("prediction rows do not match fit dimension")
    return values @ fit.coefficients


# --- Student-t distribution ------------------------------------------------
#
# Two-sided p-value for t with nu dof:  p = I_x(nu/2, 1/2), x = nu/(nu+t^2),
# where I is the regularized incomplete beta function, evaluated with the
# modified Lentz continued fraction (absolute error well below 1e-10).

_CF_EPS = 1e-16
_CF_TINY = 1e-300
_CF_MAX_ITER = 500


def _ln_beta(a: float, b: float) -> float:
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def _beta_cf(a: float, b: float, x: float) -> float:
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _CF_TINY:
        d = _CF_TINY
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    return h


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) for a, b > 0 and x in [0, 1]."""
    if a <= 0.0 or b <= 0.0:
        raise OlsError("incomplete beta requires positive parameters")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (a * math.log(x) + b * math.log1p(-x) - _ln_beta(a, b))
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cf(a, b, x) / a
    return 1.0 - front * _beta_cf(b, a, 1.0 - x) / b


def t_pvalue(t: float, dof: int) -> float:
    """Two-sided p-value of a Student-t statistic."""
    if dof < 1:
        raise InvalidDof(f"dof must be >= 1, got {dof}")
    if math.isinf(t):
        return 0.0
    if math.isnan(t):
        raise OlsError("t statistic is NaN")
    x = dof / (dof + t * t)
    return regularized_incomplete_beta(dof / 2.0, 0.5, x)


def t_critical(alpha: float, dof: int) -> float:
    """Positive t with two-sided p-value ``alpha`` (bisection on the CDF)."""
    if dof < 1:
        raise InvalidDof(f"dof must be >= 1, got {dof}")
    if not 0.0 < alpha < 1.0:
        raise OlsError(f"alpha must be in (0, 1), got {alpha}")
    lo, hi = 0.0, 1.0
    while t_pvalue(hi, dof) > alpha:
        hi *= 2.0
        if hi > 1e12:
            break
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if t_pvalue(mid, dof) > alpha:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-13 * max(1.0, hi):
            break
    return 0.5 * (lo + hi)
