"""Constrained regression of randomized curves onto reference data.

The fitted observable is ``sum_r eta_r A_r(lam) + eta_0`` with ``sum_r eta_r = 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import null_space
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .curves import Curve, CurveError, same_grid


class FitError(ValueError):
    pass


def constrained_lstsq(D: np.ndarray, y: np.ndarray, c: np.ndarray, d: float,
                      rcond: float | None = None) -> np.ndarray:
    """Minimum-norm minimizer of ``||D z - y||`` subject to ``c . z = d``.

    Null-space elimination: ``z = z_p + N w`` with ``z_p`` the minimum-norm point
    of the constraint plane and ``N`` an orthonormal basis of ``c``'s complement.
    ``z_p`` is orthogonal to ``range(N)``, so the minimum-norm ``w`` yields the
    minimum-norm ``z``.
    """
    c = np.asarray(c, dtype=float)
    z_p = c * (d / (c @ c))
    N = null_space(c[None, :])
    if N.shape[1] == 0:
        return z_p
    w = np.linalg.lstsq(D @ N, y - D @ z_p, rcond=rcond)[0]
    return z_p + N @ w


def kkt_residual(D: np.ndarray, y: np.ndarray, c: np.ndarray, z: np.ndarray) -> float:
    """Infinity norm of the stationarity residual with the optimal multiplier."""
    g = D.T @ (D @ z - y)
    mu = -(c @ g) / (c @ c)
    return float(np.max(np.abs(g + mu * c)))


@dataclass
class GrecFit:
    eta0: float
    etas: np.ndarray
    constraint_residual: float
    train_rmse: float
    box_violations: int = 0
    kkt_residual: float = 0.0
    val_rmse: float | None = None
    train_lambdas: np.ndarray = field(default_factory=lambda: np.empty(0))

    @property
    def n_r(self) -> int:
        return self.etas.size

    def predict_values(self, A: np.ndarray) -> np.ndarray:
        return A @ self.etas + self.eta0

    def report(self, config: dict | None = None, method: str = "grec") -> dict:
        return {
            "method": method,
            "eta0": float(self.eta0),
            "etas": [float(e) for e in self.etas],
            "train_rmse": float(self.train_rmse),
            "val_rmse": None if self.val_rmse is None else float(self.val_rmse),
            "constraint_residual": float(self.constraint_residual),
            "box_violations": int(self.box_violations),
            "config": config or {},
        }


def _design(randomized: list[Curve], exact: Curve) -> tuple[np.ndarray, np.ndarray]:
    if not randomized:
        raise FitError("empty ensemble")
    try:
        grid = same_grid(list(randomized) + [exact])
    except CurveError as e:
        raise FitError(str(e)) from e
    if grid.size < 2:
        raise FitError("training grid needs at least 2 points")
    A = np.column_stack([c.values for c in randomized])
    return A, exact.values


def _weights(randomized: list[Curve], exact: Curve) -> np.ndarray:
    """Inverse standard deviation per grid point from the curves' stderrs."""
    var = np.zeros(len(exact))
    ses = [c.stderrs for c in randomized if c.stderrs is not None]
    if ses:
        var = var + np.mean(np.square(ses), axis=0)
    if exact.stderrs is not None:
        var = var + exact.stderrs**2
    if not np.any(var > 0):
        return np.ones(len(exact))
    return 1.0 / np.sqrt(np.where(var > 0, var, var[var > 0].min()))


def solve_grec(A: np.ndarray, y: np.ndarray, box: bool = False,
               weights: np.ndarray | None = None, rcond: float | None = None) -> GrecFit:
    """Array-level GREC solve. Columns of ``A`` are randomized curves."""
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float)
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(y))):
        raise FitError("non-finite inputs")
    n, n_r = A.shape
    if n_r == 0:
        raise FitError("empty ensemble")
    if n < 2:
        raise FitError("training grid needs at least 2 points")
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
    D = np.column_stack([np.ones(n), A]) * w[:, None]
    yw = y * w
    c = np.r_[0.0, np.ones(n_r)]
    z = constrained_lstsq(D, yw, c, 1.0, rcond)
    kkt = kkt_residual(D, yw, c, z)
    violations = int(np.sum(np.abs(z[1:]) >= 1.0))
    if box and np.any(np.abs(z[1:]) > 1.0):
        z = _box_pass(D, yw, z, rcond)
        kkt = float("nan")
    etas = z[1:]
    resid = A @ etas + z[0] - y
    return GrecFit(
        eta0=float(z[0]),
        etas=etas,
        constraint_residual=float(abs(etas.sum() - 1.0)),
        train_rmse=float(np.sqrt(np.mean(resid**2))),
        box_violations=violations,
        kkt_residual=kkt,
    )


def _box_pass(D: np.ndarray, y: np.ndarray, z: np.ndarray, rcond) -> np.ndarray:
    """Clamp weights with |eta| > 1 to +-1 and re-solve the remaining ones once."""
    etas = z[1:]
    clamped = np.abs(etas) > 1.0
    fixed = np.sign(etas[clamped])
    free = np.flatnonzero(~clamped)
    out = np.empty_like(z)
    out[1:][clamped] = fixed
    rhs = y - D[:, 1:][:, clamped] @ fixed
    Df = np.column_stack([D[:, 0], D[:, 1:][:, free]])
    cf = np.r_[0.0, np.ones(free.size)]
    if free.size == 0:
        out[0] = np.linalg.lstsq(D[:, :1], rhs, rcond=rcond)[0][0]
        return out
    zf = constrained_lstsq(Df, rhs, cf, 1.0 - fixed.sum(), rcond)
    out[0] = zf[0]
    out[1:][free] = zf[1:]
    return out


def grec_fit(randomized: list[Curve], exact: Curve, box: bool = False,
             weighted: bool = False, rcond: float | None = None) -> GrecFit:
    """Fit the GREC weights on the training grid shared by all curves."""
    A, y = _design(randomized, exact)
    weights = _weights(randomized, exact) if weighted else None
    fit = solve_grec(A, y, box=box, weights=weights, rcond=rcond)
    fit.train_lambdas = exact.lambdas.copy()
    return fit


def grec_apply(fit: GrecFit, randomized_full: list[Curve]) -> Curve:
    if len(randomized_full) != fit.n_r:
        raise FitError(f"fit has {fit.n_r} weights, got {len(randomized_full)} curves")
    try:
        grid = same_grid(list(randomized_full))
    except CurveError as e:
        raise FitError(str(e)) from e
    A = np.column_stack([c.values for c in randomized_full])
    return Curve(grid, fit.predict_values(A), label="Mitigated")


@dataclass
class BaselineFit:
    eta0: float
    eta1: float
    train_rmse: float
    mode: str = "affine"
    val_rmse: float | None = None

    def apply(self, noisy: Curve) -> Curve:
        return Curve(noisy.lambdas, self.eta1 * noisy.values + self.eta0, label="Mitigated")

    def report(self, config: dict | None = None) -> dict:
        return {
            "method": f"baseline-{self.mode}",
            "eta0": float(self.eta0),
            "etas": [float(self.eta1)],
            "train_rmse": float(self.train_rmse),
            "val_rmse": None if self.val_rmse is None else float(self.val_rmse),
            "constraint_residual": 0.0,
            "box_violations": 0,
            "config": config or {},
        }


def baseline_fit(noisy: Curve, exact: Curve, mode: str = "affine") -> BaselineFit:
    """Least squares ``exact ~ eta1 * noisy + eta0``.

    ``mode="offset"`` pins ``eta1 = 1`` (the ensemble-free GREC limit).
    """
    same_grid([noisy, exact])
    if len(exact) < 2:
        raise FitError("training grid needs at least 2 points")
    x, y = noisy.values, exact.values
    if mode == "offset":
        eta1, eta0 = 1.0, float(np.mean(y - x))
    elif mode == "affine":
        if np.ptp(x) == 0:
            raise FitError("constant noisy curve: affine fit is singular")
        D = np.column_stack([x, np.ones_like(x)])
        eta1, eta0 = (float(v) for v in np.linalg.lstsq(D, y, rcond=None)[0])
    else:
        raise FitError(f"unknown baseline mode {mode!r}")
    resid = eta1 * x + eta0 - y
    return BaselineFit(eta0, eta1, float(np.sqrt(np.mean(resid**2))), mode)


class GrecRegressor(RegressorMixin, BaseEstimator):
    """Estimator wrapper: ``X`` holds one randomized curve per column, ``y`` the reference.

    >>> import numpy as np
    >>> X = np.array([[1.0], [2.0], [3.0]]) + 0.07
    >>> GrecRegressor().fit(X, [1.0, 2.0, 3.0]).predict(X).round(12).tolist()
    [1.0, 2.0, 3.0]
    """

    def __init__(self, box: bool = False, rcond: float | None = None):
        self.box = box
        self.rcond = rcond

    def fit(self, X, y, sample_weight=None):
        X, y = check_X_y(X, y, y_numeric=True)
        w = None if sample_weight is None else np.sqrt(np.asarray(sample_weight, dtype=float))
        self.fit_ = solve_grec(X, y, box=self.box, weights=w, rcond=self.rcond)
        self.coef_ = self.fit_.etas
        self.intercept_ = self.fit_.eta0
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise FitError(f"expected {self.n_features_in_} curves, got {X.shape[1]}")
        return X @ self.coef_ + self.intercept_


class BaselineRegressor(RegressorMixin, BaseEstimator):
    """Two-parameter (``mode="affine"``) or offset-only fit on a single noisy column."""

    def __init__(self, mode: str = "affine"):
        self.mode = mode

    def fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        if X.shape[1] != 1:
            raise FitError("baseline takes exactly one noisy curve")
        grid = np.arange(len(y), dtype=float)
        self.fit_ = baseline_fit(Curve(grid, X[:, 0]), Curve(grid, y), self.mode)
        self.coef_ = np.array([self.fit_.eta1])
        self.intercept_ = self.fit_.eta0
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X)
        return X[:, 0] * self.coef_[0] + self.intercept_
