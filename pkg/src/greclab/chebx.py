"""Chebyshev least-squares fitting on [-1, 1], extrapolation and its error bound."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

MAX_DEGREE = 32


class ChebyshevError(ValueError):
    pass


def chebyshev_vandermonde(x, degree: int) -> np.ndarray:
    """Columns ``T_0(x) .. T_degree(x)`` from the three-term recurrence."""
    x = np.asarray(x, dtype=float)
    V = np.empty((x.size, degree + 1))
    V[:, 0] = 1.0
    if degree >= 1:
        V[:, 1] = x
    for n in range(2, degree + 1):
        V[:, n] = 2 * x * V[:, n - 1] - V[:, n - 2]
    return V


def required_samples(degree: int) -> int:
    return max(degree + 1, 4 * degree * degree)


@dataclass(frozen=True)
class ChebyshevExtrapolant:
    coeffs: np.ndarray
    sample_count: int
    residual: float = 0.0
    domain: tuple[float, float] = (-1.0, 1.0)

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    def __call__(self, lam):
        return cheb_eval(self, lam)


def cheb_fit(x, f, degree: int, strict: bool = True) -> ChebyshevExtrapolant:
    """Least-squares Chebyshev coefficients via column-scaled normal equations.

    ``strict`` enforces at least ``4 N^2`` samples, the sampling rule under which
    the extrapolation bound holds.
    """
    x = np.asarray(x, dtype=float)
    f = np.asarray(f, dtype=float)
    if degree < 0 or degree > MAX_DEGREE:
        raise ChebyshevError(f"degree must be in [0, {MAX_DEGREE}]")
    if x.shape != f.shape or x.ndim != 1:
        raise ChebyshevError("x and f must be 1-D of equal length")
    if np.any(np.abs(x) > 1 + 1e-12):
        raise ChebyshevError("samples must lie in [-1, 1]")
    need = required_samples(degree) if strict else degree + 1
    if x.size < need:
        raise ChebyshevError(f"{x.size} samples, need at least {need}")
    V = chebyshev_vandermonde(x, degree)
    scale = np.linalg.norm(V, axis=0)
    Vs = V / scale
    c = np.linalg.solve(Vs.T @ Vs, Vs.T @ f) / scale
    resid = float(np.sqrt(np.mean((V @ c - f) ** 2)))
    return ChebyshevExtrapolant(c, x.size, resid)


def cheb_eval(ext: ChebyshevExtrapolant, lam):
    """Sum ``c_n T_n(lam)`` by the forward recurrence; valid for any real ``lam``."""
    lam_arr = np.asarray(lam, dtype=float)
    t_prev = np.ones_like(lam_arr)
    total = ext.coeffs[0] * t_prev
    if ext.degree >= 1:
        t = lam_arr.copy()
        total = total + ext.coeffs[1] * t
        for c in ext.coeffs[2:]:
            t, t_prev = 2 * lam_arr * t - t_prev, t
            total = total + c * t
    return float(total) if np.ndim(lam) == 0 else total


def extrapolation_range(rho: float) -> tuple[float, float]:
    """Half-open interval ``[1, (rho + 1/rho)/2)``."""
    if not rho > 1:
        raise ChebyshevError(f"rho must exceed 1, got {rho}")
    return 1.0, 0.5 * (rho + 1.0 / rho)


@dataclass(frozen=True)
class BoundInputs:
    rho: float
    Q: float
    eps: float
    n_terms: int
    eta_max: float = 1.0
    C: float = 1.0

    def __post_init__(self):
        if not self.rho > 1:
            raise ChebyshevError("rho must exceed 1")
        if not self.Q > 0:
            raise ChebyshevError("Q must be positive")
        if self.eps < 0:
            raise ChebyshevError("eps must be non-negative")
        if not 0 < self.eta_max <= 1:
            raise ChebyshevError("eta_max must lie in (0, 1]")
        if self.n_terms < 0:
            raise ChebyshevError("n_terms must be non-negative")


def truncation_bound(rho: float, Q: float, n_terms: int) -> float:
    """Remainder bound for one error curve, ``2 Q rho^-N / (rho - 1)``."""
    return 2 * Q * rho ** (-n_terms) / (rho - 1)


def truncation_error(rho: float, Q: float, etas) -> float:
    """Total truncation error ``sum |eta_r|`` times the single-curve remainder bound."""
    etas = np.asarray(etas, dtype=float)
    return truncation_bound(rho, Q, etas.size) * float(np.sum(np.abs(etas)))


@dataclass(frozen=True)
class BoundTerms:
    r: float
    alpha: float
    bound: float
    eps_bar: float
    eps_hat: float


def error_bound(lam: float, inputs: BoundInputs) -> BoundTerms:
    """Stable-extrapolation error bound at ``lam``.

    ``r = (lam + sqrt(lam^2 - 1)) / rho`` and ``alpha = -ln r / ln rho``; the
    bound is ``C Q / (1 - r) ((eps + eps_hat) / Q)^alpha`` with
    ``eps_hat = eps_bar / eta_max`` and ``eps_bar`` the truncation error for
    ``|eta_r| <= 1``. Returns an infinite bound when ``lam`` is at or past the
    right end of the range.
    """
    lo, hi = extrapolation_range(inputs.rho)
    if lam < lo:
        raise ChebyshevError(f"lambda={lam} below the extrapolation range")
    rho = inputs.rho
    r = (lam + math.sqrt(lam * lam - 1)) / rho
    alpha = -math.log(r) / math.log(rho)
    eps_bar = truncation_bound(rho, inputs.Q, inputs.n_terms) * inputs.n_terms
    eps_hat = eps_bar / inputs.eta_max
    if r >= 1:
        return BoundTerms(r, alpha, math.inf, eps_bar, eps_hat)
    total = inputs.eps + eps_hat
    bound = inputs.C * inputs.Q / (1 - r) * (total / inputs.Q) ** alpha
    return BoundTerms(r, alpha, bound, eps_bar, eps_hat)


def bernstein_ellipse(rho: float, n: int = 4096) -> np.ndarray:
    """Points on the boundary of E_rho (foci +-1, semi-axis sum rho)."""
    t = np.linspace(0, 2 * np.pi, n, endpoint=False)
    z = rho * np.exp(1j * t)
    return 0.5 * (z + 1 / z)


def ellipse_max_modulus(f: Callable, rho: float, n: int = 4096) -> float:
    """max |f| over E_rho, taken on the boundary (maximum modulus principle)."""
    return float(np.max(np.abs(f(bernstein_ellipse(rho, n)))))


def singularity_rho(z0: complex) -> float:
    """Largest ellipse parameter for which a singularity at ``z0`` stays outside E_rho."""
    w = z0 + np.sqrt(z0 - 1 + 0j) * np.sqrt(z0 + 1 + 0j)
    return float(max(abs(w), 1 / abs(w)))


@dataclass
class StabilityProbe:
    lam: float
    r: float
    alpha: float
    bound: float
    observed: float
    flagged: bool


@dataclass
class StabilityReport:
    rho: float
    N: int
    M: int
    eps: float
    Q: float
    C: float
    probes: list[StabilityProbe] = field(default_factory=list)

    @property
    def any_flagged(self) -> bool:
        return any(p.flagged for p in self.probes)

    def to_dict(self) -> dict:
        return {
            "rho": self.rho, "N": self.N, "M": self.M, "eps": self.eps,
            "probes": [{"lambda": p.lam, "r": p.r, "alpha": p.alpha, "bound": p.bound,
                        "observed": p.observed} for p in self.probes],
        }


def stability_experiment(f: Callable, rho: float, N: int, eps_noise: float, lambdas,
                         C: float = 10.0, seed: int = 0, Q: float | None = None,
                         reference: Callable | None = None) -> StabilityReport:
    """Fit ``f`` on ``4 N^2`` noisy equispaced samples and compare with the bound.

    ``f`` must accept complex arrays when ``Q`` is not given (it is then the
    maximum of ``|f|`` on the ellipse). ``reference`` evaluates the true function
    at the probes; it defaults to ``f``.
    """
    lo, hi = extrapolation_range(rho)
    lambdas = np.atleast_1d(np.asarray(lambdas, dtype=float))
    if np.any(lambdas < lo) or np.any(lambdas >= hi):
        raise ChebyshevError(f"probe points must lie in [{lo}, {hi})")
    M = required_samples(N)
    x = np.linspace(-1, 1, M)
    rng = np.random.Generator(np.random.PCG64(seed))
    samples = np.real(f(x)) + eps_noise * rng.uniform(-1, 1, M)
    ext = cheb_fit(x, samples, N)
    if Q is None:
        Q = ellipse_max_modulus(f, rho)
    inputs = BoundInputs(rho=rho, Q=Q, eps=eps_noise, n_terms=N, eta_max=1.0, C=C)
    ref = reference or f
    report = StabilityReport(rho, N, M, eps_noise, Q, C)
    for lam in lambdas:
        terms = error_bound(float(lam), inputs)
        observed = abs(cheb_eval(ext, float(lam)) - float(np.real(ref(float(lam)))))
        report.probes.append(StabilityProbe(float(lam), terms.r, terms.alpha, terms.bound,
                                            observed, observed > terms.bound))
    return report


class ChebyshevExtrapolator(RegressorMixin, BaseEstimator):
    """Estimator form of :func:`cheb_fit` / :func:`cheb_eval` on a single feature."""

    def __init__(self, degree: int = 8, strict: bool = True):
        self.degree = degree
        self.strict = strict

    def fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        if X.shape[1] != 1:
            raise ChebyshevError("one input feature expected")
        self.extrapolant_ = cheb_fit(X[:, 0], y, self.degree, self.strict)
        self.coef_ = self.extrapolant_.coeffs
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self, "extrapolant_")
        X = check_array(X)
        return cheb_eval(self.extrapolant_, X[:, 0])
