"""Validation-driven choice of ensemble size and randomization width."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .curves import Curve, rmse
from .grec import FitError, grec_apply, grec_fit

TIE_TOL = 1e-12


@dataclass(frozen=True)
class SweepRow:
    n_r: int
    delta: float
    train_rmse: float
    val_rmse: float


@dataclass(frozen=True)
class SweepReport:
    rows: tuple[SweepRow, ...]
    best: SweepRow

    def to_dict(self) -> dict:
        as_dict = lambda r: {"n_r": r.n_r, "delta": r.delta, "train_rmse": r.train_rmse,
                             "val_rmse": r.val_rmse}
        return {"rows": [as_dict(r) for r in self.rows], "best": as_dict(self.best)}


def sweep_hyperparameters(
    n_r_values: Sequence[int],
    delta_values: Sequence[float],
    train_lambdas,
    val_lambdas,
    exact: Curve,
    curves_for: Callable[[int, float], list[Curve]],
) -> SweepReport:
    """Fit on the training points and score on the validation points for each pair.

    ``curves_for(n_r, delta)`` returns the randomized curves on a grid containing
    both splits. Ties within ``TIE_TOL`` go to the smaller ``n_r``, then the
    smaller ``delta``.
    """
    if not n_r_values or not delta_values:
        raise FitError("candidate lists must be non-empty")
    train = np.asarray(train_lambdas, dtype=float)
    val = np.asarray(val_lambdas, dtype=float)
    if train.size == 0 or val.size == 0:
        raise FitError("training and validation grids must be non-empty")
    if np.intersect1d(np.round(train, 12), np.round(val, 12)).size:
        raise FitError("training and validation grids overlap")
    exact_t = exact.restrict(train)
    rows = []
    for n_r in sorted(set(n_r_values)):
        for delta in sorted(set(delta_values)):
            curves = curves_for(n_r, delta)
            fit = grec_fit([c.restrict(train) for c in curves], exact_t)
            mitigated = grec_apply(fit, [c.restrict(val) for c in curves])
            rows.append(SweepRow(n_r, float(delta), fit.train_rmse,
                                 rmse(mitigated, exact.restrict(val))))
    best = rows[0]
    for r in rows[1:]:
        if r.val_rmse < best.val_rmse - TIE_TOL:
            best = r
    return SweepReport(tuple(rows), best)
