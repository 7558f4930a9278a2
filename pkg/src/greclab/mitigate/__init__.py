from .curves import Curve, CurveError, read_csv, rmse, write_csv
from .grec import (
    BaselineFit,
    BaselineRegressor,
    FitError,
    GrecFit,
    GrecRegressor,
    baseline_fit,
    grec_apply,
    grec_fit,
    solve_grec,
)
from .sweep import SweepReport, SweepRow, sweep_hyperparameters
from .zne import (
    INTERCEPT_CONVENTION,
    FoldError,
    FoldMode,
    ZneConfig,
    fold_circuit,
    linear_extrapolate,
    zne_run,
)
