"""Observable curves sampled on a lambda grid, and their CSV form."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class CurveError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Curve:
    lambdas: np.ndarray
    values: np.ndarray
    stderrs: np.ndarray | None = None
    label: str = "Noisy"

    def __post_init__(self):
        lam = np.asarray(self.lambdas, dtype=float)
        val = np.asarray(self.values, dtype=float)
        if lam.ndim != 1 or lam.shape != val.shape:
            raise CurveError("lambdas and values must be 1-D of equal length")
        if lam.size > 1 and np.any(np.diff(lam) <= 0):
            raise CurveError("lambdas must be strictly increasing")
        if not np.all(np.isfinite(val)):
            raise CurveError("curve values must be finite")
        object.__setattr__(self, "lambdas", lam)
        object.__setattr__(self, "values", val)
        if self.stderrs is not None:
            se = np.asarray(self.stderrs, dtype=float)
            if se.shape != val.shape:
                raise CurveError("stderrs must match values")
            object.__setattr__(self, "stderrs", se)

    def __len__(self):
        return self.lambdas.size

    def restrict(self, lambdas) -> "Curve":
        """Sub-curve at the given grid points (each must be on this curve's grid)."""
        lambdas = np.asarray(lambdas, dtype=float)
        idx = np.searchsorted(self.lambdas, lambdas)
        idx = np.clip(idx, 0, len(self) - 1)
        if not np.allclose(self.lambdas[idx], lambdas, rtol=0, atol=1e-12):
            raise CurveError("requested lambdas are not on the curve grid")
        se = None if self.stderrs is None else self.stderrs[idx]
        return Curve(self.lambdas[idx], self.values[idx], se, self.label)

    def relabel(self, label: str) -> "Curve":
        return Curve(self.lambdas, self.values, self.stderrs, label)


def same_grid(curves: list[Curve]) -> np.ndarray:
    grid = curves[0].lambdas
    for c in curves[1:]:
        if c.lambdas.shape != grid.shape or not np.array_equal(c.lambdas, grid):
            raise CurveError("curves do not share a grid")
    return grid


def rmse(a: Curve, b: Curve, lambdas=None) -> float:
    if lambdas is not None:
        a, b = a.restrict(lambdas), b.restrict(lambdas)
    same_grid([a, b])
    return float(np.sqrt(np.mean((a.values - b.values) ** 2)))


def _fmt(x: float) -> str:
    return repr(float(x))


def curves_to_csv(curves: list[Curve]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["lambda", "value", "stderr", "label"])
    for c in curves:
        for i in range(len(c)):
            se = "" if c.stderrs is None else _fmt(c.stderrs[i])
            w.writerow([_fmt(c.lambdas[i]), _fmt(c.values[i]), se, c.label])
    return buf.getvalue()


def write_csv(path: str | Path, curves: Curve | list[Curve]) -> None:
    if isinstance(curves, Curve):
        curves = [curves]
    Path(path).write_text(curves_to_csv(curves), encoding="utf-8")


def read_csv(path: str | Path) -> list[Curve]:
    """Curves in file order, one per distinct label."""
    rows: dict[str, list[tuple[float, float, float | None]]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["lambda", "value", "stderr", "label"]:
            raise CurveError(f"bad curve CSV header in {path}: {reader.fieldnames}")
        for r in reader:
            se = float(r["stderr"]) if r["stderr"] else None
            rows.setdefault(r["label"], []).append((float(r["lambda"]), float(r["value"]), se))
    out = []
    for label, pts in rows.items():
        lam, val, se = zip(*pts)
        stderrs = None if any(s is None for s in se) else np.array(se)
        out.append(Curve(np.array(lam), np.array(val), stderrs, label))
    return out


def grid_union(*grids) -> np.ndarray:
    pts = np.concatenate([np.asarray(g, dtype=float) for g in grids])
    pts = np.round(pts, 12)
    return np.unique(pts)


def nonfinite(*xs) -> bool:
    return any(not math.isfinite(float(v)) for x in xs for v in np.ravel(x))
