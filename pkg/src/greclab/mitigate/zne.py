"""Linear zero-noise extrapolation with unitary folding."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..qsim import Circuit, NoiseModel, observable_value
from .curves import Curve

INTERCEPT_CONVENTION = "linear fit v(s) = a + b*s over the scale factors; reported value is a = v(0)"


class FoldError(ValueError):
    pass


class FoldMode(str, enum.Enum):
    GlobalFold = "GlobalFold"
    GateFold = "GateFold"


def default_scale_factors() -> list[float]:
    return [float(s) for s in np.linspace(1.0, 1.9, 9)]


@dataclass(frozen=True)
class ZneConfig:
    scale_factors: tuple[float, ...] = field(default_factory=lambda: tuple(default_scale_factors()))
    fold_mode: FoldMode = FoldMode.GateFold
    fit: str = "Linear"
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "scale_factors", tuple(float(s) for s in self.scale_factors))
        object.__setattr__(self, "fold_mode", FoldMode(self.fold_mode))
        if not self.scale_factors or min(self.scale_factors) < 1:
            raise FoldError("scale factors must be >= 1")
        if self.fit != "Linear":
            raise FoldError(f"only linear extrapolation is supported, got {self.fit!r}")

    def to_dict(self) -> dict:
        return {"scale_factors": list(self.scale_factors), "fold_mode": self.fold_mode.value,
                "fit": self.fit, "seed": self.seed}


def fold_circuit(circuit: Circuit, scale: float, mode: FoldMode | str = FoldMode.GateFold,
                 seed: int = 0) -> tuple[Circuit, float]:
    """Fold ``circuit`` to roughly ``scale`` times its gate count.

    Returns the folded circuit and the achieved scale ``(k + 2d)/k``. Gate folding
    picks ``d = round(k (scale - 1) / 2)`` gates (without replacement per full pass)
    and replaces each ``G`` by ``G G^dag G``. Global folding needs an odd integer
    scale and appends ``(U^dag U)`` repetitions.
    """
    mode = FoldMode(mode)
    if not scale >= 1:
        raise FoldError(f"scale must be >= 1, got {scale}")
    k = len(circuit.gates)
    if k == 0:
        return circuit, 1.0
    if mode is FoldMode.GlobalFold:
        s = round(scale)
        if abs(scale - s) > 1e-12 or s % 2 == 0:
            raise FoldError(f"global folding needs an odd integer scale, got {scale}")
        inv = tuple(g.inverse() for g in reversed(circuit.gates))
        gates = circuit.gates + (inv + circuit.gates) * ((s - 1) // 2)
        return Circuit(circuit.width, gates, circuit.lam), float(s)
    d = math.floor(k * (scale - 1) / 2 + 0.5)
    counts = np.full(k, d // k)
    rng = np.random.Generator(np.random.PCG64(seed))
    counts[rng.choice(k, size=d % k, replace=False)] += 1
    gates = []
    for g, c in zip(circuit.gates, counts):
        gates.append(g)
        gates.extend((g.inverse(), g) * int(c))
    return Circuit(circuit.width, tuple(gates), circuit.lam), (k + 2 * d) / k


@dataclass(frozen=True)
class LinearExtrapolation:
    intercept: float
    slope: float
    scales: tuple[float, ...]
    values: tuple[float, ...]


def linear_extrapolate(scales, values) -> LinearExtrapolation:
    x = np.asarray(scales, dtype=float)
    y = np.asarray(values, dtype=float)
    if x.size < 2 or np.ptp(x) == 0:
        return LinearExtrapolation(float(np.mean(y)), 0.0, tuple(x), tuple(y))
    xm = x.mean()
    slope = float(np.sum((x - xm) * (y - y.mean())) / np.sum((x - xm) ** 2))
    return LinearExtrapolation(float(y.mean() - slope * xm), slope, tuple(x), tuple(y))


def zne_point(circuit: Circuit, noise: NoiseModel, config: ZneConfig,
              shots: int | None = None, seed: int = 0) -> LinearExtrapolation:
    scales, values = [], []
    for i, s in enumerate(config.scale_factors):
        folded, achieved = fold_circuit(circuit, s, config.fold_mode, config.seed)
        v, _ = observable_value(folded, noise, shots, seed + i)
        scales.append(achieved)
        values.append(v)
    return linear_extrapolate(scales, values)


def zne_run(builder: Callable[[float], Circuit], noise: NoiseModel, config: ZneConfig,
            grid, shots: int | None = None, seed: int = 0) -> Curve:
    """ZNE estimate per lambda. Regression uses the achieved (not nominal) scales."""
    grid = np.asarray(grid, dtype=float)
    vals = [zne_point(builder(lam), noise, config, shots, seed + 1000 * j).intercept
            for j, lam in enumerate(grid)]
    return Curve(grid, np.array(vals), label="ZNE")
