"""Experiment configuration (YAML) with strict key checking."""

from __future__ import annotations

import copy
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import yaml

from ..mitigate.zne import ZneConfig
from ..qsim import NoiseModel, SimulationError
from ..randomize import RandomizationError, RandomizationPlan

GRID_DECIMALS = 12


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class GridSpec:
    min: float = 1.0
    max: float = 3.5
    count: int = 26

    def points(self) -> np.ndarray:
        return np.round(np.linspace(self.min, self.max, self.count), GRID_DECIMALS)


@dataclass(frozen=True)
class Region:
    """Classically accessible range split into training and validation parts."""

    name: str
    train: tuple[float, float]
    val: tuple[float, float]

    @property
    def bounds(self) -> tuple[float, float]:
        return min(self.train[0], self.val[0]), max(self.train[1], self.val[1])

    def train_points(self, count: int) -> np.ndarray:
        return np.round(np.linspace(*self.train, count), GRID_DECIMALS)

    def val_points(self, count: int) -> np.ndarray:
        """Validation points; an endpoint shared with the training range is left out."""
        lo, hi = self.val
        if np.isclose(hi, self.train[0]):
            pts = np.linspace(lo, hi, count + 1)[:-1]
        elif np.isclose(lo, self.train[1]):
            pts = np.linspace(lo, hi, count + 1)[1:]
        else:
            pts = np.linspace(lo, hi, count)
        return np.round(pts, GRID_DECIMALS)


def default_regions() -> tuple[Region, ...]:
    return (
        Region("K1", (1.5, 2.0), (1.0, 1.5)),
        Region("K2", (2.5, 3.0), (3.0, 3.5)),
    )


@dataclass(frozen=True)
class SweepSpec:
    n_r: tuple[int, ...] = (3, 5, 7, 9)
    delta: tuple[float, ...] = (0.05, 0.1, 0.2)


@dataclass(frozen=True)
class ExperimentConfig:
    lambda_grid: GridSpec = field(default_factory=GridSpec)
    regions: tuple[Region, ...] = field(default_factory=default_regions)
    points_per_region: int = 10
    noise: NoiseModel = field(default_factory=NoiseModel)
    plan: RandomizationPlan = field(default_factory=RandomizationPlan)
    zne: ZneConfig = field(default_factory=ZneConfig)
    shots: int | None = None
    master_seed: int = 42
    box: bool = False
    sweep: SweepSpec = field(default_factory=SweepSpec)

    def __post_init__(self):
        g = self.lambda_grid
        if g.count < 2 or not g.max > g.min or g.min < 1:
            raise ConfigError("lambda_grid needs count >= 2, max > min >= 1")
        if self.points_per_region < 2:
            raise ConfigError("points_per_region must be >= 2")
        if self.shots is not None and self.shots < 1:
            raise ConfigError("shots must be positive")
        names = [r.name for r in self.regions]
        if len(set(names)) != len(names):
            raise ConfigError("region names must be unique")
        for r in self.regions:
            lo, hi = r.bounds
            if lo < g.min - 1e-12 or hi > g.max + 1e-12:
                raise ConfigError(f"region {r.name} not inside the lambda grid")
            for a, b in (r.train, r.val):
                if not b > a:
                    raise ConfigError(f"region {r.name}: empty interval [{a}, {b}]")
            overlap = min(r.train[1], r.val[1]) - max(r.train[0], r.val[0])
            if overlap > 1e-12:
                raise ConfigError(f"region {r.name}: training and validation ranges overlap")

    def with_seed(self, seed: int) -> "ExperimentConfig":
        return replace(self, master_seed=seed, plan=replace(self.plan, seed=seed))

    def with_shots(self, shots: int | None) -> "ExperimentConfig":
        return replace(self, shots=shots)

    def to_dict(self) -> dict:
        return {
            "lambda_grid": {"min": self.lambda_grid.min, "max": self.lambda_grid.max,
                            "count": self.lambda_grid.count},
            "regions": [{"name": r.name, "train": list(r.train), "val": list(r.val)}
                        for r in self.regions],
            "points_per_region": self.points_per_region,
            "noise": self.noise.to_dict(),
            "plan": self.plan.to_dict(),
            "zne": self.zne.to_dict(),
            "shots": self.shots,
            "master_seed": self.master_seed,
            "box": self.box,
            "sweep": {"n_r": list(self.sweep.n_r), "delta": list(self.sweep.delta)},
        }


_SECTIONS = {
    "lambda_grid": {"min", "max", "count"},
    "noise": set(NoiseModel().to_dict()),
    "plan": {"n_r", "delta", "n_g", "strategy", "range_mode", "seed"},
    "zne": {"scale_factors", "fold_mode", "fit", "seed"},
    "sweep": {"n_r", "delta"},
}
_TOP = set(_SECTIONS) | {"regions", "points_per_region", "shots", "master_seed", "box"}


def _check_keys(where: str, got: dict, allowed: set):
    if not isinstance(got, dict):
        raise ConfigError(f"{where}: expected a mapping")
    unknown = sorted(set(got) - allowed)
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {', '.join(unknown)}")


def config_from_dict(d: dict | None) -> ExperimentConfig:
    d = copy.deepcopy(d or {})
    _check_keys("config", d, _TOP)
    for name, keys in _SECTIONS.items():
        if name in d:
            _check_keys(name, d[name], keys)
    kw = {}
    try:
        if "lambda_grid" in d:
            kw["lambda_grid"] = GridSpec(**d["lambda_grid"])
        if "regions" in d:
            regions = []
            for i, r in enumerate(d["regions"]):
                _check_keys(f"regions[{i}]", r, {"name", "train", "val"})
                regions.append(Region(str(r["name"]), tuple(map(float, r["train"])),
                                      tuple(map(float, r["val"]))))
            kw["regions"] = tuple(regions)
        if "noise" in d:
            kw["noise"] = NoiseModel(**d["noise"])
        seed = int(d.get("master_seed", 42))
        plan = dict(d.get("plan", {}))
        plan.setdefault("seed", seed)
        kw["plan"] = RandomizationPlan(**plan)
        if "zne" in d:
            z = dict(d["zne"])
            if "scale_factors" in z:
                z["scale_factors"] = tuple(z["scale_factors"])
            kw["zne"] = ZneConfig(**z)
        if "sweep" in d:
            kw["sweep"] = SweepSpec(tuple(int(v) for v in d["sweep"].get("n_r", SweepSpec.n_r)),
                                    tuple(float(v) for v in d["sweep"].get("delta", SweepSpec.delta)))
        for key in ("points_per_region", "shots", "box"):
            if key in d:
                kw[key] = d[key]
        kw["master_seed"] = seed
        return ExperimentConfig(**kw)
    except ConfigError:
        raise
    except (TypeError, ValueError, KeyError, SimulationError, RandomizationError) as e:
        raise ConfigError(str(e)) from e


def load_config(path: str | Path | None) -> ExperimentConfig:
    if path is None:
        return ExperimentConfig()
    try:
        text = Path(path).read_text(encoding="utf-8")
        data = yaml.safe_load(text)
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    except yaml.YAMLError as e:
        raise ConfigError(f"invalid YAML in {path}: {e}") from e
    return config_from_dict(data)
