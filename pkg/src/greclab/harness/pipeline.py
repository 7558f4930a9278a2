"""End-to-end experiment: exact, noisy, randomized, GREC, baseline and ZNE curves."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from typing import Callable

import numpy as np

from .. import __version__
from .. import mitigate
from ..ising import SIGN_CONVENTION, exact_magnetization, ground_state_builder
from ..mitigate.curves import Curve, curves_to_csv, grid_union, rmse
from ..mitigate.zne import INTERCEPT_CONVENTION, zne_point
from ..qsim import Circuit, NoiseModel, observable_value
from ..randomize import (
    EnsembleMember,
    RandomizationPlan,
    ensemble_manifest,
    generate_ensemble,
    splice,
)
from .config import ExperimentConfig
from .store import ArtifactStore, dump_json

THREADS_ENV = "GREC_LAB_THREADS"


class StageError(RuntimeError):
    """A numerical failure annotated with the pipeline stage and point."""

    def __init__(self, stage: str, lam: float | None, member: int | None, cause: Exception):
        where = [f"stage={stage}"]
        if lam is not None:
            where.append(f"lambda={lam:g}")
        if member is not None:
            where.append(f"member={member}")
        super().__init__(f"{', '.join(where)}: {cause}")
        self.cause = cause


def worker_count() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return min(4, os.cpu_count() or 1)


def _pmap(fn: Callable, items: list) -> list:
    n = worker_count()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def _point_seed(master: int, stream: int, member: int, j: int) -> int:
    return int(np.random.SeedSequence([master, stream, member, j]).generate_state(1)[0])


@dataclass
class Grids:
    full: np.ndarray
    train: dict[str, np.ndarray]
    val: dict[str, np.ndarray]
    all: np.ndarray


def build_grids(config: ExperimentConfig) -> Grids:
    full = config.lambda_grid.points()
    train = {r.name: r.train_points(config.points_per_region) for r in config.regions}
    val = {r.name: r.val_points(config.points_per_region) for r in config.regions}
    return Grids(full, train, val, grid_union(full, *train.values(), *val.values()))


def exact_curve(grid) -> Curve:
    grid = np.asarray(grid, dtype=float)
    return Curve(grid, np.array([exact_magnetization(l) for l in grid]), label="Exact")


class Simulator:
    """Noisy evaluation of circuit families over lambda grids for one config."""

    def __init__(self, config: ExperimentConfig, builder: Callable[[float], Circuit] = ground_state_builder):
        self.config = config
        self.builder = builder

    def curve(self, grid, member: EnsembleMember | None = None, label: str = "Noisy",
              noise: NoiseModel | None = None) -> Curve:
        cfg = self.config
        noise = cfg.noise if noise is None else noise
        idx = 0 if member is None else member.index
        grid = np.asarray(grid, dtype=float)

        def point(j: int):
            lam = float(grid[j])
            try:
                circ = self.builder(lam)
                if member is not None:
                    circ = splice(circ, member)
                return observable_value(circ, noise, cfg.shots,
                                        _point_seed(cfg.master_seed, 1, idx, j))
            except Exception as e:  # annotate and re-raise
                raise StageError("simulate", lam, member.index if member else None, e) from e

        results = _pmap(point, list(range(grid.size)))
        values = np.array([v for v, _ in results])
        stderrs = None if cfg.shots is None else np.array([s for _, s in results])
        return Curve(grid, values, stderrs, label)

    def ensemble(self, plan: RandomizationPlan | None = None) -> list[EnsembleMember]:
        plan = plan or self.config.plan
        return generate_ensemble(self.builder, plan, self.config.lambda_grid.min)

    def randomized(self, grid, members: list[EnsembleMember]) -> list[Curve]:
        return [self.curve(grid, m, label=f"Randomized({m.index})") for m in members]

    def zne(self, grid) -> Curve:
        cfg = self.config
        grid = np.asarray(grid, dtype=float)

        def point(j: int):
            lam = float(grid[j])
            try:
                return zne_point(self.builder(lam), cfg.noise, cfg.zne, cfg.shots,
                                 _point_seed(cfg.master_seed, 2, 0, j)).intercept
            except Exception as e:
                raise StageError("zne", lam, None, e) from e

        return Curve(grid, np.array(_pmap(point, list(range(grid.size)))), label="ZNE")


@dataclass
class PipelineResult:
    grids: Grids
    exact: Curve
    noisy: Curve
    randomized: list[Curve]
    members: list[EnsembleMember]
    grec: dict[str, Curve] = field(default_factory=dict)
    grec_fits: dict = field(default_factory=dict)
    baseline: dict[str, Curve] = field(default_factory=dict)
    baseline_fits: dict = field(default_factory=dict)
    zne: Curve | None = None
    rmse_rows: list[dict] = field(default_factory=list)


def fit_regions(result: PipelineResult, config: ExperimentConfig) -> None:
    """GREC and baseline fits per region. Fits only ever see training points."""
    g = result.grids
    for region in config.regions:
        t, v = g.train[region.name], g.val[region.name]
        exact_t = result.exact.restrict(t)
        fit = mitigate.grec_fit([c.restrict(t) for c in result.randomized], exact_t, box=config.box)
        mitigated = mitigate.grec_apply(fit, result.randomized)
        fit.val_rmse = rmse(mitigated, result.exact, v)
        result.grec[region.name] = mitigated
        result.grec_fits[region.name] = fit
        bfit = mitigate.baseline_fit(result.noisy.restrict(t), exact_t)
        bcurve = bfit.apply(result.noisy)
        bfit.val_rmse = rmse(bcurve, result.exact, v)
        result.baseline[region.name] = bcurve
        result.baseline_fits[region.name] = bfit


def rmse_table(result: PipelineResult, config: ExperimentConfig) -> list[dict]:
    g = result.grids
    rows = []
    for region in config.regions:
        candidates = [("raw", result.noisy), ("baseline", result.baseline.get(region.name)),
                      ("grec", result.grec.get(region.name)), ("zne", result.zne)]
        for method, curve in candidates:
            if curve is None:
                continue
            rows.append({
                "method": method,
                "region": region.name,
                "rmse_train": rmse(curve, result.exact, g.train[region.name]),
                "rmse_val": rmse(curve, result.exact, g.val[region.name]),
                "rmse_full": rmse(curve, result.exact, g.full),
            })
    return rows


def rmse_csv(rows: list[dict]) -> str:
    lines = ["method,region,rmse_train,rmse_val,rmse_full"]
    for r in rows:
        lines.append(f"{r['method']},{r['region']},{r['rmse_train']!r},{r['rmse_val']!r},{r['rmse_full']!r}")
    return "\n".join(lines) + "\n"


def run_pipeline(config: ExperimentConfig, with_zne: bool = True,
                 builder: Callable[[float], Circuit] = ground_state_builder) -> PipelineResult:
    sim = Simulator(config, builder)
    grids = build_grids(config)
    exact = exact_curve(grids.all)
    noisy = sim.curve(grids.all)
    members = sim.ensemble()
    randomized = sim.randomized(grids.all, members)
    result = PipelineResult(grids, exact, noisy, randomized, members)
    try:
        fit_regions(result, config)
    except ValueError as e:
        raise StageError("fit", None, None, e) from e
    if with_zne:
        result.zne = sim.zne(grids.all)
    result.rmse_rows = rmse_table(result, config)
    return result


def manifest_dict(config: ExperimentConfig, members: list[EnsembleMember], hashes: dict[str, str],
                  command: str) -> dict:
    return {
        "tool": "greclab",
        "version": __version__,
        "command": command,
        "created_utc": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "config": config.to_dict(),
        "ensemble": ensemble_manifest(config.plan, members),
        "sign_convention": SIGN_CONVENTION,
        "zne_intercept_convention": INTERCEPT_CONVENTION,
        "seeds": {"master": config.master_seed, "plan": config.plan.seed, "zne_fold": config.zne.seed},
        "artifacts": dict(sorted(hashes.items())),
    }


def curve_payload(curves: list[Curve], fmt: str) -> tuple[str, str]:
    """Serialized curves and file extension for ``fmt`` in {csv, json}."""
    if fmt == "json":
        payload = [{"label": c.label, "lambda": c.lambdas.tolist(), "value": c.values.tolist(),
                    "stderr": None if c.stderrs is None else c.stderrs.tolist()} for c in curves]
        return dump_json(payload), "json"
    return curves_to_csv(curves), "csv"


def write_pipeline(result: PipelineResult, config: ExperimentConfig, store: ArtifactStore,
                   fmt: str = "csv") -> None:
    def put(name: str, curves: list[Curve]):
        text, ext = curve_payload(curves, fmt)
        store.write_text(f"{name}.{ext}", text)

    put("exact", [result.exact])
    put("noisy", [result.noisy])
    put("randomized", result.randomized)
    for name, curve in result.grec.items():
        put(f"grec_{name}", [curve])
        store.write_json(f"fit_grec_{name}.json",
                         result.grec_fits[name].report(_fit_config(config, name)))
    for name, curve in result.baseline.items():
        put(f"baseline_{name}", [curve])
        store.write_json(f"fit_baseline_{name}.json",
                         result.baseline_fits[name].report(_fit_config(config, name)))
    if result.zne is not None:
        put("zne", [result.zne])
    store.write_text("rmse.csv", rmse_csv(result.rmse_rows))
    store.write_json("ensemble.json", ensemble_manifest(config.plan, result.members))


def _fit_config(config: ExperimentConfig, region: str) -> dict:
    r = next(r for r in config.regions if r.name == region)
    return {"region": region, "train": list(r.train), "val": list(r.val),
            "points_per_region": config.points_per_region, "box": config.box,
            "n_r": config.plan.n_r, "delta": config.plan.delta}


def sweep_region(config: ExperimentConfig, region_name: str):
    """Hyperparameter table for one region, simulating each delta once at max n_r."""
    sim = Simulator(config)
    grids = build_grids(config)
    t, v = grids.train[region_name], grids.val[region_name]
    grid = grid_union(t, v)
    exact = exact_curve(grid)
    cache: dict[float, list[Curve]] = {}
    n_max = max(config.sweep.n_r)

    def curves_for(n_r: int, delta: float) -> list[Curve]:
        if delta not in cache:
            plan = replace(config.plan, n_r=n_max, delta=delta)
            cache[delta] = sim.randomized(grid, sim.ensemble(plan))
        return cache[delta][:n_r]

    return mitigate.sweep_hyperparameters(config.sweep.n_r, config.sweep.delta, t, v, exact, curves_for)
