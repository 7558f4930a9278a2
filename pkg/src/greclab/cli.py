"""Command-line entry point: ``greclab <command> [--config FILE] [--out DIR] ...``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .chebx import ChebyshevError, singularity_rho, stability_experiment
from .harness import pipeline as pl
from .harness.config import ConfigError, ExperimentConfig, config_from_dict, load_config
from .harness.store import ArtifactStore, dump_json, sha256_bytes
from .harness.svg import Series, render
from .ising import IsingError
from .mitigate.curves import CurveError, read_csv
from .mitigate.grec import FitError
from .mitigate.zne import FoldError
from .qsim import SimulationError
from .randomize import RandomizationError, ensemble_manifest

log = logging.getLogger("greclab")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
NUMERIC_ERRORS = (SimulationError, FitError, IsingError, ChebyshevError, FoldError,
                  RandomizationError, CurveError, pl.StageError, np.linalg.LinAlgError,
                  FloatingPointError)


def _put_curves(store: ArtifactStore, name: str, curves, fmt: str):
    text, ext = pl.curve_payload(curves, fmt)
    store.write_text(f"{name}.{ext}", text)


def cmd_oracle(cfg: ExperimentConfig, store: ArtifactStore, opts: dict):
    _put_curves(store, "exact", [pl.exact_curve(cfg.lambda_grid.points())], opts["format"])
    return []


def cmd_simulate(cfg, store, opts):
    sim = pl.Simulator(cfg)
    _put_curves(store, "noisy", [sim.curve(cfg.lambda_grid.points())], opts["format"])
    return []


def cmd_ensemble(cfg, store, opts):
    sim = pl.Simulator(cfg)
    members = sim.ensemble()
    store.write_json("ensemble.json", ensemble_manifest(cfg.plan, members))
    _put_curves(store, "randomized", sim.randomized(cfg.lambda_grid.points(), members), opts["format"])
    return members


def _partial_result(cfg: ExperimentConfig, need_randomized: bool, need_noisy: bool):
    sim = pl.Simulator(cfg)
    grids = pl.build_grids(cfg)
    exact = pl.exact_curve(grids.all)
    members = sim.ensemble() if need_randomized else []
    randomized = sim.randomized(grids.all, members) if need_randomized else []
    noisy = sim.curve(grids.all) if need_noisy else None
    return pl.PipelineResult(grids, exact, noisy, randomized, members)


def cmd_grec(cfg, store, opts):
    from . import mitigate

    res = _partial_result(cfg, True, False)
    _put_curves(store, "exact", [res.exact], opts["format"])
    for region in cfg.regions:
        t, v = res.grids.train[region.name], res.grids.val[region.name]
        fit = mitigate.grec_fit([c.restrict(t) for c in res.randomized], res.exact.restrict(t), box=cfg.box)
        curve = mitigate.grec_apply(fit, res.randomized)
        fit.val_rmse = mitigate.rmse(curve, res.exact, v)
        _put_curves(store, f"grec_{region.name}", [curve], opts["format"])
        store.write_json(f"fit_grec_{region.name}.json", fit.report(pl._fit_config(cfg, region.name)))
    store.write_json("ensemble.json", ensemble_manifest(cfg.plan, res.members))
    return res.members


def cmd_baseline(cfg, store, opts):
    from . import mitigate

    res = _partial_result(cfg, False, True)
    _put_curves(store, "exact", [res.exact], opts["format"])
    _put_curves(store, "noisy", [res.noisy], opts["format"])
    for region in cfg.regions:
        t, v = res.grids.train[region.name], res.grids.val[region.name]
        fit = mitigate.baseline_fit(res.noisy.restrict(t), res.exact.restrict(t))
        curve = fit.apply(res.noisy)
        fit.val_rmse = mitigate.rmse(curve, res.exact, v)
        _put_curves(store, f"baseline_{region.name}", [curve], opts["format"])
        store.write_json(f"fit_baseline_{region.name}.json", fit.report(pl._fit_config(cfg, region.name)))
    return []


def cmd_zne(cfg, store, opts):
    _put_curves(store, "zne", [pl.Simulator(cfg).zne(cfg.lambda_grid.points())], opts["format"])
    return []


def cmd_sweep(cfg, store, opts):
    lines = ["region,n_r,delta,train_rmse,val_rmse"]
    for region in cfg.regions:
        rep = pl.sweep_region(cfg, region.name)
        store.write_json(f"sweep_{region.name}.json", rep.to_dict())
        lines += [f"{region.name},{r.n_r},{r.delta!r},{r.train_rmse!r},{r.val_rmse!r}" for r in rep.rows]
    store.write_text("sweep.csv", "\n".join(lines) + "\n")
    return []


def cmd_run(cfg, store, opts):
    result = pl.run_pipeline(cfg)
    pl.write_pipeline(result, cfg, store, opts["format"])
    return result.members


def cmd_stability(cfg, store, opts):
    pole = opts.get("pole", 3.0)
    rho = opts.get("rho") or 0.8 * singularity_rho(pole)
    degree = opts.get("degree", 8)
    lo_hi = 0.5 * (rho + 1 / rho)
    probes = opts.get("probes") or [float(p) for p in np.linspace(1.0, lo_hi, 8, endpoint=False)]
    f = lambda x: 1.0 / (pole - x)
    rep = stability_experiment(f, rho, degree, opts.get("eps", 1e-8), probes,
                               C=opts.get("C", 10.0), seed=cfg.master_seed)
    store.write_json("stability.json", rep.to_dict())
    return []


COMMANDS = {
    "oracle": cmd_oracle, "simulate": cmd_simulate, "ensemble": cmd_ensemble, "grec": cmd_grec,
    "baseline": cmd_baseline, "zne": cmd_zne, "sweep": cmd_sweep, "stability": cmd_stability,
    "run": cmd_run,
}


def execute(command: str, cfg: ExperimentConfig, out: Path, opts: dict, write_manifest: bool = True):
    with ArtifactStore(out) as store:
        members = COMMANDS[command](cfg, store, opts)
        hashes = dict(store.hashes)
        if write_manifest:
            manifest = pl.manifest_dict(cfg, members, hashes, command)
            manifest["options"] = opts
            store.write_json("manifest.json", manifest)
    return hashes


def cmd_report(in_dir: Path, out: Path) -> list[Path]:
    def load(name):
        path = in_dir / f"{name}.csv"
        return read_csv(path) if path.exists() else []

    exact, noisy = load("exact"), load("noisy")
    if not exact:
        raise ConfigError(f"no exact.csv in {in_dir}")
    base = [Series("exact", exact[0].lambdas, exact[0].values, "line", "black")]
    if noisy:
        base.append(Series("noisy", noisy[0].lambdas, noisy[0].values, "circle", "blue"))
    regions = sorted({p.stem.split("_", 1)[1] for p in in_dir.glob("grec_*.csv")}
                     | {p.stem.split("_", 1)[1] for p in in_dir.glob("baseline_*.csv")})
    styles = [("star", "orange"), ("triangle", "green"), ("star", "red"), ("triangle", "purple")]
    figures = {}
    for method in ("grec", "baseline"):
        series = list(base)
        for i, region in enumerate(regions):
            curves = load(f"{method}_{region}")
            if curves:
                st, col = styles[i % len(styles)]
                series.append(Series(f"mitigated ({region})", curves[0].lambdas, curves[0].values, st, col))
        if len(series) > len(base):
            figures[f"report_{method}.svg"] = render(series, f"{method} mitigation")
    randomized = load("randomized")
    if randomized:
        series = [base[0]] + [Series(c.label, c.lambdas, c.values, "line", "gray") for c in randomized]
        figures["report_randomized.svg"] = render(series, "randomized curves")
    zne = load("zne")
    if zne:
        figures["report_zne.svg"] = render(base + [Series("ZNE", zne[0].lambdas, zne[0].values, "triangle", "red")],
                                           "linear ZNE")
    with ArtifactStore(out) as store:
        return [store.write_text(name, text) for name, text in figures.items()]


def cmd_replay(manifest_path: Path, out: Path) -> dict:
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        command = manifest["command"]
        cfg = config_from_dict(manifest["config"])
    except (OSError, ValueError, KeyError) as e:
        raise ConfigError(f"unreadable manifest {manifest_path}: {e}") from e
    if command not in COMMANDS:
        raise ConfigError(f"manifest command {command!r} cannot be replayed")
    hashes = execute(command, cfg, out, manifest.get("options", {"format": "csv"}), write_manifest=False)
    expected = manifest.get("artifacts", {})
    mismatched = sorted(k for k in expected if hashes.get(k) != expected[k])
    summary = {
        "manifest_sha256": sha256_bytes(manifest_path.read_bytes()),
        "command": command,
        "artifacts": dict(sorted(hashes.items())),
        "mismatched": mismatched,
        "identical": not mismatched,
    }
    (out / "replay.json").write_text(dump_json(summary), encoding="utf-8")
    return summary


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="greclab", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="YAML experiment config")
    common.add_argument("--seed", type=int, help="master seed (also seeds the ensemble)")
    common.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    common.add_argument("--shots", type=int, help="finite-shot sampling instead of exact expectations")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("-v", "--verbose", action="store_true")
    helps = {
        "oracle": "exact magnetization curve", "simulate": "noisy curve",
        "ensemble": "generate and simulate randomized curves", "grec": "GREC fit and apply",
        "baseline": "two-parameter baseline fit", "zne": "linear zero-noise extrapolation",
        "sweep": "hyperparameter table (N_R, delta)", "run": "full pipeline",
        "stability": "Chebyshev extrapolation stability experiment",
    }
    for name, text in helps.items():
        sp = sub.add_parser(name, parents=[common], help=text)
        if name == "stability":
            sp.add_argument("--rho", type=float)
            sp.add_argument("--degree", type=int, default=8)
            sp.add_argument("--eps", type=float, default=1e-8)
            sp.add_argument("--pole", type=float, default=3.0)
            sp.add_argument("--probe", type=float, action="append", dest="probes")
            sp.add_argument("--C", type=float, default=10.0)
    rp = sub.add_parser("report", parents=[common], help="CSV curves to SVG plots")
    rp.add_argument("--in", dest="in_dir", type=Path, help="directory with curve CSVs (default: --out)")
    rr = sub.add_parser("replay", parents=[common], help="re-run a manifest and compare artifacts")
    rr.add_argument("--manifest", type=Path, required=True)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "report":
            for path in cmd_report(args.in_dir or args.out, args.out):
                print(path)
            return EXIT_OK
        if args.command == "replay":
            summary = cmd_replay(args.manifest, args.out)
            print(f"replay {'identical' if summary['identical'] else 'MISMATCH'}: "
                  f"{len(summary['artifacts'])} artifacts")
            return EXIT_OK if summary["identical"] else EXIT_NUMERIC
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg = cfg.with_seed(args.seed)
        if args.shots is not None:
            cfg = cfg.with_shots(args.shots)
        opts = {"format": args.format}
        if args.command == "stability":
            opts.update({k: getattr(args, k) for k in ("rho", "degree", "eps", "pole", "probes", "C")})
        hashes = execute(args.command, cfg, args.out, opts)
        for name in sorted(hashes):
            print(args.out / name)
        return EXIT_OK
    except ConfigError as e:
        log.error("config error: %s", e)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except NUMERIC_ERRORS as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
