"""Command-line interface.

Every subcommand reads one YAML configuration (``--config``; defaults are
used for missing sections), writes CSV tables into ``--out`` and finishes
with a ``manifest.json`` that records the resolved configuration, seed,
input hashes and package versions. ``rerun MANIFEST`` regenerates the same
outputs byte for byte.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from . import circuit_model as cm
from . import config as cfgmod
from . import detection as det
from . import experiment as ex
from . import io as fio
from . import link_model as lm
from . import tag_design as td
from .errors import ConfigError, MetaBackscatterError

OUT_ENV = "METABACKSCATTER_OUT"
SUBCOMMANDS = ("tag", "sweep", "design", "simulate", "detect", "grid", "range")


def _run_tag(cfg: cfgmod.RunConfig, out: Path, args) -> list[Path]:
    geom, mat = cfg.geometry(), cfg.material()
    cp = cm.derive_circuit(geom, mat, cfg.tag.psi_env)
    spec = cm.spectrum(cp, geom, mat, cfg.tag.band, cfg.tag.n_points)
    res = cm.canonical_resonance(cp, geom, mat, cfg.tag.analysis_band, cfg.tag.n_points)
    return [fio.write_spectrum(out / "spectrum.csv", spec),
            fio.write_resonance(out / "resonance.csv", res),
            fio.write_circuit(out / "circuit.csv", cp)]


def _run_sweep(cfg, out, args):
    sw = cfg.sweep
    table = ex.sweep_component(sw.parameter, sw.values, cfg.geometry(), cfg.material(),
                               cfg.tag.psi_env, cfg.tag.analysis_band, cfg.tag.n_points)
    rows = [(r.value, r.f0, r.Q, r.gamma_min) for r in table.rows]
    paths = [fio.write_csv(out / f"trend_{sw.parameter}.csv",
                           ("value", "f0_hz", "q_factor", "gamma_min"), rows)]
    paths.append(fio.write_csv(out / "skipped.csv", ("diagnostic",),
                               [(s,) for s in table.skipped]))
    return paths


def _run_design(cfg, out, args):
    front = td.search(cfg.design_space(), cfg.design.budget, cfg.seed, jobs=args.jobs)
    paths = [fio.write_pareto(out / "pareto.csv", front)]
    paths.append(fio.write_csv(out / "rejected.csv", ("diagnostic",),
                               [(s,) for s in front.rejected]))
    if cfg.design.weights is not None:
        best = td.scalarize(front, cfg.design.weights)
        paths.append(fio.write_pareto(out / "best.csv", td.ParetoSet((best,))))
    return paths


def _run_simulate(cfg, out, args):
    scene = cfg.scene_obj()
    freq = cm.frequency_grid(cfg.scene.band, cfg.scene.n_points)
    noise = cfg.noise.build() if cfg.noise is not None else None
    paths = []
    truth = []
    for i, tag in enumerate(scene.tags):
        seed = ex.unit_seed(cfg.seed, i)
        meas = lm.synth_measurement(scene, i, freq, noise, seed, target_present=True)
        empty = lm.synth_measurement(scene, i, freq, noise, seed, target_present=False)
        paths.append(fio.write_received(out / f"measurement_{i}.csv", meas))
        paths.append(fio.write_received(out / f"empty_{i}.csv", empty))
        truth.append((i, tag.psi_env, ex.true_category(tag.psi_env)))
    psi = np.arange(0.0, 100.0 + 1e-9, cfg.detect.calibration_step)
    if psi[-1] < 100.0:
        psi = np.append(psi, 100.0)
    cal = det.calibrate(cfg.geometry(), cfg.material(), psi, cfg.tag.analysis_band,
                        cfg.tag.n_points)
    paths.append(fio.write_calibration(out / "calibration.csv", cal))
    paths.append(fio.write_csv(out / "truth.csv", ("tag_id", "psi_pct", "category"), truth))
    return paths


def _detect_inputs(input_dir: Path) -> dict:
    files = sorted(input_dir.glob("measurement_*.csv"))
    if not files:
        raise ConfigError(f"{input_dir}: no measurement_*.csv files")
    names = [f.name for f in files]
    names += [f"empty_{f.stem.split('_', 1)[1]}.csv" for f in files]
    names.append("calibration.csv")
    out = {}
    for n in names:
        p = input_dir / n
        if not p.exists():
            raise ConfigError(f"{input_dir}: missing {n}")
        out[n] = fio.sha256_file(p)
    return out


def _run_detect(cfg, out, args):
    input_dir = Path(args.input)
    cal = fio.read_calibration(input_dir / "calibration.csv")
    d = cfg.detect
    ids = sorted(int(f.stem.split("_", 1)[1]) for f in input_dir.glob("measurement_*.csv"))
    results = []
    for i in ids:
        meas = fio.read_received(input_dir / f"measurement_{i}.csv")
        empty = fio.read_received(input_dir / f"empty_{i}.csv")
        results.append(det.detect(meas, empty, cal, tag_id=i, method=d.method,
                                  flatten_wavelength=d.flatten_wavelength,
                                  prominence=d.prominence, pencil_L=d.pencil_L,
                                  sv_threshold=d.sv_threshold))
    return [fio.write_detections(out / "detections.csv", results)]


def _snr_label(snr: Optional[float]) -> str:
    return "inf" if snr is None else fio.fmt(snr)


def _run_grid(cfg, out, args):
    gcfg = cfg.grid_config()
    report = ex.run_grid_experiment(gcfg, jobs=args.jobs)
    paths = [fio.write_calibration(out / "calibration.csv", report.calibration)]
    paths.append(fio.write_csv(
        out / "cells.csv",
        ("snr_db", "trial", "cell", "truth", "category", "confidence", "f0_hz", "q", "flags"),
        [(_snr_label(o.snr_db), o.trial, o.cell, o.truth, o.category, o.confidence,
          o.f0_hat, o.q_hat, ";".join(o.flags)) for o in report.outcomes]))
    paths.append(fio.write_csv(
        out / "accuracy.csv", ("snr_db", "median_accuracy", "mean_accuracy", "infeasible"),
        [(_snr_label(s.snr_db), s.median_accuracy, s.mean_accuracy, s.infeasible)
         for s in report.summaries]))
    conf_rows = []
    for s in report.summaries:
        for t in range(det.N_CATEGORIES):
            conf_rows.append((_snr_label(s.snr_db), t, *s.confusion[t]))
    paths.append(fio.write_csv(
        out / "confusion.csv",
        ("snr_db", "truth") + tuple(f"pred_{k}" for k in range(det.N_CATEGORIES)), conf_rows))
    summary = {
        "cells": gcfg.n_cells,
        "trials": gcfg.trials,
        "accuracy": [{"snr_db": s.snr_db, "median": s.median_accuracy, "mean": s.mean_accuracy,
                      "infeasible": s.infeasible} for s in report.summaries],
        "cell_estimates": [{"cell": k, "category": c, "confidence": p}
                           for k, (c, p) in enumerate(report.cell_estimates(0))],
    }
    paths.append(fio.atomic_write(out / "summary.json",
                                  json.dumps(summary, indent=2, sort_keys=True) + "\n"))
    return paths


def _run_range(cfg, out, args):
    rc = cfg.range
    noise = (cfg.noise or cfgmod.NoiseConfig()).build()
    template = lm.LinkBudget(rc.p_tx[0], rc.sigma, rc.freq, 1.0)
    rows = ex.range_study(template, rc.snr_threshold_db, noise, rc.p_tx, rc.gains,
                          rc.gamma_abs)
    paths = [fio.write_csv(out / "range.csv",
                           ("p_tx_w", "g_tx", "g_rx", "gamma_abs", "r_max_m", "feasible"),
                           [(r.p_tx, r.g_tx, r.g_rx, r.gamma_abs,
                             "" if math.isnan(r.r_max) else r.r_max, r.feasible) for r in rows])]
    summary = {"fourth_root_deviation": ex.fourth_root_deviation(rows),
               "noise_floor_w": noise.floor}
    paths.append(fio.atomic_write(out / "summary.json",
                                  json.dumps(summary, indent=2, sort_keys=True) + "\n"))
    return paths


RUNNERS = {"tag": _run_tag, "sweep": _run_sweep, "design": _run_design,
           "simulate": _run_simulate, "detect": _run_detect, "grid": _run_grid,
           "range": _run_range}


def execute(subcommand: str, cfg: cfgmod.RunConfig, out: Path, args) -> list[Path]:
    """Run one subcommand and write its manifest."""
    out.mkdir(parents=True, exist_ok=True)
    inputs = _detect_inputs(Path(args.input)) if subcommand == "detect" else {}
    paths = RUNNERS[subcommand](cfg, out, args)
    config = cfgmod.config_to_dict(cfg)
    if subcommand == "detect":
        config = {**config, "_input": str(Path(args.input).resolve())}
    paths.append(fio.write_manifest(out, subcommand, config, cfgmod.config_digest(cfg),
                                    cfg.seed, paths, inputs))
    return paths


def _load(args) -> cfgmod.RunConfig:
    if args.config is None:
        data = {"schema_version": cfgmod.SCHEMA_VERSION}
        if args.set:
            data = cfgmod.apply_overrides(data, args.set)
        cfg = cfgmod.validate_config(data)
    else:
        cfg = cfgmod.parse_config(args.config, args.set)
    if args.seed is not None:
        cfg = cfgmod.validate_config({**cfgmod.config_to_dict(cfg), "seed": args.seed})
    return cfg


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="metabackscatter",
                                description="Metamaterial backscatter tag simulator.")
    sub = p.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="YAML run configuration")
    common.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
    common.add_argument("--jobs", type=int, default=1, help="worker processes")
    common.add_argument("--out", type=Path,
                        help=f"output directory (default ${OUT_ENV} or ./out)")
    common.add_argument("--format", choices=("csv",), default="csv")
    common.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override a config key, units required: tag.geometry.d=1.4mm")
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name == "detect":
            sp.add_argument("--input", required=True, help="directory written by 'simulate'")
    rr = sub.add_parser("rerun", help="regenerate outputs from a manifest")
    rr.add_argument("manifest", type=Path)
    rr.add_argument("--out", type=Path, required=True)
    rr.add_argument("--jobs", type=int, default=1)
    return p


def _error(exc: Exception) -> int:
    record = {"error": getattr(exc, "kind", type(exc).__name__), "message": str(exc)}
    if getattr(exc, "violations", None):
        record["violations"] = exc.violations
    sys.stderr.write(json.dumps(record) + "\n")
    return 2


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "rerun":
            man = fio.read_manifest(args.manifest)
            config = dict(man["config"])
            input_dir = config.pop("_input", None)
            cfg = cfgmod.validate_config(config)
            ns = argparse.Namespace(jobs=args.jobs, input=input_dir)
            execute(man["subcommand"], cfg, args.out, ns)
            return 0
        if args.jobs < 1:
            raise ConfigError("--jobs must be >= 1")
        cfg = _load(args)
        out = args.out or Path(os.environ.get(OUT_ENV, "out"))
        execute(args.command, cfg, out, args)
        return 0
    except (MetaBackscatterError, ValueError, OSError) as exc:
        return _error(exc)


if __name__ == "__main__":
    sys.exit(main())
