"""File formats: CSV tables, run manifests and atomic writes.

CSV files always carry a header row, use ``.`` as decimal separator and LF
line endings. Floats are written with ``repr`` (shortest round-trip form),
so rewriting the same data yields byte-identical files.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import platform
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import __version__
from .circuit_model import CanonicalResonance, CircuitParameters, ScatteringSpectrum
from .detection import DetectionResult, HumidityCalibration
from .errors import ConfigError
from .link_model import ReceivedSpectrum
from .tag_design import ParetoSet

SPECTRUM_HEADER = ("freq_hz", "gamma_re", "gamma_im", "gamma_abs")
PARETO_HEADER = ("d", "s", "h", "w", "l", "delta_f0_hz", "q_factor", "p_min_reflected")
RECEIVED_HEADER = ("freq_hz", "p_sig_w", "p_inf_w", "p_noise_w", "p_total_w")
DETECTION_HEADER = ("tag_id", "f0_hz", "q", "category", "confidence", "flags")
CALIBRATION_HEADER = ("psi_pct", "f0_hz")
MANIFEST_NAME = "manifest.json"


def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


def atomic_write(path, text: str) -> Path:
    """Write text through a temporary file renamed into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def write_csv(path, header, rows) -> Path:
    return atomic_write(path, csv_text(header, rows))


def read_csv(path, header: Sequence[str]) -> list[list[str]]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != tuple(header):
        raise ConfigError(f"{path}: expected header {','.join(header)}")
    return rows[1:]


def spectrum_rows(spec: ScatteringSpectrum):
    for f, g in zip(spec.freq, spec.gamma):
        yield (f, g.real, g.imag, abs(g))


def write_spectrum(path, spec: ScatteringSpectrum) -> Path:
    return write_csv(path, SPECTRUM_HEADER, spectrum_rows(spec))


def write_resonance(path, res: CanonicalResonance) -> Path:
    header = ("r_total_ohm", "l_total_h", "c_total_f", "f0_hz", "q_factor", "gamma_min",
              "f_dip_hz", "fit_residual", "poor_fit")
    return write_csv(path, header, [(res.R_total, res.L_total, res.C_total, res.f0, res.Q,
                                     res.gamma_min, res.f_dip, res.residual, res.poor_fit)])


def write_circuit(path, cp: CircuitParameters) -> Path:
    header = ("c_0_f", "c_d_f", "c_g_f", "l_r_h", "r_d_ohm", "r_g_ohm", "r_o_ohm")
    return write_csv(path, header, [(cp.C_0, cp.C_d, cp.C_g, cp.L_r, cp.R_d, cp.R_g, cp.R_o)])


def write_pareto(path, front: ParetoSet) -> Path:
    rows = []
    for c in front:
        g, m = c.geometry, c.metrics
        rows.append((g.d, g.s, g.h, g.w, g.l, m.delta_f0, m.q_factor, m.p_min_reflected))
    return write_csv(path, PARETO_HEADER, rows)


def write_received(path, spec: ReceivedSpectrum) -> Path:
    return write_csv(path, RECEIVED_HEADER,
                     zip(spec.freq, spec.p_sig, spec.p_inf, spec.p_noise, spec.p_total))


def read_received(path) -> ReceivedSpectrum:
    rows = np.array(read_csv(path, RECEIVED_HEADER), dtype=float).reshape(-1, 5)
    return ReceivedSpectrum(rows[:, 0], rows[:, 1], rows[:, 2], rows[:, 3], rows[:, 4])


def write_detections(path, results: Sequence[DetectionResult]) -> Path:
    return write_csv(path, DETECTION_HEADER,
                     [(r.tag_id, r.f0_hat, r.q_hat, r.category, r.confidence,
                       ";".join(r.flags)) for r in results])


def write_calibration(path, cal: HumidityCalibration) -> Path:
    return write_csv(path, CALIBRATION_HEADER, zip(cal.psi, cal.f0))


def read_calibration(path) -> HumidityCalibration:
    rows = np.array(read_csv(path, CALIBRATION_HEADER), dtype=float).reshape(-1, 2)
    return HumidityCalibration(rows[:, 0], rows[:, 1])


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def versions() -> dict:
    import scipy

    return {"metabackscatter": __version__, "python": platform.python_version(),
            "numpy": np.__version__, "scipy": scipy.__version__}


def write_manifest(out_dir, subcommand: str, config: dict, config_sha256: str, seed: int,
                   outputs: Sequence[Path], inputs: dict | None = None) -> Path:
    """Record everything needed to regenerate ``out_dir``.

    The manifest holds no timestamps, so identical runs give identical bytes.
    """
    out_dir = Path(out_dir)
    manifest = {
        "subcommand": subcommand,
        "seed": int(seed),
        "config_sha256": config_sha256,
        "versions": versions(),
        "inputs": inputs or {},
        "outputs": {p.name: sha256_file(p) for p in sorted(outputs, key=lambda p: p.name)},
        "config": config,
    }
    return atomic_write(out_dir / MANIFEST_NAME, json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def read_manifest(path) -> dict:
    path = Path(path)
    if path.is_dir():
        path = path / MANIFEST_NAME
    try:
        return json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read manifest {path}: {exc}") from None
