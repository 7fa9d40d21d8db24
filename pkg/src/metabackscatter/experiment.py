"""End-to-end simulated studies.

* :func:`sweep_component` tabulates resonance, Q and dip depth while one
  circuit or geometry parameter is varied.
* :func:`run_grid_experiment` estimates a humidity map on a wall covered by
  a grid of tags, measured through the simulated link at several SNRs.
* :func:`range_study` tabulates the maximum read range over a grid of link
  parameters.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .circuit_model import (
    DEFAULT_ANALYSIS_BAND,
    DEFAULT_POINTS,
    MaterialProperties,
    SrrGeometry,
    canonical_resonance,
    derive_circuit,
    frequency_grid,
    prototype_geometry,
)
from .detection import (
    DEFAULT_PROMINENCE,
    DEFAULT_SV_THRESHOLD,
    N_CATEGORIES,
    HumidityCalibration,
    calibrate,
    detect,
)
from .errors import GeometryError, LinkInfeasibleError, MetaBackscatterError
from .link_model import (
    Antenna,
    LinkBudget,
    NoiseModel,
    Scene,
    TagInstance,
    max_range,
    received_power,
    synth_measurement,
)

SWEEPABLE = ("R_o", "d", "h", "s")
# Bin-centre humidities, drier towards the top-left of the wall.
DEFAULT_HUMIDITY = (5.0, 15.0, 25.0, 35.0,
                    15.0, 25.0, 45.0, 55.0,
                    25.0, 45.0, 65.0, 75.0,
                    35.0, 55.0, 85.0, 95.0)


@dataclass(frozen=True)
class TrendRow:
    value: float
    f0: float
    Q: float
    gamma_min: float


@dataclass(frozen=True)
class TrendTable:
    """Result of a one-parameter sweep."""

    parameter: str
    rows: tuple[TrendRow, ...]
    skipped: tuple[str, ...] = ()

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows])


def sweep_component(parameter: str, values: Sequence[float], geom: SrrGeometry,
                    mat: MaterialProperties, psi_env: float = 50.0,
                    band: Sequence[float] = DEFAULT_ANALYSIS_BAND,
                    n_points: int = DEFAULT_POINTS) -> TrendTable:
    """Canonical resonance while one parameter varies.

    ``R_o`` replaces the sensitive resistance directly (ohm); ``d``, ``h``
    and ``s`` replace geometry dimensions (m). Values that produce an
    invalid tag are skipped with a diagnostic.
    """
    if parameter not in SWEEPABLE:
        raise ValueError(f"cannot sweep {parameter!r}; choose from {SWEEPABLE}")
    rows, skipped = [], []
    for v in values:
        try:
            if parameter == "R_o":
                g = geom
                cp = derive_circuit(g, mat, psi_env).replace(R_o=float(v))
            else:
                g = geom.replace(**{parameter: float(v)})
                cp = derive_circuit(g, mat, psi_env)
            r = canonical_resonance(cp, g, mat, band, n_points)
        except MetaBackscatterError as exc:
            skipped.append(f"{parameter}={v}: {exc}")
            continue
        rows.append(TrendRow(float(v), r.f0, r.Q, r.gamma_min))
    return TrendTable(parameter, tuple(rows), tuple(skipped))


@dataclass(frozen=True)
class GridExperimentConfig:
    """Humidity-map experiment on a wall of tags.

    Attributes:
        rows, cols: Grid dimensions.
        pitch: Cell spacing on the wall (m).
        humidity: Ground-truth humidity per cell, row-major (%).
        geometry, material: Tag design used in every cell.
        sigma: Effective area of one cell's tag (m^2).
        standoff: Distance of the antennas from the wall (m).
        antenna_separation: Tx-Rx spacing, centred on the wall (m).
        p_tx: Transmit power (W).
        gain: Linear antenna gain toward the cell being measured.
        sidelobe: Gain factor toward the other cells.
        eta: Ambient scattering fraction.
        gamma_env: Ambient reflection coefficient.
        band, n_points: Swept-frequency grid.
        snr_db: Measurement SNRs; ``None`` means noiseless.
        trials: Monte Carlo repetitions per SNR.
        seed: Master seed.
        mode: ``"simultaneous"`` (all cells active) or ``"sequenced"``.
        method: Detector, ``"peak"`` or ``"mpm"``.
        prominence: Dip prominence threshold of the peak detector.
        pencil_L, sv_threshold: Matrix Pencil parameters.
        calibration_step: Humidity spacing of calibration anchors (%).
        flatten_wavelength: Undo the lambda^2 slope of the link before
            peak fitting.
    """

    rows: int = 4
    cols: int = 4
    pitch: float = 0.5
    humidity: tuple[float, ...] = DEFAULT_HUMIDITY
    geometry: SrrGeometry = field(default_factory=prototype_geometry)
    material: MaterialProperties = field(default_factory=MaterialProperties)
    sigma: float = 0.01
    standoff: float = 2.0
    antenna_separation: float = 0.2
    p_tx: float = 0.1
    gain: float = 10.0
    sidelobe: float = 0.1
    eta: float = 0.0
    gamma_env: float = 0.0
    band: tuple[float, float] = (4.5e9, 6.0e9)
    n_points: int = DEFAULT_POINTS
    snr_db: tuple[Optional[float], ...] = (None,)
    trials: int = 1
    seed: int = 0
    mode: str = "simultaneous"
    method: str = "peak"
    prominence: float = DEFAULT_PROMINENCE
    pencil_L: Optional[int] = None
    sv_threshold: float = DEFAULT_SV_THRESHOLD
    calibration_step: float = 5.0
    flatten_wavelength: bool = True

    def __post_init__(self):
        object.__setattr__(self, "humidity", tuple(float(h) for h in self.humidity))
        object.__setattr__(self, "snr_db", tuple(None if s is None else float(s)
                                                 for s in self.snr_db))
        problems = []
        if self.rows < 1 or self.cols < 1:
            problems.append("grid needs at least one row and column")
        if len(self.humidity) != self.rows * self.cols:
            problems.append(f"humidity needs {self.rows * self.cols} cells, got {len(self.humidity)}")
        if any(not 0 <= h <= 100 for h in self.humidity):
            problems.append("humidity values must lie in [0, 100]")
        if self.trials < 1:
            problems.append("trial count must be >= 1")
        if self.mode not in ("simultaneous", "sequenced"):
            problems.append(f"unknown measurement mode {self.mode!r}")
        if self.method not in ("peak", "mpm"):
            problems.append(f"unknown detection method {self.method!r}")
        if not self.snr_db:
            problems.append("snr list must not be empty")
        if not (self.pitch > 0 and self.standoff > 0 and self.sigma > 0):
            problems.append("pitch, standoff and sigma must be > 0")
        if not (self.gain > 0 and self.sidelobe > 0):
            problems.append("gain and sidelobe factor must be > 0")
        if problems:
            raise GeometryError(problems)

    @property
    def n_cells(self) -> int:
        return self.rows * self.cols

    def cell_positions(self) -> list[tuple[float, float, float]]:
        out = []
        for r in range(self.rows):
            for c in range(self.cols):
                out.append(((c - (self.cols - 1) / 2) * self.pitch,
                            ((self.rows - 1) / 2 - r) * self.pitch, 0.0))
        return out

    def scene_for(self, target: int) -> Scene:
        """Scene used while measuring cell ``target``."""
        pos = self.cell_positions()
        cells = range(self.n_cells) if self.mode == "simultaneous" else [target]
        tags, gains = [], []
        for j in cells:
            tags.append(TagInstance(self.geometry, self.material, self.humidity[j], pos[j],
                                    self.sigma))
            gains.append(self.gain if j == target else self.gain * self.sidelobe)
        half = self.antenna_separation / 2
        tx = Antenna((-half, 0.0, self.standoff), gains)
        rx = Antenna((half, 0.0, self.standoff), gains)
        return Scene(tags, tx, rx, self.p_tx, self.eta, (self.gamma_env,) * len(tags))

    def local_index(self, target: int) -> int:
        return target if self.mode == "simultaneous" else 0


@dataclass(frozen=True)
class CellOutcome:
    snr_db: Optional[float]
    trial: int
    cell: int
    truth: int
    category: int
    confidence: float
    f0_hat: float
    q_hat: float
    flags: tuple[str, ...] = ()


@dataclass(frozen=True)
class SnrSummary:
    snr_db: Optional[float]
    accuracy_per_trial: tuple[float, ...]
    confusion: np.ndarray
    infeasible: int = 0

    @property
    def median_accuracy(self) -> float:
        return float(np.median(self.accuracy_per_trial))

    @property
    def mean_accuracy(self) -> float:
        return float(np.mean(self.accuracy_per_trial))


@dataclass(frozen=True)
class ExperimentReport:
    """Grid-experiment results."""

    config: GridExperimentConfig
    calibration: HumidityCalibration
    outcomes: tuple[CellOutcome, ...]
    summaries: tuple[SnrSummary, ...]

    def cell_estimates(self, snr_index: int = 0) -> list[tuple[int, float]]:
        """(category, confidence) per cell from the first trial at one SNR."""
        snr = self.summaries[snr_index].snr_db
        first = [o for o in self.outcomes if o.snr_db == snr and o.trial == 0]
        return [(o.category, o.confidence) for o in sorted(first, key=lambda o: o.cell)]


def true_category(psi: float) -> int:
    return int(min(math.floor(psi / 10.0), N_CATEGORIES - 1))


def unit_seed(master: int, *key: int) -> int:
    """Deterministic 64-bit seed for one work unit."""
    ss = np.random.SeedSequence(int(master), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, np.uint64)[0])


def _run_unit(cfg: GridExperimentConfig, calibration: HumidityCalibration,
              freq: np.ndarray, s_idx: int, trial: int, cell: int) -> CellOutcome:
    snr = cfg.snr_db[s_idx]
    truth = true_category(cfg.humidity[cell])
    scene = cfg.scene_for(cell)
    i = cfg.local_index(cell)
    noise = None
    if snr is not None:
        mean_sig = float(np.mean(received_power(scene, i, freq)))
        if not mean_sig > 0:
            return CellOutcome(snr, trial, cell, truth, -1, 0.0, math.nan, math.nan,
                               ("link_infeasible",))
        noise = NoiseModel.with_floor(mean_sig / 10 ** (snr / 10))
    seed = unit_seed(cfg.seed, s_idx, trial, cell)
    meas = synth_measurement(scene, i, freq, noise, seed, target_present=True)
    empty = synth_measurement(scene, i, freq, noise, seed, target_present=False)
    res = detect(meas, empty, calibration, tag_id=cell, method=cfg.method,
                 flatten_wavelength=cfg.flatten_wavelength, prominence=cfg.prominence,
                 pencil_L=cfg.pencil_L, sv_threshold=cfg.sv_threshold)
    return CellOutcome(snr, trial, cell, truth, res.category, res.confidence, res.f0_hat,
                       res.q_hat, res.flags)


def _run_chunk(args):
    cfg, calibration, freq, units = args
    return [_run_unit(cfg, calibration, freq, *u) for u in units]


def grid_calibration(cfg: GridExperimentConfig) -> HumidityCalibration:
    psi = np.arange(0.0, 100.0 + 1e-9, cfg.calibration_step)
    if psi[-1] < 100.0:
        psi = np.append(psi, 100.0)
    return calibrate(cfg.geometry, cfg.material, psi)


def run_grid_experiment(cfg: GridExperimentConfig, jobs: int = 1) -> ExperimentReport:
    """Simulate, detect and classify every cell for every trial and SNR.

    Each (SNR, trial, cell) unit draws noise from its own seed derived from
    the master seed, and results are aggregated in index order, so the
    report does not depend on ``jobs``.
    """
    calibration = grid_calibration(cfg)
    freq = frequency_grid(cfg.band, cfg.n_points)
    units = [(s, t, c) for s in range(len(cfg.snr_db)) for t in range(cfg.trials)
             for c in range(cfg.n_cells)]
    if jobs > 1:
        chunks = [units[k::jobs] for k in range(jobs)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_run_chunk, [(cfg, calibration, freq, ch) for ch in chunks]))
        outcomes = sorted((o for p in parts for o in p),
                          key=lambda o: (cfg.snr_db.index(o.snr_db), o.trial, o.cell))
    else:
        outcomes = [_run_unit(cfg, calibration, freq, *u) for u in units]

    summaries = []
    for s_idx, snr in enumerate(cfg.snr_db):
        conf = np.zeros((N_CATEGORIES, N_CATEGORIES), dtype=int)
        acc, infeasible = [], 0
        for t in range(cfg.trials):
            block = outcomes[(s_idx * cfg.trials + t) * cfg.n_cells:
                             (s_idx * cfg.trials + t + 1) * cfg.n_cells]
            correct = 0
            for o in block:
                if o.category < 0:
                    infeasible += 1
                    continue
                conf[o.truth, o.category] += 1
                correct += o.truth == o.category
            acc.append(correct / cfg.n_cells)
        summaries.append(SnrSummary(snr, tuple(acc), conf, infeasible))
    return ExperimentReport(cfg, calibration, tuple(outcomes), tuple(summaries))


@dataclass(frozen=True)
class RangeRow:
    p_tx: float
    g_tx: float
    g_rx: float
    gamma_abs: float
    r_max: float
    feasible: bool


def range_study(template: LinkBudget, snr_threshold_db: float, noise: NoiseModel,
                p_tx_values: Sequence[float], gain_values: Sequence[tuple[float, float]],
                gamma_values: Optional[Sequence[float]] = None) -> list[RangeRow]:
    """Maximum monostatic range over a grid of power, gains and |Gamma|.

    Infeasible combinations are kept with ``r_max = nan``.
    """
    gammas = [template.gamma_abs] if gamma_values is None else list(gamma_values)
    rows = []
    for p in p_tx_values:
        for g_tx, g_rx in gain_values:
            for gam in gammas:
                link = replace(template, p_tx=float(p), g_tx=float(g_tx), g_rx=float(g_rx),
                               gamma_abs=float(gam))
                try:
                    r = max_range(link, snr_threshold_db, noise)
                    rows.append(RangeRow(link.p_tx, link.g_tx, link.g_rx, link.gamma_abs, r, True))
                except LinkInfeasibleError:
                    rows.append(RangeRow(link.p_tx, link.g_tx, link.g_rx, link.gamma_abs,
                                         math.nan, False))
    return rows


def fourth_root_deviation(rows: Sequence[RangeRow]) -> float:
    """Largest |r(16 P)/r(P) / 2 - 1| over row pairs differing only in P_Tx."""
    by_key = {(r.g_tx, r.g_rx, r.gamma_abs, r.p_tx): r for r in rows if r.feasible}
    worst = 0.0
    for (g_tx, g_rx, gam, p), r in by_key.items():
        other = by_key.get((g_tx, g_rx, gam, 16 * p))
        if other is not None:
            worst = max(worst, abs(other.r_max / r.r_max / 2 - 1))
    return worst
