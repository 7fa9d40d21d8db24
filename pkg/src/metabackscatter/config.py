"""Run configuration: schema, validation, unit parsing and serialisation.

Configuration files are YAML documents carrying ``schema_version``. Every
quantity in a file is in SI units (m, Hz, W, ohm). Unknown keys are errors,
and validation reports all problems at once.

Command-line overrides (``--set section.key=value``) accept engineering
units, which are mandatory for dimensioned keys: ``tag.geometry.d=1.4mm``,
``tag.band=5GHz,5.5GHz``.
"""

from __future__ import annotations

import hashlib
import json
import re
from pathlib import Path
from typing import Any, Literal, Optional

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from . import circuit_model as cm
from . import experiment as ex
from . import link_model as lm
from . import tag_design as td
from .errors import ConfigError, MetaBackscatterError

SCHEMA_VERSION = 1


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


Band = tuple[float, float]


def _check_band(v):
    if v is not None and not 0 < v[0] < v[1]:
        raise ValueError("band must satisfy 0 < low < high")
    return v


class GeometryConfig(_Strict):
    l: float = 6.0e-3
    d: float = 1.4e-3
    s: float = 1.2e-3
    w: float = 10.09e-3
    t: float = 35e-6
    h: float = 2.4e-3

    @model_validator(mode="after")
    def _invariants(self):
        problems = cm.SrrGeometry.violations(self)
        if problems:
            raise ValueError("; ".join(problems))
        return self

    def build(self) -> cm.SrrGeometry:
        return cm.SrrGeometry(**self.model_dump())


class SensitiveConfig(_Strict):
    psi: tuple[float, ...] = (0.0, 100.0)
    resistance: tuple[float, ...] = (60.0, 5.0)


class MaterialConfig(_Strict):
    eps_r: tuple[float, float] = (4.4, -0.088)
    sensitive: SensitiveConfig = SensitiveConfig()

    @model_validator(mode="after")
    def _invariants(self):
        self.build()
        return self

    def build(self) -> cm.MaterialProperties:
        try:
            return cm.MaterialProperties(
                complex(*self.eps_r),
                cm.SensitiveMaterial(self.sensitive.psi, self.sensitive.resistance))
        except MetaBackscatterError as exc:
            raise ValueError(str(exc)) from None


class TagConfig(_Strict):
    geometry: GeometryConfig = GeometryConfig()
    material: MaterialConfig = MaterialConfig()
    psi_env: float = 50.0
    band: Band = (5.0e9, 5.5e9)
    n_points: int = Field(cm.DEFAULT_POINTS, ge=5)
    analysis_band: Band = cm.DEFAULT_ANALYSIS_BAND

    _band = field_validator("band", "analysis_band")(_check_band)

    @model_validator(mode="after")
    def _in_range(self):
        lo, hi = self.material.sensitive.psi[0], self.material.sensitive.psi[-1]
        if not lo <= self.psi_env <= hi:
            raise ValueError(f"psi_env={self.psi_env} outside calibrated range [{lo}, {hi}]")
        return self


class AxisConfig(_Strict):
    lo: float
    hi: float
    count: Optional[int] = None
    step: Optional[float] = None

    @model_validator(mode="after")
    def _valid(self):
        try:
            self.build()
        except MetaBackscatterError as exc:
            raise ValueError(str(exc)) from None
        return self

    def build(self) -> td.AxisRange:
        return td.AxisRange(self.lo, self.hi, self.count, self.step)


class DesignConfig(_Strict):
    d: AxisConfig = AxisConfig(lo=0.8e-3, hi=1.6e-3, count=3)
    s: AxisConfig = AxisConfig(lo=0.8e-3, hi=1.4e-3, count=3)
    h: AxisConfig = AxisConfig(lo=1.6e-3, hi=2.4e-3, count=3)
    w: AxisConfig = AxisConfig(lo=9.0e-3, hi=10.09e-3, count=2)
    l: AxisConfig = AxisConfig(lo=5.5e-3, hi=6.5e-3, count=3)
    env_pair: tuple[float, float] = td.DEFAULT_ENV_PAIR
    budget: int = Field(200, ge=1)
    weights: Optional[tuple[float, float, float]] = None


class SweepConfig(_Strict):
    parameter: Literal["R_o", "d", "h", "s"] = "d"
    values: tuple[float, ...] = (0.8e-3, 1.0e-3, 1.2e-3, 1.4e-3)

    @field_validator("values")
    @classmethod
    def _nonempty(cls, v):
        if not v:
            raise ValueError("sweep needs at least one value")
        return v


class SceneTagConfig(_Strict):
    psi_env: float
    position: tuple[float, float, float]
    sigma: float = Field(0.01, gt=0)


class AntennaConfig(_Strict):
    position: tuple[float, float, float]
    gains: tuple[float, ...]


class SceneConfig(_Strict):
    tags: tuple[SceneTagConfig, ...] = (
        SceneTagConfig(psi_env=25.0, position=(-0.25, 0.0, 0.0)),
        SceneTagConfig(psi_env=75.0, position=(0.25, 0.0, 0.0)),
    )
    tx: AntennaConfig = AntennaConfig(position=(-0.1, 0.0, 2.0), gains=(10.0, 10.0))
    rx: AntennaConfig = AntennaConfig(position=(0.1, 0.0, 2.0), gains=(10.0, 10.0))
    p_tx: float = Field(0.1, ge=0)
    eta: float = Field(0.0, ge=0)
    gamma_env: Optional[tuple[float, ...]] = None
    band: Band = (4.5e9, 6.0e9)
    n_points: int = Field(cm.DEFAULT_POINTS, ge=5)

    _band = field_validator("band")(_check_band)

    @model_validator(mode="after")
    def _counts(self):
        n = len(self.tags)
        if n < 1:
            raise ValueError("scene needs at least one tag")
        if len(self.tx.gains) != n or len(self.rx.gains) != n:
            raise ValueError("antenna gain lists need one entry per tag")
        if self.gamma_env is not None and len(self.gamma_env) != n:
            raise ValueError("gamma_env needs one entry per tag")
        return self


class NoiseConfig(_Strict):
    bandwidth: float = Field(1.0e6, gt=0)
    noise_figure_db: float = 6.0
    temperature: float = Field(290.0, gt=0)

    def build(self) -> lm.NoiseModel:
        return lm.NoiseModel(self.bandwidth, self.noise_figure_db, self.temperature)


class DetectConfig(_Strict):
    method: Literal["peak", "mpm"] = "peak"
    prominence: float = Field(0.05, gt=0, lt=1)
    pencil_L: Optional[int] = None
    sv_threshold: float = Field(1e-3, gt=0, lt=1)
    flatten_wavelength: bool = True
    calibration_step: float = Field(5.0, gt=0, le=100)


class ExperimentConfig(_Strict):
    rows: int = Field(4, ge=1)
    cols: int = Field(4, ge=1)
    pitch: float = Field(0.5, gt=0)
    humidity: Optional[tuple[float, ...]] = None
    sigma: float = Field(0.01, gt=0)
    standoff: float = Field(2.0, gt=0)
    antenna_separation: float = Field(0.2, ge=0)
    p_tx: float = Field(0.1, ge=0)
    gain: float = Field(10.0, gt=0)
    sidelobe: float = Field(0.1, gt=0)
    eta: float = Field(0.0, ge=0)
    gamma_env: float = 0.0
    band: Band = (4.5e9, 6.0e9)
    n_points: int = Field(cm.DEFAULT_POINTS, ge=5)
    snr_db: tuple[Optional[float], ...] = (None,)
    trials: int = Field(1, ge=1)
    mode: Literal["simultaneous", "sequenced"] = "simultaneous"

    _band = field_validator("band")(_check_band)

    @model_validator(mode="after")
    def _humidity(self):
        if self.humidity is not None:
            if len(self.humidity) != self.rows * self.cols:
                raise ValueError(f"humidity needs {self.rows * self.cols} entries")
            if any(not 0 <= h <= 100 for h in self.humidity):
                raise ValueError("humidity values must lie in [0, 100]")
        elif self.rows * self.cols != len(ex.DEFAULT_HUMIDITY):
            raise ValueError("humidity must be given for a non-default grid size")
        return self


class RangeConfig(_Strict):
    freq: float = Field(5.25e9, gt=0)
    sigma: float = Field(0.01, gt=0)
    snr_threshold_db: float = 10.0
    p_tx: tuple[float, ...] = (0.01, 0.1, 0.16, 1.6)
    gains: tuple[tuple[float, float], ...] = ((1.0, 1.0), (10.0, 10.0))
    gamma_abs: tuple[float, ...] = (0.0, 0.33, 1.0)


class RunConfig(_Strict):
    """Complete, validated configuration of a run."""

    schema_version: int
    seed: int = Field(0, ge=0, lt=2 ** 64)
    tag: TagConfig = TagConfig()
    sweep: SweepConfig = SweepConfig()
    design: DesignConfig = DesignConfig()
    scene: SceneConfig = SceneConfig()
    noise: Optional[NoiseConfig] = None
    detect: DetectConfig = DetectConfig()
    experiment: ExperimentConfig = ExperimentConfig()
    range: RangeConfig = RangeConfig()

    @field_validator("schema_version")
    @classmethod
    def _version(cls, v):
        if v != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema_version {v}, expected {SCHEMA_VERSION}")
        return v

    # Builders for domain objects.
    def geometry(self) -> cm.SrrGeometry:
        return self.tag.geometry.build()

    def material(self) -> cm.MaterialProperties:
        return self.tag.material.build()

    def design_space(self) -> td.DesignSpace:
        d = self.design
        return td.DesignSpace(d.d.build(), d.s.build(), d.h.build(), d.w.build(), d.l.build(),
                              materials=(self.material(),), band=self.tag.analysis_band,
                              t=self.tag.geometry.t, env_pair=d.env_pair,
                              n_points=self.tag.n_points)

    def scene_obj(self) -> lm.Scene:
        geom, mat = self.geometry(), self.material()
        sc = self.scene
        tags = [lm.TagInstance(geom, mat, t.psi_env, t.position, t.sigma) for t in sc.tags]
        return lm.Scene(tags, lm.Antenna(sc.tx.position, sc.tx.gains),
                        lm.Antenna(sc.rx.position, sc.rx.gains), sc.p_tx, sc.eta,
                        sc.gamma_env)

    def grid_config(self) -> ex.GridExperimentConfig:
        e = self.experiment
        kw = e.model_dump()
        if kw["humidity"] is None:
            kw.pop("humidity")
        d = self.detect
        return ex.GridExperimentConfig(
            geometry=self.geometry(), material=self.material(), seed=self.seed,
            method=d.method, prominence=d.prominence, pencil_L=d.pencil_L,
            sv_threshold=d.sv_threshold, calibration_step=d.calibration_step,
            flatten_wavelength=d.flatten_wavelength, **kw)


def _format_errors(err: ValidationError) -> list[str]:
    out = []
    for e in err.errors():
        loc = ".".join(str(p) for p in e["loc"]) or "<root>"
        msg = e["msg"]
        if e["type"] == "extra_forbidden":
            msg = "unknown key"
        out.append(f"{loc}: {msg}")
    return out


def validate_config(data: Any) -> RunConfig:
    """Validate a parsed document, collecting every violation.

    Raises:
        ConfigError: With one message per violation.
    """
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a mapping")
    if "schema_version" not in data:
        raise ConfigError("schema_version: missing (expected %d)" % SCHEMA_VERSION)
    try:
        return RunConfig.model_validate(data)
    except ValidationError as err:
        raise ConfigError(_format_errors(err)) from None


def parse_config(path, overrides: Optional[list[str]] = None) -> RunConfig:
    """Read, override and validate a configuration file."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read configuration {path}: {exc}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed YAML in {path}: {exc}") from None
    if overrides:
        data = apply_overrides(data if isinstance(data, dict) else {}, overrides)
    return validate_config(data)


def config_to_dict(cfg: RunConfig) -> dict:
    return cfg.model_dump(mode="json")


def serialize_config(cfg: RunConfig) -> str:
    """YAML text that parses back to an equal configuration."""
    return yaml.safe_dump(config_to_dict(cfg), sort_keys=False)


def config_digest(cfg: RunConfig) -> str:
    canon = json.dumps(config_to_dict(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


# Unit handling for command-line values.

UNITS = {
    "length": {"m": 1.0, "cm": 1e-2, "mm": 1e-3, "um": 1e-6},
    "frequency": {"Hz": 1.0, "kHz": 1e3, "MHz": 1e6, "GHz": 1e9},
    "power": {"W": 1.0, "mW": 1e-3, "uW": 1e-6},
    "resistance": {"ohm": 1.0, "kohm": 1e3},
}

_GEOMETRY_KEYS = {"l", "d", "s", "w", "t", "h"}
_LENGTH_KEYS = {"l", "d", "s", "w", "t", "h", "position", "pitch", "standoff",
                "antenna_separation"}
_FREQ_KEYS = {"band", "analysis_band", "bandwidth", "freq"}
_POWER_KEYS = {"p_tx"}
_AXIS_KEYS = {"lo", "hi", "step"}

_NUMBER = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([A-Za-z]*)\s*$")


def key_dimension(path: str) -> Optional[str]:
    """Physical dimension of a dotted configuration key, if any."""
    parts = path.split(".")
    last = parts[-1]
    if last in _AXIS_KEYS and len(parts) >= 2 and parts[-2] in _GEOMETRY_KEYS:
        return "length"
    if "geometry" in parts and last in _GEOMETRY_KEYS:
        return "length"
    if last in _LENGTH_KEYS - _GEOMETRY_KEYS:
        return "length"
    if last in _FREQ_KEYS:
        return "frequency"
    if last in _POWER_KEYS:
        return "power"
    if path == "sweep.values":
        return "sweep"
    return None


def parse_quantity(text: str, dimension: Optional[str]) -> float:
    """Convert ``"1.4mm"`` style text to SI.

    Raises:
        ConfigError: If the suffix is missing on a dimensioned value, unknown,
            or of the wrong dimension.
    """
    m = _NUMBER.match(text)
    if not m:
        raise ConfigError(f"cannot parse number {text!r}")
    value, unit = float(m.group(1)), m.group(2)
    if dimension is None:
        if unit:
            raise ConfigError(f"{text!r}: dimensionless value takes no unit")
        return value
    allowed = ({**UNITS["length"], **UNITS["resistance"]} if dimension == "sweep"
               else UNITS[dimension])
    if not unit:
        raise ConfigError(f"{text!r}: unit suffix required ({', '.join(allowed)})")
    if unit not in allowed:
        raise ConfigError(f"{text!r}: unit {unit!r} not valid here ({', '.join(allowed)})")
    return value * allowed[unit]


def _parse_scalar(text: str, dimension: Optional[str]):
    low = text.strip().lower()
    if low in ("null", "none"):
        return None
    if low in ("true", "false"):
        return low == "true"
    if dimension is None and not _NUMBER.match(text):
        return text.strip()
    return parse_quantity(text, dimension)


def apply_overrides(data: dict, overrides: list[str]) -> dict:
    """Apply ``key.path=value`` overrides (comma-separated for lists)."""
    data = json.loads(json.dumps(data)) if data else {}
    problems = []
    for item in overrides:
        if "=" not in item:
            problems.append(f"override {item!r} must look like key=value")
            continue
        path, raw = item.split("=", 1)
        path = path.strip()
        dim = key_dimension(path)
        try:
            if "," in raw:
                value = [_parse_scalar(p, dim) for p in raw.split(",")]
            else:
                value = _parse_scalar(raw, dim)
        except ConfigError as exc:
            problems.append(f"{path}: {exc}")
            continue
        if isinstance(value, float) and value.is_integer() and dim is None:
            value = int(value)
        node = data
        keys = path.split(".")
        for k in keys[:-1]:
            node = node.setdefault(k, {})
            if not isinstance(node, dict):
                problems.append(f"{path}: {k} is not a section")
                break
        else:
            node[keys[-1]] = value
    if problems:
        raise ConfigError(problems)
    return data


def default_config() -> RunConfig:
    return RunConfig(schema_version=SCHEMA_VERSION)
