"""Backscatter radio link: received power, interference, noise and range.

The power collected from tag ``i`` follows the bistatic radar (two-leg
Friis) budget::

    P_rec,i = P_Tx sigma lambda^2 / (32 pi^3 r_Tx,i^2 r_Rx,i^2) |Gamma_i|^2 G_Tx,i G_Rx,i

with ``lambda = c / f``. Interference seen while measuring tag ``i`` is the
power sum of the same term for every other tag plus ambient clutter
``eta P_Tx Gamma_env,i``. Noise is a thermal floor ``k_B T B NF``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .circuit_model import (
    MaterialProperties,
    SrrGeometry,
    derive_circuit,
    scattering_coefficient,
)
from .constants import C_LIGHT, K_BOLTZMANN
from .errors import GeometryError, LinkInfeasibleError

# Frequency points per independent noise stream.
NOISE_CHUNK = 256

# Tags are immutable, so their circuits can be shared between measurements.
_circuit = lru_cache(maxsize=4096)(derive_circuit)

ClutterValue = Union[float, Callable[[np.ndarray], np.ndarray]]


@dataclass(frozen=True)
class ModulatedTone:
    """A sinusoidal carrier ``|S| cos(2 pi f t + theta)``.

    Attributes:
        amplitude: ``|S|`` in sqrt(W), so that ``amplitude**2`` is power.
        phase: Carrier phase (rad).
        frequency: Carrier frequency (Hz).
    """

    amplitude: float
    phase: float
    frequency: float

    def __post_init__(self):
        if self.amplitude < 0:
            raise ValueError("tone amplitude must be >= 0")
        if not self.frequency > 0:
            raise ValueError("tone frequency must be > 0")


def backscatter_tone(tone: ModulatedTone, gamma: complex) -> ModulatedTone:
    """Tone re-radiated by a tag with scattering coefficient ``gamma``."""
    gamma = complex(gamma)
    return ModulatedTone(tone.amplitude * abs(gamma), tone.phase + np.angle(gamma),
                         tone.frequency)


@dataclass(frozen=True)
class TagInstance:
    """One tag placed in a scene.

    Attributes:
        geometry: SRR unit-cell geometry.
        material: Substrate and sensitive-film properties.
        psi_env: Environmental state at the tag (% RH).
        position: Tag location (m).
        sigma: Effective reflecting area (m^2).
        reflection: Optional fixed scattering coefficient that replaces the
            circuit model, for idealised link studies.
    """

    geometry: SrrGeometry
    material: MaterialProperties
    psi_env: float
    position: tuple[float, float, float]
    sigma: float
    reflection: Optional[complex] = None

    def __post_init__(self):
        object.__setattr__(self, "position", tuple(float(v) for v in self.position))
        if len(self.position) != 3:
            raise GeometryError("tag position needs three coordinates")
        if not self.sigma > 0:
            raise GeometryError(f"tag area sigma must be > 0, got {self.sigma}")

    def gamma(self, f) -> np.ndarray:
        f = np.asarray(f, dtype=float)
        if self.reflection is not None:
            return np.full(f.shape, complex(self.reflection))
        cp = _circuit(self.geometry, self.material, self.psi_env)
        return scattering_coefficient(f, cp, self.geometry, self.material)


@dataclass(frozen=True)
class Antenna:
    """Antenna location and its linear gain toward each tag."""

    position: tuple[float, float, float]
    gains: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "position", tuple(float(v) for v in self.position))
        object.__setattr__(self, "gains", tuple(float(g) for g in self.gains))
        if any(not g > 0 for g in self.gains):
            raise GeometryError("antenna gains must be > 0")


@dataclass(frozen=True)
class Scene:
    """Tags, antennas and clutter for one measurement setup.

    Attributes:
        tags: Tags in the scene (at least one).
        tx: Transmit antenna with per-tag gains.
        rx: Receive antenna with per-tag gains.
        p_tx: Transmit power (W).
        eta: Fraction of transmit power scattered by the environment.
        gamma_env: Ambient reflection coefficient per tag measurement; each
            entry is a constant or a function of frequency.
    """

    tags: tuple[TagInstance, ...]
    tx: Antenna
    rx: Antenna
    p_tx: float
    eta: float = 0.0
    gamma_env: tuple[ClutterValue, ...] = None

    def __post_init__(self):
        object.__setattr__(self, "tags", tuple(self.tags))
        n = len(self.tags)
        if self.gamma_env is None:
            object.__setattr__(self, "gamma_env", (0.0,) * n)
        else:
            object.__setattr__(self, "gamma_env", tuple(self.gamma_env))
        problems = []
        if n < 1:
            problems.append("scene needs at least one tag")
        if len(self.tx.gains) != n or len(self.rx.gains) != n:
            problems.append("antenna gain lists must have one entry per tag")
        if len(self.gamma_env) != n:
            problems.append("gamma_env must have one entry per tag")
        if not self.p_tx >= 0:
            problems.append("p_tx must be >= 0")
        if not self.eta >= 0:
            problems.append("eta must be >= 0")
        for i in range(n):
            if self.r_tx(i) <= 0 or self.r_rx(i) <= 0:
                problems.append(f"tag {i} is collocated with an antenna")
        if problems:
            raise GeometryError(problems)

    def r_tx(self, i: int) -> float:
        return math.dist(self.tags[i].position, self.tx.position)

    def r_rx(self, i: int) -> float:
        return math.dist(self.tags[i].position, self.rx.position)

    def clutter(self, i: int, f) -> np.ndarray:
        f = np.asarray(f, dtype=float)
        g = self.gamma_env[i]
        val = g(f) if callable(g) else g
        return np.broadcast_to(np.asarray(val, dtype=float), f.shape)


@dataclass(frozen=True)
class NoiseModel:
    """Receiver thermal noise.

    Attributes:
        bandwidth: Noise bandwidth (Hz).
        noise_figure_db: Receiver noise figure (dB).
        temperature: Reference temperature (K).
    """

    bandwidth: float
    noise_figure_db: float = 0.0
    temperature: float = 290.0

    def __post_init__(self):
        if not self.bandwidth > 0:
            raise ValueError("noise bandwidth must be > 0")
        if not self.temperature > 0:
            raise ValueError("noise temperature must be > 0")

    @property
    def floor(self) -> float:
        """Noise power ``k_B T B NF`` (W)."""
        return K_BOLTZMANN * self.temperature * self.bandwidth * 10 ** (self.noise_figure_db / 10)

    @classmethod
    def with_floor(cls, p_floor: float, noise_figure_db: float = 0.0,
                   temperature: float = 290.0) -> "NoiseModel":
        """Noise model whose bandwidth yields the requested floor."""
        nf = 10 ** (noise_figure_db / 10)
        return cls(p_floor / (K_BOLTZMANN * temperature * nf), noise_figure_db, temperature)


@dataclass(frozen=True)
class LinkBudget:
    """Scalar link parameters for range calculations."""

    p_tx: float
    sigma: float
    freq: float
    gamma_abs: float
    g_tx: float = 1.0
    g_rx: float = 1.0

    def received_power(self, r_tx: float, r_rx: float) -> float:
        return link_factor(self.p_tx, self.sigma, self.freq, r_tx, r_rx, self.g_tx,
                           self.g_rx) * self.gamma_abs ** 2


@dataclass(frozen=True)
class ReceivedSpectrum:
    """Powers observed over a frequency sweep (all in W)."""

    freq: np.ndarray
    p_sig: np.ndarray
    p_inf: np.ndarray
    p_noise: np.ndarray
    p_total: np.ndarray = field(default=None)

    def __post_init__(self):
        arrays = {}
        for name in ("freq", "p_sig", "p_inf", "p_noise"):
            arrays[name] = np.asarray(getattr(self, name), dtype=float)
            object.__setattr__(self, name, arrays[name])
        n = arrays["freq"].shape
        if any(a.shape != n for a in arrays.values()):
            raise ValueError("all spectrum columns must share the grid shape")
        if np.any(np.diff(arrays["freq"]) <= 0):
            raise ValueError("frequency grid must be strictly increasing")
        for name in ("p_sig", "p_inf", "p_noise"):
            if np.any(arrays[name] < 0):
                raise ValueError(f"{name} must be non-negative")
        total = arrays["p_sig"] + arrays["p_inf"] + arrays["p_noise"]
        if self.p_total is not None and not np.allclose(self.p_total, total, rtol=1e-12, atol=0):
            raise ValueError("p_total must equal signal + interference + noise")
        object.__setattr__(self, "p_total", total)


def wavelength(f):
    return C_LIGHT / np.asarray(f, dtype=float)


def link_factor(p_tx, sigma, f, r_tx, r_rx, g_tx=1.0, g_rx=1.0):
    """Received power for a perfectly reflecting tag (|Gamma| = 1)."""
    if np.any(np.asarray(r_tx) <= 0) or np.any(np.asarray(r_rx) <= 0):
        raise GeometryError("tag collocated with an antenna (r = 0)")
    lam = wavelength(f)
    return p_tx * sigma * lam ** 2 * g_tx * g_rx / (32 * np.pi ** 3 * r_tx ** 2 * r_rx ** 2)


def _check_index(scene: Scene, i: int):
    if not 0 <= i < len(scene.tags):
        raise IndexError(f"tag index {i} out of range for {len(scene.tags)} tags")


def received_power(scene: Scene, i: int, f):
    """Power received from tag ``i`` at frequency ``f`` (W)."""
    _check_index(scene, i)
    tag = scene.tags[i]
    factor = link_factor(scene.p_tx, tag.sigma, f, scene.r_tx(i), scene.r_rx(i),
                         scene.tx.gains[i], scene.rx.gains[i])
    return factor * np.abs(tag.gamma(f)) ** 2


def tag_interference(scene: Scene, i: int, f, others: Optional[Sequence[int]] = None):
    """Power sum of the backscatter from tags other than ``i``."""
    _check_index(scene, i)
    f = np.asarray(f, dtype=float)
    idx = [j for j in range(len(scene.tags)) if j != i] if others is None else others
    total = np.zeros(f.shape)
    for j in idx:
        total = total + received_power(scene, j, f)
    return total


def clutter_power(scene: Scene, i: int, f):
    """Ambient scattering term ``eta P_Tx Gamma_env,i``."""
    return scene.eta * scene.p_tx * scene.clutter(i, f)


def interference_power(scene: Scene, i: int, f):
    """Interference during the measurement of tag ``i`` (W)."""
    total = tag_interference(scene, i, f) + clutter_power(scene, i, f)
    return total if np.ndim(total) else float(total)


def snr(scene: Scene, i: int, f, noise: NoiseModel):
    """Signal-to-noise ratio of tag ``i`` (dB)."""
    return 10 * np.log10(received_power(scene, i, f) / noise.floor)


def sinr(scene: Scene, i: int, f, noise: NoiseModel):
    """Signal to noise-plus-interference ratio of tag ``i`` (dB)."""
    return 10 * np.log10(received_power(scene, i, f)
                         / (noise.floor + interference_power(scene, i, f)))


def max_range(link: LinkBudget, snr_threshold_db: float, noise: NoiseModel) -> float:
    """Largest monostatic distance (r_Tx = r_Rx) meeting an SNR threshold.

    Raises:
        LinkInfeasibleError: If the link delivers no power at any range.
    """
    snr_min = 10 ** (snr_threshold_db / 10)
    num = (link.p_tx * link.sigma * wavelength(link.freq) ** 2 * link.gamma_abs ** 2
           * link.g_tx * link.g_rx)
    if not num > 0:
        raise LinkInfeasibleError("link delivers no power (check P_Tx, sigma, |Gamma|, gains)")
    return float((num / (32 * np.pi ** 3 * noise.floor * snr_min)) ** 0.25)


def noise_stream(seed: int, tag: int, chunk: int, role: int = 0) -> np.random.Generator:
    """Independent generator for one (tag, frequency chunk) work unit."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(tag, chunk, role)))


def noise_samples(n: int, p_floor: float, seed: int, tag: int, role: int = 0,
                  chunk_size: int = NOISE_CHUNK) -> np.ndarray:
    """Power-domain noise: ``max(0, P_floor (1 + z))`` with standard normal z.

    Each chunk of ``chunk_size`` points draws from its own stream, so the
    realisation does not depend on how chunks are scheduled.
    """
    out = np.empty(n)
    for k, start in enumerate(range(0, n, chunk_size)):
        stop = min(start + chunk_size, n)
        z = noise_stream(seed, tag, k, role).standard_normal(stop - start)
        out[start:stop] = p_floor * (1.0 + z)
    return np.maximum(out, 0.0)


def synth_measurement(scene: Scene, i: int, freq, noise: Optional[NoiseModel] = None,
                      seed: int = 0, target_present: bool = True) -> ReceivedSpectrum:
    """Synthesize a swept power measurement of tag ``i``.

    Args:
        scene: Measurement scene.
        i: Index of the tag being measured.
        freq: Frequency grid (Hz).
        noise: Receiver noise; ``None`` for a noiseless measurement.
        seed: Master seed of the noise streams.
        target_present: If False the target tag is removed from the scene
            (other tags and clutter stay), giving the "empty" reference.
    """
    freq = np.asarray(freq, dtype=float)
    sig = received_power(scene, i, freq) if target_present else np.zeros(freq.shape)
    inf = interference_power(scene, i, freq)
    if noise is None:
        pn = np.zeros(freq.shape)
    else:
        pn = noise_samples(freq.size, noise.floor, seed, i, role=0 if target_present else 1)
    return ReceivedSpectrum(freq, sig, inf, pn)
