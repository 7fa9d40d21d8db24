"""Resonance recovery and humidity classification from swept measurements.

Two estimators are provided. :func:`peak_fit` works directly on the
background-subtracted power spectrum. The Matrix Pencil route transforms
the spectrum to a time response with an inverse DFT and fits damped complex
exponentials, whose poles ``s = alpha + j 2 pi f`` give the resonance and
``Q = pi f / |alpha|``.

A dip ``1 - A / (1 + x^2)`` with ``x = 2 Q (f - f0) / f0`` is the real part
of a single pole at ``f0 + j f0 / (2 Q)``, so its causal time response
decays as ``exp(-pi f0 t / Q)``. A Hann window in frequency only mixes
adjacent time samples and leaves the poles untouched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import hankel

from .circuit_model import (
    DEFAULT_ANALYSIS_BAND,
    DEFAULT_POINTS,
    MaterialProperties,
    SrrGeometry,
    canonical_resonance,
    derive_circuit,
)
from .errors import CalibrationRangeError, GridMismatchError, NoTagDetectedError
from .link_model import ReceivedSpectrum

DEFAULT_PROMINENCE = 0.05
DEFAULT_SV_THRESHOLD = 1e-3
N_CATEGORIES = 10
BIN_WIDTH = 10.0


@dataclass(frozen=True)
class CalibratedSpectrum:
    """Background-normalised response on the measurement grid."""

    freq: np.ndarray
    response: np.ndarray

    def __post_init__(self):
        freq = np.asarray(self.freq, dtype=float)
        resp = np.asarray(self.response)
        if freq.shape != resp.shape or freq.ndim != 1:
            raise ValueError("freq and response must be 1-D arrays of equal length")
        object.__setattr__(self, "freq", freq)
        object.__setattr__(self, "response", resp)


@dataclass(frozen=True)
class PoleSet:
    """Complex poles with their residues, sorted by |residue| descending."""

    poles: np.ndarray = field(default_factory=lambda: np.zeros(0, complex))
    residues: np.ndarray = field(default_factory=lambda: np.zeros(0, complex))
    model_order: int = 0

    def __post_init__(self):
        poles = np.asarray(self.poles, dtype=complex)
        residues = np.asarray(self.residues, dtype=complex)
        order = np.argsort(-np.abs(residues), kind="stable")
        object.__setattr__(self, "poles", poles[order])
        object.__setattr__(self, "residues", residues[order])

    def __len__(self):
        return len(self.poles)

    @property
    def alpha(self) -> np.ndarray:
        return self.poles.real

    @property
    def freqs(self) -> np.ndarray:
        return self.poles.imag / (2 * np.pi)


@dataclass(frozen=True)
class HumidityCalibration:
    """Monotone map from humidity (%) to resonance frequency (Hz)."""

    psi: np.ndarray
    f0: np.ndarray

    def __post_init__(self):
        psi = np.asarray(self.psi, dtype=float)
        f0 = np.asarray(self.f0, dtype=float)
        if psi.ndim != 1 or psi.shape != f0.shape or psi.size < 2:
            raise CalibrationRangeError("calibration needs matching psi/f0 columns with >= 2 rows")
        if np.any(np.diff(psi) <= 0):
            raise CalibrationRangeError("calibration psi must be strictly increasing")
        if psi[0] > 0 or psi[-1] < 100:
            raise CalibrationRangeError("calibration must cover 0-100 % humidity")
        step = np.diff(f0)
        if not (np.all(step > 0) or np.all(step < 0)):
            raise CalibrationRangeError("calibration f0(psi) must be strictly monotone")
        object.__setattr__(self, "psi", psi)
        object.__setattr__(self, "f0", f0)

    def __call__(self, psi):
        return np.interp(psi, self.psi, self.f0)

    def invert(self, f0_hat: float) -> tuple[float, bool]:
        """Humidity for a resonance, clamped to the table; returns (psi, clamped)."""
        f, p = (self.f0, self.psi) if self.f0[0] < self.f0[-1] else (self.f0[::-1], self.psi[::-1])
        clamped = not f[0] <= f0_hat <= f[-1]
        return float(np.interp(f0_hat, f, p)), clamped


@dataclass(frozen=True)
class DetectionResult:
    """Outcome of detecting one tag."""

    tag_id: int
    f0_hat: float
    q_hat: float
    category: int
    confidence: float
    flags: tuple[str, ...] = ()
    psi_hat: float = float("nan")


def background_subtract(meas: ReceivedSpectrum, empty: ReceivedSpectrum,
                        flatten_wavelength: bool = False) -> CalibratedSpectrum:
    """Subtract the empty-scene power from the tag-scene power.

    Args:
        meas: Measurement with the tag present.
        empty: Measurement of the same scene without the tag.
        flatten_wavelength: Multiply by ``(f / f_c)^2`` (``f_c`` the grid
            centre) to undo the ``lambda^2`` tilt of the link budget, so the
            response is proportional to ``|Gamma|^2``.

    Raises:
        GridMismatchError: If the two grids differ.
    """
    if meas.freq.shape != empty.freq.shape or not np.array_equal(meas.freq, empty.freq):
        raise GridMismatchError("measurement and empty spectra use different frequency grids")
    resp = meas.p_total - empty.p_total
    if flatten_wavelength:
        f_c = 0.5 * (meas.freq[0] + meas.freq[-1])
        resp = resp * (meas.freq / f_c) ** 2
    return CalibratedSpectrum(meas.freq.copy(), resp)


def _shoulder_baseline(resp: np.ndarray, i: int) -> float:
    return float(min(resp[:i].max(), resp[i + 1:].max()))


def _crossing(freq, resp, a, b, level):
    return freq[a] + (level - resp[a]) * (freq[b] - freq[a]) / (resp[b] - resp[a])


def peak_fit(cal: CalibratedSpectrum, prominence: float = DEFAULT_PROMINENCE
             ) -> tuple[float, float]:
    """Locate the absorption dip and estimate its Q.

    The minimum is refined by a parabola through the three log-power samples
    around it. Q is ``f0 / FWHM``, the width taken between the crossings of
    half depth, measured from the lower of the two shoulder maxima.

    Args:
        cal: Calibrated power spectrum (complex input uses its magnitude).
        prominence: Minimum relative depth ``(baseline - min) / baseline``.

    Raises:
        NoTagDetectedError: If there is no dip above the prominence threshold.
    """
    freq = cal.freq
    resp = np.abs(cal.response) if np.iscomplexobj(cal.response) else cal.response.astype(float)
    n = len(freq)
    if n < 5:
        raise NoTagDetectedError("need at least 5 grid points")
    i = int(np.argmin(resp))
    if i == 0 or i == n - 1:
        raise NoTagDetectedError("no interior dip in the spectrum")
    base = _shoulder_baseline(resp, i)
    if not base > 0 or (base - resp[i]) / base < prominence:
        raise NoTagDetectedError("no dip above the prominence threshold")

    # Non-positive samples (possible after noisy subtraction) are clamped.
    floor = base * 1e-12
    y = np.log(np.maximum(resp[i - 1:i + 2], floor))
    denom = y[0] - 2 * y[1] + y[2]
    offset = 0.5 * (y[0] - y[2]) / denom if denom > 0 else 0.0
    step = freq[i + 1] - freq[i]
    f0 = float(freq[i] + np.clip(offset, -0.5, 0.5) * step)

    half = 0.5 * (resp[i] + base)
    lo = i
    while lo > 0 and resp[lo] < half:
        lo -= 1
    hi = i
    while hi < n - 1 and resp[hi] < half:
        hi += 1
    width = (_crossing(freq, resp, hi - 1, hi, half)
             - _crossing(freq, resp, lo, lo + 1, half))
    return f0, float(f0 / width)


def matrix_pencil(samples, dt: float, pencil_L: Optional[int] = None,
                  sv_threshold: float = DEFAULT_SV_THRESHOLD) -> PoleSet:
    """Estimate damped complex exponentials with the Matrix Pencil Method.

    Fits ``y[n] = sum_k R_k exp(s_k n dt)``. Singular values of the Hankel
    data matrix below ``sv_threshold`` times the largest are discarded; the
    retained count is the model order. Growing poles (``alpha > 0``) are
    not physical and are dropped from the result.

    Args:
        samples: Uniformly spaced samples (real or complex), N >= 8.
        dt: Sample spacing (s).
        pencil_L: Pencil parameter in [N/4, N/2]; defaults to N // 3.
        sv_threshold: Relative singular value cutoff in (0, 1).
    """
    y = np.asarray(samples, dtype=complex)
    N = y.size
    if N < 8:
        raise ValueError("matrix pencil needs at least 8 samples")
    L = N // 3 if pencil_L is None else int(pencil_L)
    if not N / 4 <= L <= N / 2:
        raise ValueError(f"pencil parameter must lie in [N/4, N/2], got {L} for N={N}")
    if not 0 < sv_threshold < 1:
        raise ValueError("sv_threshold must lie in (0, 1)")

    Y = hankel(y[:N - L], y[N - L - 1:])
    _, sv, vh = np.linalg.svd(Y, full_matrices=False)
    if sv[0] == 0:
        return PoleSet()
    # At most L exponentials are identifiable from an L-step shift.
    M = min(int(np.count_nonzero(sv >= sv_threshold * sv[0])), L)
    if M == 0:
        return PoleSet()
    # Rows of vh span the row space of Y, which is shift-invariant:
    # A[:, 1:] = T diag(z) T^-1 A[:, :-1].
    A = vh[:M]
    z = np.linalg.eigvals(A[:, 1:] @ np.linalg.pinv(A[:, :-1]))
    z = z[z != 0]
    vander = z[np.newaxis, :] ** np.arange(N)[:, np.newaxis]
    res, *_ = np.linalg.lstsq(vander, y, rcond=None)
    s = np.log(z) / dt
    keep = s.real <= 1e-9 * np.abs(s)
    return PoleSet(s[keep], res[keep], M)


def poles_to_resonance(poles: PoleSet) -> tuple[float, float]:
    """Resonance and Q of the dominant-residue pole with positive frequency.

    Raises:
        NoTagDetectedError: If no pole has ``f > 0``.
    """
    for s in poles.poles:
        f = s.imag / (2 * np.pi)
        if f > 0:
            if s.real == 0:
                return float(f), math.inf
            return float(f), float(np.pi * f / abs(s.real))
    raise NoTagDetectedError("no resonant pole found")


def spectrum_to_time(freq, response, window: Optional[str] = "hann"):
    """Inverse DFT of a uniformly sampled spectrum.

    Returns:
        ``(samples, dt)`` where ``samples[m]`` is the response at time
        ``m * dt`` relative to a carrier at ``freq[0]``, ``dt = 1/(N df)``.
    """
    freq = np.asarray(freq, dtype=float)
    H = np.asarray(response, dtype=complex)
    N = freq.size
    df = freq[1] - freq[0]
    if not np.allclose(np.diff(freq), df, rtol=1e-9, atol=0):
        raise ValueError("inverse transform needs a uniform frequency grid")
    if window == "hann":
        H = H * np.hanning(N)
    elif window not in (None, "none", "rect"):
        raise ValueError(f"unknown window {window!r}")
    return np.fft.ifft(H), 1.0 / (N * df)


def mpm_from_spectrum(cal: CalibratedSpectrum, pencil_L: Optional[int] = None,
                      sv_threshold: float = DEFAULT_SV_THRESHOLD,
                      window: Optional[str] = "hann", skip: int = 2) -> PoleSet:
    """Poles of a calibrated spectrum via inverse DFT and Matrix Pencil.

    Power spectra are turned into a positive resonance feature by taking
    ``max(response) - response``; complex spectra are used as they are.
    Only the causal half of the time response is fitted, after skipping the
    first ``skip`` samples, which absorb any constant baseline offset
    (spread over neighbouring samples by the window). Returned poles are on
    the absolute frequency axis.
    """
    resp = cal.response
    if not np.iscomplexobj(resp):
        resp = resp.max() - resp
    h, dt = spectrum_to_time(cal.freq, resp, window)
    seq = h[skip:cal.freq.size // 2]
    ps = matrix_pencil(seq, dt, pencil_L, sv_threshold)
    if len(ps) == 0:
        return ps
    band = 1.0 / dt
    f_rel = np.mod(ps.poles.imag / (2 * np.pi), band)
    poles = ps.poles.real + 2j * np.pi * (cal.freq[0] + f_rel)
    # Residues refer to sample ``skip``; rescale to time zero.
    res = ps.residues * np.exp(-ps.poles * skip * dt)
    return PoleSet(poles, res, ps.model_order)


def classify_humidity(f0_hat: float, calibration: HumidityCalibration
                      ) -> tuple[int, float, tuple[str, ...]]:
    """Map a resonance estimate to a 10 % humidity bin.

    Confidence is triangular in the position inside the bin,
    ``1 - 2 |psi mod 10 - 5| / 10``: 1 at the bin centre, 0 on its edges.

    Returns:
        ``(category, confidence, flags)``; flags contains ``"clamped"`` when
        the estimate fell outside the calibration.
    """
    psi, clamped = calibration.invert(f0_hat)
    return _category(psi) + ((("clamped",) if clamped else ()),)


def _category(psi: float) -> tuple[int, float]:
    cat = int(min(max(math.floor(psi / BIN_WIDTH), 0), N_CATEGORIES - 1))
    conf = 1.0 - 2.0 * abs(math.fmod(psi, BIN_WIDTH) - BIN_WIDTH / 2) / BIN_WIDTH
    return cat, float(min(max(conf, 0.0), 1.0))


def calibrate(geom: SrrGeometry, mat: MaterialProperties,
              psi: Sequence[float] = tuple(range(0, 101, 5)),
              band: Sequence[float] = DEFAULT_ANALYSIS_BAND,
              n_points: int = DEFAULT_POINTS) -> HumidityCalibration:
    """Tabulate the tag's absorption-dip frequency against humidity."""
    f0 = []
    for p in psi:
        cp = derive_circuit(geom, mat, p)
        f0.append(canonical_resonance(cp, geom, mat, band, n_points).f_dip)
    return HumidityCalibration(np.array(psi, dtype=float), np.array(f0))


def detect(meas: ReceivedSpectrum, empty: ReceivedSpectrum, calibration: HumidityCalibration,
           tag_id: int = 0, method: str = "peak", flatten_wavelength: bool = True,
           prominence: float = DEFAULT_PROMINENCE, pencil_L: Optional[int] = None,
           sv_threshold: float = DEFAULT_SV_THRESHOLD) -> DetectionResult:
    """Full calibrated pipeline for one tag.

    If no dip clears the prominence test the raw minimum of the calibrated
    response is still classified, with zero confidence and a ``no_tag``
    flag, so that every measurement yields a category.
    """
    cal = background_subtract(meas, empty, flatten_wavelength)
    flags = []
    try:
        if method == "peak":
            f0, q = peak_fit(cal, prominence)
        elif method == "mpm":
            f0, q = poles_to_resonance(mpm_from_spectrum(cal, pencil_L, sv_threshold))
        else:
            raise ValueError(f"unknown detection method {method!r}")
    except NoTagDetectedError:
        f0, q = float(cal.freq[int(np.argmin(np.real(cal.response)))]), float("nan")
        flags.append("no_tag")
    psi, clamped = calibration.invert(f0)
    cat, conf = _category(psi)
    if clamped:
        flags.append("clamped")
    if "no_tag" in flags:
        conf = 0.0
    return DetectionResult(tag_id, f0, q, cat, conf, tuple(flags), psi)
