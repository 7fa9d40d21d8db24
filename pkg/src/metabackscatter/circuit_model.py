"""Equivalent-circuit model of a split-ring-resonator (SRR) tag.

The tag is one SRR unit cell printed on a grounded substrate. Seen by a
normally incident plane wave, the cell behaves as the SRR's lumped network
in parallel with the short-circuited substrate line, and the scattering
coefficient follows from comparing the composite impedance with free space.

Lumped elements
---------------
``C_0``
    Coplanar-strip capacitance between facing edges of neighbouring cells,
    ``C' (S = w - l, W = s) * l``. Four such couplings act in series, so
    ``C_d = C_0 / 4``.
``C_g``
    Coplanar-strip capacitance across the ring gap, ``C' (S = d, W = s)``
    times the coupled depth ``t + h`` (metal thickness plus the substrate
    fringing depth).
``C'``
    Conformal-mapping capacitance per unit length of two coplanar strips of
    width ``W`` separated by ``S`` on a substrate,
    ``eps0 * eps_eff * K(k') / K(k)`` with ``k = S / (S + 2 W)``,
    ``k' = sqrt(1 - k^2)`` and ``eps_eff = (1 + Re eps_r) / 2``.
``L_r``
    Self-inductance of a square loop of mean side ``a = l - s`` made of a
    flat strip ``s`` wide and ``t`` thick,
    ``(2 mu0 a / pi) * (ln(a / g) - 1.024)`` with the strip's geometric mean
    distance ``g = 0.2235 (s + t)``.
``R_d``, ``R_g``
    Dielectric loss of the substrate as resistances in parallel with
    ``C_d`` and ``C_g``: ``1 / (2 pi f_ref C tan_delta)``, frozen at a
    reference frequency so the circuit itself is frequency independent.
``R_o``
    Resistance of the humidity-sensitive film bridging the gap, taken from
    the material's calibration curve.

Topology: the ring branch is ``R_o + j w L_r + (C_g || R_g)`` and sits in
parallel with the inter-cell branch ``C_d || R_d``. The resulting
``Z_SRR`` is put in parallel with the substrate impedance ``Z_S``.

Permittivities use the ``eps' - j eps''`` convention, so a lossy substrate
has ``Im(eps_r) < 0``.
"""

from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import least_squares, minimize_scalar
from scipy.special import ellipk

from .constants import C_LIGHT, EPS0, MU0, Z0
from .errors import (
    CalibrationRangeError,
    GeometryError,
    ModelSingularityError,
    ModelValidityError,
    NoResonanceError,
)

# Required distance (rad) of the substrate electrical length from pi/2.
GUARD_BAND_RAD = 0.01
DEFAULT_POINTS = 1001
# Reference frequency for freezing the dielectric-loss resistances.
DEFAULT_F_REF = 5.25e9
# Band used to characterise a tag's resonance; wide enough to contain the
# shoulders of a low-Q dip.
DEFAULT_ANALYSIS_BAND = (2.0e9, 9.0e9)
# "t much smaller than l" is enforced as t <= l / 10.
THICKNESS_RATIO_MAX = 0.1
# Max |Gamma| error of the fitted RLC over the fit window before flagging.
RESIDUAL_THRESHOLD = 0.05
FIT_WINDOW_POINTS = 201


@dataclass(frozen=True)
class SrrGeometry:
    """Dimensions of one SRR unit cell, all in metres.

    Attributes:
        l: Outer side length of the square ring.
        d: Width of the gap cut into the ring.
        s: Trace width of the ring.
        w: Unit-cell pitch (centre to centre).
        t: Metal thickness.
        h: Substrate thickness.
    """

    l: float
    d: float
    s: float
    w: float
    t: float
    h: float

    def __post_init__(self):
        problems = self.violations()
        if problems:
            raise GeometryError(problems)

    def violations(self) -> list[str]:
        """Return a description of every violated invariant."""
        out = []
        for name in ("l", "d", "s", "w", "t", "h"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                out.append(f"SrrGeometry.{name} must be a finite positive length, got {v!r}")
        if out:
            return out
        if not self.d < self.l:
            out.append(f"SrrGeometry requires d < l (d={self.d}, l={self.l})")
        if not self.s < self.l / 2:
            out.append(f"SrrGeometry requires s < l/2 (s={self.s}, l={self.l})")
        if not self.w >= self.l:
            out.append(f"SrrGeometry requires w >= l, cells must not overlap (w={self.w}, l={self.l})")
        if not self.t <= THICKNESS_RATIO_MAX * self.l:
            out.append(f"SrrGeometry requires t << l, i.e. t <= {THICKNESS_RATIO_MAX} l (t={self.t}, l={self.l})")
        return out

    def replace(self, **changes) -> "SrrGeometry":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class SensitiveMaterial:
    """Calibration curve R_o(psi) of the humidity-sensitive film.

    The curve is piecewise linear between tabulated anchors. It must be
    strictly monotone; the default mimics a hygristor whose resistance falls
    as relative humidity rises.

    Attributes:
        psi: Environmental states of the anchors, strictly increasing (% RH).
        resistance: Film resistance at each anchor (ohm).
    """

    psi: tuple[float, ...] = (0.0, 100.0)
    resistance: tuple[float, ...] = (60.0, 5.0)

    def __post_init__(self):
        object.__setattr__(self, "psi", tuple(float(v) for v in self.psi))
        object.__setattr__(self, "resistance", tuple(float(v) for v in self.resistance))
        problems = []
        if len(self.psi) != len(self.resistance) or len(self.psi) < 2:
            problems.append("SensitiveMaterial needs at least two (psi, resistance) anchors of equal length")
        else:
            if np.any(np.diff(self.psi) <= 0):
                problems.append("SensitiveMaterial.psi must be strictly increasing")
            if any(not (math.isfinite(r) and r > 0) for r in self.resistance):
                problems.append("SensitiveMaterial.resistance must be positive")
            steps = np.diff(self.resistance)
            if not (np.all(steps > 0) or np.all(steps < 0)):
                problems.append("SensitiveMaterial.resistance must be strictly monotone in psi")
        if problems:
            raise GeometryError(problems)

    @property
    def psi_range(self) -> tuple[float, float]:
        return self.psi[0], self.psi[-1]

    def __call__(self, psi_env: float) -> float:
        lo, hi = self.psi_range
        if not lo <= psi_env <= hi:
            raise CalibrationRangeError(
                f"psi_env={psi_env} outside calibrated range [{lo}, {hi}]")
        return float(np.interp(psi_env, self.psi, self.resistance))


@dataclass(frozen=True)
class MaterialProperties:
    """Substrate permittivity and the sensitive film's calibration.

    Attributes:
        eps_r: Complex relative permittivity, ``eps' - j eps''`` (Im <= 0).
        sensitive: Calibration curve of the sensitive resistance R_o.
    """

    eps_r: complex = 4.4 - 0.088j
    sensitive: SensitiveMaterial = field(default_factory=SensitiveMaterial)

    def __post_init__(self):
        eps = complex(self.eps_r)
        object.__setattr__(self, "eps_r", eps)
        problems = []
        if not eps.real >= 1:
            problems.append(f"MaterialProperties requires Re(eps_r) >= 1, got {eps.real}")
        if eps.imag > 0:
            problems.append("MaterialProperties requires Im(eps_r) <= 0 (eps' - j eps'' convention)")
        if problems:
            raise GeometryError(problems)

    @property
    def tan_delta(self) -> float:
        return -self.eps_r.imag / self.eps_r.real

    def sensitive_resistance(self, psi_env: float) -> float:
        return self.sensitive(psi_env)


@dataclass(frozen=True)
class CircuitParameters:
    """Lumped element values of the SRR equivalent circuit.

    Capacitances in farad, inductance in henry, resistances in ohm. The loss
    resistances may be ``inf`` to model a lossless substrate.
    """

    C_d: float
    C_g: float
    L_r: float
    R_d: float
    R_g: float
    R_o: float
    C_0: float = None

    def __post_init__(self):
        if self.C_0 is None:
            object.__setattr__(self, "C_0", 4.0 * self.C_d)
        problems = []
        for name in ("C_d", "C_g", "L_r", "R_d", "R_g", "R_o", "C_0"):
            v = getattr(self, name)
            if not v > 0 or math.isnan(v):
                problems.append(f"CircuitParameters.{name} must be > 0, got {v!r}")
        if not problems and self.C_d != self.C_0 / 4:
            problems.append("CircuitParameters requires C_d = C_0/4")
        if problems:
            raise GeometryError(problems)

    def replace(self, **changes) -> "CircuitParameters":
        if "C_d" in changes and "C_0" not in changes:
            changes["C_0"] = 4.0 * changes["C_d"]
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class CanonicalResonance:
    """Series-RLC equivalent of the tag around its absorption dip.

    Attributes:
        R_total: Effective series resistance (ohm).
        L_total: Effective inductance (H).
        C_total: Effective capacitance (F).
        f0: Resonance of the equivalent RLC (Hz).
        Q: Unloaded quality factor of the equivalent RLC.
        gamma_min: ``|Z0 - R_total| / (Z0 + R_total)``.
        f_dip: Location of the numeric |Gamma| minimum (Hz), if known.
        residual: Max |Gamma| error of the fit over the fit window.
        poor_fit: True when ``residual`` exceeded the acceptance threshold.
    """

    R_total: float
    L_total: float
    C_total: float
    f0: float
    Q: float
    gamma_min: float
    f_dip: float = float("nan")
    residual: float = 0.0
    poor_fit: bool = False

    @classmethod
    def from_rlc(cls, R, L, C, z_ref=Z0, **extra) -> "CanonicalResonance":
        """Build the result from R, L, C using the closed-form identities."""
        f0 = 1.0 / (2 * np.pi * np.sqrt(L * C))
        Q = np.sqrt(L / C) / R
        gmin = abs((z_ref - R) / (z_ref + R))
        return cls(float(R), float(L), float(C), float(f0), float(Q), float(gmin), **extra)


@dataclass(frozen=True)
class ScatteringSpectrum:
    """Complex scattering coefficient sampled on a frequency grid."""

    freq: np.ndarray
    gamma: np.ndarray

    def __post_init__(self):
        freq = np.asarray(self.freq, dtype=float)
        gamma = np.asarray(self.gamma, dtype=complex)
        if freq.ndim != 1 or freq.shape != gamma.shape:
            raise ValueError("freq and gamma must be 1-D arrays of equal length")
        if np.any(np.diff(freq) <= 0):
            raise ValueError("frequency grid must be strictly increasing")
        if np.any(np.abs(gamma) > 1 + 1e-9):
            raise ModelValidityError("|gamma| exceeds 1: passivity violated")
        object.__setattr__(self, "freq", freq)
        object.__setattr__(self, "gamma", gamma)

    @property
    def magnitude(self) -> np.ndarray:
        return np.abs(self.gamma)

    @property
    def power(self) -> np.ndarray:
        return np.abs(self.gamma) ** 2

    def dip_frequency(self) -> float:
        return float(self.freq[np.argmin(self.power)])


def coplanar_strip_capacitance(spacing, width, eps_eff):
    """Capacitance per unit length (F/m) of two coplanar strips.

    Args:
        spacing: Edge-to-edge separation S of the strips (m).
        width: Width W of each strip (m).
        eps_eff: Effective relative permittivity of the surroundings.
    """
    k = spacing / (spacing + 2.0 * width)
    # scipy's ellipk takes the parameter m = k^2.
    return EPS0 * eps_eff * ellipk(1.0 - k * k) / ellipk(k * k)


def effective_permittivity(eps_r: complex) -> float:
    """Quasi-static permittivity seen by fields straddling the surface."""
    return (1.0 + complex(eps_r).real) / 2.0


def neighbor_capacitance(geom: SrrGeometry, mat: MaterialProperties) -> float:
    """C_0: coupling between the facing edges of two adjacent cells."""
    eps_eff = effective_permittivity(mat.eps_r)
    spacing = geom.w - geom.l
    if spacing <= 0:
        raise GeometryError("neighbour capacitance needs w > l (touching cells short together)")
    return coplanar_strip_capacitance(spacing, geom.s, eps_eff) * geom.l


def gap_capacitance(geom: SrrGeometry, mat: MaterialProperties) -> float:
    """C_g: capacitance across the ring gap."""
    eps_eff = effective_permittivity(mat.eps_r)
    return coplanar_strip_capacitance(geom.d, geom.s, eps_eff) * (geom.t + geom.h)


def ring_inductance(geom: SrrGeometry) -> float:
    """L_r: self-inductance of the square ring with mean side l - s."""
    a = geom.l - geom.s
    gmd = 0.2235 * (geom.s + geom.t)
    return 2.0 * MU0 * a / np.pi * (np.log(a / gmd) - 1.024)


def loss_resistance(capacitance: float, tan_delta: float, f_ref: float = DEFAULT_F_REF) -> float:
    """Parallel resistance representing dielectric loss of a capacitor."""
    if tan_delta <= 0:
        return math.inf
    return 1.0 / (2.0 * np.pi * f_ref * capacitance * tan_delta)


def derive_circuit(geom: SrrGeometry, mat: MaterialProperties, psi_env: float,
                   f_ref: float = DEFAULT_F_REF) -> CircuitParameters:
    """Compute the lumped element values of a tag.

    Args:
        geom: Unit-cell geometry (validated on construction).
        mat: Substrate and sensitive-film properties.
        psi_env: Environmental state (% RH) selecting R_o.
        f_ref: Frequency at which loss resistances are frozen (Hz).

    Raises:
        GeometryError: If ``geom`` is not a valid geometry.
        CalibrationRangeError: If ``psi_env`` is outside the film calibration.
    """
    problems = geom.violations()
    if problems:
        raise GeometryError(problems)
    C_0 = float(neighbor_capacitance(geom, mat))
    C_d = C_0 / 4.0
    C_g = float(gap_capacitance(geom, mat))
    L_r = float(ring_inductance(geom))
    if L_r <= 0:
        raise GeometryError("ring inductance non-positive: trace too wide for the ring side")
    tand = mat.tan_delta
    return CircuitParameters(
        C_d=C_d,
        C_g=C_g,
        L_r=L_r,
        R_d=loss_resistance(C_d, tand, f_ref),
        R_g=loss_resistance(C_g, tand, f_ref),
        R_o=mat.sensitive_resistance(psi_env),
        C_0=C_0,
    )


def substrate_impedance(f, h, eps_r, guard: float = GUARD_BAND_RAD):
    """Input impedance of the grounded substrate, a shorted line of length h.

    ``Z_S = j (Z0 / sqrt(eps_r)) tan(2 pi f sqrt(eps_r) h / c)``.

    Raises:
        ModelValidityError: If the electrical length is within ``guard``
            radians of a quarter wave, where the line resonates.
    """
    f = np.asarray(f, dtype=float)
    if np.any(f <= 0) or h < 0:
        raise ValueError("substrate_impedance needs f > 0 and h >= 0")
    n = np.sqrt(complex(eps_r))
    theta = 2.0 * np.pi * f * n * h / C_LIGHT
    if np.any(np.abs(theta.real - np.pi / 2) <= guard):
        raise ModelValidityError(
            "substrate close to a quarter wavelength thick; tan() singular")
    return 1j * (Z0 / n) * np.tan(theta)


def parallel_impedance(a, b):
    """Impedance of two elements in parallel, ``a b / (a + b)``.

    An infinite element acts as an open circuit.

    Raises:
        ModelSingularityError: If ``a + b`` vanishes with finite terms.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    a_inf = np.isinf(a)
    b_inf = np.isinf(b)
    total = a + b
    finite = ~(a_inf | b_inf)
    if np.any(finite & (np.abs(total) <= 1e-300)):
        raise ModelSingularityError("parallel impedances sum to zero")
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(finite, a * b / np.where(finite, total, 1.0), 0)
    out = np.where(a_inf & ~b_inf, b, out)
    out = np.where(b_inf & ~a_inf, a, out)
    out = np.where(a_inf & b_inf, np.inf + 0j, out)
    return out if out.ndim else complex(out)


def _capacitor(omega, C):
    return 1.0 / (1j * omega * C)


def srr_impedance(f, cp: CircuitParameters):
    """Impedance of the SRR lumped network at frequency f."""
    f = np.asarray(f, dtype=float)
    if np.any(f <= 0):
        raise ValueError("srr_impedance needs f > 0")
    omega = 2.0 * np.pi * f
    ring = cp.R_o + 1j * omega * cp.L_r + parallel_impedance(_capacitor(omega, cp.C_g), cp.R_g)
    shunt = parallel_impedance(_capacitor(omega, cp.C_d), cp.R_d)
    return parallel_impedance(ring, shunt)


def tag_impedance(f, cp: CircuitParameters, geom: SrrGeometry, mat: MaterialProperties):
    """Composite impedance ``Z_SRR || Z_S`` of the tag."""
    return parallel_impedance(srr_impedance(f, cp), substrate_impedance(f, geom.h, mat.eps_r))


def reflection_from_impedance(z, z_ref: float = Z0):
    """``(z - z_ref) / (z + z_ref)``, with an open circuit mapping to +1."""
    z = np.asarray(z, dtype=complex)
    with np.errstate(invalid="ignore"):
        g = np.where(np.isinf(z), 1.0 + 0j, (z - z_ref) / (z + z_ref))
    return g if g.ndim else complex(g)


def scattering_coefficient(f, cp: CircuitParameters, geom: SrrGeometry,
                           mat: MaterialProperties):
    """Complex scattering coefficient of the tag against free space."""
    return reflection_from_impedance(tag_impedance(f, cp, geom, mat))


def frequency_grid(band: Sequence[float], n_points: int = DEFAULT_POINTS) -> np.ndarray:
    lo, hi = band
    if not 0 < lo < hi:
        raise ValueError(f"band must satisfy 0 < low < high, got {band}")
    if n_points < 2:
        raise ValueError("need at least two grid points")
    return np.linspace(lo, hi, int(n_points))


def spectrum(cp: CircuitParameters, geom: SrrGeometry, mat: MaterialProperties,
             band: Sequence[float], n_points: int = DEFAULT_POINTS) -> ScatteringSpectrum:
    """Sample the scattering coefficient on a uniform grid over ``band``."""
    freq = frequency_grid(band, n_points)
    return ScatteringSpectrum(freq, scattering_coefficient(freq, cp, geom, mat))


def _half_depth_width(freq, power, i):
    """Width between the half-depth crossings either side of index i."""
    base = min(power[:i].max(), power[i + 1:].max())
    if not base > power[i]:
        raise NoResonanceError("reflection spectrum has no dip")
    half = 0.5 * (power[i] + base)
    lo = i
    while lo > 0 and power[lo] < half:
        lo -= 1
    hi = i
    while hi < len(power) - 1 and power[hi] < half:
        hi += 1

    def cross(a, b):
        return freq[a] + (half - power[a]) * (freq[b] - freq[a]) / (power[b] - power[a])

    return cross(hi - 1, hi) - cross(lo, lo + 1)


def fit_canonical(impedance: Callable[[np.ndarray], np.ndarray], band: Sequence[float],
                  n_points: int = DEFAULT_POINTS, z_ref: float = Z0,
                  residual_threshold: float = RESIDUAL_THRESHOLD) -> CanonicalResonance:
    """Reduce an impedance response to an equivalent series RLC.

    The numeric |Gamma| dip is located on the grid and refined. Its
    half-depth width gives a loaded Q, which is converted to an unloaded
    estimate ``Q_est`` using the dip depth. Over the window
    ``f_dip +- f_dip / (2 Q_est)`` the response is then fitted by
    ``R + j sqrt(L/C) (f/f0 - f0/f)`` in the least-squares sense on |Gamma|.

    A dip may be a series resonance (reactance rising through zero) or an
    anti-resonance (reactance falling). Anti-resonances are fitted on the
    dual impedance ``z_ref^2 / Z``, which has the same |Gamma| and series
    form. Since |Gamma| is unchanged under ``R -> z_ref^2 / R`` the fitted
    branch is chosen to lie on the same side of ``z_ref`` as the actual
    resistance at the dip.

    Args:
        impedance: Vectorised map from frequency (Hz) to complex impedance.
        band: Search interval (Hz).
        n_points: Grid size used to locate the dip.
        z_ref: Reference impedance (free space by default).
        residual_threshold: Fit error above which ``poor_fit`` is set.

    Raises:
        NoResonanceError: If the minimum sits on the band edge or the
            spectrum is flat.
    """
    freq = frequency_grid(band, n_points)
    power = np.abs(reflection_from_impedance(impedance(freq), z_ref)) ** 2
    i = int(np.argmin(power))
    if i == 0 or i == len(freq) - 1:
        raise NoResonanceError(f"no reflection dip inside {band[0]:.6g}-{band[1]:.6g} Hz")
    step = freq[1] - freq[0]

    def dip_power(x):
        return abs(reflection_from_impedance(impedance(np.array([x])), z_ref)[0]) ** 2

    ref = minimize_scalar(dip_power, bounds=(freq[i] - step, freq[i] + step),
                          method="bounded", options={"xatol": step * 1e-6})
    f_dip = float(ref.x) if ref.fun <= power[i] else float(freq[i])
    q_loaded = f_dip / _half_depth_width(freq, power, i)

    z_dip = impedance(np.array([f_dip]))[0]
    dz = impedance(np.array([f_dip * (1 + 1e-4), f_dip * (1 - 1e-4)]))
    anti = (dz[0] - dz[1]).imag < 0
    w_dip = z_ref ** 2 / z_dip if anti else z_dip
    g_dip = abs(reflection_from_impedance(z_dip, z_ref))
    if g_dip >= 1:
        raise NoResonanceError("dip does not absorb")
    r_norm = (1 - g_dip) / (1 + g_dip) if w_dip.real < z_ref else (1 + g_dip) / (1 - g_dip)
    q_est = q_loaded * (1 + 1 / r_norm)

    half_window = f_dip / (2 * q_est)
    f_win = np.linspace(max(f_dip - half_window, 0.05 * f_dip), f_dip + half_window,
                        FIT_WINDOW_POINTS)
    z_win = impedance(f_win)
    w_win = z_ref ** 2 / z_win if anti else z_win
    x = f_win / f_dip

    # Linear start: Im W ~ a x - b / x with a = w_dip L, b = 1 / (w_dip C).
    (a, b), *_ = np.linalg.lstsq(np.c_[x, -1 / x], w_win.imag, rcond=None)
    if a <= 0 or b <= 0:
        a = b = abs(a) + abs(b)
    r0 = max(float(w_win.real.mean()), 1e-6 * z_ref)
    theta0 = np.log([r0, np.sqrt(a * b), np.sqrt(b / a)])
    g_target = np.abs(reflection_from_impedance(z_win, z_ref))

    def model(theta):
        R, zc, r = np.exp(theta)
        return np.abs(reflection_from_impedance(R + 1j * zc * (x / r - r / x), z_ref))

    sol = least_squares(lambda th: model(th) - g_target, theta0, x_scale="jac",
                        xtol=1e-14, ftol=1e-14, gtol=1e-14)
    R, zc, r = np.exp(sol.x)
    residual = float(np.max(np.abs(model(sol.x) - g_target)))
    if (R - z_ref) * (w_dip.real - z_ref) < 0:
        R, zc = z_ref ** 2 / R, zc * z_ref / R
    f0 = f_dip * r
    L = zc / (2 * np.pi * f0)
    C = 1 / (2 * np.pi * f0 * zc)
    poor = residual > residual_threshold
    if poor:
        warnings.warn(f"poor canonical fit (|Gamma| residual {residual:.3g})", RuntimeWarning,
                      stacklevel=2)
    return CanonicalResonance.from_rlc(R, L, C, z_ref=z_ref, f_dip=f_dip,
                                       residual=residual, poor_fit=bool(poor))


def canonical_resonance(cp: CircuitParameters, geom: SrrGeometry, mat: MaterialProperties,
                        band: Sequence[float] = DEFAULT_ANALYSIS_BAND,
                        n_points: int = DEFAULT_POINTS) -> CanonicalResonance:
    """Equivalent series RLC, resonance, Q and dip depth of a tag.

    See :func:`fit_canonical` for the reduction.
    """
    return fit_canonical(lambda f: tag_impedance(f, cp, geom, mat), band, n_points)


def prototype_geometry() -> SrrGeometry:
    """Reference 10.09 mm cell on 2.4 mm FR-4 resonating near 5.25 GHz."""
    return SrrGeometry(l=6.0e-3, d=1.4e-3, s=1.2e-3, w=10.09e-3, t=35e-6, h=2.4e-3)


def prototype_material() -> MaterialProperties:
    """FR-4 (eps_r = 4.4, tan_delta = 0.02) with the default hygristor curve."""
    return MaterialProperties()
