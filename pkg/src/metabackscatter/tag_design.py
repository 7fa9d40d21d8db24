"""Design metrics and Pareto search over SRR tag geometries.

A design is scored by three quantities, all to be maximised:

* ``delta_f0``: shift of the absorption dip between a dry and a wet
  reference state, a proxy for sensing resolution;
* ``q_factor``: Q of the canonical resonance in the dry state, i.e. how
  sharply the dip can be located;
* ``p_min_reflected``: the smallest ``|Gamma|^2`` over the band in the dry
  state; a deeper dip reflects less power and shortens the readable range.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .circuit_model import (
    DEFAULT_ANALYSIS_BAND,
    DEFAULT_POINTS,
    MaterialProperties,
    SrrGeometry,
    canonical_resonance,
    derive_circuit,
    scattering_coefficient,
)
from .errors import GeometryError, MetaBackscatterError, SearchError

AXES = ("d", "s", "h", "w", "l")
DEFAULT_ENV_PAIR = (0.0, 100.0)
DEFAULT_THICKNESS = 35e-6
# Candidates held in memory when sampling a grid without replacement.
MAX_PERMUTED_GRID = 5_000_000


@dataclass(frozen=True)
class AxisRange:
    """Sampled values of one geometry parameter (m).

    Give either ``count`` (evenly spaced points including both ends) or
    ``step`` (from ``lo`` up to ``hi``).
    """

    lo: float
    hi: float
    count: Optional[int] = None
    step: Optional[float] = None

    def __post_init__(self):
        problems = []
        if not 0 < self.lo <= self.hi:
            problems.append(f"axis range needs 0 < lo <= hi, got ({self.lo}, {self.hi})")
        if (self.count is None) == (self.step is None):
            problems.append("axis range needs exactly one of count or step")
        elif self.count is not None and self.count < 1:
            problems.append("axis count must be >= 1")
        elif self.step is not None and not self.step > 0:
            problems.append("axis step must be > 0")
        if problems:
            raise GeometryError(problems)

    def values(self) -> np.ndarray:
        if self.count is not None:
            return np.linspace(self.lo, self.hi, self.count) if self.count > 1 else np.array([self.lo])
        n = int(math.floor((self.hi - self.lo) / self.step * (1 + 1e-12))) + 1
        return self.lo + self.step * np.arange(n)


@dataclass(frozen=True)
class DesignSpace:
    """Grid of candidate tags.

    Attributes:
        d, s, h, w, l: Sampled ranges of the geometry parameters.
        materials: Candidate substrate/sensitive-film combinations.
        band: Frequency band in which the resonance must fall (Hz).
        t: Metal thickness shared by all candidates (m).
        env_pair: Reference (low, high) environmental states (% RH).
        n_points: Grid size for resonance analysis.
    """

    d: AxisRange
    s: AxisRange
    h: AxisRange
    w: AxisRange
    l: AxisRange
    materials: tuple[MaterialProperties, ...] = field(default_factory=lambda: (MaterialProperties(),))
    band: tuple[float, float] = DEFAULT_ANALYSIS_BAND
    t: float = DEFAULT_THICKNESS
    env_pair: tuple[float, float] = DEFAULT_ENV_PAIR
    n_points: int = DEFAULT_POINTS

    def __post_init__(self):
        object.__setattr__(self, "materials", tuple(self.materials))
        problems = []
        if not self.materials:
            problems.append("design space needs at least one material")
        if not 0 < self.band[0] < self.band[1]:
            problems.append("design band must satisfy 0 < low < high")
        if not self.t > 0:
            problems.append("metal thickness must be > 0")
        if self.d.lo >= self.l.hi:
            problems.append("no candidate satisfies d < l")
        if self.s.lo >= self.l.hi / 2:
            problems.append("no candidate satisfies s < l/2")
        if self.w.hi < self.l.lo:
            problems.append("no candidate satisfies w >= l")
        if problems:
            raise GeometryError(problems)

    def axis_values(self) -> list[np.ndarray]:
        return [getattr(self, a).values() for a in AXES]

    @property
    def size(self) -> int:
        return len(self.materials) * int(np.prod([len(v) for v in self.axis_values()]))

    def shape(self) -> tuple[int, ...]:
        return (len(self.materials),) + tuple(len(v) for v in self.axis_values())

    def cell(self, k: int) -> tuple[int, dict]:
        """Material index and geometry parameters of grid cell ``k``."""
        idx = np.unravel_index(k, self.shape())
        vals = self.axis_values()
        params = {a: float(vals[j][idx[j + 1]]) for j, a in enumerate(AXES)}
        return int(idx[0]), params


@dataclass(frozen=True)
class DesignMetrics:
    """The three design objectives (all maximised)."""

    delta_f0: float
    q_factor: float
    p_min_reflected: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.delta_f0, self.q_factor, self.p_min_reflected)


@dataclass(frozen=True)
class Candidate:
    """An evaluated design."""

    geometry: SrrGeometry
    metrics: DesignMetrics
    material_index: int = 0
    index: int = 0


@dataclass(frozen=True)
class ParetoSet:
    """Mutually non-dominated candidates, in evaluation order."""

    members: tuple[Candidate, ...] = ()
    evaluated: int = 0
    rejected: tuple[str, ...] = ()

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)


def evaluate_design(geom: SrrGeometry, mat: MaterialProperties,
                    env_pair: Sequence[float] = DEFAULT_ENV_PAIR,
                    band: Sequence[float] = DEFAULT_ANALYSIS_BAND,
                    n_points: int = DEFAULT_POINTS) -> DesignMetrics:
    """Score one design.

    The frequency shift is measured between the numeric |Gamma| dips of the
    two states; Q is the canonical Q at the low state; the reflected-power
    floor is ``|Gamma|^2`` at the refined dip of the low state.

    Raises:
        NoResonanceError: If either state has no dip in ``band``.
    """
    psi_lo, psi_hi = env_pair
    cp_lo = derive_circuit(geom, mat, psi_lo)
    res_lo = canonical_resonance(cp_lo, geom, mat, band, n_points)
    if psi_hi == psi_lo:
        res_hi = res_lo
    else:
        res_hi = canonical_resonance(derive_circuit(geom, mat, psi_hi), geom, mat, band, n_points)
    p_min = float(abs(scattering_coefficient(np.array([res_lo.f_dip]), cp_lo, geom, mat)[0]) ** 2)
    return DesignMetrics(abs(res_hi.f_dip - res_lo.f_dip), res_lo.Q, min(max(p_min, 0.0), 1.0))


def dominates(a: Sequence[float], b: Sequence[float]) -> bool:
    """True if ``a`` is at least ``b`` everywhere and better somewhere."""
    return all(x >= y for x, y in zip(a, b)) and any(x > y for x, y in zip(a, b))


def pareto_front(candidates: Sequence[Candidate]) -> ParetoSet:
    """Non-dominated subset under maximisation of all three metrics.

    Exact duplicates do not dominate each other, so all copies are kept.
    Input order is preserved.
    """
    candidates = list(candidates)
    if not candidates:
        return ParetoSet()
    m = np.array([c.metrics.as_tuple() for c in candidates], dtype=float)
    if not np.all(np.isfinite(m)):
        raise ValueError("pareto_front needs finite metrics")
    keep = np.ones(len(m), dtype=bool)
    for i in range(len(m)):
        ge = np.all(m >= m[i], axis=1)
        gt = np.any(m > m[i], axis=1)
        keep[i] = not np.any(ge & gt)
    return ParetoSet(tuple(c for c, k in zip(candidates, keep) if k), evaluated=len(candidates))


def _evaluate_cell(space: DesignSpace, k: int):
    mi, params = space.cell(k)
    try:
        geom = SrrGeometry(t=space.t, **params)
        metrics = evaluate_design(geom, space.materials[mi], space.env_pair, space.band,
                                  space.n_points)
    except MetaBackscatterError as exc:
        return k, None, f"cell {k} {params}: {exc}"
    return k, Candidate(geom, metrics, mi, k), None


def candidate_order(space: DesignSpace, budget: int, seed: int) -> np.ndarray:
    """Indices of the grid cells evaluated for a given budget.

    The full grid is used in order when the budget covers it. Otherwise a
    seeded permutation is truncated, so a larger budget with the same seed
    always evaluates a superset of a smaller one.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    n = space.size
    if budget >= n:
        return np.arange(n)
    rng = np.random.default_rng(np.random.SeedSequence(int(seed)))
    if n <= MAX_PERMUTED_GRID:
        return rng.permutation(n)[:budget]
    # Huge grids: sample with replacement; prefixes still nest.
    return rng.integers(0, n, size=budget)


def search(space: DesignSpace, budget: int, seed: int = 0, jobs: int = 1) -> ParetoSet:
    """Evaluate up to ``budget`` grid cells and return their Pareto front.

    Raises:
        SearchError: If every evaluated candidate was invalid.
    """
    order = candidate_order(space, budget, seed)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_evaluate_cell, itertools.repeat(space), order,
                                    chunksize=max(1, len(order) // (4 * jobs))))
    else:
        results = [_evaluate_cell(space, k) for k in order]
    valid = [c for _, c, _ in results if c is not None]
    rejected = tuple(msg for _, _, msg in results if msg is not None)
    if not valid:
        raise SearchError("no valid design among evaluated candidates: "
                          + " | ".join(rejected[:5]))
    front = pareto_front(valid)
    return ParetoSet(front.members, evaluated=len(results), rejected=rejected)


def scalarize(front: ParetoSet, weights: Sequence[float] = (1.0, 1.0, 1.0)) -> Candidate:
    """Pick one design by a weighted sum of min-max normalised metrics."""
    if not len(front):
        raise SearchError("cannot scalarize an empty front")
    w = np.asarray(weights, dtype=float)
    if w.shape != (3,) or np.any(w < 0) or not np.any(w > 0):
        raise ValueError("weights must be three non-negative numbers, not all zero")
    m = np.array([c.metrics.as_tuple() for c in front], dtype=float)
    span = m.max(axis=0) - m.min(axis=0)
    norm = np.where(span > 0, (m - m.min(axis=0)) / np.where(span > 0, span, 1), 1.0)
    return front.members[int(np.argmax(norm @ w))]
