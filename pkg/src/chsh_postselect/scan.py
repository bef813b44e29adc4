"""Measurement-angle search for maximal post-selected CHSH value.

A Cartesian grid scan over the four angles of the spin-1 observable family
(or any caller-supplied single-angle observable family), optionally followed
by a derivative-free coordinate pattern search around the best grid point.
Everything is deterministic: grid cells are visited in lexicographic order,
ties keep the lexicographically smallest angle tuple, and the refinement
accepts only strict improvements.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .correlations import (
    DEGENERACY_EPS,
    chsh_combination,
    conditional_expectation,
    expectation,
    joint_distribution,
    pass_probability,
)
from .exceptions import DegeneratePostSelectionError
from .model import (
    DensityMatrix,
    Povm,
    ProductMixture,
    density_from_mixture,
    povm_from_observable,
    spin1_observable,
)

HALF_PI = math.pi / 2
DEFAULT_ANGLE_RANGE = (-HALF_PI, HALF_PI)
IMPROVEMENT_TOL = 1e-12


@dataclass(frozen=True)
class ScanConfig:
    step: float
    angle_ranges: tuple[tuple[float, float], ...] = (DEFAULT_ANGLE_RANGE,) * 4
    refine: bool = False
    refine_shrink: float = 0.5
    refine_iters: int = 10

    def __post_init__(self):
        if not (self.step > 0):
            raise ValueError(f"step must be > 0, got {self.step!r}")
        ranges = tuple((float(lo), float(hi)) for lo, hi in self.angle_ranges)
        if len(ranges) != 4:
            raise ValueError(f"need 4 angle ranges, got {len(ranges)}")
        for lo, hi in ranges:
            if not lo < hi:
                raise ValueError(f"angle range [{lo!r}, {hi!r}] must have lo < hi")
        if not 0 < self.refine_shrink < 1:
            raise ValueError(f"refine_shrink must be in (0, 1), got {self.refine_shrink!r}")
        if self.refine_iters < 0:
            raise ValueError(f"refine_iters must be >= 0, got {self.refine_iters!r}")
        object.__setattr__(self, "angle_ranges", ranges)


@dataclass(frozen=True)
class ScanRow:
    """One evaluated angle tuple.  ``s_conditioned`` is None exactly when a
    pair's conditioning event was degenerate (the cell is flagged, not an
    error, and never a best-value candidate)."""

    angles: tuple[float, float, float, float]
    s: float
    s_conditioned: float | None
    pass_probabilities: tuple[float, float, float, float]
    degenerate: bool


@dataclass(frozen=True)
class RefineResult:
    angles: tuple[float, float, float, float]
    value: float
    history: tuple[float, ...]


@dataclass(frozen=True)
class ScanResult:
    best_angles: tuple[float, float, float, float] | None
    best_value: float | None
    evaluations: int
    rows: tuple[ScanRow, ...]


class _AngleEvaluator:
    """Caches POVMs per angle and pair statistics per (left, right) angle.

    A four-angle cell touches only two distinct angle pairs per side, so a
    grid of g points per axis costs O(g^2) quantum evaluations instead of
    O(g^4).
    """

    def __init__(
        self,
        rho: DensityMatrix,
        observable_family: Callable[[float], np.ndarray] = spin1_observable,
        eps: float = DEGENERACY_EPS,
    ):
        self.rho = rho
        self.eps = eps
        self._family = observable_family
        self._povms: dict[float, Povm] = {}
        self._stats: dict[tuple[float, float], tuple[float, float, float | None]] = {}
        self.evaluations = 0

    def povm(self, angle: float) -> Povm:
        if angle not in self._povms:
            self._povms[angle] = povm_from_observable(self._family(angle))
        return self._povms[angle]

    def pair_stats(self, left: float, right: float) -> tuple[float, float, float | None]:
        """(correlation, pass probability, conditioned correlation or None)."""
        key = (left, right)
        if key not in self._stats:
            jd = joint_distribution(self.rho, self.povm(left), self.povm(right))
            corr = expectation(jd)
            p = pass_probability(jd)
            try:
                cond = conditional_expectation(jd, self.eps)
            except DegeneratePostSelectionError:
                cond = None
            self._stats[key] = (corr, p, cond)
        return self._stats[key]

    def cell(self, angles: tuple[float, float, float, float]) -> ScanRow:
        alpha, alpha_prime, beta, beta_prime = angles
        stats = (
            self.pair_stats(alpha, beta),
            self.pair_stats(alpha, beta_prime),
            self.pair_stats(alpha_prime, beta),
            self.pair_stats(alpha_prime, beta_prime),
        )
        self.evaluations += 1
        s = chsh_combination([st[0] for st in stats])
        passes = tuple(st[1] for st in stats)
        conditioned = [st[2] for st in stats]
        degenerate = any(c is None for c in conditioned)
        s_conditioned = None if degenerate else chsh_combination(conditioned)
        return ScanRow(
            angles=tuple(angles),
            s=s,
            s_conditioned=s_conditioned,
            pass_probabilities=passes,
            degenerate=degenerate,
        )


def _as_density(state: ProductMixture | DensityMatrix) -> DensityMatrix:
    if isinstance(state, ProductMixture):
        return density_from_mixture(state)
    return state


def _grid_axis(lo: float, hi: float, step: float) -> tuple[float, ...]:
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return tuple(lo + k * step for k in range(n))


def grid_scan(
    state: ProductMixture | DensityMatrix,
    cfg: ScanConfig,
    observable_family: Callable[[float], np.ndarray] = spin1_observable,
) -> ScanResult:
    """Evaluate the conditioned CHSH value on the Cartesian angle grid.

    Degenerate cells are flagged and skipped as candidates; exact-value ties
    are broken toward the lexicographically smallest angle tuple (guaranteed
    by visiting cells in lexicographic order and requiring strict
    improvement).
    """
    evaluator = _AngleEvaluator(_as_density(state), observable_family)
    axes = [_grid_axis(lo, hi, cfg.step) for lo, hi in cfg.angle_ranges]
    rows = []
    best: ScanRow | None = None
    for angles in itertools.product(*axes):
        row = evaluator.cell(angles)
        rows.append(row)
        if not row.degenerate and (best is None or row.s_conditioned > best.s_conditioned):
            best = row
    best_angles = None if best is None else best.angles
    best_value = None if best is None else best.s_conditioned
    if cfg.refine and best is not None:
        refined = _pattern_search(evaluator, best.angles, cfg)
        if refined.value > best_value:
            best_angles, best_value = refined.angles, refined.value
    return ScanResult(
        best_angles=best_angles,
        best_value=best_value,
        evaluations=evaluator.evaluations,
        rows=tuple(rows),
    )


def refine(
    state: ProductMixture | DensityMatrix,
    start: tuple[float, float, float, float],
    cfg: ScanConfig,
    observable_family: Callable[[float], np.ndarray] = spin1_observable,
) -> RefineResult:
    """Coordinate pattern search for the conditioned CHSH value from ``start``."""
    evaluator = _AngleEvaluator(_as_density(state), observable_family)
    return _pattern_search(evaluator, tuple(start), cfg)


def _pattern_search(
    evaluator: _AngleEvaluator, start: tuple[float, ...], cfg: ScanConfig
) -> RefineResult:
    """Probe +-step on each axis, keep strict improvements, shrink the step
    when a full sweep stalls, stop after ``refine_iters`` shrinks.  The value
    sequence is monotone nondecreasing by construction; degenerate probes
    count as non-improvements."""
    current = evaluator.cell(start)
    if current.degenerate:
        raise DegeneratePostSelectionError("refinement start point has degenerate conditioning")
    angles = list(start)
    value = current.s_conditioned
    history = [value]
    step = cfg.step
    shrinks = 0
    while True:
        improved = False
        for axis in range(4):
            candidates = []
            for delta in (step, -step):
                probe = list(angles)
                probe[axis] += delta
                row = evaluator.cell(tuple(probe))
                if not row.degenerate:
                    candidates.append((row.s_conditioned, probe))
            if not candidates:
                continue
            best_value, best_probe = max(candidates, key=lambda c: c[0])
            if best_value > value + IMPROVEMENT_TOL:
                angles = best_probe
                value = best_value
                history.append(value)
                improved = True
        if not improved:
            shrinks += 1
            if shrinks >= cfg.refine_iters:
                break
            step *= cfg.refine_shrink
    return RefineResult(angles=tuple(angles), value=value, history=tuple(history))


CSV_HEADER = (
    "angle_a,angle_a_prime,angle_b,angle_b_prime,"
    "s,s_conditioned,pass_ab,pass_ab_prime,pass_a_prime_b,pass_a_prime_b_prime,degenerate"
)


def rows_to_csv(result: ScanResult) -> str:
    """Render scan rows as CSV; s_conditioned is empty on degenerate cells."""
    lines = [CSV_HEADER]
    for row in result.rows:
        cells = [repr(a) for a in row.angles]
        cells.append(repr(row.s))
        cells.append("" if row.s_conditioned is None else repr(row.s_conditioned))
        cells.extend(repr(p) for p in row.pass_probabilities)
        cells.append("true" if row.degenerate else "false")
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"
