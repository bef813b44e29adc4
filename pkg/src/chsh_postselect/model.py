"""Quantum states and measurements.

States are density matrices, optionally carrying an explicit convex
decomposition into product pure states (the case that admits a local
hidden-variable construction).  Measurements are POVMs: outcome-labeled
positive operators summing to identity, with outcome values in [-1, 1].
Projective observables enter through their spectral decomposition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import linalg
from .exceptions import DimensionMismatchError, OutcomeOutOfRangeError

DEFAULT_TOL = 1e-10

# Tolerance for matching an outcome value against a POVM's null value.
# Grouped eigenvalues carry eigensolver noise (~1e-16), so exact float
# comparison against e.g. 0.0 would silently disable conditioning.
NULL_VALUE_TOL = 1e-9


@dataclass(frozen=True)
class PureState:
    """Normalized state vector on one local factor."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size == 0:
            raise ValueError("state vector must be non-empty")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def norm_squared(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def validate(self, tol: float = DEFAULT_TOL) -> list[str]:
        defect = abs(self.norm_squared() - 1.0)
        if defect > tol:
            return [f"state vector is not normalized (|norm^2 - 1| = {defect:.3e})"]
        return []

    def projector(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())


@dataclass(frozen=True)
class MixtureComponent:
    weight: float
    left: PureState
    right: PureState


@dataclass(frozen=True)
class ProductMixture:
    """Convex mixture of product pure states sum_k w_k |l_k r_k><l_k r_k|."""

    components: tuple[MixtureComponent, ...]

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps:
            raise ValueError("mixture needs at least one component")
        object.__setattr__(self, "components", comps)

    @property
    def dims(self) -> tuple[int, int]:
        return self.components[0].left.dim, self.components[0].right.dim

    def validate(self, tol: float = DEFAULT_TOL) -> list[str]:
        problems = []
        d1, d2 = self.dims
        total = 0.0
        for k, comp in enumerate(self.components):
            if comp.weight <= 0:
                problems.append(f"component {k}: weight {comp.weight} is not > 0")
            total += comp.weight
            if comp.left.dim != d1 or comp.right.dim != d2:
                problems.append(
                    f"component {k}: dims ({comp.left.dim}, {comp.right.dim})"
                    f" differ from component 0 dims ({d1}, {d2})"
                )
            for side, state in (("left", comp.left), ("right", comp.right)):
                problems.extend(f"component {k} {side}: {p}" for p in state.validate(tol))
        if abs(total - 1.0) > tol:
            problems.append(f"weights sum to {total!r}, not 1")
        return problems


@dataclass(frozen=True)
class DensityMatrix:
    """Density operator; ``origin`` records a product decomposition if known."""

    matrix: np.ndarray
    origin: ProductMixture | None = None

    def __post_init__(self):
        object.__setattr__(self, "matrix", linalg.as_operator(self.matrix))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def validate(self, tol: float = DEFAULT_TOL) -> list[str]:
        problems = []
        defect = linalg.hermiticity_defect(self.matrix)
        if defect > tol:
            problems.append(f"not Hermitian (defect {defect:.3e})")
            return problems
        tr = complex(np.trace(self.matrix))
        if abs(tr - 1.0) > tol:
            problems.append(f"trace is {tr!r}, not 1")
        lo = linalg.min_eigenvalue(self.matrix)
        if lo < -tol:
            problems.append(f"not positive semidefinite (min eigenvalue {lo:.3e})")
        return problems


@dataclass(frozen=True)
class PovmOutcome:
    value: float
    operator: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "value", float(self.value))
        object.__setattr__(self, "operator", linalg.as_operator(self.operator))


@dataclass(frozen=True)
class Povm:
    """Finite outcome-labeled measurement.

    Construction only enforces shape consistency; semantic invariants
    (positivity, completeness, distinct values) are reported by
    :func:`validate_povm` so that invalid inputs can be diagnosed rather
    than rejected blind.
    """

    outcomes: tuple[PovmOutcome, ...]
    null_value: float = 0.0

    def __post_init__(self):
        outs = tuple(self.outcomes)
        if not outs:
            raise ValueError("POVM needs at least one outcome")
        d = outs[0].operator.shape[0]
        for i, out in enumerate(outs):
            if out.operator.shape[0] != d:
                raise DimensionMismatchError(
                    f"outcome {i} has dimension {out.operator.shape[0]}, expected {d}"
                )
        object.__setattr__(self, "outcomes", outs)
        object.__setattr__(self, "null_value", float(self.null_value))

    @property
    def dim(self) -> int:
        return self.outcomes[0].operator.shape[0]

    @property
    def values(self) -> tuple[float, ...]:
        return tuple(out.value for out in self.outcomes)

    @property
    def operators(self) -> tuple[np.ndarray, ...]:
        return tuple(out.operator for out in self.outcomes)

    def null_outcome_indices(self, tol: float = NULL_VALUE_TOL) -> tuple[int, ...]:
        return tuple(
            i for i, out in enumerate(self.outcomes) if abs(out.value - self.null_value) <= tol
        )


def validate_povm(p: Povm, tol: float = DEFAULT_TOL) -> list[str]:
    """Report every violated POVM invariant; an empty list means valid."""
    problems = []
    for i, out in enumerate(p.outcomes):
        if not math.isfinite(out.value):
            problems.append(f"outcome {i}: value {out.value} is not finite")
        elif abs(out.value) > 1:
            problems.append(f"outcome {i}: value {out.value!r} outside [-1, 1]")
        defect = linalg.hermiticity_defect(out.operator)
        if defect > tol:
            problems.append(f"outcome {i} (value {out.value!r}): not Hermitian (defect {defect:.3e})")
            continue
        lo = linalg.min_eigenvalue(out.operator)
        if lo < -tol:
            problems.append(
                f"outcome {i} (value {out.value!r}): not positive semidefinite"
                f" (min eigenvalue {lo:.3e})"
            )
    total = sum(p.operators) - np.eye(p.dim)
    defect = linalg.max_abs(total)
    if defect > tol:
        problems.append(f"completeness defect {defect:.3e} (sum of elements != identity)")
    values = p.values
    for i in range(len(values)):
        for j in range(i + 1, len(values)):
            if values[i] == values[j]:
                problems.append(f"duplicate outcome value {values[i]!r} (outcomes {i} and {j})")
    return problems


def spin1_observable(alpha: float) -> np.ndarray:
    """Spin-1 observable along direction ``alpha`` in the x-z plane.

    Eigenvalues are {1, 0, -1} for every alpha.
    """
    if not math.isfinite(alpha):
        raise ValueError("angle must be finite")
    c = math.cos(alpha)
    s = math.sin(alpha) / math.sqrt(2)
    return np.array(
        [
            [c, s, 0.0],
            [s, 0.0, s],
            [0.0, s, -c],
        ],
        dtype=complex,
    )


def povm_from_observable(a: np.ndarray, group_tol: float = linalg.DEFAULT_GROUP_TOL) -> Povm:
    """Projective POVM of a Hermitian observable via spectral decomposition.

    One outcome per grouped eigenvalue, descending; outcome values must lie
    in [-1, 1] (overshoot up to ``group_tol`` is clamped, beyond that raises
    :class:`OutcomeOutOfRangeError`).
    """
    decomp = linalg.hermitian_eigendecomposition(a, group_tol)
    outcomes = []
    for lam, proj in zip(decomp.eigenvalues, decomp.projectors):
        if abs(lam) > 1 + group_tol:
            raise OutcomeOutOfRangeError(f"eigenvalue {lam!r} outside [-1, 1]")
        outcomes.append(PovmOutcome(value=min(1.0, max(-1.0, lam)), operator=proj))
    return Povm(outcomes=tuple(outcomes), null_value=0.0)


def density_from_mixture(m: ProductMixture) -> DensityMatrix:
    """rho = sum_k w_k |l_k><l_k| (x) |r_k><r_k|, keeping the mixture as origin."""
    d1, d2 = m.dims
    for k, comp in enumerate(m.components):
        if comp.left.dim != d1 or comp.right.dim != d2:
            raise DimensionMismatchError(
                f"component {k} has dims ({comp.left.dim}, {comp.right.dim}),"
                f" expected ({d1}, {d2})"
            )
    problems = m.validate()
    if problems:
        raise ValueError("; ".join(problems))
    rho = np.zeros((d1 * d2, d1 * d2), dtype=complex)
    for comp in m.components:
        rho += comp.weight * linalg.tensor(comp.left.projector(), comp.right.projector())
    return DensityMatrix(matrix=rho, origin=m)


def spin1_counterexample_mixture() -> ProductMixture:
    """The two-component spin-1 product mixture whose post-selected CHSH
    combination exceeds 2: equal weights on psi1 (x) psi1 and psi2 (x) psi2
    with psi1 = (1, 0, 0) and psi2 = (1/2, 1/sqrt(2), 1/2).

    psi1 is the +1 eigenvector of the angle-0 spin observable, psi2 of the
    angle-pi/2 one.
    """
    psi1 = PureState(np.array([1.0, 0.0, 0.0]))
    psi2 = PureState(np.array([0.5, 1.0 / math.sqrt(2), 0.5]))
    return ProductMixture(
        components=(
            MixtureComponent(weight=0.5, left=psi1, right=psi1),
            MixtureComponent(weight=0.5, left=psi2, right=psi2),
        )
    )


# Measurement angles (a, a_prime, b, b_prime) at which the counterexample
# mixture attains the conditioned CHSH value 16*sqrt(2)/9.
COUNTEREXAMPLE_ANGLES: tuple[float, float, float, float] = (
    0.0,
    math.pi / 2,
    math.pi / 4,
    -math.pi / 4,
)
