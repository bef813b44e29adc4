"""Joint measurement distributions and the two CHSH functionals.

The unconditioned functional

    S = E(a.b) + E(a.b') + E(a'.b) - E(a'.b')

is bounded by 2 for any mixture of product states (and by 2*sqrt(2) for any
quantum state) when outcome values lie in [-1, 1].  The conditioned variant
applies the same sign combination to expectations conditioned on "both
outcomes differ from the null value" -- an event that depends on the chosen
measurement pair, which is exactly why the bound of 2 stops applying.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DegeneratePostSelectionError, DimensionMismatchError, NotHermitianError
from .model import NULL_VALUE_TOL, DensityMatrix, Povm

NEGATIVE_PROBABILITY_TOL = 1e-12
TABLE_SUM_TOL = 1e-10
IMAGINARY_RESIDUE_TOL = 1e-10
DEGENERACY_EPS = 1e-12

PAIR_NAMES = ("ab", "ab_prime", "a_prime_b", "a_prime_b_prime")


@dataclass(frozen=True)
class JointDistribution:
    """Probability table over outcome-value pairs for one measurement pair.

    Entries in [-1e-12, 0) are rounding noise and get clamped to zero;
    anything more negative, or a total far from 1, is rejected.
    """

    values_a: tuple[float, ...]
    values_b: tuple[float, ...]
    table: np.ndarray
    null_a: float = 0.0
    null_b: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "values_a", tuple(float(v) for v in self.values_a))
        object.__setattr__(self, "values_b", tuple(float(v) for v in self.values_b))
        table = np.asarray(self.table, dtype=float)
        expected = (len(self.values_a), len(self.values_b))
        if table.shape != expected:
            raise ValueError(f"table shape {table.shape} does not match outcome counts {expected}")
        lo = table.min()
        if lo < -NEGATIVE_PROBABILITY_TOL:
            raise ValueError(f"probability {lo!r} below -{NEGATIVE_PROBABILITY_TOL}")
        table = np.where(table < 0, 0.0, table)
        total = float(table.sum())
        if abs(total - 1.0) > TABLE_SUM_TOL:
            raise ValueError(f"probabilities sum to {total!r}, not 1")
        object.__setattr__(self, "table", table)

    def passing_a(self) -> np.ndarray:
        """Boolean mask of side-a outcomes that survive conditioning."""
        va = np.array(self.values_a)
        return np.abs(va - self.null_a) > NULL_VALUE_TOL

    def passing_b(self) -> np.ndarray:
        vb = np.array(self.values_b)
        return np.abs(vb - self.null_b) > NULL_VALUE_TOL


def joint_distribution(rho: DensityMatrix, pa: Povm, pb: Povm) -> JointDistribution:
    """P(i, j) = Re tr(rho (A_i kron B_j)) for all outcome pairs at once."""
    d1, d2 = pa.dim, pb.dim
    if rho.dim != d1 * d2:
        raise DimensionMismatchError(
            f"state dimension {rho.dim} != {d1} * {d2} (side dimensions)"
        )
    rho4 = rho.matrix.reshape(d1, d2, d1, d2)
    ops_a = np.stack(pa.operators)
    ops_b = np.stack(pb.operators)
    # tr(rho (A kron B)) = sum_{mpnq} rho[(m,p),(n,q)] A[n,m] B[q,p]
    ctable = np.einsum("mpnq,anm,bqp->ab", rho4, ops_a, ops_b)
    residue = float(np.abs(ctable.imag).max())
    if residue > IMAGINARY_RESIDUE_TOL:
        raise NotHermitianError(
            f"joint probabilities carry imaginary residue {residue:.3e};"
            " state or measurement operators are not Hermitian"
        )
    return JointDistribution(
        values_a=pa.values,
        values_b=pb.values,
        table=ctable.real,
        null_a=pa.null_value,
        null_b=pb.null_value,
    )


def expectation(jd: JointDistribution) -> float:
    """sum_ij value_a(i) value_b(j) P(i, j)."""
    va = np.array(jd.values_a)
    vb = np.array(jd.values_b)
    return float(va @ jd.table @ vb)


def pass_probability(jd: JointDistribution) -> float:
    """P(a != null_a, b != null_b)."""
    mask = np.outer(jd.passing_a(), jd.passing_b())
    return float(jd.table[mask].sum())


def conditional_expectation(jd: JointDistribution, eps: float = DEGENERACY_EPS) -> float:
    """E(a.b | a != null_a, b != null_b).

    Numerator is restricted to passing outcome pairs, so the result stays
    correct for null values other than 0.  When no outcome matches the null
    value on either side the conditioning event is the whole space and the
    plain expectation is returned unchanged.
    """
    row_ok = jd.passing_a()
    col_ok = jd.passing_b()
    if row_ok.all() and col_ok.all():
        return expectation(jd)
    mask = np.outer(row_ok, col_ok)
    den = float(jd.table[mask].sum())
    if den <= eps:
        raise DegeneratePostSelectionError(f"pass probability {den!r} <= {eps!r}")
    weights = np.outer(np.array(jd.values_a), np.array(jd.values_b))
    num = float((weights * jd.table)[mask].sum())
    return num / den


@dataclass(frozen=True)
class ChshSettings:
    """Two measurement choices per side: (a, a') on side 1, (b, b') on side 2."""

    a: Povm
    a_prime: Povm
    b: Povm
    b_prime: Povm

    def __post_init__(self):
        if self.a.dim != self.a_prime.dim:
            raise DimensionMismatchError(
                f"side-1 POVMs have dimensions {self.a.dim} and {self.a_prime.dim}"
            )
        if self.b.dim != self.b_prime.dim:
            raise DimensionMismatchError(
                f"side-2 POVMs have dimensions {self.b.dim} and {self.b_prime.dim}"
            )

    @property
    def dims(self) -> tuple[int, int]:
        return self.a.dim, self.b.dim

    def pairs(self) -> tuple[tuple[str, Povm, Povm], ...]:
        """The four measurement pairs in CHSH order (minus sign on the last)."""
        return (
            ("ab", self.a, self.b),
            ("ab_prime", self.a, self.b_prime),
            ("a_prime_b", self.a_prime, self.b),
            ("a_prime_b_prime", self.a_prime, self.b_prime),
        )


def chsh_combination(values) -> float:
    v = tuple(values)
    return v[0] + v[1] + v[2] - v[3]


_CORRELATION_SLACK = 1e-12


@dataclass(frozen=True)
class ChshReport:
    """Per-pair correlations and pass probabilities plus the CHSH combinations.

    ``correlations`` and ``pass_probabilities`` follow the pair order of
    :meth:`ChshSettings.pairs`.  Conditioned fields are ``None`` when
    conditioning was not requested.
    """

    correlations: tuple[float, float, float, float]
    pass_probabilities: tuple[float, float, float, float]
    s: float
    conditioned_correlations: tuple[float, float, float, float] | None = None
    s_conditioned: float | None = None

    def __post_init__(self):
        for e in self.correlations:
            if abs(e) > 1 + _CORRELATION_SLACK:
                raise ValueError(f"correlation {e!r} outside [-1, 1]")
        for p in self.pass_probabilities:
            if not -_CORRELATION_SLACK <= p <= 1 + _CORRELATION_SLACK:
                raise ValueError(f"pass probability {p!r} outside [0, 1]")
        if self.conditioned_correlations is not None:
            for e in self.conditioned_correlations:
                if abs(e) > 1 + _CORRELATION_SLACK:
                    raise ValueError(f"conditioned correlation {e!r} outside [-1, 1]")


def pair_distributions(rho: DensityMatrix, s: ChshSettings) -> tuple[JointDistribution, ...]:
    return tuple(joint_distribution(rho, left, right) for _, left, right in s.pairs())


def chsh_value(rho: DensityMatrix, s: ChshSettings) -> ChshReport:
    """Unconditioned CHSH report; never raises on degenerate conditioning."""
    jds = pair_distributions(rho, s)
    correlations = tuple(expectation(jd) for jd in jds)
    passes = tuple(pass_probability(jd) for jd in jds)
    return ChshReport(
        correlations=correlations,
        pass_probabilities=passes,
        s=chsh_combination(correlations),
    )


def conditioned_chsh_value(
    rho: DensityMatrix, s: ChshSettings, eps: float = DEGENERACY_EPS
) -> ChshReport:
    """CHSH report including post-selected correlations.

    Raises :class:`DegeneratePostSelectionError` naming the measurement pair
    whose conditioning event has probability <= eps.
    """
    jds = pair_distributions(rho, s)
    correlations = tuple(expectation(jd) for jd in jds)
    passes = tuple(pass_probability(jd) for jd in jds)
    conditioned = []
    for (name, _, _), jd in zip(s.pairs(), jds):
        try:
            conditioned.append(conditional_expectation(jd, eps))
        except DegeneratePostSelectionError as err:
            raise DegeneratePostSelectionError(
                f"conditioning on pair {name} is degenerate: {err}", pair=name
            ) from None
    return ChshReport(
        correlations=correlations,
        pass_probabilities=passes,
        s=chsh_combination(correlations),
        conditioned_correlations=tuple(conditioned),
        s_conditioned=chsh_combination(conditioned),
    )
