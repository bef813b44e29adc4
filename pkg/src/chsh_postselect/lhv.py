"""Explicit local hidden-variable models for mixtures of product states.

The construction: pick a mixture component k with probability w_k, then draw
the four outcomes independently from their local single-particle marginals.
One atom of the sample space is a tuple (k, i_a, i_a', j_b, j_b') and its
weight is the product of the component weight and the four marginals.  This
reproduces every quantum pair distribution of the mixture exactly, so the
unconditioned CHSH combination of the model is capped at 2 like any set of
[-1, 1]-valued random variables -- while the post-selected combination is
free to exceed it.

Enumeration over the (tiny) sample space is the primary verification path;
:func:`sample` exists for Monte Carlo demonstrations only and uses numpy's
seeded PCG64 generator, so identical (model, seed, n) gives identical counts.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .correlations import DEGENERACY_EPS, ChshSettings, JointDistribution, chsh_combination
from .exceptions import DegeneratePostSelectionError, DimensionMismatchError
from .model import NULL_VALUE_TOL, Povm, ProductMixture, PureState

WEIGHT_SUM_TOL = 1e-12

PAIR_VARIABLES = {
    "ab": ("x_a", "x_b"),
    "ab_prime": ("x_a", "x_b_prime"),
    "a_prime_b": ("x_a_prime", "x_b"),
    "a_prime_b_prime": ("x_a_prime", "x_b_prime"),
}


@dataclass(frozen=True)
class SampleSpace:
    """Finite probability space; zero-weight atoms are kept so that atom
    indexing stays deterministic."""

    atoms: tuple[tuple[int, ...], ...]
    probabilities: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probabilities, dtype=float).reshape(-1)
        if len(self.atoms) != probs.size:
            raise ValueError(f"{len(self.atoms)} atoms but {probs.size} probabilities")
        if probs.min() < 0:
            raise ValueError(f"negative atom weight {probs.min()!r}")
        total = float(probs.sum())
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise ValueError(f"atom weights sum to {total!r}, not 1")
        object.__setattr__(self, "atoms", tuple(self.atoms))
        object.__setattr__(self, "probabilities", probs)

    def __len__(self) -> int:
        return len(self.atoms)


@dataclass(frozen=True)
class RandomVariable:
    """Random variable with a finite outcome alphabet.

    ``levels`` is the outcome alphabet in distribution-table order and
    ``atom_levels[w]`` indexes the level taken on atom w.  Values must lie
    in [-1, 1].
    """

    levels: tuple[float, ...]
    atom_levels: np.ndarray
    null_value: float = 0.0

    def __post_init__(self):
        levels = tuple(float(v) for v in self.levels)
        for v in levels:
            if abs(v) > 1:
                raise ValueError(f"random variable value {v!r} outside [-1, 1]")
        idx = np.asarray(self.atom_levels, dtype=int).reshape(-1)
        if idx.size and (idx.min() < 0 or idx.max() >= len(levels)):
            raise ValueError("atom level index out of range")
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "atom_levels", idx)

    @property
    def values(self) -> np.ndarray:
        return np.array(self.levels)[self.atom_levels]

    def passing_levels(self) -> np.ndarray:
        lv = np.array(self.levels)
        return np.abs(lv - self.null_value) > NULL_VALUE_TOL

    def passing_atoms(self) -> np.ndarray:
        return self.passing_levels()[self.atom_levels]


@dataclass(frozen=True)
class LhvModel:
    space: SampleSpace
    x_a: RandomVariable
    x_a_prime: RandomVariable
    x_b: RandomVariable
    x_b_prime: RandomVariable

    def __post_init__(self):
        n = len(self.space)
        for name in ("x_a", "x_a_prime", "x_b", "x_b_prime"):
            rv = getattr(self, name)
            if rv.atom_levels.size != n:
                raise ValueError(f"{name} is defined on {rv.atom_levels.size} atoms, space has {n}")

    def pair(self, name: str) -> tuple[RandomVariable, RandomVariable]:
        try:
            first, second = PAIR_VARIABLES[name]
        except KeyError:
            raise KeyError(f"unknown pair {name!r}, expected one of {sorted(PAIR_VARIABLES)}")
        return getattr(self, first), getattr(self, second)


def _local_marginal(state: PureState, povm: Povm) -> np.ndarray:
    """Outcome probabilities <psi| E_i |psi>, clamped against rounding noise."""
    psi = state.amplitudes
    probs = np.array([np.vdot(psi, op @ psi) for op in povm.operators])
    residue = float(np.abs(probs.imag).max())
    if residue > 1e-10:
        raise ValueError(f"marginal probabilities carry imaginary residue {residue:.3e}")
    out = probs.real
    lo = out.min()
    if lo < -1e-12:
        raise ValueError(f"marginal probability {lo!r} is negative")
    return np.where(out < 0, 0.0, out)


def build_lhv_for_product_mixture(m: ProductMixture, s: ChshSettings) -> LhvModel:
    """Construct the product-form hidden-variable model for a mixture.

    Atom order is lexicographic in (k, i_a, i_a', j_b, j_b').
    """
    d1, d2 = m.dims
    if s.a.dim != d1 or s.b.dim != d2:
        raise DimensionMismatchError(
            f"settings dims ({s.a.dim}, {s.b.dim}) do not match state dims ({d1}, {d2})"
        )
    povms = (s.a, s.a_prime, s.b, s.b_prime)
    counts = tuple(len(p.outcomes) for p in povms)

    weights = []
    atoms = []
    for k, comp in enumerate(m.components):
        marginals = (
            _local_marginal(comp.left, s.a),
            _local_marginal(comp.left, s.a_prime),
            _local_marginal(comp.right, s.b),
            _local_marginal(comp.right, s.b_prime),
        )
        block = comp.weight * np.einsum("a,b,c,d->abcd", *marginals)
        weights.append(block.reshape(-1))
        atoms.extend((k, *idx) for idx in itertools.product(*(range(c) for c in counts)))
    space = SampleSpace(atoms=tuple(atoms), probabilities=np.concatenate(weights))

    atom_array = np.array(space.atoms, dtype=int)
    variables = {}
    for col, (name, povm) in enumerate(
        zip(("x_a", "x_a_prime", "x_b", "x_b_prime"), povms), start=1
    ):
        variables[name] = RandomVariable(
            levels=povm.values,
            atom_levels=atom_array[:, col],
            null_value=povm.null_value,
        )
    return LhvModel(space=space, **variables)


def lhv_pair_distribution(model: LhvModel, pair: str) -> JointDistribution:
    """Exact pair distribution P(X = i, Y = j) by summation over atoms."""
    x, y = model.pair(pair)
    table = np.zeros((len(x.levels), len(y.levels)))
    np.add.at(table, (x.atom_levels, y.atom_levels), model.space.probabilities)
    return JointDistribution(
        values_a=x.levels,
        values_b=y.levels,
        table=table,
        null_a=x.null_value,
        null_b=y.null_value,
    )


def lhv_marginal(model: LhvModel, variable: str) -> np.ndarray:
    """Distribution of one variable over its levels.

    Computed from the atoms alone, so it cannot depend on which partner
    variable a pair distribution would have paired it with; marginalizing a
    pair table regroups the same weights and agrees up to rounding.
    """
    if variable not in ("x_a", "x_a_prime", "x_b", "x_b_prime"):
        raise KeyError(f"unknown variable {variable!r}")
    rv = getattr(model, variable)
    out = np.zeros(len(rv.levels))
    np.add.at(out, rv.atom_levels, model.space.probabilities)
    return out


def rv_expectation(model: LhvModel, x: RandomVariable, y: RandomVariable) -> float:
    """E(XY) = sum_w P(w) X(w) Y(w)."""
    return float(np.sum(model.space.probabilities * x.values * y.values))


def rv_conditional_expectation(
    model: LhvModel, x: RandomVariable, y: RandomVariable, eps: float = DEGENERACY_EPS
) -> float:
    """E(XY | X != null_X, Y != null_Y) with the numerator restricted to
    passing atoms, so null values other than 0 stay correct."""
    if x.passing_levels().all() and y.passing_levels().all():
        return rv_expectation(model, x, y)
    mask = x.passing_atoms() & y.passing_atoms()
    den = float(model.space.probabilities[mask].sum())
    if den <= eps:
        raise DegeneratePostSelectionError(f"pass probability {den!r} <= {eps!r}")
    num = float((model.space.probabilities * x.values * y.values)[mask].sum())
    return num / den


def chsh_check_rvs(model: LhvModel, tol: float = 1e-12) -> tuple[float, bool]:
    """Unconditioned CHSH combination of the model and whether it obeys <= 2.

    For [-1, 1]-valued variables on one probability space this is a theorem,
    so the boolean is a numerical sanity check, not an open question.
    """
    correlations = [rv_expectation(model, *model.pair(name)) for name in PAIR_VARIABLES]
    s = chsh_combination(correlations)
    return s, s <= 2 + tol


def sample(model: LhvModel, seed: int, n: int) -> dict[str, np.ndarray]:
    """Draw n atoms i.i.d. and return per-pair outcome count tables.

    All four tables come from the same draws (one hidden variable fixes all
    four outcomes).  Deterministic for fixed (model, seed, n).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    idx = rng.choice(len(model.space), size=n, p=model.space.probabilities)
    counts = {}
    for name in PAIR_VARIABLES:
        x, y = model.pair(name)
        table = np.zeros((len(x.levels), len(y.levels)), dtype=np.int64)
        np.add.at(table, (x.atom_levels[idx], y.atom_levels[idx]), 1)
        counts[name] = table
    return counts


def empirical_pair_distribution(model: LhvModel, pair: str, counts: np.ndarray) -> JointDistribution:
    """Turn a count table from :func:`sample` into a JointDistribution."""
    x, y = model.pair(pair)
    table = np.asarray(counts, dtype=float)
    return JointDistribution(
        values_a=x.levels,
        values_b=y.levels,
        table=table / table.sum(),
        null_a=x.null_value,
        null_b=y.null_value,
    )
