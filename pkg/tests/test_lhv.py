import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chsh_postselect import (
    ChshSettings,
    DimensionMismatchError,
    MixtureComponent,
    ProductMixture,
    PureState,
    RandomVariable,
    SampleSpace,
    build_lhv_for_product_mixture,
    chsh_check_rvs,
    chsh_combination,
    conditional_expectation,
    density_from_mixture,
    empirical_pair_distribution,
    expectation,
    joint_distribution,
    lhv_marginal,
    lhv_pair_distribution,
    povm_from_observable,
    rv_conditional_expectation,
    rv_expectation,
    sample,
    spin1_observable,
)
from chsh_postselect.lhv import LhvModel, PAIR_VARIABLES

import oracle
from generators import random_lhv_model, random_product_mixture, random_settings

SQRT2 = math.sqrt(2)
PAIRS = tuple(PAIR_VARIABLES)


@pytest.fixture(scope="module")
def counterexample_model(counterexample_mixture, counterexample_settings):
    return build_lhv_for_product_mixture(counterexample_mixture, counterexample_settings)


@pytest.fixture(scope="module")
def deterministic_model():
    e1 = PureState([1.0, 0.0, 0.0])
    mixture = ProductMixture(components=(MixtureComponent(weight=1.0, left=e1, right=e1),))
    j0 = povm_from_observable(spin1_observable(0.0))
    return mixture, build_lhv_for_product_mixture(
        mixture, ChshSettings(a=j0, a_prime=j0, b=j0, b_prime=j0)
    )


def test_atom_count(counterexample_model):
    # 2 components x 3 outcomes for each of the 4 settings.
    assert len(counterexample_model.space) == 2 * 3**4 == 162


def test_deterministic_eigenstate_model(deterministic_model):
    _, model = deterministic_model
    probs = model.space.probabilities
    top = int(np.argmax(probs))
    assert abs(probs[top] - 1.0) <= 1e-12
    assert model.space.atoms[top] == (0, 0, 0, 0, 0)
    for name in ("x_a", "x_a_prime", "x_b", "x_b_prime"):
        assert getattr(model, name).values[top] == 1.0
    jd = lhv_pair_distribution(model, "ab")
    assert abs(jd.table[0, 0] - 1.0) <= 1e-12


@given(seed=st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_total_weight_is_one(seed):
    rng = np.random.default_rng(seed)
    d1, d2 = rng.choice([2, 3]), rng.choice([2, 3])
    model = build_lhv_for_product_mixture(
        random_product_mixture(rng, d1, d2), random_settings(rng, d1, d2)
    )
    assert abs(model.space.probabilities.sum() - 1.0) <= 1e-12


def test_pair_distributions_match_quantum(
    counterexample_model, counterexample_density, counterexample_settings
):
    for (name, left, right) in counterexample_settings.pairs():
        quantum = joint_distribution(counterexample_density, left, right)
        local = lhv_pair_distribution(counterexample_model, name)
        assert local.values_a == quantum.values_a
        assert local.values_b == quantum.values_b
        assert np.abs(local.table - quantum.table).max() <= 1e-12


@given(seed=st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_pair_distributions_match_quantum_random(seed):
    rng = np.random.default_rng(seed)
    d1, d2 = rng.choice([2, 3]), rng.choice([2, 3])
    mixture = random_product_mixture(rng, d1, d2)
    settings_ = random_settings(rng, d1, d2)
    rho = density_from_mixture(mixture)
    model = build_lhv_for_product_mixture(mixture, settings_)
    for (name, left, right) in settings_.pairs():
        quantum = joint_distribution(rho, left, right)
        local = lhv_pair_distribution(model, name)
        assert np.abs(local.table - quantum.table).max() <= 1e-12


def test_marginals_are_pair_independent(counterexample_model):
    # The dedicated marginal never sees a partner variable; the pair-table
    # route regroups the same atom weights and agrees up to rounding.
    model = counterexample_model
    direct_a = lhv_marginal(model, "x_a")
    from_ab = lhv_pair_distribution(model, "ab").table.sum(axis=1)
    from_ab_prime = lhv_pair_distribution(model, "ab_prime").table.sum(axis=1)
    assert np.abs(from_ab - direct_a).max() <= 1e-15
    assert np.abs(from_ab_prime - direct_a).max() <= 1e-15
    direct_b = lhv_marginal(model, "x_b")
    from_a_prime_b = lhv_pair_distribution(model, "a_prime_b").table.sum(axis=0)
    assert np.abs(from_a_prime_b - direct_b).max() <= 1e-15


def test_rv_expectation_matches_quantum(
    counterexample_model, counterexample_density, counterexample_settings
):
    quantum = joint_distribution(
        counterexample_density, counterexample_settings.a, counterexample_settings.b
    )
    value = rv_expectation(counterexample_model, *counterexample_model.pair("ab"))
    assert abs(value - expectation(quantum)) <= 1e-12
    assert abs(value - SQRT2 / 4) <= 1e-12


def test_rv_expectation_deterministic(deterministic_model):
    _, model = deterministic_model
    assert abs(rv_expectation(model, *model.pair("ab")) - 1.0) <= 1e-12


def test_rv_expectation_zero_variable(counterexample_model):
    model = counterexample_model
    zero = RandomVariable(
        levels=(0.0,), atom_levels=np.zeros(len(model.space), dtype=int)
    )
    assert rv_expectation(model, model.x_a, zero) == 0.0


def test_rv_conditional_matches_quantum(
    counterexample_model, counterexample_density, counterexample_settings
):
    conds = []
    for (name, left, right) in counterexample_settings.pairs():
        quantum = conditional_expectation(
            joint_distribution(counterexample_density, left, right)
        )
        local = rv_conditional_expectation(
            counterexample_model, *counterexample_model.pair(name)
        )
        assert abs(local - quantum) <= 1e-12
        conds.append(local)
    assert abs(conds[0] - 4 * SQRT2 / 9) <= 1e-12
    assert abs(chsh_combination(conds) - 16 * SQRT2 / 9) <= 1e-12


def test_rv_conditional_deterministic(deterministic_model):
    _, model = deterministic_model
    assert abs(rv_conditional_expectation(model, *model.pair("ab")) - 1.0) <= 1e-12


def test_chsh_check_on_counterexample(counterexample_model):
    s, ok = chsh_check_rvs(counterexample_model)
    assert abs(s - SQRT2) <= 1e-12
    assert ok


def test_chsh_check_boundary():
    space = SampleSpace(atoms=((0,),), probabilities=np.array([1.0]))
    ones = RandomVariable(levels=(1.0,), atom_levels=np.array([0]))
    model = LhvModel(space=space, x_a=ones, x_a_prime=ones, x_b=ones, x_b_prime=ones)
    s, ok = chsh_check_rvs(model)
    assert s == 2.0 and ok


@given(seed=st.integers(0, 2**32 - 1))
@settings(max_examples=100, deadline=None)
def test_chsh_check_random_models(seed):
    model = random_lhv_model(np.random.default_rng(seed))
    _, ok = chsh_check_rvs(model)
    assert ok


def test_headline_contrast(counterexample_model):
    # The same model satisfies the plain CHSH bound while its post-selected
    # combination exceeds 2: both facts asserted together.
    s, ok = chsh_check_rvs(counterexample_model)
    assert ok and s <= 2
    conds = [
        rv_conditional_expectation(counterexample_model, *counterexample_model.pair(name))
        for name in PAIRS
    ]
    assert chsh_combination(conds) > 2


def test_build_rejects_dimension_mismatch(counterexample_mixture):
    two = povm_from_observable(np.diag([1.0, -1.0]))
    settings_ = ChshSettings(a=two, a_prime=two, b=two, b_prime=two)
    with pytest.raises(DimensionMismatchError):
        build_lhv_for_product_mixture(counterexample_mixture, settings_)


def test_random_variable_range_enforced():
    with pytest.raises(ValueError):
        RandomVariable(levels=(1.5,), atom_levels=np.array([0]))


def test_sample_deterministic(counterexample_model):
    first = sample(counterexample_model, seed=123, n=2000)
    second = sample(counterexample_model, seed=123, n=2000)
    other = sample(counterexample_model, seed=124, n=2000)
    for name in PAIRS:
        assert np.array_equal(first[name], second[name])
        assert first[name].sum() == 2000
    assert any(not np.array_equal(first[name], other[name]) for name in PAIRS)


def test_sample_single_draw(counterexample_model):
    counts = sample(counterexample_model, seed=5, n=1)
    for name in PAIRS:
        assert counts[name].sum() == 1


def test_sample_rejects_bad_n(counterexample_model):
    with pytest.raises(ValueError):
        sample(counterexample_model, seed=1, n=0)


def test_monte_carlo_conditioned_chsh(counterexample_model):
    counts = sample(counterexample_model, seed=42, n=100_000)
    conds = []
    for name in PAIRS:
        jd = empirical_pair_distribution(counterexample_model, name, counts[name])
        conds.append(conditional_expectation(jd))
    # Tolerance sized for ~7 sigma of binomial noise at n = 1e5.
    assert abs(chsh_combination(conds) - 16 * SQRT2 / 9) <= 0.05


def test_oracle_agreement_on_lhv_tables(counterexample_model, counterexample_settings):
    # Brute-force trace oracle vs the Omega-summation, fully independent paths.
    rho = oracle.counterexample_rho()
    for (name, left, right) in counterexample_settings.pairs():
        brute = oracle.trace_joint_table(rho, left.operators, right.operators)
        local = lhv_pair_distribution(counterexample_model, name)
        assert np.abs(local.table - brute).max() <= 1e-12
