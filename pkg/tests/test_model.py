import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chsh_postselect import (
    DimensionMismatchError,
    MixtureComponent,
    OutcomeOutOfRangeError,
    Povm,
    PovmOutcome,
    ProductMixture,
    PureState,
    density_from_mixture,
    povm_from_observable,
    spin1_counterexample_mixture,
    spin1_observable,
    validate_povm,
)
from chsh_postselect.model import COUNTEREXAMPLE_ANGLES

from generators import random_product_mixture

angles = st.floats(-10.0, 10.0)


def test_spin1_at_zero_is_diagonal():
    np.testing.assert_array_equal(spin1_observable(0.0), np.diag([1.0, 0.0, -1.0]).astype(complex))


def test_spin1_at_quarter_turn():
    r = 1 / math.sqrt(2)
    expected = np.array([[0, r, 0], [r, 0, r], [0, r, 0]])
    np.testing.assert_allclose(spin1_observable(math.pi / 2), expected, atol=1e-16)


@given(alpha=angles)
def test_spin1_traceless_and_hermitian(alpha):
    j = spin1_observable(alpha)
    assert abs(np.trace(j)) <= 1e-15
    assert np.abs(j - j.conj().T).max() == 0.0


@given(alpha=angles)
@settings(max_examples=100)
def test_spin1_spectrum_is_angle_independent(alpha):
    # Rotational covariance shows up as an alpha-independent spectrum.
    povm = povm_from_observable(spin1_observable(alpha))
    assert np.allclose(sorted(povm.values), [-1.0, 0.0, 1.0], atol=1e-9)


def test_povm_from_observable_diagonal():
    povm = povm_from_observable(spin1_observable(0.0))
    assert povm.values == (1.0, 0.0, -1.0)
    for k, out in enumerate(povm.outcomes):
        expected = np.zeros((3, 3))
        expected[k, k] = 1.0
        np.testing.assert_allclose(out.operator, expected, atol=1e-14)


@given(alpha=angles)
@settings(max_examples=50)
def test_povm_from_observable_is_valid(alpha):
    povm = povm_from_observable(spin1_observable(alpha))
    assert validate_povm(povm) == []


def test_povm_from_observable_rejects_large_eigenvalues():
    with pytest.raises(OutcomeOutOfRangeError):
        povm_from_observable(2.0 * np.eye(3))


def test_validate_povm_reports_completeness_defect():
    povm = Povm(outcomes=(PovmOutcome(value=1.0, operator=0.5 * np.eye(3)),))
    problems = validate_povm(povm)
    assert len(problems) == 1 and "completeness" in problems[0]


def test_validate_povm_reports_non_psd_element():
    povm = Povm(
        outcomes=(
            PovmOutcome(value=1.0, operator=np.diag([1.0, 0.0, -1.0])),
            PovmOutcome(value=0.0, operator=np.eye(3) - np.diag([1.0, 0.0, -1.0])),
        )
    )
    problems = validate_povm(povm)
    assert any("positive semidefinite" in p and "outcome 0" in p for p in problems)


def test_validate_povm_reports_duplicates_and_range():
    povm = Povm(
        outcomes=(
            PovmOutcome(value=1.5, operator=0.5 * np.eye(2)),
            PovmOutcome(value=1.5, operator=0.5 * np.eye(2)),
        )
    )
    problems = validate_povm(povm)
    assert any("duplicate" in p for p in problems)
    assert any("outside [-1, 1]" in p for p in problems)


def test_density_from_single_component():
    e1 = PureState([1.0, 0.0, 0.0])
    mixture = ProductMixture(components=(MixtureComponent(weight=1.0, left=e1, right=e1),))
    rho = density_from_mixture(mixture)
    expected = np.zeros((9, 9))
    expected[0, 0] = 1.0
    np.testing.assert_allclose(rho.matrix, expected, atol=1e-15)
    assert rho.origin is mixture


def test_density_from_counterexample_is_valid():
    rho = density_from_mixture(spin1_counterexample_mixture())
    assert rho.dim == 9
    assert rho.validate() == []


def test_two_equal_components_collapse():
    psi = PureState([0.5, 1 / math.sqrt(2), 0.5])
    single = ProductMixture(components=(MixtureComponent(weight=1.0, left=psi, right=psi),))
    double = ProductMixture(
        components=(
            MixtureComponent(weight=0.5, left=psi, right=psi),
            MixtureComponent(weight=0.5, left=psi, right=psi),
        )
    )
    np.testing.assert_allclose(
        density_from_mixture(single).matrix, density_from_mixture(double).matrix, atol=1e-15
    )


def test_density_rejects_mismatched_dims():
    mixture = ProductMixture(
        components=(
            MixtureComponent(weight=0.5, left=PureState([1.0, 0.0]), right=PureState([1.0, 0.0])),
            MixtureComponent(
                weight=0.5, left=PureState([1.0, 0.0, 0.0]), right=PureState([1.0, 0.0])
            ),
        )
    )
    with pytest.raises(DimensionMismatchError):
        density_from_mixture(mixture)


@given(seed=st.integers(0, 2**32 - 1), d1=st.sampled_from([2, 3]), d2=st.sampled_from([2, 3]))
@settings(max_examples=60)
def test_density_from_random_mixture_is_valid(seed, d1, d2):
    rng = np.random.default_rng(seed)
    mixture = random_product_mixture(rng, d1, d2, max_components=4)
    rho = density_from_mixture(mixture)
    assert rho.validate() == []


def test_unnormalized_state_reported():
    assert PureState([1.0, 1.0]).validate() != []
    assert ProductMixture(
        components=(
            MixtureComponent(weight=0.7, left=PureState([1.0, 0.0]), right=PureState([1.0, 0.0])),
        )
    ).validate() != []


def test_counterexample_structure():
    mixture = spin1_counterexample_mixture()
    assert [c.weight for c in mixture.components] == [0.5, 0.5]
    psi1 = mixture.components[0].left
    psi2 = mixture.components[1].left
    assert abs(psi1.norm_squared() - 1) <= 1e-12
    assert abs(psi2.norm_squared() - 1) <= 1e-10
    # psi1 and psi2 are +1 eigenvectors of the angle-0 and angle-pi/2 observables.
    j0 = spin1_observable(0.0)
    jx = spin1_observable(math.pi / 2)
    assert np.abs(j0 @ psi1.amplitudes - psi1.amplitudes).max() <= 1e-12
    assert np.abs(jx @ psi2.amplitudes - psi2.amplitudes).max() <= 1e-12
    assert COUNTEREXAMPLE_ANGLES == (0.0, math.pi / 2, math.pi / 4, -math.pi / 4)
