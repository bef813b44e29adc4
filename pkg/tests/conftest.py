import pytest

from chsh_postselect import (
    ChshSettings,
    density_from_mixture,
    povm_from_observable,
    spin1_counterexample_mixture,
    spin1_observable,
)
from chsh_postselect.model import COUNTEREXAMPLE_ANGLES


@pytest.fixture(scope="session")
def counterexample_mixture():
    return spin1_counterexample_mixture()


@pytest.fixture(scope="session")
def counterexample_density(counterexample_mixture):
    return density_from_mixture(counterexample_mixture)


@pytest.fixture(scope="session")
def counterexample_settings():
    a, a_prime, b, b_prime = (
        povm_from_observable(spin1_observable(t)) for t in COUNTEREXAMPLE_ANGLES
    )
    return ChshSettings(a=a, a_prime=a_prime, b=b, b_prime=b_prime)
