import random

import pytest

from zkmech.group import derive_generators, params_from_modulus


@pytest.fixture(scope="session")
def q7():
    return params_from_modulus(7)


@pytest.fixture(scope="session")
def q23():
    return params_from_modulus(23)


@pytest.fixture(scope="session")
def ref7(q7):
    return derive_generators(q7, b"test reference string")


@pytest.fixture(scope="session")
def ref23(q23):
    return derive_generators(q23, b"test reference string")


@pytest.fixture
def rng():
    return random.Random(0xC0FFEE)
