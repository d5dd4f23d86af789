"""Shared fixtures.  Expensive objects are session-scoped and read-only:
tests that need to mutate data must build their own copies."""

import numpy as np
import pytest

from caloronkit.builders import exact_j1_data, k1j0_data
from caloronkit.moduli import random_generic
from caloronkit.transform import DiracFamily


@pytest.fixture(scope="session")
def k1j0():
    return k1j0_data()


@pytest.fixture(scope="session")
def j1data():
    return exact_j1_data()


@pytest.fixture(scope="session")
def fam_k1j0(k1j0):
    return DiracFamily(k1j0, 64)


@pytest.fixture(scope="session")
def fam_j1(j1data):
    return DiracFamily(j1data, 64)


@pytest.fixture(scope="session")
def monad21():
    return random_generic(2, 1, 3)


@pytest.fixture()
def rng():
    return np.random.default_rng(0)
