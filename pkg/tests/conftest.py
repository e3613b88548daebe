import random

import pytest

from pscsim.group import production_group, toy_group


@pytest.fixture(scope="session")
def toy():
    return toy_group()


@pytest.fixture(scope="session")
def prod():
    return production_group()


@pytest.fixture
def rng():
    return random.Random(0xC0FFEE)
