import numpy as np
import pytest

from persistlab import SeedSpec, build_preset


@pytest.fixture(scope="session")
def srw():
    return build_preset("srw")


@pytest.fixture(scope="session")
def persistent75():
    return build_preset("persistent", alpha=0.75)


@pytest.fixture(scope="session")
def persistent70():
    return build_preset("persistent", alpha=0.7)


@pytest.fixture(scope="session")
def example32():
    return build_preset("example32")


@pytest.fixture(scope="session")
def cca_model():
    return build_preset("cca")


@pytest.fixture(scope="session")
def ghm_pair():
    return build_preset("ghm-pair")


@pytest.fixture(scope="session")
def fca_quad():
    return build_preset("fca-quad")


@pytest.fixture(scope="session")
def triple35():
    return build_preset("triple-ex35")


@pytest.fixture()
def seed():
    return SeedSpec(20240817)
