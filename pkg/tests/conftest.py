import numpy as np
import pytest
from qcodes.instrument import Instrument

from ghz_lab.states import ghz, pure_density


@pytest.fixture
def ghz_rho():
    return pure_density(ghz())


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(autouse=True)
def close_instruments():
    yield
    Instrument.close_all()
