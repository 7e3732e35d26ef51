import math

import numpy as np
import pytest

from ghz_lab.channels import named_channel
from ghz_lab.drivers.Simulated.NoisyGHZ import NoisyGHZ
from ghz_lab.states import basis_state, random_ghz_type


@pytest.fixture
def instrument():
    return NoisyGHZ("noisy_ghz_test")


def test_noiseless_readout(instrument):
    assert instrument.tau3() == pytest.approx(1.0)
    assert instrument.c12_3() == pytest.approx(1.0)
    assert instrument.c3_pure() == pytest.approx(math.sqrt(0.5))


def test_channel_parameter_updates_readout(instrument):
    instrument.q3_channel(named_channel("bitflip", 0.25))
    assert instrument.q3_channel() == named_channel("bitflip", 0.25)
    assert instrument.c12_3() == pytest.approx(0.5)
    assert instrument.c13_2() == pytest.approx(math.sqrt(0.625))
    assert instrument.tau3() == pytest.approx(math.sqrt(0.5))
    assert instrument.c3_pure() is None

    instrument.q3_channel(None)
    assert instrument.tau3() == pytest.approx(1.0)


def test_channel_validator_rejects_non_channels(instrument):
    with pytest.raises(TypeError):
        instrument.q1_channel(0.3)


def test_placements_and_clear(instrument):
    instrument.q1_channel(named_channel("phaseflip", 0.1))
    instrument.q2_channel(named_channel("bitflip", 0.2))
    assert [slot for _, slot in instrument.placements()] == [1, 2]
    instrument.clear_channels()
    assert instrument.placements() == []
    np.testing.assert_allclose(np.trace(instrument.density()).real, 1.0)


def test_load_state(instrument):
    instrument.load_state(basis_state("000"), "product")
    assert instrument.tau3() == pytest.approx(0.0, abs=1e-10)
    assert instrument.metadata["state"] == "product"


def test_ghz_type_state_on_construction():
    psi = random_ghz_type(3)
    inst = NoisyGHZ("noisy_ghz_lu", state=psi, state_label="ghz-lu:seed=3")
    assert inst.metadata["state"] == "ghz-lu:seed=3"
    assert inst.c3_pure() == pytest.approx(math.sqrt(0.5), abs=1e-9)


def test_idn(instrument):
    idn = instrument.get_idn()
    assert idn["vendor"] == "ghz_lab"
    assert idn["model"] == "NoisyGHZ"
