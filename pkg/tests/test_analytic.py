import math

import numpy as np
import pytest

from ghz_lab.analytic import (
    CutTriple,
    FactorInputs,
    evolve_bipartite,
    evolve_tau3,
    factor_three_sided,
    factor_two_sided,
    placement_label,
    single_sided,
    single_sided_at,
    single_sided_factor,
    tau3_from_cuts,
    three_sided_in_domain,
    two_sided,
    two_sided_at,
    two_sided_in_domain,
    two_sided_tau3_flip,
)
from ghz_lab.channels import IDENTITY, apply_channels, named_channel, pauli_channel, random_pauli_channel
from ghz_lab.concurrence import tau3
from ghz_lab.errors import DomainError, PreconditionError


def _bitflip_amp(a1_sq):
    return pauli_channel(math.sqrt(a1_sq), math.sqrt(1 - a1_sq))


def test_identity_gives_ghz_values():
    assert single_sided(IDENTITY) == CutTriple(1.0, 1.0, 1.0)
    assert tau3_from_cuts(two_sided(IDENTITY, IDENTITY)) == pytest.approx(1.0)


def test_single_sided_bitflip_quarter():
    cuts = single_sided(named_channel("bitflip", 0.25))
    np.testing.assert_allclose(cuts, [0.5, math.sqrt(0.625), math.sqrt(0.625)])
    assert tau3_from_cuts(cuts) == pytest.approx(math.sqrt(0.5))


def test_two_sided_flip_pair_closed_form():
    a, b = _bitflip_amp(0.9), _bitflip_amp(0.8)
    expected = 1.2304 / 3
    assert two_sided_tau3_flip(a, b) == pytest.approx(expected)
    assert tau3_from_cuts(two_sided(a, b)) ** 2 == pytest.approx(expected)
    assert factor_two_sided(FactorInputs(0.8, 0.6)) == pytest.approx(expected)
    assert single_sided_factor(a) == pytest.approx(0.8)
    assert single_sided_factor(b) == pytest.approx(0.6)


def test_three_sided_factorization_value():
    assert factor_three_sided(FactorInputs(0.8, 0.6, 0.5)) == pytest.approx(0.4804 / 3)
    with pytest.raises(DomainError):
        factor_three_sided(FactorInputs(0.8, 0.6))


def test_factor_inputs_range():
    FactorInputs(1.0 + 1e-12, 0.0)
    with pytest.raises(DomainError):
        FactorInputs(1.1, 0.5)
    with pytest.raises(DomainError):
        FactorInputs(0.5, 0.5, -0.2)


def test_two_sided_with_identity_reduces_to_single_sided(rng):
    for _ in range(10):
        ch = random_pauli_channel(rng)
        one = single_sided(ch)
        np.testing.assert_allclose(two_sided(IDENTITY, ch), one, atol=1e-14)
        # a channel on qubit 2 exchanges the roles of qubits 2 and 3
        np.testing.assert_allclose(two_sided(ch, IDENTITY), [one.c13_2, one.c12_3, one.c23_1], atol=1e-14)


def test_cubed_variant_changes_only_c23():
    a = pauli_channel(math.sqrt(0.7), 0.0, math.sqrt(0.3))
    b = pauli_channel(math.sqrt(0.6), math.sqrt(0.4))
    squared = two_sided(a, b, "squared")
    cubed = two_sided(a, b, "cubed")
    assert cubed.c12_3 == squared.c12_3
    assert cubed.c13_2 == squared.c13_2
    # first f is 2*0.28 - 0.46; the second f is 0.42 - a3_term * 0.4
    assert squared.c23_1 == pytest.approx(math.hypot(0.10, 0.30))
    assert cubed.c23_1 == pytest.approx(math.hypot(0.10, 0.42 - 0.3**1.5 * 0.4))
    assert 0.42 - 0.3**1.5 * 0.4 == pytest.approx(0.3543, abs=1e-4)
    with pytest.raises(PreconditionError):
        two_sided(a, b, "quartic")


def test_two_sided_tau3_flip_domain():
    with pytest.raises(DomainError):
        two_sided_tau3_flip(named_channel("phaseflip", 0.2), IDENTITY)
    assert not two_sided_in_domain(named_channel("depolarizing", 0.1), IDENTITY)
    assert two_sided_in_domain(named_channel("bitphaseflip", 0.1), IDENTITY)


def test_three_sided_domain():
    bf = named_channel("bitflip", 0.3)
    bpf = named_channel("bitphaseflip", 0.3)
    assert three_sided_in_domain(bf, bf, bf)
    assert three_sided_in_domain(bpf, bf, bpf)
    assert not three_sided_in_domain(bpf, bf, bf)
    assert not three_sided_in_domain(bpf, bpf, bpf)
    # identity can stand in for either family
    assert three_sided_in_domain(bpf, IDENTITY, bf)
    assert not three_sided_in_domain(named_channel("phaseflip", 0.3), bf, bf)


@pytest.mark.parametrize("slot", [1, 2, 3])
def test_single_sided_at_matches_pipeline(ghz_rho, rng, slot):
    ch = random_pauli_channel(rng)
    measured = tau3(apply_channels(ghz_rho, [(ch, slot)]))
    np.testing.assert_allclose(measured.cuts, single_sided_at(ch, slot), atol=1e-9)


@pytest.mark.parametrize("slots", [(2, 3), (1, 3), (3, 1), (1, 2)])
def test_two_sided_at_matches_pipeline(ghz_rho, rng, slots):
    a, b = random_pauli_channel(rng), random_pauli_channel(rng)
    measured = tau3(apply_channels(ghz_rho, [(a, slots[0]), (b, slots[1])]))
    np.testing.assert_allclose(measured.cuts, two_sided_at(a, slots[0], b, slots[1]), atol=1e-9)


def test_two_sided_matches_pipeline(ghz_rho, rng):
    for _ in range(5):
        a, b = random_pauli_channel(rng), random_pauli_channel(rng)
        measured = tau3(apply_channels(ghz_rho, [(a, 2), (b, 3)]))
        np.testing.assert_allclose(measured.cuts, two_sided(a, b), atol=1e-9)


def test_placement_label():
    assert placement_label((3,)) == "canonical"
    assert placement_label((2, 3)) == "canonical"
    assert placement_label((1, 3)) == "permuted variant"
    assert placement_label((1, 2, 3)) == "canonical"


def test_evolution_products():
    assert evolve_tau3(0.5, 0.8) == pytest.approx(0.4)
    assert evolve_bipartite(1.0, 0.3) == pytest.approx(0.3)
    with pytest.raises(DomainError):
        evolve_tau3(-0.1, 0.5)
