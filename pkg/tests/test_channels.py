import numpy as np
import pytest

from ghz_lab.channels import (
    IDENTITY,
    KrausSet,
    PAULIS,
    apply,
    apply_channels,
    flip_family,
    lift,
    named_channel,
    parse_channel_spec,
    pauli_channel,
    random_pauli_channel,
    validate_cptp,
)
from ghz_lab.errors import (
    ChannelSpecError,
    InvalidChannelError,
    InvalidParametersError,
    PreconditionError,
)
from ghz_lab.states import basis_state, pure_density, random_density


def test_pauli_channel_renormalizes_within_tolerance():
    ch = pauli_channel(0.8, 0.6 + 1e-10)
    assert sum(ch.probabilities) == pytest.approx(1.0, abs=1e-14)
    with pytest.raises(InvalidParametersError):
        pauli_channel(0.8, 0.5)
    with pytest.raises(InvalidParametersError):
        pauli_channel(float("nan"))


def test_signed_amplitudes_give_the_same_map(ghz_rho):
    plus = pauli_channel(0.8, 0.6)
    minus = pauli_channel(-0.8, 0.6)
    np.testing.assert_allclose(
        apply_channels(ghz_rho, [(plus, 3)]), apply_channels(ghz_rho, [(minus, 3)]), atol=1e-14
    )


@pytest.mark.parametrize(
    "family, expected",
    [
        ("bitflip", [0.75, 0.25, 0, 0]),
        ("bitphaseflip", [0.75, 0, 0.25, 0]),
        ("phaseflip", [0.75, 0, 0, 0.25]),
        ("depolarizing", [1 - 0.75 * 0.25, 0.0625, 0.0625, 0.0625]),
    ],
)
def test_named_channel_probabilities(family, expected):
    np.testing.assert_allclose(named_channel(family, 0.25).probabilities, expected, atol=1e-15)


def test_named_channel_rejects_bad_input():
    with pytest.raises(InvalidParametersError):
        named_channel("bitflip", 1.5)
    with pytest.raises(InvalidParametersError):
        named_channel("amplitude-damping", 0.1)


def test_flip_family():
    assert flip_family(named_channel("bitflip", 0.3)) == 2
    assert flip_family(named_channel("bitphaseflip", 0.3)) == 3
    assert flip_family(IDENTITY) == 2
    assert flip_family(named_channel("phaseflip", 0.3)) is None
    assert flip_family(named_channel("depolarizing", 0.3)) is None


def test_single_qubit_kraus_completeness(rng):
    for _ in range(20):
        ops = random_pauli_channel(rng).kraus()
        np.testing.assert_allclose(
            np.einsum("kji,kjl->il", ops.conj(), ops), np.eye(2), atol=1e-12
        )


def test_lift_sizes_and_completeness(rng):
    a, b, c = (random_pauli_channel(rng) for _ in range(3))
    for placements, n in (([(a, 3)], 4), ([(a, 2), (b, 3)], 16), ([(a, 1), (b, 2), (c, 3)], 64)):
        ks = lift(placements)
        assert len(ks) == n
        assert ks.operators.shape == (n, 8, 8)
        assert validate_cptp(ks) <= 1e-12


def test_lift_single_channel_operator_form():
    a = pauli_channel(0.8, 0.6)
    ks = lift([(a, 3)])
    np.testing.assert_allclose(ks.operators[1], 0.6 * np.kron(np.eye(4), PAULIS[1]), atol=1e-15)
    assert ks.placement == (3,)


def test_lift_rejects_bad_placements():
    with pytest.raises(PreconditionError):
        lift([(IDENTITY, 2), (IDENTITY, 2)])
    with pytest.raises(PreconditionError):
        lift([(IDENTITY, 4)])
    with pytest.raises(PreconditionError):
        lift([])


def test_kraus_set_is_read_only():
    ks = lift([(IDENTITY, 1)])
    with pytest.raises(ValueError):
        ks.operators[0, 0, 0] = 2


def test_validate_cptp_detects_broken_sets():
    ops = lift([(named_channel("bitflip", 0.25), 3)]).operators
    assert validate_cptp(ops[1:]) == pytest.approx(0.75)
    assert validate_cptp(1.01 * ops) == pytest.approx(0.0201)
    with pytest.raises(InvalidChannelError):
        apply(np.eye(8) / 8, KrausSet(ops[1:]))


def test_apply_bitflip_on_basis_state():
    rho = pure_density(basis_state("000"))
    out = apply_channels(rho, [(named_channel("bitflip", 0.25), 3)])
    np.testing.assert_allclose(np.diag(out).real, [0.75, 0.25, 0, 0, 0, 0, 0, 0], atol=1e-15)


def test_apply_preserves_trace_and_hermiticity(ghz_rho, rng):
    out = apply_channels(ghz_rho, [(random_pauli_channel(rng), 1), (random_pauli_channel(rng), 3)])
    assert np.trace(out).real == pytest.approx(1.0)
    np.testing.assert_allclose(out, out.conj().T, atol=1e-15)
    assert np.linalg.eigvalsh(out).min() > -1e-12


def test_identity_channel_is_a_no_op(ghz_rho):
    np.testing.assert_allclose(apply_channels(ghz_rho, [(IDENTITY, 2)]), ghz_rho, atol=1e-15)


def test_apply_is_linear_in_rho(rng):
    ks = lift([(random_pauli_channel(rng), 1), (random_pauli_channel(rng), 3)])
    rho1, rho2 = random_density(2, rng), random_density(5, rng)
    lam = 0.3
    mixed = apply(lam * rho1 + (1 - lam) * rho2, ks)
    np.testing.assert_allclose(mixed, lam * apply(rho1, ks) + (1 - lam) * apply(rho2, ks), atol=1e-14)


def test_disjoint_slots_compose_into_one_lift(rng):
    a, b = random_pauli_channel(rng), random_pauli_channel(rng)
    rho = random_density(3, rng)
    joint = lift([(a, 2), (b, 3)])
    assert len(joint) == 16
    sequential = apply_channels(apply_channels(rho, [(a, 2)]), [(b, 3)])
    np.testing.assert_allclose(apply(rho, joint), sequential, atol=1e-14)


def test_full_depolarizing_on_qubit_three(ghz_rho):
    out = apply_channels(ghz_rho, [(named_channel("depolarizing", 1.0), 3)])
    expected = np.kron(np.diag([0.5, 0, 0, 0.5]), np.eye(2) / 2)
    np.testing.assert_allclose(out, expected, atol=1e-15)


def test_apply_rejects_non_three_qubit_input():
    with pytest.raises(PreconditionError, match="8x8"):
        apply(np.eye(4) / 4, lift([(IDENTITY, 3)]))


def test_parse_named_spec():
    spec = parse_channel_spec("bitflip:q3:p=0.25")
    assert spec.family == "bitflip"
    assert spec.slot == 3
    assert spec.params == {"p": 0.25}
    assert spec.channel == named_channel("bitflip", 0.25)
    assert str(spec) == "bitflip:q3:p=0.25"


def test_parse_pauli_spec():
    spec = parse_channel_spec("pauli:q2:a1=0.8,a2=0.6")
    np.testing.assert_allclose(spec.channel.probabilities, [0.64, 0.36, 0, 0], atol=1e-15)


@pytest.mark.parametrize(
    "text, position",
    [
        ("flip:q1:p=0.1", 0),
        ("bitflip:q4:p=0.1", 8),
        ("bitflip:x1:p=0.1", 8),
        ("bitflip:q1:p=abc", 13),
        ("bitflip:q1:z=0.1", 11),
        ("bitflip:q1:p=0.1,p=0.2", 17),
    ],
)
def test_parse_errors_carry_position(text, position):
    with pytest.raises(ChannelSpecError) as info:
        parse_channel_spec(text)
    assert info.value.position == position
    assert f"at position {position}" in str(info.value)


def test_parse_rejects_invalid_parameters():
    with pytest.raises((ChannelSpecError, InvalidParametersError)):
        parse_channel_spec("bitflip:q1")
    with pytest.raises(InvalidParametersError):
        parse_channel_spec("pauli:q1:a1=0.9")
