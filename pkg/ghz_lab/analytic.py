"""
Closed-form concurrences of the GHZ state under local Pauli channels.

Single-sided formulas take a channel on qubit 3, two-sided formulas take
channels on qubits 2 and 3; the ``*_at`` helpers relabel them to other
placements. All functions here are plain arithmetic on the squared
amplitudes.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Literal, NamedTuple

from ghz_lab.channels import PauliChannel, flip_family
from ghz_lab.concurrence import f_func
from ghz_lab.errors import DomainError, PreconditionError

log = logging.getLogger(__name__)

C23Variant = Literal["squared", "cubed"]
C23_VARIANTS: tuple[C23Variant, ...] = ("squared", "cubed")
FACTOR_SLACK = 1e-9


class CutTriple(NamedTuple):
    c12_3: float
    c13_2: float
    c23_1: float


def tau3_from_cuts(cuts: CutTriple | tuple[float, float, float]) -> float:
    return math.sqrt(sum(c * c for c in cuts) / 3)


def _rss(*values: float) -> float:
    return math.sqrt(sum(v * v for v in values))


def single_sided(a: PauliChannel) -> CutTriple:
    """Cut concurrences of the GHZ state with channel ``a`` on qubit 3."""
    a1, a2, a3, a4 = a.probabilities
    c12 = f_func(a1, a2, a3, a4)
    other = _rss(f_func(a1, a4), f_func(a2, a3))
    return CutTriple(c12, other, other)


def two_sided(a: PauliChannel, b: PauliChannel, eq15_variant: C23Variant = "squared") -> CutTriple:
    """Cut concurrences of the GHZ state with ``a`` on qubit 2 and ``b`` on qubit 3.

    ``eq15_variant="cubed"`` replaces the a3**2 * b2**2 term in the first
    argument of the second f of C^{23|1} with |a3|**3 * b2**2.
    """
    if eq15_variant not in C23_VARIANTS:
        raise PreconditionError(f"eq15_variant must be one of {C23_VARIANTS}, got {eq15_variant!r}")
    a1, a2, a3, a4 = a.probabilities
    b1, b2, b3, b4 = b.probabilities

    c12 = _rss(
        f_func(a2 * b3 + a3 * b2, a2 * b2 + a3 * b3, a3 * b1 + a2 * b4, a2 * b1 + a3 * b4),
        f_func(a4 * b2 + a1 * b3, a1 * b2 + a4 * b3, a4 * b1 + a1 * b4, a1 * b1 + a4 * b4),
    )
    c13 = _rss(
        f_func(a4 * b2 + a1 * b3, a3 * b2 + a2 * b3, a2 * b2 + a3 * b3, a1 * b2 + a4 * b3),
        f_func(a4 * b1 + a1 * b4, a3 * b1 + a2 * b4, a2 * b1 + a3 * b4, a1 * b1 + a4 * b4),
    )
    a3_term = a3 if eq15_variant == "squared" else abs(a.a[2]) ** 3
    c23 = _rss(
        f_func(a4 * b2 + a1 * b3, a1 * b2 + a4 * b3, a3 * b1 + a2 * b4, a2 * b1 + a3 * b4),
        f_func(a3_term * b2 + a2 * b3, a2 * b2 + a3 * b3, a4 * b1 + a1 * b4, a1 * b1 + a4 * b4),
    )
    return CutTriple(c12, c13, c23)


def _relabel(canonical: CutTriple, sigma: dict[int, int]) -> CutTriple:
    # canonical values indexed by the single qubit of each cut
    by_single = {3: canonical.c12_3, 2: canonical.c13_2, 1: canonical.c23_1}
    return CutTriple(by_single[sigma[3]], by_single[sigma[2]], by_single[sigma[1]])


def _check_slots(*slots: int) -> None:
    if len(set(slots)) != len(slots) or not set(slots) <= {1, 2, 3}:
        raise PreconditionError(f"slots must be distinct and in 1..3, got {slots}")


def single_sided_at(a: PauliChannel, slot: int) -> CutTriple:
    """``single_sided`` for a channel acting on ``slot`` instead of qubit 3."""
    _check_slots(slot)
    free = sorted({1, 2, 3} - {slot})
    return _relabel(single_sided(a), {free[0]: 1, free[1]: 2, slot: 3})


def two_sided_at(
    a: PauliChannel,
    slot_a: int,
    b: PauliChannel,
    slot_b: int,
    eq15_variant: C23Variant = "squared",
) -> CutTriple:
    """``two_sided`` for channels on arbitrary distinct slots."""
    _check_slots(slot_a, slot_b)
    (free,) = {1, 2, 3} - {slot_a, slot_b}
    return _relabel(two_sided(a, b, eq15_variant), {free: 1, slot_a: 2, slot_b: 3})


def placement_label(slots: tuple[int, ...]) -> str:
    canonical = {1: (3,), 2: (2, 3), 3: (1, 2, 3)}[len(slots)]
    return "canonical" if tuple(slots) == canonical else "permuted variant"


def _flip_index(channel: PauliChannel, name: str) -> int:
    index = flip_family(channel)
    if index is None:
        raise DomainError(f"channel {name} = {channel} is neither a bit flip nor a bit-phase flip")
    return index


def two_sided_tau3_flip(a: PauliChannel, b: PauliChannel) -> float:
    """τ₃² of the GHZ state with flip channels on qubits 2 and 3."""
    i = _flip_index(a, "a")
    j = _flip_index(b, "b")
    pa = a.probabilities
    pb = b.probabilities
    fa = f_func(pa[0], pa[i - 1]) ** 2
    fb = f_func(pb[0], pb[j - 1]) ** 2
    return (fa + fb + fa * fb) / 3


@dataclass(frozen=True)
class FactorInputs:
    """Single-sided cut concurrences 𝔸, 𝔹, ℂ of the channels involved."""

    A: float
    B: float
    C: float | None = None

    def __post_init__(self) -> None:
        for name in ("A", "B", "C"):
            value = getattr(self, name)
            if value is None:
                continue
            # pipeline values may overshoot 1 by rounding
            if not -FACTOR_SLACK <= value <= 1.0 + FACTOR_SLACK:
                raise DomainError(f"factor {name} = {value!r} outside [0, 1]")


def single_sided_factor(channel: PauliChannel) -> float:
    """C^{12|3} of the GHZ state with ``channel`` on qubit 3."""
    return single_sided(channel).c12_3


def factor_two_sided(fi: FactorInputs) -> float:
    """τ₃² = (A² + B² + A²B²) / 3"""
    a2, b2 = fi.A**2, fi.B**2
    return (a2 + b2 + a2 * b2) / 3


def factor_three_sided(fi: FactorInputs) -> float:
    """τ₃² = (A²B² + B²C² + A²C²) / 3"""
    if fi.C is None:
        raise DomainError("three-sided factorization needs C")
    a2, b2, c2 = fi.A**2, fi.B**2, fi.C**2
    return (a2 * b2 + b2 * c2 + a2 * c2) / 3


def two_sided_in_domain(a: PauliChannel, b: PauliChannel) -> bool:
    return flip_family(a) is not None and flip_family(b) is not None


def _families(channel: PauliChannel) -> set[int]:
    if channel.is_identity():
        return {2, 3}
    index = flip_family(channel)
    return set() if index is None else {index}


def three_sided_in_domain(a: PauliChannel, b: PauliChannel, c: PauliChannel) -> bool:
    """All bit flips, or two bit-phase flips and one bit flip."""
    choices = [_families(ch) for ch in (a, b, c)]
    return any(
        combo.count(3) in (0, 2) for combo in itertools.product(*choices)
    )


def _check_non_negative(**values: float) -> None:
    for name, value in values.items():
        if value < 0:
            raise DomainError(f"{name} must be non-negative, got {value!r}")


def evolve_tau3(tau_ghz_under_channel: float, tau_psi: float) -> float:
    """τ₃ of a noisy GHZ-type state from the noisy GHZ value and τ₃(ψ)."""
    _check_non_negative(tau_ghz_under_channel=tau_ghz_under_channel, tau_psi=tau_psi)
    return tau_ghz_under_channel * tau_psi


def evolve_bipartite(c_ghz_under_channel: float, c_psi: float) -> float:
    _check_non_negative(c_ghz_under_channel=c_ghz_under_channel, c_psi=c_psi)
    return c_ghz_under_channel * c_psi
