"""
Single-qubit Pauli channels in Kraus form and their lifts to three qubits.

A channel with real amplitudes (a1, a2, a3, a4) has the Kraus operators
a1*I, a2*X, a3*Y, a4*Z, so that sum(a_i**2) == 1 is the completeness
condition and a_i**2 are the Pauli-error probabilities.
"""

import itertools
import logging
import math
import re
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt
from qcodes import validators as vals

from ghz_lab.errors import (
    ChannelSpecError,
    InvalidChannelError,
    InvalidParametersError,
    PreconditionError,
)
from ghz_lab.linalg import ComplexMatrix, as_matrix, kron_all
from ghz_lab.states import DIM, DensityMatrix, Seed, rng_from

log = logging.getLogger(__name__)

I2 = np.eye(2, dtype=np.complex128)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
PAULIS = np.stack([I2, SIGMA_X, SIGMA_Y, SIGMA_Z])

NORM_TOL = 1e-8
CPTP_TOL = 1e-9

FAMILIES = ("bitflip", "phaseflip", "bitphaseflip", "depolarizing", "pauli")
NAMED_FAMILIES = FAMILIES[:-1]

_family_validator = vals.Enum(*NAMED_FAMILIES)
_probability_validator = vals.Numbers(min_value=0.0, max_value=1.0)
_slot_validator = vals.Ints(min_value=1, max_value=3)


@dataclass(frozen=True)
class PauliChannel:
    a: tuple[float, float, float, float]

    @property
    def probabilities(self) -> npt.NDArray[np.float64]:
        return np.square(np.asarray(self.a, dtype=float))

    def kraus(self) -> ComplexMatrix:
        """The four 2x2 Kraus operators, shape (4, 2, 2)."""
        return np.asarray(self.a, dtype=float)[:, None, None] * PAULIS

    def is_identity(self, tol: float = 1e-12) -> bool:
        return bool(np.all(self.probabilities[1:] <= tol))

    def __str__(self) -> str:
        return "pauli(" + ", ".join(f"{x:.6g}" for x in self.a) + ")"


IDENTITY = PauliChannel((1.0, 0.0, 0.0, 0.0))


def pauli_channel(a1: float, a2: float = 0.0, a3: float = 0.0, a4: float = 0.0) -> PauliChannel:
    """Build a channel from signed real amplitudes.

    The squared amplitudes must sum to one within 1e-8; the accepted values
    are then renormalized exactly.
    """
    a = np.array([a1, a2, a3, a4], dtype=float)
    if not np.all(np.isfinite(a)):
        raise InvalidParametersError(f"amplitudes must be finite, got {a.tolist()}")
    norm2 = float(np.sum(a**2))
    if abs(norm2 - 1.0) > NORM_TOL:
        raise InvalidParametersError(
            f"sum of squared amplitudes is {norm2:.12g}, expected 1 within {NORM_TOL:.0e}"
        )
    a = a / math.sqrt(norm2)
    return PauliChannel(tuple(float(x) for x in a))


def named_channel(family: str, p: float) -> PauliChannel:
    """Channel of a named family with error probability ``p`` in [0, 1]."""
    try:
        _family_validator.validate(family)
        _probability_validator.validate(p)
    except (ValueError, TypeError) as e:
        raise InvalidParametersError(str(e)) from e
    p = float(p)
    q = math.sqrt(1 - p)
    match family:
        case "bitflip":
            return PauliChannel((q, math.sqrt(p), 0.0, 0.0))
        case "bitphaseflip":
            return PauliChannel((q, 0.0, math.sqrt(p), 0.0))
        case "phaseflip":
            return PauliChannel((q, 0.0, 0.0, math.sqrt(p)))
        case "depolarizing":
            r = math.sqrt(p / 4)
            return PauliChannel((math.sqrt(1 - 3 * p / 4), r, r, r))
    raise AssertionError(family)


def flip_family(channel: PauliChannel, tol: float = 1e-12) -> int | None:
    """Pauli index of a flip channel: 2 for bit flip, 3 for bit-phase flip.

    The identity channel counts as a bit flip. Anything else returns None.
    """
    q = channel.probabilities
    if q[2] <= tol and q[3] <= tol:
        return 2
    if q[1] <= tol and q[3] <= tol:
        return 3
    return None


def random_pauli_channel(seed: Seed = None) -> PauliChannel:
    """Amplitudes drawn uniformly from the unit 3-sphere."""
    rng = rng_from(seed)
    v = rng.standard_normal(4)
    v /= np.linalg.norm(v)
    return PauliChannel(tuple(float(x) for x in v))


def random_flip_channel(family: str, seed: Seed = None) -> PauliChannel:
    if family not in ("bitflip", "bitphaseflip"):
        raise InvalidParametersError(f"not a flip family: {family!r}")
    return named_channel(family, rng_from(seed).uniform(0.0, 1.0))


@dataclass(frozen=True)
class KrausSet:
    operators: npt.NDArray[np.complex128]
    placement: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        ops = np.array(self.operators, dtype=np.complex128)
        if ops.ndim != 3 or ops.shape[1:] != (DIM, DIM):
            raise PreconditionError(f"expected operators of shape (n, 8, 8), got {ops.shape}")
        ops.flags.writeable = False
        object.__setattr__(self, "operators", ops)

    def __len__(self) -> int:
        return self.operators.shape[0]


def lift(channels: Sequence[tuple[PauliChannel, int]]) -> KrausSet:
    """Tensor the channels onto their qubit slots; free slots carry I."""
    if not 1 <= len(channels) <= 3:
        raise PreconditionError(f"expected 1 to 3 channels, got {len(channels)}")
    per_slot: dict[int, ComplexMatrix] = {}
    for channel, slot in channels:
        try:
            _slot_validator.validate(slot)
        except (ValueError, TypeError) as e:
            raise PreconditionError(str(e)) from e
        if slot in per_slot:
            raise PreconditionError(f"duplicate channel on slot q{slot}")
        per_slot[slot] = channel.kraus()

    factors = [per_slot.get(slot, I2[None]) for slot in (1, 2, 3)]
    ops = [kron_all(*combo) for combo in itertools.product(*factors)]
    return KrausSet(np.stack(ops), tuple(sorted(per_slot)))


def validate_cptp(ks: KrausSet | Iterable[npt.ArrayLike]) -> float:
    """Max-abs entry of sum(K^dag K) - I."""
    ops = ks.operators if isinstance(ks, KrausSet) else np.asarray(list(ks), dtype=np.complex128)
    if ops.size == 0:
        return 1.0
    total = np.einsum("kji,kjl->il", ops.conj(), ops)
    return float(np.max(np.abs(total - np.eye(ops.shape[-1]))))


def apply(rho: npt.ArrayLike, ks: KrausSet) -> DensityMatrix:
    """sum_i K_i rho K_i^dag"""
    residual = validate_cptp(ks)
    if residual > CPTP_TOL:
        raise InvalidChannelError(f"Kraus completeness residual {residual:.3e} > {CPTP_TOL:.0e}")
    rho = as_matrix(rho)
    if rho.shape != (DIM, DIM):
        raise PreconditionError(f"expected an 8x8 density matrix, got {rho.shape}")
    out = np.einsum("kij,jl,kml->im", ks.operators, rho, ks.operators.conj())
    return (out + out.conj().T) / 2


def apply_channels(rho: npt.ArrayLike, channels: Sequence[tuple[PauliChannel, int]]) -> DensityMatrix:
    return apply(rho, lift(channels))


@dataclass(frozen=True)
class ChannelSpec:
    family: str
    slot: int
    params: dict[str, float] = field(default_factory=dict)
    channel: PauliChannel = IDENTITY

    def __str__(self) -> str:
        args = ",".join(f"{k}={v:g}" for k, v in self.params.items())
        return f"{self.family}:q{self.slot}" + (f":{args}" if args else "")


_SLOT = re.compile(r"q(\d+)")
_PARAM = re.compile(r"\s*([A-Za-z0-9_]*)\s*=\s*(.*?)\s*")
_KEYS = ("p", "a1", "a2", "a3", "a4")


def _segments(text: str, sep: str, start: int = 0) -> list[tuple[int, str]]:
    out = []
    pos = start
    for seg in text.split(sep):
        out.append((pos, seg))
        pos += len(seg) + len(sep)
    return out


def parse_channel_spec(text: str) -> ChannelSpec:
    """Parse ``family:qN[:key=value[,key=value...]]``.

    Examples: ``bitflip:q3:p=0.25``, ``pauli:q2:a1=0.8,a2=0.6``.
    Positions in errors are 0-based offsets into ``text``.
    """
    parts = _segments(text, ":")
    family_pos, family = parts[0]
    if family not in FAMILIES:
        raise ChannelSpecError(f"unknown channel family {family!r}", text, family_pos)
    if len(parts) < 2:
        raise ChannelSpecError("missing qubit slot", text, len(text))

    slot_pos, slot_text = parts[1]
    m = _SLOT.fullmatch(slot_text)
    if m is None:
        raise ChannelSpecError(f"malformed slot {slot_text!r}, expected q1, q2 or q3", text, slot_pos)
    slot = int(m.group(1))
    if slot not in (1, 2, 3):
        raise ChannelSpecError(f"slot q{slot} out of range", text, slot_pos)

    params: dict[str, float] = {}
    for seg_pos, seg in parts[2:]:
        for item_pos, item in _segments(seg, ",", seg_pos):
            pm = _PARAM.fullmatch(item)
            if pm is None or not pm.group(1):
                raise ChannelSpecError(f"expected key=value, got {item!r}", text, item_pos)
            key, raw = pm.group(1), pm.group(2)
            if key not in _KEYS:
                raise ChannelSpecError(f"unknown parameter {key!r}", text, item_pos)
            if key in params:
                raise ChannelSpecError(f"duplicate parameter {key!r}", text, item_pos)
            value_pos = item_pos + pm.start(2)
            try:
                value = float(raw)
            except ValueError:
                raise ChannelSpecError(f"malformed number {raw!r}", text, value_pos) from None
            if not math.isfinite(value):
                raise ChannelSpecError(f"non-finite number {raw!r}", text, value_pos)
            params[key] = value

    if family == "pauli":
        if "p" in params:
            raise ChannelSpecError("pauli channels take a1..a4, not p", text, parts[2][0])
        channel = pauli_channel(*(params.get(k, 0.0) for k in _KEYS[1:]))
    else:
        extra = set(params) - {"p"}
        if extra:
            raise ChannelSpecError(
                f"{family} takes only p, got {sorted(extra)}", text, parts[2][0]
            )
        if "p" not in params:
            raise ChannelSpecError(f"{family} requires p", text, len(text))
        channel = named_channel(family, params["p"])

    log.debug("parsed channel spec %r -> %s on q%d", text, channel, slot)
    return ChannelSpec(family, slot, params, channel)
