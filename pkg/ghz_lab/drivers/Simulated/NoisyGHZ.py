from typing import Any

import numpy.typing as npt
from qcodes.instrument import Instrument
from qcodes.parameters import Parameter
from qcodes.validators import Validator

from ghz_lab import __version__
from ghz_lab.channels import NORM_TOL, PauliChannel, apply_channels
from ghz_lab.concurrence import ConcurrenceReport, Cut, tau3
from ghz_lab.states import DensityMatrix, PureState, as_state, ghz, pure_density

SLOTS = (1, 2, 3)


class PauliChannelValidator(Validator[PauliChannel | None]):
    """Accepts a PauliChannel or None (no noise on the qubit)."""

    def __init__(self) -> None:
        self._valid_values = (None,)

    def validate(self, value: PauliChannel | None, context: str = "") -> None:
        if value is None:
            return
        if not isinstance(value, PauliChannel):
            raise TypeError(f"{value!r} is not a PauliChannel; {context}")
        norm2 = float(value.probabilities.sum())
        if abs(norm2 - 1.0) > NORM_TOL:
            raise ValueError(
                f"{value} has sum of squared amplitudes {norm2:.12g}; {context}"
            )

    def __repr__(self) -> str:
        return "<PauliChannel or None>"


class Tau3(Parameter):
    """Lower bound tau3 of the noisy state"""

    def __init__(self, name: str, instrument: "NoisyGHZ", **kwargs: Any) -> None:
        super().__init__(name, instrument=instrument, **kwargs)

    def get_raw(self) -> float:
        return self.instrument.report().tau3


class CutConcurrence(Parameter):
    """Bipartite concurrence across one cut"""

    def __init__(
        self, name: str, instrument: "NoisyGHZ", cut: Cut, **kwargs: Any
    ) -> None:
        super().__init__(name, instrument=instrument, **kwargs)
        self.cut = cut

    def get_raw(self) -> float:
        return self.instrument.report().bipartite[self.cut.label]


class PureConcurrence(Parameter):
    """
    Pure-state three-qubit concurrence. Returns None once any channel
    makes the state mixed.
    """

    def __init__(self, name: str, instrument: "NoisyGHZ", **kwargs: Any) -> None:
        super().__init__(name, instrument=instrument, **kwargs)

    def get_raw(self) -> float | None:
        return self.instrument.report().c3_pure


class NoisyGHZ(Instrument):
    """
    Virtual three-qubit register prepared in a GHZ-type pure state, with a
    settable local Pauli channel on each qubit and concurrence readouts.
    """

    def __init__(
        self,
        name: str,
        state: npt.ArrayLike | None = None,
        state_label: str = "ghz",
        **kwargs: Any,
    ) -> None:
        super().__init__(name=name, **kwargs)

        self._psi: PureState = ghz()
        self._state_label = "ghz"
        self._channels: dict[int, PauliChannel | None] = dict.fromkeys(SLOTS)
        self._report: ConcurrenceReport | None = None

        for slot in SLOTS:
            self.add_parameter(
                name=f"q{slot}_channel",
                label=f"Pauli channel on qubit {slot}",
                get_cmd=lambda slot=slot: self._channels[slot],
                set_cmd=lambda value, slot=slot: self._set_channel(slot, value),
                vals=PauliChannelValidator(),
                snapshot_value=False,
            )

        self.add_parameter(
            name="tau3",
            parameter_class=Tau3,
            label="Lower bound tau3",
            unit="",
        )
        for cut in (Cut((1, 2), 3), Cut((1, 3), 2), Cut((2, 3), 1)):
            self.add_parameter(
                name=f"c{cut.pair[0]}{cut.pair[1]}_{cut.single}",
                parameter_class=CutConcurrence,
                cut=cut,
                label=f"Concurrence C^{cut.label}",
                unit="",
            )
        self.add_parameter(
            name="c3_pure",
            parameter_class=PureConcurrence,
            label="Pure-state concurrence C3",
            unit="",
        )

        if state is not None:
            self.load_state(state, state_label)
        self.metadata.update({"state": self._state_label})

    def _set_channel(self, slot: int, value: PauliChannel | None) -> None:
        self._channels[slot] = value
        self._report = None
        self.log.debug(f"q{slot} channel set to {value}")

    def load_state(self, psi: npt.ArrayLike, label: str = "custom") -> None:
        """Prepare a new initial pure state; channels are kept."""
        self._psi = as_state(psi)
        self._state_label = label
        self._report = None
        self.metadata.update({"state": label})
        self.log.info(f"loaded initial state {label}")

    def clear_channels(self) -> None:
        for slot in SLOTS:
            self.parameters[f"q{slot}_channel"].set(None)

    def placements(self) -> list[tuple[PauliChannel, int]]:
        return [(ch, slot) for slot, ch in self._channels.items() if ch is not None]

    def density(self) -> DensityMatrix:
        """The initial state after every configured channel."""
        rho = pure_density(self._psi)
        placements = self.placements()
        return apply_channels(rho, placements) if placements else rho

    def report(self) -> ConcurrenceReport:
        if self._report is None:
            self._report = tau3(self.density())
        return self._report

    def get_idn(self) -> dict[str, str | None]:
        return {
            "vendor": "ghz_lab",
            "model": "NoisyGHZ",
            "serial": None,
            "firmware": __version__,
        }
