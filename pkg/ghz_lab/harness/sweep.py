"""
Parameter sweeps over named noise channels.

A sweep drives the NoisyGHZ virtual instrument: for every grid point it sets
the channel parameters and reads the concurrence parameters, then adds the
closed-form values where they apply. Rows are in row-major grid order.
"""

import io
import itertools
import logging
import math
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import numpy.typing as npt
import pandas as pd
from qcodes import validators as vals

from ghz_lab.analytic import (
    C23Variant,
    FactorInputs,
    factor_three_sided,
    factor_two_sided,
    placement_label,
    single_sided_at,
    single_sided_factor,
    tau3_from_cuts,
    three_sided_in_domain,
    two_sided_at,
    two_sided_in_domain,
)
from ghz_lab.channels import NAMED_FAMILIES, named_channel
from ghz_lab.drivers.Simulated.NoisyGHZ import NoisyGHZ
from ghz_lab.errors import PreconditionError
from ghz_lab.harness.report import write_atomic
from ghz_lab.states import random_ghz_type

log = logging.getLogger(__name__)

_ids = itertools.count()
_points_validator = vals.Ints(min_value=2)
_p_validator = vals.Numbers(min_value=0.0, max_value=1.0)


@dataclass(frozen=True)
class Axis:
    """One swept channel: ``family`` on ``slot`` with p on a linear grid."""

    slot: int
    family: str
    p_min: float = 0.0
    p_max: float = 1.0
    points: int = 11

    def __post_init__(self) -> None:
        try:
            vals.Ints(1, 3).validate(self.slot)
            vals.Enum(*NAMED_FAMILIES).validate(self.family)
            _points_validator.validate(self.points)
            _p_validator.validate(self.p_min)
            _p_validator.validate(self.p_max)
        except (ValueError, TypeError) as e:
            raise PreconditionError(str(e)) from e
        if self.p_min > self.p_max:
            raise PreconditionError(f"p_min {self.p_min} > p_max {self.p_max}")

    def grid(self) -> npt.NDArray[np.float64]:
        return np.linspace(self.p_min, self.p_max, self.points)


@dataclass(frozen=True)
class SweepSpec:
    axes: tuple[Axis, ...]
    state: str = "ghz"
    seed: int | None = None
    eq15_variant: C23Variant = "squared"

    def __post_init__(self) -> None:
        if not 1 <= len(self.axes) <= 3:
            raise PreconditionError(f"a sweep needs 1 to 3 axes, got {len(self.axes)}")
        slots = [axis.slot for axis in self.axes]
        if len(set(slots)) != len(slots):
            raise PreconditionError(f"duplicate slots in sweep: {slots}")
        if self.state not in ("ghz", "ghz-lu"):
            raise PreconditionError(f"sweep state must be ghz or ghz-lu, got {self.state!r}")

    @property
    def sides(self) -> int:
        return len(self.axes)

    @property
    def slots(self) -> tuple[int, ...]:
        return tuple(axis.slot for axis in self.axes)


def _analytic(channels, slots, variant) -> tuple[float, float]:
    """(tau3 closed form, factorization law for τ₃²); NaN where not defined."""
    match len(slots):
        case 1:
            return tau3_from_cuts(single_sided_at(channels[0], slots[0])), math.nan
        case 2:
            (a, sa), (b, sb) = zip(channels, slots, strict=True)
            tau = tau3_from_cuts(two_sided_at(a, sa, b, sb, variant))
            if not two_sided_in_domain(a, b):
                return tau, math.nan
            return tau, factor_two_sided(FactorInputs(*(single_sided_factor(ch) for ch in channels)))
        case _:
            if not three_sided_in_domain(*channels):
                return math.nan, math.nan
            law = factor_three_sided(FactorInputs(*(single_sided_factor(ch) for ch in channels)))
            return math.sqrt(law), law


def sweep(spec: SweepSpec, state: npt.ArrayLike | None = None, state_label: str = "custom") -> pd.DataFrame:
    """One row per grid point.

    The initial state is ``state`` if given, else the GHZ state or, for
    ``spec.state == "ghz-lu"``, a random GHZ-type state drawn from
    ``spec.seed``. Closed forms are only filled in for the GHZ state itself;
    for any other initial state the analytic columns are NaN.
    """
    if state is None and spec.state == "ghz-lu":
        state, state_label = random_ghz_type(spec.seed), f"ghz-lu:seed={spec.seed}"
    analytic = state is None
    if analytic:
        state_label = "ghz"
    placement = placement_label(spec.slots)
    rows = []
    instrument = NoisyGHZ(f"noisy_ghz_sweep_{next(_ids)}", state=state, state_label=state_label)
    try:
        for ps in itertools.product(*(axis.grid() for axis in spec.axes)):
            channels = [named_channel(axis.family, float(p)) for axis, p in zip(spec.axes, ps, strict=True)]
            instrument.clear_channels()
            for axis, channel in zip(spec.axes, channels, strict=True):
                instrument.parameters[f"q{axis.slot}_channel"].set(channel)

            row: dict[str, object] = {}
            for axis, p, channel in zip(spec.axes, ps, channels, strict=True):
                row[f"p_q{axis.slot}"] = float(p)
                row[f"factor_q{axis.slot}"] = single_sided_factor(channel)
            row["C12_3"] = instrument.c12_3()
            row["C13_2"] = instrument.c13_2()
            row["C23_1"] = instrument.c23_1()
            tau = instrument.tau3()
            row["tau3"] = tau
            row["tau3_sq"] = tau * tau
            tau_a, law = _analytic(channels, spec.slots, spec.eq15_variant) if analytic else (math.nan, math.nan)
            row["tau3_analytic"] = tau_a
            row["factor_law"] = law
            row["residual"] = abs(tau - tau_a) if not math.isnan(tau_a) else math.nan
            row["placement"] = placement
            rows.append(row)
    finally:
        instrument.close()
    log.info("sweep over %s: %d rows", [f"{a.family}@q{a.slot}" for a in spec.axes], len(rows))
    return pd.DataFrame(rows)


def to_csv(frame: pd.DataFrame) -> str:
    buf = io.StringIO()
    frame.to_csv(buf, index=False, na_rep="n/a", lineterminator="\r\n")
    return buf.getvalue()


def write_csv(frame: pd.DataFrame, path: str | os.PathLike) -> Path:
    return write_atomic(path, to_csv(frame), newline="")
