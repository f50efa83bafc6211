"""Current transfer of a single AND unit.

Two variants are modelled: the HRS-compensated cell and a plain 1T1R
baseline. An LRS cell delivers ``i_unit`` scaled by ``r_lrs_nominal / R``.
An activated HRS cell leaks ``i_unit * (r_hrs_nominal / R) / target_ratio``,
where the target ratio encodes how strongly the variant suppresses leakage.
Currents are in microamps.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .device import DeviceSample, Fault, ResistanceModel, State, sample_resistances


class Variant(str, enum.Enum):
    COMPENSATED = "compensated"
    BASELINE = "baseline"


@dataclass(frozen=True)
class CellParams:
    i_unit: float = 4.0
    v_read: float = 0.024
    r_lrs_nominal: float = 6_000.0
    r_hrs_nominal: float = 70_000.0
    target_r_ratio_compensated: float = 51.9
    target_r_ratio_baseline: float = 51.9 / 5
    compensation_bias_current: float = 4.0
    stuck_current: Optional[float] = None

    def __post_init__(self):
        if self.i_unit <= 0:
            raise ValueError("i_unit must be positive")
        if not self.target_r_ratio_compensated > self.target_r_ratio_baseline > 1:
            raise ValueError("need target_r_ratio_compensated > target_r_ratio_baseline > 1")
        if self.r_lrs_nominal <= 0 or self.r_hrs_nominal <= 0:
            raise ValueError("nominal resistances must be positive")

    def target_ratio(self, variant: Variant) -> float:
        if Variant(variant) is Variant.COMPENSATED:
            return self.target_r_ratio_compensated
        return self.target_r_ratio_baseline

    @property
    def stuck(self) -> float:
        return self.i_unit if self.stuck_current is None else self.stuck_current

    def leakage_nominal(self, variant: Variant) -> float:
        return self.i_unit / self.target_ratio(variant)


def unit_currents(inputs, weights, resistances, p: CellParams,
                  variant: Variant = Variant.COMPENSATED, faults=None) -> np.ndarray:
    """Vectorised cell output current (uA); all arguments broadcast together.

    ``weights`` is truthy for LRS. A gated-off cell (input 0) delivers exactly
    zero, stuck or not.
    """
    inputs = np.asarray(inputs, dtype=bool)
    lrs = np.asarray(weights, dtype=bool)
    r = np.asarray(resistances, dtype=float)
    on = p.i_unit * p.r_lrs_nominal / r
    leak = p.i_unit * (p.r_hrs_nominal / r) / p.target_ratio(variant)
    out = np.where(lrs, on, leak)
    if faults is not None:
        out = np.where(np.asarray(faults, dtype=bool), p.stuck, out)
    return np.where(inputs, out, 0.0)


def unit_current(input_bit: int, weight: State, device: DeviceSample, p: CellParams,
                 variant: Variant = Variant.COMPENSATED) -> float:
    if State(weight) != device.state:
        raise ValueError("device sample state does not match the programmed weight")
    return float(unit_currents(input_bit, weight == State.LRS, device.resistance, p, variant,
                               device.fault == Fault.STUCK))


def effective_r_ratio(variant: Variant, p: CellParams, model: ResistanceModel, trials: int,
                      rng: np.random.Generator) -> float:
    """mean(I_LRS) / mean(I_HRS) of activated cells over ``trials`` devices of each state."""
    if trials < 10_000:
        raise ValueError("effective_r_ratio needs at least 1e4 trials")
    r_lrs = sample_resistances(model, np.ones(trials, bool), rng)
    r_hrs = sample_resistances(model, np.zeros(trials, bool), rng)
    i_lrs = unit_currents(1, True, r_lrs, p, variant)
    i_hrs = unit_currents(1, False, r_hrs, p, variant)
    return float(i_lrs.mean() / i_hrs.mean())
