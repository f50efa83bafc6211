"""Stochastic RRAM resistance model.

LRS and HRS resistances are truncated Gaussians (truncation by rejection,
so there is no probability atom at the floor). Yield faults are independent
per device.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np


class State(enum.IntEnum):
    HRS = 0
    LRS = 1


class Fault(enum.IntEnum):
    NONE = 0
    STUCK = 1


@dataclass(frozen=True)
class ResistanceModel:
    """Truncated-Gaussian resistance statistics, in ohms.

    ``read_noise`` is an optional multiplicative per-read jitter (relative
    sigma); it is off by default.
    """

    lrs_mean: float = 6_000.0
    lrs_sigma: float = 60.0
    lrs_floor: float = 5_000.0
    hrs_mean: float = 70_000.0
    hrs_sigma: float = 10_000.0
    hrs_floor: float = 40_000.0
    yield_fault_prob: float = 0.0
    read_noise: float = 0.0

    def __post_init__(self):
        if self.lrs_mean <= 0 or self.hrs_mean <= 0:
            raise ValueError("resistance means must be positive")
        if self.lrs_sigma < 0 or self.hrs_sigma < 0:
            raise ValueError("resistance sigmas must be non-negative")
        if not self.hrs_floor > self.lrs_mean:
            raise ValueError("hrs_floor must lie above lrs_mean")
        if self.lrs_floor > self.lrs_mean or self.hrs_floor > self.hrs_mean:
            raise ValueError("truncation floors must not exceed the means")
        if not 0.0 <= self.yield_fault_prob <= 1.0:
            raise ValueError("yield_fault_prob must be in [0, 1]")
        if self.read_noise < 0:
            raise ValueError("read_noise must be non-negative")

    def params(self, state: State) -> tuple[float, float, float]:
        if state == State.LRS:
            return self.lrs_mean, self.lrs_sigma, self.lrs_floor
        return self.hrs_mean, self.hrs_sigma, self.hrs_floor

    def ideal(self) -> "ResistanceModel":
        """Same means, zero spread, no faults."""
        return replace(self, lrs_sigma=0.0, hrs_sigma=0.0, yield_fault_prob=0.0, read_noise=0.0)


@dataclass(frozen=True)
class DeviceSample:
    resistance: float
    state: State
    fault: Fault = Fault.NONE


def truncated_normal(mean: float, sigma: float, floor: float, size, rng: np.random.Generator) -> np.ndarray:
    """Draw N(mean, sigma^2) samples, redrawing any that fall below ``floor``."""
    if sigma == 0:
        return np.full(size, float(mean))
    out = rng.normal(mean, sigma, size)
    bad = out < floor
    # acceptance is >= 50% since floor <= mean, so this terminates quickly
    while bad.any():
        out[bad] = rng.normal(mean, sigma, int(bad.sum()))
        bad = out < floor
    return out


def sample_resistances(model: ResistanceModel, states, rng: np.random.Generator) -> np.ndarray:
    """Vectorised draw: one resistance per entry of the boolean/State array ``states``."""
    states = np.asarray(states, dtype=bool)
    out = np.empty(states.shape)
    n_lrs = int(states.sum())
    out[states] = truncated_normal(model.lrs_mean, model.lrs_sigma, model.lrs_floor, n_lrs, rng)
    out[~states] = truncated_normal(model.hrs_mean, model.hrs_sigma, model.hrs_floor, states.size - n_lrs, rng)
    return out


def sample_faults(model: ResistanceModel, size, rng: np.random.Generator) -> np.ndarray:
    """Boolean stuck-fault mask."""
    if model.yield_fault_prob == 0.0:
        return np.zeros(size, dtype=bool)
    return rng.random(size) < model.yield_fault_prob


def sample_resistance(model: ResistanceModel, state: State, rng: np.random.Generator) -> DeviceSample:
    mean, sigma, floor = model.params(State(state))
    r = float(truncated_normal(mean, sigma, floor, 1, rng)[0])
    return DeviceSample(r, State(state))


def sample_fault(model: ResistanceModel, rng: np.random.Generator) -> Fault:
    return Fault.STUCK if bool(sample_faults(model, 1, rng)[0]) else Fault.NONE


def apply_read_noise(resistances: np.ndarray, model: ResistanceModel,
                     rng: Optional[np.random.Generator]) -> np.ndarray:
    if model.read_noise == 0.0 or rng is None:
        return resistances
    return resistances * (1.0 + rng.normal(0.0, model.read_noise, np.shape(resistances)))
