"""Pulsed current-sensing parity checker.

The row current charges C1 while the global reset clock (GRC) is low. A
threshold judge discharges C1 to 0 V every time it reaches ``v_th``, so each
ramp consumes two unit currents' worth of charge. What is left on C1 just
before GRC rises is ~``v_th/2`` for an odd number of unit currents and ~0
for an even number; a comparator against ``v_ref`` turns that into a bit.

Timing model:

* GRC is low for the whole ``grc_period``; the global reset edge at the end
  is instantaneous and leaves C1 at ``v_precharge``.
* The comparator clock leads the GRC edge by ``t_d``; the comparator latches
  the voltage held at the edge, so ``t_d`` only has to fit inside the period.
* ``v_precharge`` is a small pedestal that keeps the even-weight residue
  clear of the wrap-around at ``v_th``; without it any current slightly
  under nominal leaves ~``v_th`` on C1 and reads as odd.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

UA = 1e-6


@dataclass(frozen=True)
class PcspcParams:
    c1: float = 0.25e-12
    v_th: float = 0.8
    v_ref: float = 0.2
    grc_period: float = 25e-9
    t_d: float = 1e-9
    comparator_noise_sigma: float = 0.0
    time_step: Optional[float] = None
    v_precharge: float = 0.05
    i_unit: float = 4.0

    def __post_init__(self):
        vals = (self.c1, self.v_th, self.v_ref, self.grc_period, self.t_d,
                self.comparator_noise_sigma, self.v_precharge, self.i_unit)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("PCSPC parameters must be finite")
        if self.time_step is not None and not (math.isfinite(self.time_step) and self.time_step > 0):
            raise ValueError("time_step must be positive and finite")
        if self.c1 <= 0 or self.v_th <= 0 or self.grc_period <= 0 or self.i_unit <= 0:
            raise ValueError("c1, v_th, grc_period and i_unit must be positive")
        if not 0 < self.v_ref < self.v_th / 2:
            raise ValueError("need 0 < v_ref < v_th/2")
        if not 0 <= self.t_d < self.grc_period:
            raise ValueError("need 0 <= t_d < grc_period")
        if not 0 <= self.v_precharge < self.v_ref:
            raise ValueError("need 0 <= v_precharge < v_ref")
        if self.comparator_noise_sigma < 0:
            raise ValueError("comparator_noise_sigma must be non-negative")
        ident = 2 * self.i_unit * UA * self.t_low / self.c1
        if not math.isclose(ident, self.v_th, rel_tol=1e-9):
            raise ValueError(
                f"calibration identity violated: 2*i_unit*t_low/c1 = {ident:.6g} V != v_th = {self.v_th:.6g} V")

    @property
    def t_low(self) -> float:
        """GRC-low (integration) window."""
        return self.grc_period

    @property
    def step(self) -> float:
        return self.grc_period / 1000 if self.time_step is None else self.time_step

    @property
    def volts_per_ua(self) -> float:
        """Voltage a 1 uA current deposits over the full window, before resets."""
        return UA * self.t_low / self.c1


@dataclass
class PcspcTrace:
    ramp_pulse_count: int
    v_charge_at_sample: float
    comparator_bit: int
    xor_out: int
    times: Optional[np.ndarray] = field(default=None, repr=False)
    voltages: Optional[np.ndarray] = field(default=None, repr=False)
    reset_times: list = field(default_factory=list, repr=False)

    def waveform_rows(self):
        """(time, v_charge, event) rows for CSV dumps."""
        resets = iter(self.reset_times)
        nxt = next(resets, None)
        rows = []
        for t, v in zip(self.times, self.voltages):
            ev = ""
            while nxt is not None and nxt <= t:
                ev = "local_reset" if not ev else ev + "+local_reset"
                nxt = next(resets, None)
            rows.append((float(t), float(v), ev))
        if rows:
            t, v, ev = rows[-1]
            rows[-1] = (t, v, (ev + "+" if ev else "") + "sample")
        return rows


def calibrate_params(i_unit: float = 4.0, grc_frequency: float = 40e6, v_th: float = 0.8,
                     **overrides) -> PcspcParams:
    """Choose C1 so one GRC-low window of two unit currents charges exactly ``v_th``."""
    if i_unit <= 0 or grc_frequency <= 0 or v_th <= 0:
        raise ValueError("i_unit, grc_frequency and v_th must be positive")
    t_low = 1.0 / grc_frequency
    kw = dict(
        c1=2 * i_unit * UA * t_low / v_th,
        v_th=v_th,
        v_ref=v_th / 4,
        grc_period=t_low,
        t_d=min(1e-9, t_low / 25),
        v_precharge=v_th / 16,
        i_unit=i_unit,
    )
    kw.update(overrides)
    return PcspcParams(**kw)


def simulate_readout(i_mc: float, p: PcspcParams, rng: Optional[np.random.Generator] = None,
                     record: bool = False) -> PcspcTrace:
    """Time-stepped readout of one row current (uA), with exact threshold-event location.

    The current is constant over the window, so each step adds ``i*dt/C1``;
    a threshold crossing inside a step is located by linear interpolation,
    C1 is reset to 0 V there and the remaining charge of the step carries on.
    """
    if not math.isfinite(i_mc) or i_mc < 0:
        raise ValueError("i_mc must be finite and non-negative")
    if p.comparator_noise_sigma > 0 and rng is None:
        raise ValueError("comparator noise requires an rng")
    n_steps = max(1, int(round(p.t_low / p.step)))
    dt = p.t_low / n_steps
    slope = i_mc * UA / p.c1
    v = p.v_precharge
    count = 0
    resets = []
    times = np.empty(n_steps + 1) if record else None
    volts = np.empty(n_steps + 1) if record else None
    if record:
        times[0], volts[0] = 0.0, v
    for k in range(n_steps):
        t0 = k * dt
        remaining = dt
        while slope > 0 and v + slope * remaining >= p.v_th:
            to_cross = (p.v_th - v) / slope
            count += 1
            t0 += to_cross
            remaining -= to_cross
            if record:
                resets.append(t0)
            v = 0.0
        v += slope * remaining
        if record:
            times[k + 1], volts[k + 1] = (k + 1) * dt, v
    return _finish(count, v, p, rng, times, volts, resets)


def _finish(count, v, p, rng, times=None, volts=None, resets=()):
    noise = rng.normal(0.0, p.comparator_noise_sigma) if p.comparator_noise_sigma > 0 else 0.0
    bit = int(v + noise > p.v_ref)
    return PcspcTrace(count, float(v), bit, 1 - bit, times, volts, list(resets))


def readout_closed_form(i_mc: float, p: PcspcParams, rng: Optional[np.random.Generator] = None) -> PcspcTrace:
    if not math.isfinite(i_mc) or i_mc < 0:
        raise ValueError("i_mc must be finite and non-negative")
    count, v = _charge_state(np.asarray([i_mc]), p)
    return _finish(int(count[0]), float(v[0]), p, rng)


def _charge_state(i_mc: np.ndarray, p: PcspcParams):
    total = p.v_precharge + i_mc * p.volts_per_ua
    count = np.floor(total / p.v_th)
    return count.astype(np.int64), total - count * p.v_th


def decode_batch(i_mc, p: PcspcParams, rng: Optional[np.random.Generator] = None,
                 noise: Optional[np.ndarray] = None):
    """Vectorised readout of many row currents (uA).

    Returns ``(xor_out, comparator_bit, ramp_pulse_count, v_charge_at_sample)``.
    Comparator noise is drawn from ``rng`` unless explicit ``noise`` samples
    (in volts) are supplied.
    """
    i_mc = np.asarray(i_mc, dtype=float)
    if np.any(i_mc < 0) or not np.all(np.isfinite(i_mc)):
        raise ValueError("currents must be finite and non-negative")
    count, v = _charge_state(i_mc, p)
    if noise is None and p.comparator_noise_sigma > 0:
        if rng is None:
            raise ValueError("comparator noise requires an rng")
        noise = rng.normal(0.0, p.comparator_noise_sigma, i_mc.shape)
    sampled = v if noise is None else v + noise
    bit = (sampled > p.v_ref).astype(np.uint8)
    return 1 - bit, bit, count, v


def comparator_decision(v_charge: float, p: PcspcParams) -> int:
    return int(v_charge > p.v_ref)


def effective_resolution(levels: int) -> float:
    """Equivalent ADC resolution (bits) for distinguishing ``levels`` current levels."""
    if levels < 2:
        raise ValueError("need at least 2 levels")
    return math.log2(levels)
