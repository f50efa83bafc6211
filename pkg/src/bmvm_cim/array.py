"""Sub-array organisation: deployment with redundant columns, row current
accumulation and MAC signal-margin analysis."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Optional

import numpy as np

from .bitlinalg import BitMatrix, BitVector, DimensionError
from .cell import CellParams, Variant, unit_currents
from .device import ResistanceModel, apply_read_noise, sample_faults, sample_resistances
from .streams import parallel_map, rng_for


class DeploymentError(RuntimeError):
    """Too many faulty columns for the available redundancy."""


@dataclass(frozen=True)
class SubArrayConfig:
    rows: int = 512
    compute_cols: int = 9
    redundant_cols: int = 3

    def __post_init__(self):
        if self.rows < 1 or self.compute_cols < 1:
            raise ValueError("rows and compute_cols must be positive")
        if self.redundant_cols < 1:
            raise ValueError("at least one redundant column is needed for the constant-bias bit")

    @property
    def total_cols(self) -> int:
        return self.compute_cols + self.redundant_cols

    @property
    def constant_bias_col(self) -> int:
        return self.total_cols - 1

    @property
    def spare_slots(self) -> int:
        """Number of inactive redundant columns."""
        return self.redundant_cols - 1


@dataclass(frozen=True)
class DeployedSubArray:
    config: SubArrayConfig
    weights: np.ndarray        # (rows, total_cols) bool, True = LRS
    resistances: np.ndarray    # (rows, total_cols) ohms
    faults: np.ndarray         # (rows, total_cols) bool
    active_cols: tuple         # physical column of each logical compute column
    inactive_cols: frozenset

    @property
    def constant_bias_col(self) -> int:
        return self.config.constant_bias_col

    def logical_weights(self) -> np.ndarray:
        return self.weights[:, list(self.active_cols)]


def select_columns(faulty_cols, config: SubArrayConfig) -> tuple[tuple, frozenset]:
    """Lowest-indexed fault-free columns become active; the rest are inactive."""
    candidates = [c for c in range(config.total_cols) if c != config.constant_bias_col]
    faulty = {c for c in faulty_cols if c != config.constant_bias_col}
    n_bad = len(faulty)
    if n_bad > config.spare_slots:
        raise DeploymentError(
            f"{n_bad} faulty columns {sorted(faulty)} but only {config.spare_slots} inactive redundant slots")
    healthy = [c for c in candidates if c not in faulty]
    active = tuple(healthy[:config.compute_cols])
    inactive = frozenset(c for c in candidates if c not in active)
    return active, inactive


def deploy(a_slice: BitMatrix, model: ResistanceModel, rng: np.random.Generator,
           config: Optional[SubArrayConfig] = None, faults: Optional[np.ndarray] = None) -> DeployedSubArray:
    """Program a rows x compute_cols slice of A into one sub-array.

    Faults are sampled per device unless an explicit (rows, total_cols)
    fault mask is given. Any column containing a faulty device is steered
    into the inactive redundancy.
    """
    config = config or SubArrayConfig()
    if a_slice.shape != (config.rows, config.compute_cols):
        raise DimensionError(f"slice is {a_slice.shape}, sub-array expects {(config.rows, config.compute_cols)}")
    shape = (config.rows, config.total_cols)
    if faults is None:
        faults = sample_faults(model, shape, rng)
    faults = np.asarray(faults, dtype=bool)
    if faults.shape != shape:
        raise DimensionError(f"fault mask must be {shape}")
    faulty_cols = np.flatnonzero(faults.any(axis=0)).tolist()
    active, inactive = select_columns(faulty_cols, config)

    weights = np.zeros(shape, dtype=bool)
    weights[:, list(active)] = a_slice.to_array().astype(bool)
    weights[:, config.constant_bias_col] = True
    resistances = sample_resistances(model, weights, rng)
    for arr in (weights, resistances, faults):
        arr.flags.writeable = False
    return DeployedSubArray(config, weights, resistances, faults, active, inactive)


def _drive(sub: DeployedSubArray, x_bits: np.ndarray) -> np.ndarray:
    """Physical input pattern: data on active columns, bias column always on."""
    drive = np.zeros(x_bits.shape[:-1] + (sub.config.total_cols,), dtype=bool)
    drive[..., list(sub.active_cols)] = x_bits.astype(bool)
    drive[..., sub.constant_bias_col] = True
    return drive


def row_currents(sub: DeployedSubArray, x_slice: BitVector, p: CellParams,
                 variant: Variant = Variant.COMPENSATED,
                 model: Optional[ResistanceModel] = None,
                 rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """Accumulated current I_MC (uA) of every row for one input slice.

    Per-read resistance jitter is applied when ``model.read_noise`` is set
    and an ``rng`` is supplied.
    """
    if x_slice.length != sub.config.compute_cols:
        raise DimensionError(f"input slice has {x_slice.length} bits, expected {sub.config.compute_cols}")
    drive = _drive(sub, x_slice.to_array())
    r = sub.resistances if model is None else apply_read_noise(sub.resistances, model, rng)
    cur = unit_currents(drive[np.newaxis, :], sub.weights, r, p, variant, sub.faults)
    return cur.sum(axis=1)


def row_current(sub: DeployedSubArray, row: int, x_slice: BitVector, p: CellParams,
                variant: Variant = Variant.COMPENSATED) -> float:
    if not 0 <= row < sub.config.rows:
        raise IndexError(row)
    if x_slice.length != sub.config.compute_cols:
        raise DimensionError(f"input slice has {x_slice.length} bits, expected {sub.config.compute_cols}")
    drive = _drive(sub, x_slice.to_array())
    cur = unit_currents(drive, sub.weights[row], sub.resistances[row], p, variant, sub.faults[row])
    return float(cur.sum())


# -- margin analysis ------------------------------------------------------

@dataclass
class ScenarioStats:
    macv: int
    leaking: int
    weight: float
    min: float
    max: float
    mean: float
    std: float


@dataclass
class MarginReport:
    cells: int
    variant: str
    trials_per_scenario: int
    scenarios: list = field(default_factory=list)
    envelopes: dict = field(default_factory=dict)   # macv -> (min, max)
    gaps: dict = field(default_factory=dict)        # macv m -> min(m+1) - max(m)

    @property
    def worst_gap(self) -> float:
        return min(self.gaps.values())

    @property
    def non_overlapping(self) -> bool:
        return all(g > 0 for g in self.gaps.values())

    def scenario_count(self, macv: int) -> int:
        return sum(1 for s in self.scenarios if s.macv == macv)


def scenario_probability(macv: int, leaking: int, cells: int, input_density: float = 0.5,
                         weight_density: float = 0.5) -> float:
    """P(leaking | macv) for i.i.d. Bernoulli inputs and weights.

    A cell that does not contribute a unit current is an activated HRS cell
    with probability p_x(1-p_w)/(1 - p_x p_w).
    """
    rest = cells - macv
    denom = 1 - input_density * weight_density
    q = input_density * (1 - weight_density) / denom if denom > 0 else 0.0
    return comb(rest, leaking) * q ** leaking * (1 - q) ** (rest - leaking)


def _scenario(args):
    model, p, n, variant, m, k, seed = args
    rng = rng_for(seed, "margins", m, k)
    total = np.zeros(n)
    if m:
        r = sample_resistances(model, np.ones((n, m), bool), rng)
        total += unit_currents(1, True, r, p, variant).sum(axis=1)
    if k:
        r = sample_resistances(model, np.zeros((n, k), bool), rng)
        total += unit_currents(1, False, r, p, variant).sum(axis=1)
    return float(total.min()), float(total.max()), float(total.mean()), float(total.std())


def margin_analysis(model: ResistanceModel, p: CellParams, trials_per_scenario: int,
                    seed: int = 0, cells: int = 10, variant: Variant = Variant.COMPENSATED,
                    input_density: float = 0.5, weight_density: float = 0.5,
                    jobs: int = 1, enforce_min_trials: bool = True) -> MarginReport:
    """Monte Carlo I_MC envelopes for every (MACV, leaking-cell count) scenario.

    With ``cells`` AND units on a row, MACV m leaves ``cells - m`` cells that
    are either gated off or activated-but-HRS, giving ``cells - m + 1``
    scenarios. Each scenario draws from its own seed stream.
    """
    if enforce_min_trials and trials_per_scenario < 10_000:
        raise ValueError("margin_analysis needs at least 1e4 trials per scenario")
    variant = Variant(variant)
    keys = [(m, k) for m in range(cells + 1) for k in range(cells - m + 1)]
    stats = parallel_map(_scenario, [(model, p, trials_per_scenario, variant, m, k, seed) for m, k in keys], jobs)
    report = MarginReport(cells, variant.value, trials_per_scenario)
    for (m, k), (lo, hi, mean, std) in zip(keys, stats):
        w = scenario_probability(m, k, cells, input_density, weight_density)
        report.scenarios.append(ScenarioStats(m, k, w, lo, hi, mean, std))
    for m in range(cells + 1):
        ss = [s for s in report.scenarios if s.macv == m]
        report.envelopes[m] = (min(s.min for s in ss), max(s.max for s in ss))
    for m in range(cells):
        report.gaps[m] = report.envelopes[m + 1][0] - report.envelopes[m][1]
    return report
