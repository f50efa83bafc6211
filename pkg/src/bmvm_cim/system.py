"""End-to-end BMVM pipeline: tiling across sub-arrays, per-row parity readout,
XOR-tree merge, and Monte Carlo BER estimation.

Randomness follows one rule: every independent unit of work (a Monte Carlo
chunk, a margin scenario, a protocol batch) draws from a generator derived
from ``(master_seed, label, index)``. Results therefore do not depend on how
work is split across processes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from scipy import optimize, stats

from .array import DeployedSubArray, SubArrayConfig, deploy, row_currents
from .bitlinalg import BitMatrix, BitVector, DimensionError, bmvm_exact
from .cell import CellParams, Variant, unit_currents
from .device import ResistanceModel, apply_read_noise, sample_resistances, truncated_normal
from .pcspc import PcspcParams, calibrate_params, decode_batch, simulate_readout
from .streams import parallel_map, rng_for

BER_CHUNK = 1 << 18
TARGET_BER = 1.6e-5


@dataclass(frozen=True)
class SystemConfig:
    subarray_count: int = 4
    subarray: SubArrayConfig = field(default_factory=SubArrayConfig)
    device: ResistanceModel = field(default_factory=ResistanceModel)
    cell: CellParams = field(default_factory=CellParams)
    pcspc: PcspcParams = field(default_factory=calibrate_params)
    variant: Variant = Variant.COMPENSATED
    master_seed: int = 0
    weight_density: float = 0.5
    input_density: float = 0.5

    def __post_init__(self):
        if self.subarray_count < 1:
            raise ValueError("subarray_count must be positive")
        if not math.isclose(self.cell.i_unit, self.pcspc.i_unit):
            raise ValueError("cell and PCSPC disagree on the unit current")
        for d in (self.weight_density, self.input_density):
            if not 0 <= d <= 1:
                raise ValueError("densities must be in [0, 1]")

    @property
    def total_width(self) -> int:
        return self.subarray_count * self.subarray.compute_cols

    @property
    def rows(self) -> int:
        return self.subarray.rows

    def ideal(self) -> "SystemConfig":
        """Zero device variance and no faults; comparator noise is kept."""
        return replace(self, device=self.device.ideal())

    def noiseless(self) -> "SystemConfig":
        return replace(self.ideal(), pcspc=replace(self.pcspc, comparator_noise_sigma=0.0))

    def with_noise(self, sigma: float) -> "SystemConfig":
        return replace(self, pcspc=replace(self.pcspc, comparator_noise_sigma=float(sigma)))


# -- tiling and merge -----------------------------------------------------

def slice_bounds(cfg: SystemConfig, s: int) -> tuple[int, int]:
    w = cfg.subarray.compute_cols
    return s * w, (s + 1) * w


def locate_column(col: int, cfg: SystemConfig) -> tuple[int, int]:
    """(sub-array, local column) holding column ``col`` of A."""
    if not 0 <= col < cfg.total_width:
        raise IndexError(col)
    return divmod(col, cfg.subarray.compute_cols)


def map_task(a: BitMatrix, cfg: SystemConfig, rng: np.random.Generator) -> list[DeployedSubArray]:
    if a.shape != (cfg.rows, cfg.total_width):
        raise DimensionError(f"A is {a.shape}, configuration supports {(cfg.rows, cfg.total_width)}")
    bits = a.to_array()
    out = []
    for s in range(cfg.subarray_count):
        lo, hi = slice_bounds(cfg, s)
        out.append(deploy(BitMatrix(bits[:, lo:hi]), cfg.device, rng, cfg.subarray))
    return out


def xor_tree(bits: Sequence[int], count: Optional[int] = None) -> int:
    bits = list(bits)
    if count is not None and len(bits) != count:
        raise ValueError(f"xor tree expects {count} inputs, got {len(bits)}")
    acc = 0
    for b in bits:
        if b not in (0, 1):
            raise ValueError("xor tree inputs must be bits")
        acc ^= b
    return acc


@dataclass
class BmvmDiagnostics:
    currents: Optional[np.ndarray] = None      # (rows, subarray_count) uA
    partial_bits: Optional[np.ndarray] = None  # (rows, subarray_count) y'_i
    ramp_counts: Optional[np.ndarray] = None
    v_sample: Optional[np.ndarray] = None
    traces: dict = field(default_factory=dict)  # (row, subarray) -> PcspcTrace


def evaluate(deployed: Sequence[DeployedSubArray], x: BitVector, cfg: SystemConfig,
             rng: Optional[np.random.Generator] = None, diagnostics: bool = False,
             trace_rows: Sequence[int] = ()) -> tuple[BitVector, BmvmDiagnostics]:
    """Run one input vector through already-deployed sub-arrays."""
    if x.length != cfg.total_width:
        raise DimensionError(f"x has {x.length} bits, configuration expects {cfg.total_width}")
    if len(deployed) != cfg.subarray_count:
        raise ValueError("wrong number of deployed sub-arrays")
    xb = x.to_array()
    cur = np.empty((cfg.rows, cfg.subarray_count))
    for s, sub in enumerate(deployed):
        lo, hi = slice_bounds(cfg, s)
        cur[:, s] = row_currents(sub, BitVector(xb[lo:hi]), cfg.cell, cfg.variant, cfg.device, rng)
    y_part, _, counts, v = decode_batch(cur, cfg.pcspc, rng)
    y = np.bitwise_xor.reduce(y_part, axis=1)
    diag = BmvmDiagnostics()
    if diagnostics:
        diag.currents, diag.partial_bits, diag.ramp_counts, diag.v_sample = cur, y_part, counts, v
    for r in trace_rows:
        for s in range(cfg.subarray_count):
            diag.traces[(r, s)] = simulate_readout(float(cur[r, s]), cfg.pcspc, rng, record=True)
    return BitVector(y), diag


def run_bmvm(a: BitMatrix, x: BitVector, cfg: SystemConfig, rng: np.random.Generator,
             diagnostics: bool = False, trace_rows: Sequence[int] = ()) -> tuple[BitVector, BmvmDiagnostics]:
    """Deploy A and compute y = A x through the analog pipeline."""
    deployed = map_task(a, cfg, rng)
    return evaluate(deployed, x, cfg, rng, diagnostics, trace_rows)


def verify_against_oracle(a: BitMatrix, x: BitVector, cfg: SystemConfig,
                          rng: np.random.Generator) -> int:
    """Number of output bits where the pipeline disagrees with the exact result."""
    y, _ = run_bmvm(a, x, cfg, rng)
    return (y ^ bmvm_exact(a, x)).popcount()


# -- Monte Carlo BER ------------------------------------------------------

@dataclass
class BerEstimate:
    errors: int
    trials: int
    compute_bits: int = 9
    comparator_noise_sigma: float = 0.0

    @property
    def ber(self) -> float:
        return self.errors / self.trials if self.trials else 0.0

    @property
    def ci95(self) -> tuple[float, float]:
        """Clopper-Pearson interval."""
        k, n = self.errors, self.trials
        lo = 0.0 if k == 0 else float(stats.beta.ppf(0.025, k, n - k + 1))
        hi = 1.0 if k == n else float(stats.beta.ppf(0.975, k + 1, n - k))
        return lo, hi

    @property
    def upper_bound_only(self) -> bool:
        """Fewer than 10 errors: treat the point estimate as a bound."""
        return self.errors < 10

    def as_dict(self) -> dict:
        lo, hi = self.ci95
        return dict(compute_bits=self.compute_bits, errors=self.errors, trials=self.trials,
                    ber=self.ber, ci95_low=lo, ci95_high=hi, upper_bound_only=self.upper_bound_only,
                    comparator_noise_sigma=self.comparator_noise_sigma)


def _row_trials(cfg: SystemConfig, compute_bits: int, n: int, rng: np.random.Generator):
    """Random single-row evaluations: returns (I_MC in uA, true parity)."""
    w = rng.random((n, compute_bits)) < cfg.weight_density
    x = rng.random((n, compute_bits)) < cfg.input_density
    r = sample_resistances(cfg.device, w, rng)
    r = apply_read_noise(r, cfg.device, rng)
    i_mc = unit_currents(x, w, r, cfg.cell, cfg.variant).sum(axis=1)
    d = cfg.device
    r_bias = truncated_normal(d.lrs_mean, d.lrs_sigma, d.lrs_floor, n, rng)
    i_mc += unit_currents(True, True, apply_read_noise(r_bias, d, rng), cfg.cell, cfg.variant)
    par = (np.count_nonzero(w & x, axis=1) & 1).astype(np.uint8)
    return i_mc, par


def _ber_chunk(args) -> int:
    cfg, compute_bits, chunk, n = args
    rng = rng_for(cfg.master_seed, "ber", compute_bits, chunk)
    i_mc, par = _row_trials(cfg, compute_bits, n, rng)
    y, *_ = decode_batch(i_mc, cfg.pcspc, rng)
    return int(np.count_nonzero(y != par))


def _chunks(trials: int, size: int = BER_CHUNK):
    full, rem = divmod(trials, size)
    sizes = [size] * full + ([rem] if rem else [])
    return list(enumerate(sizes))


def estimate_ber(cfg: SystemConfig, compute_bits: int = 9, trials: int = 1_000_000,
                 jobs: int = 1) -> BerEstimate:
    """Fraction of single-row sub-array outputs that disagree with the exact parity.

    Each trial draws fresh weights, inputs, device resistances and comparator
    noise. Faulty columns are assumed to have been steered out by redundancy.
    """
    if compute_bits < 1 or trials < 1:
        raise ValueError("compute_bits and trials must be positive")
    work = [(cfg, compute_bits, c, n) for c, n in _chunks(trials)]
    errors = sum(parallel_map(_ber_chunk, work, jobs))
    return BerEstimate(errors, trials, compute_bits, cfg.pcspc.comparator_noise_sigma)


def expected_ber(cfg: SystemConfig, sigma: float, compute_bits: int = 9, samples: int = 2_000_000,
                 residues=None) -> float:
    """BER averaged analytically over Gaussian comparator noise of std ``sigma``.

    Device randomness is sampled; the comparator flip probability of each
    sampled residue is computed exactly.
    """
    v, par = residues if residues is not None else noiseless_residues(cfg, compute_bits, samples)
    vref = cfg.pcspc.v_ref
    # output is NOT(comparator bit), so a trial is wrong when the comparator bit equals the parity
    if sigma <= 0:
        return float(np.mean((v > vref).astype(np.uint8) == par))
    p_bit1 = stats.norm.sf((vref - v) / sigma)
    p_err = np.where(par == 1, p_bit1, 1 - p_bit1)
    return float(p_err.mean())


def noiseless_residues(cfg: SystemConfig, compute_bits: int = 9, samples: int = 2_000_000):
    rng = rng_for(cfg.master_seed, "calibration", compute_bits)
    i_mc, par = _row_trials(cfg, compute_bits, samples, rng)
    quiet = replace(cfg.pcspc, comparator_noise_sigma=0.0)
    _, _, _, v = decode_batch(i_mc, quiet)
    return v, par


def calibrate_comparator_noise(cfg: SystemConfig, target_ber: float = TARGET_BER, compute_bits: int = 9,
                               samples: int = 2_000_000) -> float:
    """Comparator noise sigma (V) at which the expected BER equals ``target_ber``."""
    res = noiseless_residues(cfg, compute_bits, samples)
    floor = expected_ber(cfg, 0.0, residues=res)
    if floor >= target_ber:
        raise ValueError(f"device variability alone gives BER {floor:.3g} >= target {target_ber:.3g}")
    hi = cfg.pcspc.v_th
    f = lambda s: math.log(max(expected_ber(cfg, s, residues=res), 1e-300)) - math.log(target_ber)
    lo = 1e-4
    return float(optimize.brentq(f, lo, hi, xtol=1e-9, rtol=1e-10))


def ber_sweep(cfg: SystemConfig, compute_bits: Sequence[int] = (3, 5, 7, 9, 11),
              trials: int = 1_000_000, jobs: int = 1) -> list[BerEstimate]:
    return [estimate_ber(cfg, b, trials, jobs) for b in compute_bits]


def exhaustive_row_decode(weights: BitVector, cfg: SystemConfig, rng: np.random.Generator,
                          event_sim: bool = True) -> int:
    """Drive one programmed row with every possible input slice.

    Returns the number of inputs whose decoded bit differs from the exact
    parity of ``weights AND x``. With ``event_sim`` each readout goes
    through the time-stepped PCSPC model rather than the closed form.
    """
    n = cfg.subarray.compute_cols
    if weights.length != n:
        raise DimensionError(f"row has {weights.length} weights, sub-array has {n} compute columns")
    sub_cfg = replace(cfg.subarray, rows=1)
    sub = deploy(BitMatrix(weights.to_array()[np.newaxis, :]), cfg.device, rng, sub_cfg)
    xs = ((np.arange(1 << n)[:, None] >> np.arange(n)) & 1).astype(np.uint8)
    cur = np.array([row_currents(sub, BitVector(x), cfg.cell, cfg.variant, cfg.device, rng)[0] for x in xs])
    if event_sim:
        y = np.array([simulate_readout(float(i), cfg.pcspc, rng).xor_out for i in cur])
    else:
        y, *_ = decode_batch(cur, cfg.pcspc, rng)
    truth = (xs & weights.to_array()).sum(axis=1) & 1
    return int(np.count_nonzero(y != truth))
