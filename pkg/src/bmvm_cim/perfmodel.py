"""Throughput, power and energy-efficiency arithmetic.

Op counting: one operation per MAC bit (an AND plus its XOR contribution).
With that convention the same formula gives 1.51 TOPS/W for the 512x36
array at 40 MHz / 0.487 W and 0.93 TOPS/W for the FPGA reference at
51.2 Gbps / 1.975 W, so the convention is checked rather than assumed.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass


@dataclass(frozen=True)
class PerfParams:
    rows: int = 512
    input_width: int = 36
    frequency: float = 40e6
    total_power: float = 0.487
    pcspc_power_per_row: float = 0.097e-3
    ops_per_mac: int = 1

    def __post_init__(self):
        if self.rows < 0 or self.input_width <= 0 or self.frequency <= 0 or self.total_power <= 0:
            raise ValueError("performance parameters must be positive")
        if self.pcspc_power_per_row < 0 or self.ops_per_mac <= 0:
            raise ValueError("pcspc_power_per_row must be >= 0 and ops_per_mac > 0")


@dataclass(frozen=True)
class FpgaReference:
    throughput: float = 51.2e9   # output bits / s
    input_width: int = 36
    power: float = 1.975


def throughput_bits_per_sec(p: PerfParams) -> float:
    """One output bit per row per cycle."""
    return p.rows * p.frequency


def ops_per_sec(p: PerfParams) -> float:
    return p.rows * p.input_width * p.ops_per_mac * p.frequency


def energy_efficiency_tops_per_watt(p: PerfParams) -> float:
    return ops_per_sec(p) / p.total_power / 1e12


def fpga_efficiency_tops_per_watt(ref: FpgaReference = FpgaReference(), ops_per_mac: int = 1) -> float:
    return ref.throughput * ref.input_width * ops_per_mac / ref.power / 1e12


def readout_power_budget(rows: int, pcspc_power_per_row: float) -> float:
    """Total PCSPC power (W) for ``rows`` parity checkers."""
    if rows < 0 or pcspc_power_per_row < 0:
        raise ValueError("rows and power must be non-negative")
    return rows * pcspc_power_per_row


def performance_summary(p: PerfParams = PerfParams(), ref: FpgaReference = FpgaReference()) -> dict:
    eff = energy_efficiency_tops_per_watt(p)
    fpga = fpga_efficiency_tops_per_watt(ref, p.ops_per_mac)
    readout = readout_power_budget(p.rows, p.pcspc_power_per_row)
    return {
        "params": asdict(p),
        "throughput_gbps": throughput_bits_per_sec(p) / 1e9,
        "energy_efficiency_tops_per_w": eff,
        "fpga_throughput_gbps": ref.throughput / 1e9,
        "fpga_power_w": ref.power,
        "fpga_energy_efficiency_tops_per_w": fpga,
        "improvement_vs_fpga": eff / fpga,
        "readout_power_w": readout,
        "readout_power_share": readout / p.total_power,
    }
