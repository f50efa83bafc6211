"""Behavioral simulator of an RRAM compute-in-memory array for binary
matrix-vector multiplication over GF(2).

Modules, bottom-up: ``bitlinalg`` (exact reference), ``device``
(resistance statistics), ``cell`` (AND-unit currents), ``array``
(sub-arrays, redundancy, margins), ``pcspc`` (parity readout), ``system``
(tiling, XOR tree, BER), ``protocol`` (synthetic authentication impact),
``perfmodel`` (throughput and efficiency), ``cli``.
"""

from .array import (DeployedSubArray, DeploymentError, MarginReport, SubArrayConfig, deploy,
                    margin_analysis, row_current, row_currents)
from .bitlinalg import (BitFormatError, BitMatrix, BitVector, DimensionError, bmvm_exact, load_matrix,
                        load_vector, parity, store_matrix, store_vector)
from .cell import CellParams, Variant, effective_r_ratio, unit_current, unit_currents
from .device import DeviceSample, Fault, ResistanceModel, State, sample_fault, sample_resistance
from .pcspc import (PcspcParams, PcspcTrace, calibrate_params, decode_batch, effective_resolution,
                    simulate_readout)
from .perfmodel import (PerfParams, energy_efficiency_tops_per_watt, readout_power_budget,
                        throughput_bits_per_sec)
from .protocol import SyntheticProtocolParams, protocol_impact, protocol_sweep
from .system import (BerEstimate, SystemConfig, calibrate_comparator_noise, estimate_ber, map_task,
                     run_bmvm, xor_tree)

__version__ = "0.1.0"
