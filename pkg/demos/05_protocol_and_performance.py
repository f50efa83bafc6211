"""
Error tolerance of an LPN-style authentication check, and headline numbers
==========================================================================

A synthetic commitment protocol computes its response on the array. Bit
flips are injected at several error rates, sharing the same random draws so
that the rates are directly comparable.
"""

from bmvm_cim.perfmodel import performance_summary
from bmvm_cim.protocol import protocol_sweep

for r in protocol_sweep([0.0, 1.6e-5, 1.6e-4, 1e-3, 1e-2], trials=50_000, seed=3):
    print(f"BER {r.ber:8.1e}: FAR {r.far:.4f}  FRR {r.frr_noisy:.4f}  relative FRR change {r.frr_delta:+.2%}")

###############################################################################
# Throughput and energy efficiency of the 512-row array at 40 MHz.

s = performance_summary()
print(f"\nthroughput        {s['throughput_gbps']:.2f} Gbps")
print(f"efficiency        {s['energy_efficiency_tops_per_w']:.3f} TOPS/W")
print(f"FPGA reference    {s['fpga_energy_efficiency_tops_per_w']:.3f} TOPS/W")
print(f"improvement       {s['improvement_vs_fpga']:.2f}x")
print(f"readout power     {s['readout_power_w'] * 1e3:.1f} mW ({s['readout_power_share']:.1%} of total)")
