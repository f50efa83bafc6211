"""
Pulsed current-sensing parity readout
=====================================

The row current charges a small capacitor. Each time it reaches the
threshold it is discharged, so two unit currents make one ramp. What is
left at the end of the window tells odd from even.
"""

from bmvm_cim.pcspc import calibrate_params, effective_resolution, simulate_readout

p = calibrate_params()
print(f"C1 = {p.c1 * 1e12:.3f} pF, v_th = {p.v_th} V, v_ref = {p.v_ref} V, pedestal = {p.v_precharge} V")

for h in range(11):
    t = simulate_readout(h * p.i_unit, p)
    print(f"h = {h:2d}: ramps = {t.ramp_pulse_count}, V at sample = {t.v_charge_at_sample:.3f} V, "
          f"comparator = {t.comparator_bit}, xor_out = {t.xor_out}")

###############################################################################
# A coarse text rendering of the waveform for seven unit currents.

t = simulate_readout(7 * p.i_unit, p, record=True)
for k in range(0, len(t.times), 50):
    v = t.voltages[k]
    print(f"{t.times[k] * 1e9:6.2f} ns |" + "#" * int(v / p.v_th * 40))
print("local resets at (ns):", [round(r * 1e9, 2) for r in t.reset_times])

###############################################################################
# Telling eleven current levels apart with an ADC would take about
# log2(10) bits; the parity checker needs a single comparator.

print(f"equivalent ADC resolution for 10 levels: {effective_resolution(10):.2f} bits")
