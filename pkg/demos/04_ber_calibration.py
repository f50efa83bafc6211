"""
Calibrating comparator noise to a target bit error rate
=======================================================

Device spread alone leaves the residue voltages well clear of the
comparator reference, so the noise-free BER is zero. A Gaussian comparator
noise term is fitted so that the expected BER at 9 compute bits equals the
target, and a Monte Carlo run then checks the fit and how the error rate
grows with the number of bits summed per readout.
"""

from bmvm_cim.system import SystemConfig, calibrate_comparator_noise, estimate_ber

cfg = SystemConfig()
print("noise-free BER:", estimate_ber(cfg.with_noise(0.0), 9, 500_000).ber)

sigma = calibrate_comparator_noise(cfg, target_ber=1.6e-5, compute_bits=9)
print(f"fitted comparator noise sigma: {sigma * 1e3:.2f} mV")

noisy = cfg.with_noise(sigma)
for bits in (3, 5, 7, 9, 11):
    est = estimate_ber(noisy, bits, 2_000_000)
    lo, hi = est.ci95
    note = " (upper bound only)" if est.upper_bound_only else ""
    print(f"{bits:2d} bits: BER {est.ber:.2e}  95% CI [{lo:.1e}, {hi:.1e}]{note}")
