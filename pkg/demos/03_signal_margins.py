"""
Signal margins with and without leakage compensation
====================================================

For every count m of activated LRS cells (MACV) and every number of
activated HRS cells leaking current, the row current is sampled from the
device model. Adjacent MACV levels must not overlap for the parity readout
to be reliable.
"""

from bmvm_cim.array import margin_analysis
from bmvm_cim.cell import CellParams, Variant, effective_r_ratio
from bmvm_cim.device import ResistanceModel
from bmvm_cim.streams import rng_for

model, p = ResistanceModel(), CellParams()

for variant in Variant:
    r = effective_r_ratio(variant, p, model, 100_000, rng_for(0, "demo-ratio", variant == Variant.BASELINE))
    print(f"{variant.value:12s} effective R-ratio {r:6.2f}")

for variant in Variant:
    rep = margin_analysis(model, p, 20_000, seed=1, variant=variant)
    print(f"\n{variant.value}: worst gap {rep.worst_gap:+.3f} uA, non-overlapping = {rep.non_overlapping}")
    for m, (lo, hi) in rep.envelopes.items():
        gap = rep.gaps.get(m)
        tail = f"  gap {gap:+.3f}" if gap is not None else ""
        print(f"  MACV {m:2d}: [{lo:7.3f}, {hi:7.3f}] uA{tail}")
