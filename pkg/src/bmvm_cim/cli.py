"""Command-line front end.

    bmvm-cim {verify,margins,ber-sweep,perf,protocol,trace} [--config FILE]
             [--seed N] [--trials N] [--out PATH] [--format json|csv]
             [--trace-row N] [--jobs N]

Command-line flags override the matching config keys (``seed``,
``experiments.<name>.trials``, ``out``, ``format``,
``experiments.trace.row``, ``jobs``).

Exit codes: 0 success, 1 verification failure, 2 config error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import asdict

from . import config as config_mod
from .array import DeploymentError, margin_analysis
from .bitlinalg import BitMatrix, BitVector, bmvm_exact
from .cell import Variant
from .config import ConfigError, EXPERIMENTS
from .perfmodel import performance_summary
from .protocol import protocol_sweep
from .report import make_report, to_csv, to_json
from .streams import parallel_map, rng_for
from .system import (ber_sweep, calibrate_comparator_noise, exhaustive_row_decode,
                     run_bmvm, slice_bounds)

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3

log = logging.getLogger("bmvm_cim")

# inclusive bounds on trial counts per experiment
TRIAL_BOUNDS = {
    "verify": (1, 10_000),
    "margins": (10_000, 10_000_000),
    "ber-sweep": (1_000, 1_000_000_000),
    "protocol": (1_000, 10_000_000),
}


def _exp_key(name: str) -> str:
    return name.replace("-", "_")


def _verify_instance(args):
    cfg, i = args
    rng = rng_for(cfg.master_seed, "verify", i)
    a = BitMatrix.random(cfg.rows, cfg.total_width, rng, cfg.weight_density)
    x = BitVector.random(cfg.total_width, rng, cfg.input_density)
    y, _ = run_bmvm(a, x, cfg, rng)
    return cfg.rows - (y ^ bmvm_exact(a, x)).popcount()


def cmd_verify(raw: dict, jobs: int):
    cfg = config_mod.build_system(raw).ideal()
    e = raw["experiments"]["verify"]
    n = e["trials"]
    matched = parallel_map(_verify_instance, [(cfg, i) for i in range(n)], jobs)
    rng = rng_for(cfg.master_seed, "verify-exhaustive")
    w = BitVector.random(cfg.subarray.compute_cols, rng, cfg.weight_density)
    exhaustive_bad = exhaustive_row_decode(w, cfg, rng)
    total_inputs = 1 << cfg.subarray.compute_cols
    passed = all(m == cfg.rows for m in matched) and exhaustive_bad == 0
    results = {
        "instances": [{"instance": i, "rows": cfg.rows, "matched": m} for i, m in enumerate(matched)],
        "rows_matched": int(sum(matched)),
        "rows_total": cfg.rows * n,
        "exhaustive_row": {"weights": str(w), "inputs": total_inputs, "mismatches": exhaustive_bad},
    }
    lines = [f"instance {i}: {m}/{cfg.rows} rows match oracle" for i, m in enumerate(matched)]
    lines.append(f"exhaustive row decode: {total_inputs - exhaustive_bad}/{total_inputs} inputs correct")
    lines.append("PASS" if passed else "FAIL")
    table = (["instance", "rows", "matched", "mismatched"],
             [(i, cfg.rows, m, cfg.rows - m) for i, m in enumerate(matched)])
    return results, table, passed, lines


def cmd_margins(raw: dict, jobs: int):
    cfg = config_mod.build_system(raw)
    e = raw["experiments"]["margins"]
    cells = e["cells"] if e["cells"] is not None else cfg.subarray.compute_cols + 1
    rep = margin_analysis(cfg.device, cfg.cell, e["trials"], cfg.master_seed, cells, Variant(e["variant"]),
                          cfg.input_density, cfg.weight_density, jobs)
    results = {
        "variant": rep.variant,
        "cells": rep.cells,
        "trials_per_scenario": rep.trials_per_scenario,
        "scenarios": [asdict(s) for s in rep.scenarios],
        "envelopes": {str(m): list(v) for m, v in rep.envelopes.items()},
        "gaps": {str(m): g for m, g in rep.gaps.items()},
        "worst_gap": rep.worst_gap,
        "non_overlapping": rep.non_overlapping,
    }
    rows = []
    for m, (lo, hi) in rep.envelopes.items():
        rows.append((m, rep.scenario_count(m), lo, hi, rep.gaps.get(m, ""), rep.non_overlapping))
    table = (["macv", "scenarios", "envelope_min_ua", "envelope_max_ua", "gap_to_next_ua", "non_overlapping"], rows)
    lines = [f"MACV {m:2d}: [{lo:8.4f}, {hi:8.4f}] uA" for m, (lo, hi) in rep.envelopes.items()]
    lines.append(f"worst adjacent gap {rep.worst_gap:.4f} uA, non-overlapping = {rep.non_overlapping}")
    return results, table, None, lines


def cmd_ber_sweep(raw: dict, jobs: int):
    cfg = config_mod.build_system(raw)
    e = raw["experiments"]["ber_sweep"]
    calib = None
    if e["calibrate"]:
        sigma = calibrate_comparator_noise(cfg, e["target_ber"], e["calibration_bits"], e["calibration_samples"])
        cfg = cfg.with_noise(sigma)
        calib = {"target_ber": e["target_ber"], "compute_bits": e["calibration_bits"],
                 "comparator_noise_sigma": sigma}
    estimates = ber_sweep(cfg, e["compute_bits"], e["trials"], jobs)
    bers = [est.ber for est in estimates]
    monotone = all(b1 <= b2 for b1, b2 in zip(bers, bers[1:]))
    results = {"calibration": calib, "estimates": [est.as_dict() for est in estimates], "monotone": monotone}
    header = ["compute_bits", "errors", "trials", "ber", "ci95_low", "ci95_high", "upper_bound_only",
              "comparator_noise_sigma"]
    rows = [tuple(est.as_dict()[k] for k in header) for est in estimates]
    lines = []
    if calib:
        lines.append(f"calibrated comparator noise sigma = {calib['comparator_noise_sigma'] * 1e3:.3f} mV")
    lines += [f"{est.compute_bits:2d} bits: BER {est.ber:.3e} ({est.errors}/{est.trials})" for est in estimates]
    lines.append(f"monotone in compute bits: {monotone}")
    return results, (header, rows), None, lines


def cmd_perf(raw: dict, jobs: int):
    p, ref = config_mod.build_perf(raw)
    s = performance_summary(p, ref)
    rows = [(k, v) for k, v in s.items() if k != "params"]
    lines = [f"throughput {s['throughput_gbps']:.2f} Gbps",
             f"energy efficiency {s['energy_efficiency_tops_per_w']:.3f} TOPS/W",
             f"FPGA reference {s['fpga_energy_efficiency_tops_per_w']:.3f} TOPS/W",
             f"improvement {s['improvement_vs_fpga']:.3f}x",
             f"readout power {s['readout_power_w'] * 1e3:.2f} mW ({s['readout_power_share']:.1%} of total)"]
    return s, (["metric", "value"], rows), None, lines


def cmd_protocol(raw: dict, jobs: int):
    e = raw["experiments"]["protocol"]
    params = config_mod.build_protocol(raw)
    res = protocol_sweep(e["bers"], params, e["trials"], raw["seed"], jobs=jobs)
    deltas = [r.frr_delta for r in res]
    monotone = all(d1 <= d2 for d1, d2 in zip(deltas, deltas[1:]))
    results = {"params": asdict(params), "sweep": [r.as_dict() for r in res], "frr_delta_monotone": monotone,
               "far_max": max(r.far for r in res)}
    header = ["ber", "far_clean", "frr_clean", "far", "frr", "frr_delta"]
    rows = [(r.ber, r.far_clean, r.frr_clean, r.far_noisy, r.frr_noisy, r.frr_delta) for r in res]
    lines = [f"BER {r.ber:.2e}: FAR {r.far:.5f}  FRR {r.frr_noisy:.5f}  (delta {r.frr_delta:+.4%})" for r in res]
    return results, (header, rows), None, lines


def cmd_trace(raw: dict, jobs: int):
    cfg = config_mod.build_system(raw)
    row = raw["experiments"]["trace"]["row"]
    if not 0 <= row < cfg.rows:
        raise ConfigError(f"trace row {row} outside 0..{cfg.rows - 1}")
    rng = rng_for(cfg.master_seed, "trace")
    a = BitMatrix.random(cfg.rows, cfg.total_width, rng, cfg.weight_density)
    x = BitVector.random(cfg.total_width, rng, cfg.input_density)
    y, diag = run_bmvm(a, x, cfg, rng, trace_rows=[row])
    exact = bmvm_exact(a, x)
    per_sub = []
    rows = []
    xb, ab = x.to_array(), a.to_array()[row]
    for s in range(cfg.subarray_count):
        tr = diag.traces[(row, s)]
        lo, hi = slice_bounds(cfg, s)
        per_sub.append({
            "subarray": s,
            "hamming_weight": int((xb[lo:hi] & ab[lo:hi]).sum()) + 1,
            "ramp_pulse_count": tr.ramp_pulse_count,
            "v_charge_at_sample": tr.v_charge_at_sample,
            "comparator_bit": tr.comparator_bit,
            "xor_out": tr.xor_out,
        })
        rows += [(s,) + r for r in tr.waveform_rows()]
    results = {"row": row, "subarrays": per_sub, "y_sim": y[row], "y_exact": exact[row]}
    lines = [f"sub-array {d['subarray']}: weight {d['hamming_weight']}, {d['ramp_pulse_count']} ramps, "
             f"V = {d['v_charge_at_sample']:.4f} V, y' = {d['xor_out']}" for d in per_sub]
    lines.append(f"row {row}: y = {y[row]} (exact {exact[row]})")
    return results, (["subarray", "time_s", "v_charge_v", "event"], rows), None, lines


COMMANDS = {
    "verify": cmd_verify,
    "margins": cmd_margins,
    "ber-sweep": cmd_ber_sweep,
    "perf": cmd_perf,
    "protocol": cmd_protocol,
    "trace": cmd_trace,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bmvm-cim", description=__doc__.split("\n\n")[0])
    ap.add_argument("experiment", choices=EXPERIMENTS)
    ap.add_argument("--config", help="YAML configuration file")
    ap.add_argument("--seed", type=int, help="master seed")
    ap.add_argument("--trials", type=int, help="trial count for the chosen experiment")
    ap.add_argument("--out", help="output file (default: stdout)")
    ap.add_argument("--format", choices=("json", "csv"))
    ap.add_argument("--trace-row", type=int, help="row to trace (trace experiment)")
    ap.add_argument("--jobs", type=int, help="worker processes")
    ap.add_argument("-q", "--quiet", action="store_true", help="suppress the human-readable summary")
    return ap


def resolve_run(args) -> dict:
    """Merge config file and command-line overrides."""
    raw = config_mod.load_config(args.config)
    over = {}
    if args.seed is not None:
        over["seed"] = args.seed
    if args.jobs is not None:
        over["jobs"] = args.jobs
    if args.out is not None:
        over["out"] = args.out
    if args.format is not None:
        over["format"] = args.format
    exp = _exp_key(args.experiment)
    if args.trials is not None and "trials" in raw["experiments"].get(exp, {}):
        over.setdefault("experiments", {}).setdefault(exp, {})["trials"] = args.trials
    if args.trace_row is not None:
        over.setdefault("experiments", {}).setdefault("trace", {})["row"] = args.trace_row
    raw = config_mod._merge(raw, over)
    raw = config_mod.resolve(raw)
    # reject inconsistent physics up front, even for experiments that do not simulate
    config_mod.build_system(raw)
    bounds = TRIAL_BOUNDS.get(args.experiment)
    if bounds:
        n = raw["experiments"][exp]["trials"]
        if not bounds[0] <= n <= bounds[1]:
            raise ConfigError(f"{args.experiment}: trials={n} outside supported range "
                              f"[{bounds[0]}, {bounds[1]}]; pass --trials within that range")
    return raw


def run(argv=None) -> tuple[int, dict | None]:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s",
                        stream=sys.stderr)
    try:
        raw = resolve_run(args)
        results, (header, rows), passed, lines = COMMANDS[args.experiment](raw, raw["jobs"])
    except DeploymentError as exc:
        log.error("deployment failed: %s", exc)
        return EXIT_VERIFY, None
    except (ConfigError, ValueError) as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG, None
    except OSError as exc:
        log.error("I/O error: %s", exc)
        return EXIT_IO, None
    perf = performance_summary(*config_mod.build_perf(raw))
    report = make_report(args.experiment, raw, results, perf, passed)
    text = to_json(report) if raw["format"] == "json" else to_csv(header, rows)
    try:
        if raw["out"]:
            with open(raw["out"], "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except OSError as exc:
        log.error("I/O error: %s", exc)
        return EXIT_IO, report
    for ln in lines:
        log.info(ln)
    return (EXIT_VERIFY if passed is False else EXIT_OK), report


def main(argv=None) -> int:
    code, _ = run(argv)
    return code


if __name__ == "__main__":
    sys.exit(main())
