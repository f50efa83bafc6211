import csv
import io
import json
import subprocess
import sys

import pytest

from bmvm_cim import cli
from bmvm_cim.config import ConfigError, build_system, default_config, dump, load_config, resolve
from bmvm_cim.report import comparable


def run(tmp_path, *argv, config=None):
    args = list(argv)
    if config is not None:
        path = tmp_path / "cfg.yaml"
        path.write_text(config)
        args += ["--config", str(path)]
    return cli.run(args + ["-q"])


def test_defaults_round_trip(tmp_path):
    path = tmp_path / "d.yaml"
    path.write_text(dump(default_config()))
    assert load_config(path) == resolve()


def test_yaml_exponent_strings_coerced(tmp_path):
    path = tmp_path / "c.yaml"
    path.write_text("pcspc:\n  grc_frequency: 40e6\nexperiments:\n  margins:\n    trials: 2e4\n")
    cfg = load_config(path)
    assert cfg["pcspc"]["grc_frequency"] == 40e6
    assert cfg["experiments"]["margins"]["trials"] == 20_000


def test_unknown_key_rejected():
    with pytest.raises(ConfigError, match="pcspc.vth"):
        resolve({"pcspc": {"vth": 0.8}})


def test_version_checked():
    with pytest.raises(ConfigError):
        resolve({"config_version": 2})


def test_build_system_defaults():
    s = build_system(resolve())
    assert s.total_width == 36 and s.pcspc.c1 == pytest.approx(0.25e-12)


def test_verify_default(tmp_path, capsys):
    out = tmp_path / "v.json"
    code, report = run(tmp_path, "verify", "--out", str(out))
    assert code == 0 and report["passed"] is True
    data = json.loads(out.read_text())
    assert data["results"]["exhaustive_row"]["mismatches"] == 0
    assert all(inst["matched"] == 512 for inst in data["results"]["instances"])
    assert data["performance"]["throughput_gbps"] == pytest.approx(20.48)


def test_verify_summary_line(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "bmvm_cim", "verify", "--trials", "2", "--out",
                           str(tmp_path / "o.json")], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "512/512" in proc.stderr and "PASS" in proc.stderr


def test_huge_noise_fails_verification(tmp_path):
    code, report = run(tmp_path, "verify", "--trials", "2", "--out", str(tmp_path / "o.json"),
                       config="pcspc:\n  comparator_noise_sigma: 10.0\n")
    assert code == 1 and report["passed"] is False


def test_malformed_config(tmp_path):
    code, _ = run(tmp_path, "verify", config="device: [1, 2\n")
    assert code == 2
    code, _ = run(tmp_path, "verify", config="device:\n  lrs_mean: fast\n")
    assert code == 2
    code, _ = run(tmp_path, "verify", config="bogus: 1\n")
    assert code == 2


def test_invalid_physics_is_config_error(tmp_path):
    code, _ = run(tmp_path, "perf", config="pcspc:\n  v_ref: 0.7\n")
    assert code == 2


def test_trials_out_of_range(tmp_path):
    code, _ = run(tmp_path, "margins", "--trials", "10")
    assert code == 2


def test_unwritable_output(tmp_path):
    code, _ = run(tmp_path, "perf", "--out", str(tmp_path / "missing" / "x.json"))
    assert code == 3


def test_missing_config_file(tmp_path):
    code, _ = cli.run(["perf", "--config", str(tmp_path / "nope.yaml"), "-q"])
    assert code == 3


def test_perf_report(tmp_path):
    out = tmp_path / "p.json"
    code, _ = run(tmp_path, "perf", "--out", str(out))
    r = json.loads(out.read_text())["results"]
    assert code == 0
    assert r["throughput_gbps"] == pytest.approx(20.48)
    assert r["energy_efficiency_tops_per_w"] == pytest.approx(1.51, rel=0.01)


def test_margins_csv(tmp_path):
    out = tmp_path / "m.csv"
    code, _ = run(tmp_path, "margins", "--trials", "10000", "--format", "csv", "--out", str(out))
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    assert code == 0 and len(rows) == 11
    assert all(r["non_overlapping"] == "True" for r in rows)


def test_ber_sweep_csv(tmp_path):
    out = tmp_path / "b.csv"
    code, report = run(tmp_path, "ber-sweep", "--trials", "200000", "--format", "csv", "--out", str(out),
                       config="experiments:\n  ber_sweep:\n    calibrate: false\n"
                              "pcspc:\n  comparator_noise_sigma: 0.06\n")
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    assert code == 0
    assert [int(r["compute_bits"]) for r in rows] == [3, 5, 7, 9, 11]
    assert report["results"]["monotone"]


def test_trace_csv(tmp_path):
    out = tmp_path / "t.csv"
    code, report = run(tmp_path, "trace", "--trace-row", "7", "--format", "csv", "--out", str(out))
    assert code == 0
    assert report["results"]["y_sim"] == report["results"]["y_exact"]
    assert "sample" in out.read_text()
    code, _ = run(tmp_path, "trace", "--trace-row", "600")
    assert code == 2


def test_protocol_report(tmp_path):
    code, report = run(tmp_path, "protocol", "--trials", "5000", "--out", str(tmp_path / "p.json"))
    assert code == 0 and report["results"]["far_max"] == 0.0


@pytest.mark.parametrize("exp, trials", [("margins", "10000"), ("protocol", "20000"), ("verify", "3")])
def test_jobs_do_not_change_results(tmp_path, exp, trials):
    reports = []
    for jobs in ("1", "3"):
        out = tmp_path / f"{exp}{jobs}.json"
        code, _ = run(tmp_path, exp, "--seed", "5", "--trials", trials, "--jobs", jobs, "--out", str(out))
        assert code == 0
        r = comparable(json.loads(out.read_text()))
        r["config"].pop("jobs")
        r["config"].pop("out")
        reports.append(r)
    assert reports[0] == reports[1]
