import json
import os
import subprocess
from pathlib import Path

import pytest

CLI = os.environ.get("DECODECV_CLI", "decodecv")
SOURCE = Path(os.environ.get("DECODECV_SOURCE_DIR", Path(__file__).resolve().parents[2]))


def run(*args, cwd=None):
    return subprocess.run([CLI, *map(str, args)], capture_output=True, text=True, cwd=cwd)


@pytest.fixture()
def tiny(tmp_path):
    cfg = tmp_path / "tiny.json"
    cfg.write_text(json.dumps({
        "data": {"simulation": {"mu": [0.3], "n_features": 6, "n_train": 40,
                                "n_test": 200, "n_blocks": 8}},
        "repeats": 2,
        "validation": {"n_splits": 2},
        "decoders": [{"loss": "logistic", "penalty": "l2"}],
        "strategies": ["refit", "average"],
        "grid": [0.1, 1, 10],
        "inner": {"n_splits": 2},
        "cv_strategies": ["loo_sample", "loo_block"],
    }))
    return cfg


def test_validate_config_prints_hash():
    r = run("validate-config", "--config", SOURCE / "configs" / "smoke.json")
    assert r.returncode == 0, r.stderr
    assert r.stdout.startswith("ok ")
    assert len(r.stdout.split()[1]) == 16


def test_config_errors_exit_2(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"data": {"simulation": {}}, "unknown_key": 1}')
    r = run("validate-config", "--config", bad)
    assert r.returncode == 2
    assert "bad.json:1" in r.stderr and "unknown_key" in r.stderr
    assert run("validate-config", "--config", tmp_path / "missing.json").returncode == 2
    assert run("run", "cv-benchmark").returncode == 2  # --config is required
    assert run("frobnicate").returncode == 2
    missing_csv = tmp_path / "csv.json"
    missing_csv.write_text('{"data": {"csv": ["nope.csv"]}}')
    assert run("run", "cv-benchmark", "--config", missing_csv).returncode == 2


def test_runtime_failure_exits_3(tmp_path):
    bad = tmp_path / "broken.csv"
    bad.write_text("f0,label,block\n1,a,x\n2,b,y\nnot-a-number,a,z\n")
    cfg = tmp_path / "exp.json"
    cfg.write_text('{"data": {"csv": ["broken.csv"]}}')
    r = run("run", "cv-benchmark", "--config", cfg, "--out", tmp_path / "out")
    assert r.returncode == 3
    assert "line 4" in r.stderr
    assert run("report", tmp_path / "nothing.csv").returncode == 3


def test_benchmarks_report_and_determinism(tiny, tmp_path):
    outs = []
    for jobs in ("1", "3"):
        out = tmp_path / f"out{jobs}"
        for bench in ("cv-benchmark", "tuning-benchmark"):
            r = run("run", bench, "--config", tiny, "--out", out, "--jobs", jobs, "--seed", "7")
            assert r.returncode == 0, r.stderr
        outs.append(out)
    for name in ("cv_benchmark.csv", "tuning_benchmark.csv"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()
    config = json.loads((outs[0] / "config.json").read_text())
    assert config["seed"] == 7
    r = run("report", outs[0] / "cv_benchmark.csv", outs[0] / "tuning_benchmark.csv",
            "--out", tmp_path / "rep")
    assert r.returncode == 0, r.stderr
    md = (tmp_path / "rep" / "report.md").read_text()
    assert "loo_sample" in md and "refit" in md
    assert (tmp_path / "rep" / "discrepancy.csv").exists()


def test_flags_change_the_experiment(tiny, tmp_path):
    base = run("run", "cv-benchmark", "--config", tiny, "--out", tmp_path / "a")
    raw = run("run", "cv-benchmark", "--config", tiny, "--out", tmp_path / "b",
              "--no-variance-normalization", "--repeats", "3")
    assert base.returncode == 0 and raw.returncode == 0
    a = (tmp_path / "a" / "cv_benchmark.csv").read_text().splitlines()
    b = (tmp_path / "b" / "cv_benchmark.csv").read_text().splitlines()
    assert len(a) == 1 + 2 * 2
    assert len(b) == 1 + 3 * 2
    assert a[1].split(",")[-2] != b[1].split(",")[-2]  # config hash


def test_simulate_writes_csv_and_sidecar(tmp_path):
    r = run("simulate", "--config", SOURCE / "configs" / "smoke.json", "--out", tmp_path)
    assert r.returncode == 0, r.stderr
    train = tmp_path / "sim_mu=0.2_train.csv"
    assert train.exists() and (tmp_path / "sim_mu=0.2_test.csv").exists()
    header = train.read_text().splitlines()[0].split(",")
    assert header[-2:] == ["label", "block"]
    side = json.loads((tmp_path / "sim_mu=0.2.json").read_text())
    assert side["mu"] == 0.2 and side["n_train"] == 100


def test_interrupted_run_resumes(tiny, tmp_path):
    cfg = json.loads(tiny.read_text())
    cfg["max_units"] = 1
    partial = tmp_path / "partial.json"
    partial.write_text(json.dumps(cfg))
    out = tmp_path / "out"
    r = run("run", "tuning-benchmark", "--config", partial, "--out", out)
    assert r.returncode == 0 and "resume" in r.stdout
    assert (out / "tuning_benchmark.partial.jsonl").exists()
    r = run("run", "tuning-benchmark", "--config", tiny, "--out", out)
    assert r.returncode == 0, r.stderr
    full = tmp_path / "full"
    run("run", "tuning-benchmark", "--config", tiny, "--out", full)
    assert (out / "tuning_benchmark.csv").read_bytes() == (full / "tuning_benchmark.csv").read_bytes()
