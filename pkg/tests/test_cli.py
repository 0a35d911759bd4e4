import json
import math
import shutil
import subprocess

import numpy as np
import pytest

from aedetect.cli import EXIT_DEGENERATE, EXIT_IO, EXIT_OK, EXIT_USAGE, bench_frame, main
from aedetect.signals import SampledSignal, load_signal, read_truth, save_signal

FS = 5e6


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


# -- synth ---------------------------------------------------------------------------------

def test_synth_one_clean_event(tmp_path, capsys):
    code, _, _ = run(capsys, "synth", "--out", tmp_path, "--events", 1, "--snr", "inf")
    assert code == EXIT_OK
    sigs = sorted(p.name for p in tmp_path.glob("*.f32"))
    assert sigs == ["ev0000_clean.f32"]
    assert len(read_truth(tmp_path / "ev0000.truth.csv")) == 1
    assert json.loads((tmp_path / "manifest.json").read_text())["command"] == "synth"


def test_synth_round_file_count_and_rerun(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert run(capsys, "synth", "--out", d, "--events", 5, "--snr", "20,15,10", "--seed", 3)[0] == 0
    names = sorted(p.name for p in a.glob("*.f32"))
    assert len(names) == 5 * 4
    assert len(list(a.glob("*.truth.csv"))) == 5
    for n in names + [p.name for p in a.glob("*.truth.csv")]:
        assert (a / n).read_bytes() == (b / n).read_bytes()


def test_synth_seed_from_environment(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("AEDETECT_SEED", "17")
    run(capsys, "synth", "--out", tmp_path / "env", "--events", 1)
    run(capsys, "synth", "--out", tmp_path / "flag", "--events", 1, "--seed", 17)
    assert (tmp_path / "env/ev0000_clean.f32").read_bytes() == (tmp_path / "flag/ev0000_clean.f32").read_bytes()
    monkeypatch.setenv("AEDETECT_SEED", "nope")
    assert run(capsys, "synth", "--out", tmp_path / "x", "--events", 1)[0] == EXIT_USAGE


# -- detect --------------------------------------------------------------------------------

def test_detect_zero_file(tmp_path, capsys):
    p = tmp_path / "zero.f32"
    save_signal(SampledSignal(np.zeros(50_000), FS), p, "raw")
    code, out, _ = run(capsys, "detect", p)
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["events"] == [] and doc["manifest"]["command"] == "detect"


@pytest.fixture
def one_event(tmp_path, capsys):
    run(capsys, "synth", "--out", tmp_path / "c", "--events", 1, "--seed", 4)
    return tmp_path / "c" / "ev0000_clean.f32", tmp_path / "c" / "ev0000.truth.csv"


def test_detect_single_event_and_dump(one_event, tmp_path, capsys):
    sig, truth = one_event
    code, out, _ = run(capsys, "detect", sig, "--dump-cf", tmp_path / "cf", "--hop", 3)
    assert code == EXIT_OK
    doc = json.loads(out)
    assert len(doc["events"]) == 1
    assert abs(doc["events"][0]["onset_s"] - read_truth(truth)[0][0]) <= 50e-6
    n = len(load_signal(sig, "raw"))
    for kind in ("ste", "stzcr"):
        lines = (tmp_path / "cf" / f"ev0000_clean.{kind}.csv").read_text().splitlines()
        assert lines[0].startswith("# manifest:")
        assert len(lines) - 2 == math.ceil(n / 3)


def test_detect_all_methods_and_csv(one_event, tmp_path, capsys):
    sig, _ = one_event
    for m in ("ste-zcr", "ia", "sta-lta", "aic"):
        code, out, _ = run(capsys, "detect", sig, "--method", m, "--out-format", "csv",
                           "--dump-cf", tmp_path / "cf")
        assert code == EXIT_OK
        assert out.startswith("# manifest:")


def test_detect_evaluate_pipeline(one_event, tmp_path, capsys):
    sig, truth = one_event
    det = tmp_path / "det.json"
    assert run(capsys, "detect", sig, "-o", det)[0] == EXIT_OK
    code, out, _ = run(capsys, "evaluate", "--detected", det, "--truth", truth)
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["counts"] == {"tp": 1, "fp": 0, "fn": 0}
    assert doc["metrics"]["precision"] == 100 and doc["metrics"]["sensitivity"] == 100


def test_detect_output_is_reproducible(one_event, capsys):
    sig, _ = one_event
    assert run(capsys, "detect", sig)[1] == run(capsys, "detect", sig)[1]


def test_detect_errors(one_event, tmp_path, capsys):
    sig, _ = one_event
    assert run(capsys, "detect", sig, "--method", "cwt")[0] == EXIT_USAGE
    assert run(capsys, "detect", sig, "--itu", "-1")[0] == EXIT_USAGE
    assert run(capsys, "detect", sig, "--izct-pct", "150")[0] == EXIT_USAGE
    assert run(capsys, "detect", tmp_path / "missing.f32")[0] == EXIT_IO
    bad = tmp_path / "bad.f32"
    bad.write_bytes(b"\0" * 6)
    shutil.copy(str(sig) + ".rate", str(bad) + ".rate")
    assert run(capsys, "detect", bad)[0] == EXIT_IO
    short = tmp_path / "short.f32"
    save_signal(SampledSignal(np.ones(500), FS), short, "raw")
    assert run(capsys, "detect", short)[0] == EXIT_DEGENERATE


# -- evaluate --------------------------------------------------------------------------------

def test_counts_mode(capsys):
    code, out, _ = run(capsys, "evaluate", "--counts", "338,29,42")
    assert code == EXIT_OK
    m = json.loads(out)["metrics"]
    want = dict(accuracy=82.64, precision=92.10, sensitivity=88.95, f1=90.50, fdr=7.90, fnr=11.05)
    for k, v in want.items():
        assert abs(m[k] - v) <= 0.01
    assert run(capsys, "evaluate", "--counts", "0,0,3")[0] == EXIT_DEGENERATE
    assert run(capsys, "evaluate", "--counts", "1,2")[0] == EXIT_USAGE
    assert run(capsys, "evaluate")[0] == EXIT_USAGE


def test_campaign_mode(capsys):
    argv = ("evaluate", "--campaign", "--methods", "ste-zcr,ia", "--events", 2,
            "--snr", "inf,10", "--no-timings")
    code, out, _ = run(capsys, *argv)
    assert code == EXIT_OK
    rep = json.loads(out)["report"]
    assert set(rep) == {"ste-zcr", "ia"} and set(rep["ia"]) == {"clean", "10"}
    _, out4, _ = run(capsys, *argv, "--workers", 4)
    assert json.loads(out4)["report"] == rep
    code, csv_out, _ = run(capsys, *argv[:-1], "--out-format", "csv")
    assert code == EXIT_OK and csv_out.splitlines()[1].startswith("method,snr_db,tp,fp,fn")


# -- bench --------------------------------------------------------------------------------------

def test_bench_small(capsys):
    code, out, _ = run(capsys, "bench", "--samples", 500_000, "--methods", "ste-zcr,sta-lta")
    assert code == EXIT_OK
    rows = json.loads(out)["results"]
    assert [r["method"] for r in rows] == ["ste-zcr", "sta-lta"]
    assert all(r["samples"] == 500_000 and r["samples_per_s"] > 0 for r in rows)


def test_bench_frame_counts_bursts():
    sig, n = bench_frame(500_000, 0)
    assert len(sig) == 500_000
    assert n == 3   # arrivals at 5, 50 and 95 ms within the 100 ms frame


def test_console_script():
    exe = shutil.which("aedetect")
    if exe is None:
        pytest.skip("console script not on PATH")
    r = subprocess.run([exe, "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.strip()
