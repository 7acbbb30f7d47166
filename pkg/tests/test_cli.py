import csv
import io
import subprocess
import sys

import pytest

from semkb.harness.cli import EXIT_CONFIG, EXIT_DATA, EXIT_USAGE, main


@pytest.fixture(scope="module")
def corpus(tmp_path_factory, desk_corpus_path):
    lines = desk_corpus_path.read_text(encoding="utf-8").splitlines()[:200]
    path = tmp_path_factory.mktemp("cli") / "c.txt"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return str(path)


def pipeline(workdir, corpus):
    """build-kb, train, eval, baseline-eval and entropy-report; returns the bytes of every artifact."""
    kb, model = str(workdir / "kb.txt"), str(workdir / "m.ckpt")
    common = ["--corpus", corpus, "--seed", "0"]
    steps = {
        "build": ["build-kb", *common, "--kb", kb, "--theta", "0.3"],
        "train": ["train", *common, "--kb", kb, "--model", model, "--epochs", "1"],
        "eval": ["eval", *common, "--kb", kb, "--model", model, "--snr-grid", "0,6"],
        "baseline": ["baseline-eval", *common, "--snr-grid", "0,6", "--methods", "huffman+rs,fixed6+none"],
        "entropy": ["entropy-report", *common, "--kb", kb],
    }
    out = {}
    for name, argv in steps.items():
        target = workdir / f"{name}.csv"
        assert main([*argv, "--out", str(target)]) == 0, name
        out[name] = target.read_bytes()
    out["checkpoint"] = (workdir / "m.ckpt").read_bytes()
    out["vocab"] = (workdir / "m.ckpt.vocab").read_bytes()
    return out


def test_pipeline_outputs_are_csv_and_reproducible(tmp_path, corpus):
    (tmp_path / "a").mkdir()
    (tmp_path / "b").mkdir()
    a = pipeline(tmp_path / "a", corpus)
    b = pipeline(tmp_path / "b", corpus)
    assert a == b
    evals = list(csv.DictReader(io.StringIO(a["eval"].decode())))
    assert [r["method"] for r in evals] == ["neural", "neural"]
    base = list(csv.DictReader(io.StringIO(a["baseline"].decode())))
    assert len(base) == 2 * 2
    build = list(csv.DictReader(io.StringIO(a["build"].decode())))
    assert len(build) == 1 and int(build[0]["kb_size"]) >= 1
    assert a["train"].decode().splitlines()[0] == "epoch,train_loss,val_loss"


def test_theta_sweep_one_row_per_theta(tmp_path, corpus, capsys):
    assert main(["theta-sweep", "--corpus", corpus, "--theta", "0.1,0.5", "--epochs", "1"]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert [float(r["theta"]) for r in rows] == [0.1, 0.5]
    assert int(rows[0]["kb_size"]) <= int(rows[1]["kb_size"])


def test_config_file_with_flag_override(tmp_path, corpus, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(f"corpus = {corpus}\nsnr_grid = 0\nmethods = fixed6+none\nchannel = rayleigh\n")
    assert main(["baseline-eval", "--config", str(cfg), "--channel", "awgn"]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert [(r["method"], r["channel"]) for r in rows] == [("fixed6+none", "awgn")]


@pytest.mark.parametrize("argv, code, kind", [
    (["baseline-eval", "--corpus", "/nonexistent.txt"], EXIT_DATA, "data"),
    (["baseline-eval", "--corpus", "x", "--snr-grid", "6,0"], EXIT_CONFIG, "config"),
    (["eval", "--corpus", "x", "--methods", "carrier-pigeon"], EXIT_CONFIG, "config"),
    (["entropy-report", "--kb", "/nonexistent.kb"], EXIT_DATA, "data"),
    (["train"], EXIT_DATA, "data"),
])
def test_errors_are_one_line(argv, code, kind, capsys):
    assert main(argv) == code
    err = capsys.readouterr().err
    assert err.count("\n") == 1 and err.startswith(f"error: {kind}: ")


def test_usage_error_and_console_script():
    assert main(["no-such-command"]) == EXIT_USAGE
    proc = subprocess.run([sys.executable, "-m", "semkb.harness.cli", "baseline-eval", "--corpus", "/none"],
                          capture_output=True, text=True)
    assert proc.returncode == EXIT_DATA
    assert proc.stderr.strip().count("\n") == 0 and proc.stdout == ""
