import csv
import subprocess
import sys

import pytest

from fraclattice.cli import main


@pytest.fixture
def outdir(tmp_path, monkeypatch):
    monkeypatch.setenv("FRACLATTICE_OUTPUT_DIR", str(tmp_path))
    return tmp_path


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_kernel_two_step(outdir):
    assert main(["kernel", "--family", "two-step-laplacian", "--alpha", "0.5", "--N", "20",
                 "-o", "k.csv"]) == 0
    data = rows(outdir / "k.csv")
    assert data[0] == ["n", "value"] and len(data) == 42
    odd = [float(v) for n, v in data[1:] if int(n) % 2]
    assert all(v == 0.0 for v in odd)
    assert (outdir / "k.csv.ini").exists()


def test_kernel_rejects_alpha_above_one(outdir):
    assert main(["kernel", "--alpha", "1.5"]) == 2


def test_custom_kernel_with_leading_minus(outdir):
    assert main(["kernel", "--family", "custom", "--kernel=-1:1,0:-2,1:1", "--alpha", "1",
                 "--sign", "generator-form", "--N", "3", "-o", "c.csv"]) == 0


def test_semigroup_report(outdir):
    assert main(["semigroup", "--alpha", "0.5", "--T", "1", "--N", "30", "-o", "s.csv"]) == 0
    report = (outdir / "s.csv.report.txt").read_text()
    assert "markov" in report.lower()


def test_semigroup_flags_non_markov_kernel(outdir, capsys):
    assert main(["semigroup", "--family", "custom", "--kernel=-1:1,1:1", "--T", "0.25",
                 "--N", "10", "-o", "bad.csv"]) == 0
    assert "violates-mass" in capsys.readouterr().out


def test_solve_writes_solution_and_report(outdir):
    args = ["solve", "--beta", "0.8", "--alpha", "0.5", "--N", "10", "--M", "16", "-o", "u.csv"]
    assert main(args) == 0
    data = rows(outdir / "u.csv")
    assert data[0] == ["n", "t", "u", "v", "w"] and len(data) == 1 + 17 * 21
    assert "converged: True" in (outdir / "u.csv.report.txt").read_text()


def test_solve_is_byte_deterministic(outdir):
    args = ["solve", "--beta", "0.7", "--N", "8", "--M", "8"]
    assert main(args + ["-o", "a.csv"]) == 0
    assert main(args + ["-o", "b.csv"]) == 0
    assert (outdir / "a.csv").read_bytes() == (outdir / "b.csv").read_bytes()


def test_solve_exit_codes(outdir):
    assert main(["solve", "--phi-level", "1.2", "--N", "8", "--M", "8"]) == 2
    assert main(["solve", "--N", "8", "--M", "8", "--max-iters", "3", "-o", "n.csv"]) == 4
    assert "converged: False" in (outdir / "n.csv.report.txt").read_text()


def test_config_file_and_flag_precedence(outdir, tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[operator]\nfamily = discrete-laplacian\nalpha = 0.5\n\n"
                   "[grid]\nN = 6\nM = 4\n\n[output]\npath = cfgrun.csv\n")
    assert main(["kernel", "--config", str(cfg), "--N", "9"]) == 0
    assert len(rows(outdir / "cfgrun.csv")) == 1 + 19
    resolved = (outdir / "cfgrun.csv.ini").read_text()
    assert "N = 9" in resolved and "alpha = 0.5" in resolved


def test_unknown_config_key(tmp_path, outdir):
    cfg = tmp_path / "bad.ini"
    cfg.write_text("[grid]\nNN = 4\n")
    assert main(["kernel", "--config", str(cfg)]) == 2
    cfg.write_text("[nope]\nx = 1\n")
    assert main(["kernel", "--config", str(cfg)]) == 2


def test_verify_subset(outdir, capsys):
    assert main(["verify", "--only", "special,2"]) == 0
    out = capsys.readouterr().out
    assert "criterion=2 " in out and "status=PASS" in out and "criterion=1 " not in out


def test_verify_fault_injection(outdir, capsys):
    assert main(["verify", "--only", "1", "--inject-fault", "gamma-constant"]) == 3
    assert "status=FAIL" in capsys.readouterr().out


def test_console_entry_point(outdir):
    proc = subprocess.run([sys.executable, "-m", "fraclattice.cli", "kernel", "--N", "2",
                           "-o", "e.csv"], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert (outdir / "e.csv").exists()
