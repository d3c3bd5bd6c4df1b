import numpy as np
import pytest

from mertens_nf.cli import main
from mertens_nf.observables import ScanReport
from mertens_nf.output import SCAN_HEADER, emit_csv, emit_svg, scan_csv


def test_no_arguments_is_usage_error(capsys):
    assert main([]) == 2
    assert "usage" in capsys.readouterr().err


def test_unknown_flag_and_command():
    assert main(["invariants", "--q", "5", "--bogus"]) == 2
    assert main(["frobnicate"]) == 2


def test_invariants_output(capsys):
    assert main(["invariants", "--q", "5"]) == 0
    out = capsys.readouterr().out
    assert "0.4304089" in out and "0.481211825" in out
    assert "class number     1" in out


def test_domain_errors(capsys):
    assert main(["invariants", "--q", "4"]) == 1
    assert main(["density", "--q", "7", "--zeros-dir", "/nonexistent"]) == 1
    assert "missing zero data" in capsys.readouterr().err
    assert main(["sieve", "--q", "5", "--x", "2e9"]) == 1


def test_sieve_and_scan_outputs(tmp_path, capsys):
    assert main(["sieve", "--q", "5", "--x", "10000", "--out-dir", str(tmp_path)]) == 0
    assert (tmp_path / "sieve_q5.csv").read_text().startswith("x,pi_K,Pi_K,psi_K,log_mertens_sum\n")
    assert main(["scan", "--q", "1", "--x", "100000", "--out-dir", str(tmp_path)]) == 0
    assert "0 sign changes" in capsys.readouterr().out
    csv_text = (tmp_path / "scan.csv").read_text()
    assert csv_text.splitlines()[0] == ",".join(SCAN_HEADER)
    svg = (tmp_path / "e_k_plot.svg").read_text()
    assert svg.startswith("<svg") and "<polyline" in svg and "href" not in svg


def test_mertens_command(capsys):
    assert main(["mertens", "--q", "1", "--x", "10000"]) == 0
    assert "in M_K: True" in capsys.readouterr().out


def test_scan_csv_identical_across_threads(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["scan", "--q", "13", "--x", "300000", "--threads", "1", "--out-dir", str(a)]) == 0
    assert main(["scan", "--q", "13", "--x", "300000", "--threads", "4", "--out-dir", str(b)]) == 0
    assert (a / "scan.csv").read_bytes() == (b / "scan.csv").read_bytes()
    assert (a / "e_k_plot.svg").read_bytes() == (b / "e_k_plot.svg").read_bytes()


def test_mc_density_identical_across_threads(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    common = ["mc-density", "--q", "5", "--samples", "20000", "--seed", "3", "--zero-cutoff", "100"]
    assert main(common + ["--threads", "1", "--out-dir", str(a)]) == 0
    assert main(common + ["--threads", "3", "--out-dir", str(b)]) == 0
    assert (a / "mc_density.csv").read_bytes() == (b / "mc_density.csv").read_bytes()


def test_density_outputs(tmp_path, capsys):
    assert main(["density", "--q", "5", "--out-dir", str(tmp_path)]) == 0
    assert "delta = 0.9876" in capsys.readouterr().out
    lines = (tmp_path / "density.csv").read_text().splitlines()
    assert "poisson_error" in lines[0] and "total_budget" in lines[0]
    assert len(lines) == 2
    assert "<polyline" in (tmp_path / "omega_hat.svg").read_text()


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("[DEFAULT]\nthreads = 2\n\n[invariants]\nq = 13\n")
    assert main(["--config", str(cfg), "invariants"]) == 0
    assert "discriminant     13" in capsys.readouterr().out
    assert main(["--config", str(cfg), "invariants", "--q", "5"]) == 0
    assert "0.4304089" in capsys.readouterr().out
    bad = tmp_path / "bad.cfg"
    bad.write_text("[invariants]\nwhatever = 1\n")
    assert main(["--config", str(bad), "invariants"]) == 1
    assert main(["--config", str(tmp_path / "missing.cfg"), "invariants", "--q", "5"]) == 1


def test_config_sets_field(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("[invariants]\nq = 13\n")
    assert main(["--config", str(cfg), "invariants"]) == 0
    out = capsys.readouterr().out
    assert "discriminant     13" in out


def test_empty_report_is_header_only(tmp_path):
    rep = ScanReport(np.zeros(0), np.zeros(0), [], np.zeros(0))
    p = scan_csv(rep, tmp_path / "scan.csv")
    assert p.read_text() == ",".join(SCAN_HEADER) + "\n"
    p = emit_csv(tmp_path / "x.csv", ("a", "b"), [])
    assert p.read_text() == "a,b\n"


def test_csv_quoting_and_booleans(tmp_path):
    p = emit_csv(tmp_path / "q.csv", ("name", "flag", "v"), [("a,b", True, 0.1), ('say "hi"', False, 3)])
    assert p.read_text() == 'name,flag,v\n"a,b",true,0.1\n"say ""hi""",false,3\n'


def test_svg_is_deterministic(tmp_path):
    x = np.linspace(0, 1, 50)
    a = emit_svg(tmp_path / "a.svg", x, x ** 2, title="t <1>", xlabel="x", ylabel="y").read_bytes()
    b = emit_svg(tmp_path / "b.svg", x, x ** 2, title="t <1>", xlabel="x", ylabel="y").read_bytes()
    assert a == b
    assert b"t &lt;1&gt;" in a
