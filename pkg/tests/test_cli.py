import math
import subprocess
import sys

import pytest

from tamelab import cli


def run_cli(args, capsys):
    code = cli.main(args)
    out, err = capsys.readouterr()
    return code, out, err


def test_parse_n_values():
    assert cli.parse_n_values("8") == [8]
    assert cli.parse_n_values("2,8,32") == [2, 8, 32]
    assert cli.parse_n_values("2^4..2^6") == [16, 32, 64]
    assert cli.parse_n_values("3..24") == [3, 6, 12, 24]
    with pytest.raises(ValueError):
        cli.parse_n_values("")
    with pytest.raises(ValueError):
        cli.parse_n_values("9..3")


def test_parse_grid():
    assert cli.parse_grid("1,2.5,4") == [1.0, 2.5, 4.0]
    grid = cli.parse_grid("1:3:5")
    assert grid == [1.0, 1.5, 2.0, 2.5, 3.0]


def test_exact_stdout_schema(capsys):
    code, out, err = run_cli(
        ["exact", "--source", "uniform:2", "--kind", "R", "--n", "2,3"], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "# schema=tamelab.exact.v1"
    assert lines[1] == "# generated_by=tamelab-0.1.0"
    header = next(l for l in lines if not l.startswith("#"))
    assert header == "kind,n,value,method,certified_abs_error,precision_bits"
    row2 = [l for l in lines if l.startswith("R,2,")][0]
    assert row2.split(",")[2] == "2.0"


def test_byte_identical_reruns(tmp_path):
    out1 = tmp_path / "a.csv"
    out2 = tmp_path / "b.csv"
    args = ["exact", "--source", "memoryless:0.3,0.7", "--kind", "all",
            "--n", "2^2..2^5"]
    assert cli.main(args + ["--out", str(out1)]) == 0
    assert cli.main(args + ["--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_timings_is_opt_in(tmp_path):
    out = tmp_path / "t.csv"
    cli.main(["exact", "--source", "uniform:2", "--kind", "R", "--n", "4",
              "--out", str(out), "--timings"])
    assert any(l.startswith("# runtime_ms=") for l in out.read_text().splitlines())
    cli.main(["exact", "--source", "uniform:2", "--kind", "R", "--n", "4",
              "--out", str(out)])
    assert not any("runtime_ms" in l for l in out.read_text().splitlines())


def test_simulate_deterministic(capsys):
    args = ["simulate", "--source", "uniform:2", "--kind", "R", "--n", "8",
            "--trials", "200", "--seed", "42"]
    _, out1, _ = run_cli(args, capsys)
    _, out2, _ = run_cli(args, capsys)
    assert out1 == out2
    assert "R,8,200," in out1


def test_classify_csv(capsys):
    code, out, _ = run_cli(["classify", "--source", "gauss"], capsys)
    assert code == 0
    assert "verdict,S-tame-candidate" in out
    assert "regime,S-tame" in out
    assert "branch_pair_distance,0.3333333333333333" in out


def test_classify_periodic_fields(capsys):
    code, out, _ = run_cli(["classify", "--source", "uniform:2"], capsys)
    assert "verdict,periodic" in out
    assert "pole_scan_agrees,True" in out


def test_spectrum_rejects_memoryless(capsys):
    code, out, err = run_cli(["spectrum", "--source", "uniform:2"], capsys)
    assert code == 3
    assert "error:" in err


def test_probe_flags_binary_pole(capsys):
    t = 2 * math.pi / math.log(2)
    code, out, _ = run_cli(
        ["probe", "--source", "rary:2", "--t", f"2,{t}", "--N", "20"], capsys)
    assert code == 0
    rows = [l for l in out.splitlines() if not l.startswith("#")][1:]
    assert rows[0].endswith(",0")
    assert rows[1].split(",")[1] == "inf"
    assert rows[1].endswith(",1")


def test_plot_requires_out_file():
    with pytest.raises(SystemExit) as exc:
        cli.main(["exact", "--source", "uniform:2", "--kind", "R", "--n", "4",
                  "--plot"])
    assert exc.value.code == 2


def test_plot_writes_png(tmp_path):
    out = tmp_path / "costs.csv"
    code = cli.main(["exact", "--source", "uniform:2", "--kind", "all",
                     "--n", "2^2..2^5", "--out", str(out), "--plot"])
    assert code == 0
    png = tmp_path / "costs.png"
    assert png.exists()
    assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_asymptote_metadata(capsys):
    code, out, _ = run_cli(
        ["asymptote", "--source", "memoryless:0.3,0.7", "--kind", "C",
         "--n", "2^4..2^9"], capsys)
    assert code == 0
    assert any(l.startswith("# coeff_C_a=") for l in out.splitlines())
    assert any(l.startswith("# regime_C=H-tame") for l in out.splitlines())


def test_bad_source_token_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        cli.main(["exact", "--source", "memoryless:0.5,0.6", "--kind", "R",
                  "--n", "4"])
    assert exc.value.code == 2


def test_console_script_help():
    proc = subprocess.run([sys.executable, "-m", "tamelab.cli", "--help"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "exact" in proc.stdout and "classify" in proc.stdout
