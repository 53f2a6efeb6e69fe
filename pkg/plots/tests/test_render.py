"""Rendering tests against CSV reports produced by the binklf CLI.

The reports are generated through the installed command line interface so
these tests exercise exactly the published table contracts.
"""

import subprocess
import sys
from pathlib import Path

import pytest

from plots import ColumnError, FigureSpec, main, read_table, render

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def cli(*args):
    proc = subprocess.run([sys.executable, "-m", "binklf.cli", *args],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    return proc


@pytest.fixture(scope="module")
def golden(tmp_path_factory):
    root = tmp_path_factory.mktemp("golden")
    cli("run", "--scenario", "o2", "--filter", "lbklf", "--steps", "30",
        "--seed", "3", "--out", str(root / "o2_run"))
    cli("mc", "--scenario", "o2", "--runs", "2", "--steps", "30",
        "--seed", "3", "--out", str(root / "o2_mc"))
    cli("run", "--scenario", "nonlinear", "--filter", "nbklf",
        "--steps", "25", "--seed", "3", "--out", str(root / "nl_run"))
    cli("mc", "--scenario", "nonlinear", "--runs", "2", "--steps", "25",
        "--seed", "3", "--out", str(root / "nl_mc"))
    return root


def check_png(path: Path):
    data = path.read_bytes()
    assert data[:8] == PNG_MAGIC
    assert len(data) > 1024


@pytest.mark.parametrize("report_dir,csv_name,kind,sensors", [
    ("o2_run", "trace.csv", "trace", None),
    ("o2_mc", "rmse.csv", "rmse", None),
    ("o2_mc", "mk.csv", "mk", 10),
    ("nl_run", "trace.csv", "trace", None),
    ("nl_mc", "rmse.csv", "rmse", None),
    ("nl_mc", "mk.csv", "mk", 18),
])
def test_reference_figures_render(golden, tmp_path, report_dir, csv_name,
                                  kind, sensors):
    out = tmp_path / f"{report_dir}_{kind}.png"
    render(FigureSpec(kind=kind, source=golden / report_dir / csv_name,
                      out=out, sensor_total=sensors))
    check_png(out)


def test_render_does_not_modify_input(golden, tmp_path):
    source = golden / "o2_mc" / "rmse.csv"
    before = source.read_bytes()
    render(FigureSpec(kind="rmse", source=source,
                      out=tmp_path / "again.png"))
    assert source.read_bytes() == before


def test_read_table_parses_all_columns(golden):
    table = read_table(golden / "o2_run" / "trace.csv")
    assert set(table) == {"k", "x_true_1", "x_hat_1", "m_k", "tr_phi"}
    assert len(table["k"]) == 30
    assert table["k"][0] == 1.0


def test_trace_missing_estimate_column(tmp_path):
    bad = tmp_path / "trace.csv"
    bad.write_text("k,x_true_1,m_k,tr_phi\n1,0.5,0,1.0\n")
    with pytest.raises(ColumnError, match="x_hat_1"):
        render(FigureSpec(kind="trace", source=bad,
                          out=tmp_path / "x.png"))


def test_rmse_requires_rmse_columns(tmp_path):
    bad = tmp_path / "rmse.csv"
    bad.write_text("k,error_lbklf\n1,0.5\n")
    with pytest.raises(ColumnError, match="rmse_"):
        render(FigureSpec(kind="rmse", source=bad, out=tmp_path / "x.png"))


def test_mk_requires_step_column(tmp_path):
    bad = tmp_path / "mk.csv"
    bad.write_text("step,mean_mk_lbklf\n1,0.5\n")
    with pytest.raises(ColumnError, match="'k'"):
        render(FigureSpec(kind="mk", source=bad, out=tmp_path / "x.png"))


def test_empty_file_is_rejected(tmp_path):
    bad = tmp_path / "empty.csv"
    bad.write_text("")
    with pytest.raises(ColumnError):
        render(FigureSpec(kind="rmse", source=bad, out=tmp_path / "x.png"))


def test_unknown_kind_rejected(tmp_path):
    with pytest.raises(ValueError, match="unknown figure kind"):
        FigureSpec(kind="scatter", source=tmp_path / "a.csv",
                   out=tmp_path / "a.png")


def test_cli_renders(golden, tmp_path):
    out = tmp_path / "cli.png"
    code = main(["--in", str(golden / "o2_mc" / "rmse.csv"),
                 "--out", str(out), "--kind", "rmse",
                 "--title", "oxygen study"])
    assert code == 0
    check_png(out)


def test_cli_missing_column_is_usage_error(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("k,foo\n1,2\n")
    code = main(["--in", str(bad), "--out", str(tmp_path / "x.png"),
                 "--kind", "mk"])
    assert code == 2
    assert "mean_mk_" in capsys.readouterr().err
