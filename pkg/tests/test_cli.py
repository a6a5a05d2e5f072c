import csv
import json

import pytest

from schrospec.cli import ConfigError, build_config, main, rounded


def _report(out):
    return json.loads((out / "report.json").read_text())


def test_eigen_reports_exact_zeros(tmp_path):
    out = tmp_path / "eigen"
    assert main(["eigen", "--m", "2", "--max-order", "4", "--out", str(out)]) == 0
    rep = _report(out)
    assert rep["ok"] and rep["result"]["all_exact_zero"]
    rows = rep["result"]["eigenpairs"]
    assert [r["eigenvalue"] for r in rows] == ["0", "-1/4", "-1/2", "-3/4", "-1"]


def test_report_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    args = ["nlep", "--grid-size", "512", "--extent", "20"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert (a / "report.json").read_text() == (b / "report.json").read_text()
    rep = _report(a)["result"]
    assert rep["alpha"] == pytest.approx(1 / 3, abs=1e-12)
    assert rep["sign"] == "plus"


def test_rounding_to_twelve_digits():
    assert rounded(1 / 3) == 0.333333333333
    assert rounded(complex(1 / 3, -2)) == {"re": 0.333333333333, "im": -2.0}
    assert rounded({(1, 2): [0.1 + 0.2]}) == {"(1, 2)": [0.3]}


@pytest.mark.parametrize(
    "payload",
    ["{not json", '{"grid_size": "big"}', '{"bogus_key": 1}', '[1, 2]', '{"m": 0}', '{"family": "nope"}'],
)
def test_malformed_config_exits_two(tmp_path, payload, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(payload)
    assert main(["eigen", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    assert "config error" in capsys.readouterr().err


def test_flags_override_config(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text('{"m": 3, "max_order": 2}')
    c = build_config(["eigen", "--config", str(cfg), "--m", "2"])
    assert c["m"] == 2 and c["max_order"] == 2 and c["subcommand"] == "eigen"


def test_regularity_outputs(tmp_path):
    out = tmp_path / "reg"
    code = main(["regularity", "--family", "constant_l", "--params", "2", "--tau-max", "1e4", "--vertex-tau", "50", "--out", str(out)])
    assert code == 0
    rep = _report(out)["result"]
    assert rep["assessment"] == "divergent" and rep["heat_verdict"] == "regular"
    with (out / "vertex.csv").open() as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["tau", "b0", "d0", "abs_a0"] and len(rows) == 1001


def test_regularity_table_needs_file(tmp_path):
    assert main(["regularity", "--family", "custom_table", "--out", str(tmp_path)]) == 2


def test_regularity_from_table(tmp_path):
    table = tmp_path / "phi.csv"
    table.write_text("tau,phi\n" + "".join(f"{t},2.0\n" for t in (2, 10, 100, 1000, 10000, 1e5, 1e6)))
    out = tmp_path / "o"
    assert main(["regularity", "--family", "custom_table", "--table", str(table), "--tau-max", "1e5", "--vertex-tau", "20", "--out", str(out)]) == 0
    assert _report(out)["result"]["family"] == "custom_table"


def test_nlep_higher_order_explicit_pair_is_an_error(tmp_path, capsys):
    assert main(["nlep", "--m", "2", "--out", str(tmp_path)]) == 1
    assert "NotImplementedError" in capsys.readouterr().err


def test_nlep_minus_pair(tmp_path):
    assert main(["nlep", "--check", "qq10", "--m", "3", "--grid-size", "64", "--out", str(tmp_path)]) == 0
    assert _report(tmp_path)["result"]["sup_residual"] == 0


def test_kernel_subcommand_m1(tmp_path):
    assert main(["kernel", "--grid-size", "2048", "--extent", "10", "--out", str(tmp_path)]) == 0
    assert _report(tmp_path)["result"]["sup_error_vs_closed_form"] < 1e-6
    assert (tmp_path / "kernel.csv").exists() and (tmp_path / "kernel.cgrid").exists()


def test_classify_subcommand(tmp_path):
    args = ["classify", "--data", "hermite_gaussian", "--k", "1", "--grid-size", "8192", "--extent", "250", "--out", str(tmp_path)]
    assert main(args) == 0
    rep = _report(tmp_path)["result"]
    assert rep["l"] == 1 and rep["predicted_exponent"] == -1.0


def test_seqspace_subcommand(tmp_path):
    assert main(["seqspace", "--m", "2", "--max-order", "6", "--out", str(tmp_path)]) == 0
    rep = _report(tmp_path)["result"]
    assert rep["growth_threshold"] == 1.0
    assert (tmp_path / "mode_norms.csv").read_text().count("\n") == 6


def test_acceptance_subcommand_single_criterion(tmp_path, capsys):
    assert main(["acceptance", "--criteria", "1", "--out", str(tmp_path)]) == 0
    assert "[PASS] criterion  1" in capsys.readouterr().out
    assert main(["acceptance", "--criteria", "42", "--out", str(tmp_path)]) == 2
