import csv
import io
import json
import math
import subprocess
import sys

import pytest

from shiftnilt import cli
from shiftnilt.cme import cme_form, save_cache


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


def test_invert_cme_s_builtin(capsys):
    code, out, _ = run(capsys, "invert", "--method", "cme-s", "--order", "30", "--builtin", "exp-t", "--T", "1", "10")
    assert code == 0
    r = rows(out)
    assert [x["n"] for x in r] == ["29", "29"]
    assert float(r[1]["value"]) == pytest.approx(math.exp(-10), rel=1e-6)
    assert float(r[1]["theta_hat"]) == pytest.approx(-10.01, abs=0.5)


def test_values_use_seventeen_digits(capsys):
    _, out, _ = run(capsys, "invert", "--method", "cme", "--n", "29", "--builtin", "exp-t", "--T", "2")
    value = rows(out)[0]["value"]
    assert float(value) == float(repr(float(value)))
    assert len(value.replace("0.", "").lstrip("0").replace("e-", "").split("e")[0]) >= 15


def test_invert_expression_json(capsys):
    code, out, _ = run(capsys, "invert", "--method", "euler", "--n", "28", "--expr", "1/(s+1)", "--abscissa", "-1",
                       "--T", "2", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["version"] == "1"
    assert doc["rows"][0]["value"] == pytest.approx(math.exp(-2), rel=1e-8)


def test_euler_extended_precision(capsys):
    code, out, _ = run(capsys, "invert", "--method", "euler-s", "--order", "60", "--builtin", "exp-t2", "--T", "5",
                       "--dps", "60")
    assert code == 0
    assert float(rows(out)[0]["value"]) == pytest.approx(math.exp(-25), rel=1e-6)


def test_output_file(capsys, tmp_path):
    target = tmp_path / "out.csv"
    code, out, _ = run(capsys, "invert", "--method", "cme", "--n", "10", "--builtin", "exp-t", "--T", "1",
                       "--output", str(target))
    assert code == 0 and out == ""
    assert rows(target.read_text())[0]["method"] == "cme"


def test_syntax_error_exit_code(capsys):
    code, _, err = run(capsys, "invert", "--method", "cme", "--n", "29", "--expr", "1/(s+", "--abscissa", "0",
                       "--T", "1")
    assert code == 1
    assert "offset 5" in err


def test_missing_abscissa_is_usage_error(capsys):
    code, _, err = run(capsys, "invert", "--method", "cme", "--n", "29", "--expr", "1/s", "--T", "1")
    assert code == 1 and "--abscissa" in err


def test_argparse_errors_exit_one(capsys):
    with pytest.raises(SystemExit) as info:
        cli.main(["invert", "--method", "nope"])
    assert info.value.code == 1


def test_unknown_builtin(capsys):
    code, _, err = run(capsys, "invert", "--method", "cme", "--n", "29", "--builtin", "nope", "--T", "1")
    assert code == 1 and "exp-t2" in err


def test_numeric_failure_exit_code(capsys):
    # theta puts a node left of the abscissa
    code, _, err = run(capsys, "invert", "--method", "cme", "--n", "29", "--builtin", "exp-t", "--T", "1",
                       "--theta", "-50")
    assert code == 2 and "numeric failure" in err


def test_strict_bound_hit_exit_code(capsys):
    argv = ["invert", "--method", "cme-s", "--n", "29", "--expr", "(1-exp(-s))/s", "--abscissa", "0", "--T", "2"]
    code, out, err = run(capsys, *argv)
    assert code == 0 and rows(out)[0]["lower_bound_hit"] == "true"
    assert "theta_hat = theta_lower" in err
    code, _, _ = run(capsys, *argv, "--strict")
    assert code == 3


def test_euler_s_warning_goes_to_stderr(capsys):
    code, out, err = run(capsys, "invert", "--method", "euler-s", "--order", "30", "--builtin", "square-wave",
                         "--T", "0.5", "0.7", "1.3", "1.5", "2.5", "3.5")
    assert code == 0
    assert "Euler-S" in err
    assert "Euler-S" not in out


def test_sweep_theta(capsys):
    code, out, _ = run(capsys, "sweep-theta", "--order", "30", "--builtin", "exp-t", "--T", "10",
                       "--theta-min", "-12", "--theta-max", "0", "--steps", "7")
    assert code == 0
    r = rows(out)
    assert len(r) == 7 and set(r[0]) == {"theta", "cme", "euler", "exact"}


def test_weight_command(capsys):
    code, out, _ = run(capsys, "weight", "--method", "cme", "--order", "30", "--points", "5")
    assert code == 0
    assert "f_main=" in out
    assert len(rows(out)) == 5


def test_list_builtins(capsys):
    code, out, _ = run(capsys, "list-builtins")
    assert code == 0 and "square-wave" in out and "1/(s+s*exp(s))" in out


def test_generate_cme(capsys, tmp_path):
    target = tmp_path / "c.json"
    code, out, _ = run(capsys, "generate-cme", "--max-n", "3", "--output", str(target), "--quiet")
    assert code == 0 and target.exists()
    code, out, _ = run(capsys, "invert", "--method", "cme", "--n", "3", "--builtin", "exp-t", "--T", "1",
                       "--cache", str(target))
    assert code == 0


def test_missing_cache_order(capsys, tmp_path):
    target = tmp_path / "c.json"
    save_cache([cme_form(1)], target)
    code, _, err = run(capsys, "invert", "--method", "cme", "--n", "5", "--builtin", "exp-t", "--T", "1",
                       "--cache", str(target))
    assert code == 2 and "generate-cme" in err


def test_bench_tables(capsys, tmp_path):
    code, out, _ = run(capsys, "bench-tables", "--outdir", str(tmp_path))
    assert code == 0
    for name in ("table1.csv", "table2.csv", "comparison.csv"):
        assert (tmp_path / name).exists()
    comp = rows((tmp_path / "comparison.csv").read_text())
    assert comp[-1]["table"] == "overall"
    assert "cells within tolerance" in out
    t2 = rows((tmp_path / "table2.csv").read_text())
    assert len(t2) == 12


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "shiftnilt", "list-builtins"], capture_output=True, text=True)
    assert out.returncode == 0 and "poly3" in out.stdout
