import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

from warpcheck.cli import main

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


def run(*argv):
    buf = io.StringIO()
    code = main([str(a) for a in argv], out=buf)
    return code, buf.getvalue()


def scenario(tmp_path, doc, name="s.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


GRAMMAR_ERRORS = ["1 + sin(x1", "x1 +* 2", "foo(x1)", "sin(x1, x2)", "x1 ^ x2", "2 $ x1",
                  "q + 1", ""]


class TestVerify:
    def test_exp_flat_passes(self, tmp_path):
        code, out = run("verify", "--scenario", SCENARIOS / "exp_flat.json", "--out", tmp_path)
        assert code == 0 and out.endswith("pass,True\n")
        doc = json.loads((tmp_path / "report.json").read_text())
        assert doc["pass"] is True
        assert doc["lambda_bar"] == pytest.approx(3.0, rel=1e-12)
        assert doc["sign_agreement"]["lambda_bar"] == "disagrees"
        header = (tmp_path / "residuals.csv").read_text().splitlines()[0]
        assert header == "t,y1,y2,y3,max_abs,max_rel"

    def test_cosh_sphere_passes(self, tmp_path):
        assert run("verify", "--scenario", SCENARIOS / "cosh_sphere.json", "--out", tmp_path)[0] == 0

    def test_mismatched_fiber_fails(self, tmp_path):
        code, out = run("verify", "--scenario", SCENARIOS / "cosh_flat.json", "--out", tmp_path)
        assert code == 1 and out.endswith("pass,False\n")

    def test_plain_chart(self, tmp_path):
        assert run("verify", "--scenario", SCENARIOS / "de_sitter.json", "--out", tmp_path)[0] == 0

    def test_torus_counterexample_fails(self, tmp_path):
        code, out = run("verify", "--scenario", SCENARIOS / "torus_hopf.json", "--out", tmp_path)
        assert code == 1 and "lambda_bar_stats" in out and ",False\n" in out

    def test_overrides(self, tmp_path):
        code, _ = run("verify", "--scenario", SCENARIOS / "exp_flat.json", "--out", tmp_path,
                      "--seed", "0x10", "--samples", "7", "--tol", "1e-3")
        doc = json.loads((tmp_path / "report.json").read_text())
        assert code == 0 and doc["seed"] == 16 and doc["samples"] == 7
        assert doc["tolerances"]["residual"] == 1e-3

    def test_byte_identical(self, tmp_path):
        outs = []
        for d in ("a", "b"):
            code, out = run("verify", "--scenario", SCENARIOS / "cosh_sphere.json",
                            "--out", tmp_path / d)
            outs.append(out)
        assert outs[0] == outs[1]
        for name in ("report.json", "residuals.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


class TestConfigErrors:
    @pytest.mark.parametrize("expr", GRAMMAR_ERRORS)
    def test_malformed_warping(self, tmp_path, capsys, expr):
        path = scenario(tmp_path, {"version": 1, "base": {"builtin": "flat", "dim": 2},
                                   "fiber": {"builtin": "sphere", "dim": 2},
                                   "warping": {"expression": expr}})
        assert run("verify", "--scenario", path, "--out", tmp_path)[0] == 2
        assert "error:" in capsys.readouterr().err

    def test_parser_diagnostic(self, tmp_path, capsys):
        path = scenario(tmp_path, {"version": 1, "base": {"builtin": "flat", "dim": 2},
                                   "fiber": {"builtin": "sphere", "dim": 2},
                                   "warping": {"expression": "1 + sin(x1"}})
        run("verify", "--scenario", path, "--out", tmp_path)
        assert "offset 10" in capsys.readouterr().err

    @pytest.mark.parametrize("doc", [
        {"base": {"builtin": "flat"}},
        {"version": 2, "base": {"builtin": "flat"}},
        {"version": 1, "base": {"builtin": "flat"}, "lamda_bar": {}},
        {"version": 1, "base": {"builtin": "flat", "dim": 2, "scael": 2}},
        {"version": 1, "base": {"builtin": "klein"}},
        {"version": 1, "warping": {"family": "exp", "n": 3}, "fiber": {"builtin": "flat", "dim": 2}},
        {"version": 1, "warping": {"family": "tan", "n": 3}},
        {"version": 1, "base": {"coords": ["x"], "diagonal": ["1"], "metric": [["1"]]}},
        {"version": 1, "lambda_bar": {"policy": "explicit"}, "base": {"builtin": "flat"}},
        {"version": 1, "base": {"builtin": "flat"}, "lambda_bar": {"policy": "paper"}},
        {"version": 1},
    ])
    def test_invalid_scenarios(self, tmp_path, doc):
        assert run("verify", "--scenario", scenario(tmp_path, doc), "--out", tmp_path)[0] == 2

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{version: 1")
        assert run("verify", "--scenario", path)[0] == 2

    def test_missing_file(self, tmp_path):
        assert run("verify", "--scenario", tmp_path / "nope.json")[0] == 2

    def test_bad_arguments(self):
        assert run("explode")[0] == 2
        assert run("verify")[0] == 2
        assert run("classify")[0] == 2
        assert run("classify", "--lambda-bar", "1", "--n", "1")[0] == 2


class TestCurvature:
    def test_sphere_point(self, tmp_path):
        code, out = run("curvature", "--scenario", SCENARIOS / "sphere_curvature.json",
                        "--out", tmp_path)
        assert code == 0
        assert "0,scalar,-,2\n" in out
        values = {line.rsplit(",", 2)[1]: float(line.rsplit(",", 1)[1])
                  for line in out.splitlines() if line.startswith("0,christoffel,")}
        assert values["th.ph.ph"] == pytest.approx(-3**0.5 / 4, rel=1e-15)
        assert values["ph.th.ph"] == pytest.approx(3**-0.5, rel=1e-15)
        assert (tmp_path / "curvature.csv").exists() and (tmp_path / "points.csv").exists()

    def test_bad_points(self, tmp_path):
        path = scenario(tmp_path, {"version": 1, "base": {"builtin": "flat", "dim": 2},
                                   "points": [[1.0, 2.0, 3.0]]})
        assert run("curvature", "--scenario", path)[0] == 2


class TestClassify:
    def test_negative_lambda(self, tmp_path):
        code, out = run("classify", "--lambda-bar", "-3", "--n", "3", "--out", tmp_path)
        rows = json.loads((tmp_path / "families.json").read_text())
        assert code == 0 and [r["kind"] for r in rows] == ["exp", "cosh", "sinh"]
        assert all(r["L"] == 1.0 for r in rows)
        assert {"kind", "L", "k", "b", "lambda_bar_paper", "lambda_fiber_paper",
                "lambda_bar_oracle", "lambda_fiber_oracle"} <= set(rows[0])
        assert rows[0]["lambda_bar_oracle"] == pytest.approx(3.0, rel=1e-12)

    def test_n4_linear(self, tmp_path):
        code, _ = run("classify", "--scenario", SCENARIOS / "classify_n4.json", "--out", tmp_path)
        (row,) = json.loads((tmp_path / "families.json").read_text())
        assert code == 0 and row["kind"] == "linear"
        assert row["lambda_fiber_paper"] == 3.0 and row["fiber_constant_units"] == "3"
        assert row["lambda_fiber_oracle"] == pytest.approx(-3.0, rel=1e-10)


class TestDiscrepancies:
    def test_table(self, tmp_path):
        code, out = run("discrepancies", "--out", tmp_path)
        assert code == 0
        rows = json.loads((tmp_path / "discrepancies.json").read_text())
        assert len(rows) == 15
        assert (tmp_path / "discrepancies.csv").read_text() == out
        verdicts = {(r["tension"], r["family"]): r["verdict"] for r in rows}
        assert verdicts[("A", "exp")] == "disagrees"
        assert verdicts[("B", "cosh")] == "disagrees"
        assert verdicts[("C", "exp")] == "disagrees"

    def test_byte_identical(self):
        assert run("discrepancies", "--n", "4", "--L", "2")[1] == \
            run("discrepancies", "--n", "4", "--L", "2")[1]


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "warpcheck", "classify", "--lambda-bar", "3",
                           "--n", "3"], capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and proc.stdout.startswith("kind,")
    assert "\ncos," in proc.stdout
