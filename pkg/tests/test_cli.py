import json
import math
from unittest.mock import patch

import pytest

import cli
import verify
from verify import CheckReport

PI = math.pi


def _json_lines(text):
    return [json.loads(line) for line in text.splitlines() if line.strip()]


class TestEval:

    def test_canonical_string(self, capsys):
        assert cli.main(["eval", "thm-1.1", "--n", "2", "--r", "1", "--l", "0"]) == cli.EXIT_OK
        out = capsys.readouterr().out.strip()
        assert out == "(-2)*V'_1 + (pi)*M'(1,0)*h + (pi)*M'(1,0)*rho"

    def test_bridge_formula(self, capsys):
        assert cli.main(["eval", "eq-2.7", "--n", "3", "--i", "2"]) == cli.EXIT_OK
        assert capsys.readouterr().out.strip() == "(3)*W(3,3)"

    def test_invocation_is_echoed(self, capsys):
        cli.main(["eval", "eq-2.7", "--n", "3", "--i", "2"])
        err = capsys.readouterr().err
        assert err.startswith("# workbench ")
        assert "eval eq-2.7 --n 3 --i 2" in err

    def test_numeric_value_on_a_body(self, capsys):
        code = cli.main(["eval", "eq-2.5", "--n", "2", "--body", "reuleaux2d_eps0.1.json", "--rho", "0.5",
                         "--format", "json"])
        assert code == cli.EXIT_OK
        record = _json_lines(capsys.readouterr().out)[0]
        assert record["formula_id"] == "eq-2.5"
        assert record["value"] == pytest.approx(0.96 * PI + PI + 0.25 * PI, rel=1e-10)

    def test_missing_rho(self, capsys):
        code = cli.main(["eval", "eq-2.5", "--n", "2", "--body", "reuleaux2d_eps0.1.json"])
        assert code == cli.EXIT_USAGE

    def test_missing_index(self, capsys):
        assert cli.main(["eval", "thm-1.1", "--n", "2", "--r", "1"]) == cli.EXIT_USAGE

    def test_unknown_formula(self, capsys):
        assert cli.main(["eval", "eq-9.9"]) == cli.EXIT_USAGE


class TestBody:

    def test_volume(self, capsys):
        assert cli.main(["body", "volume", "reuleaux2d_eps0.1.json"]) == cli.EXIT_OK
        value = float(capsys.readouterr().out.split()[0])
        assert value == pytest.approx(PI - 0.04 * PI, rel=1e-12)

    def test_mci_of_default_ball(self, capsys):
        assert cli.main(["body", "mci", "ball1.json", "--i", "1", "--format", "json"]) == cli.EXIT_OK
        record = _json_lines(capsys.readouterr().out)[0]
        assert record["value"] == pytest.approx(4 * PI, rel=1e-10)
        assert record["body"] == {"family": "ball", "radius": 1.0}

    def test_width_extremes(self, capsys):
        assert cli.main(["body", "width", "harmonic3d_sectoral.json", "--all"]) == cli.EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert lines[0].startswith("max ")
        assert float(lines[1].split()[1]) == pytest.approx(2.0, abs=1e-10)

    def test_width_direction_is_normalized(self, capsys):
        assert cli.main(["body", "width", "ball1.json", "--dim", "2", "--u", "3", "4"]) == cli.EXIT_OK
        assert float(capsys.readouterr().out) == pytest.approx(2.0, rel=1e-14)

    def test_project_writes_spec(self, capsys, tmp_path):
        out = tmp_path / "shadow.json"
        assert cli.main(["body", "project", "harmonic3d_zonal.json", "--r", "2", "--out", str(out)]) == cli.EXIT_OK
        spec = json.loads(out.read_text())
        assert spec["family"] == "projected"
        assert json.loads(capsys.readouterr().out) == spec

    def test_mci_needs_index(self, capsys):
        assert cli.main(["body", "mci", "ball1.json"]) == cli.EXIT_USAGE

    def test_missing_file(self, capsys):
        assert cli.main(["body", "volume", "nowhere.json"]) == cli.EXIT_USAGE


class TestVerify:

    def test_documented_discrepancy_exits_zero(self, capsys):
        code = cli.main(["verify", "thm1-vs-oracle", "--n", "2", "--r", "1", "--l", "0",
                         "--body", "ball1.json", "--rho", "0.5", "--format", "json"])
        assert code == cli.EXIT_OK
        record = _json_lines(capsys.readouterr().out)[0]
        assert record["verdict"] == verify.DOCUMENTED
        assert record["residual_exact"] == "-8 + 4*pi"

    def test_partial_configuration_runs_the_sweep(self, capsys):
        code = cli.main(["verify", "thm1-internal", "--n", "3", "--format", "csv", "--threads", "2"])
        assert code == cli.EXIT_OK
        rows = capsys.readouterr().out.splitlines()
        assert rows[0] == ",".join(verify.CSV_HEADER)
        assert len(rows) == 1 + 2 * 3

    def test_failure_exits_one(self, capsys):
        bad = CheckReport("barbier", {}, 1.0, 2.0, 1.0, 0.5, verify.FAIL, "rel 1e-10")
        with patch("verify.run_tasks", return_value=[bad]):
            assert cli.main(["verify", "barbier", "--body", "reuleaux2d_eps0.1.json"]) == cli.EXIT_FAILURE
        out = capsys.readouterr().out
        assert "# [---------------] 0 pass, 1 fail" in out

    def test_unknown_check(self, capsys):
        assert cli.main(["verify", "not-a-check"]) == cli.EXIT_USAGE

    def test_reports_written(self, capsys, tmp_path):
        out = tmp_path / "suite.jsonl"
        code = cli.main(["verify", "exact-identities", "--n-max", "2", "--out", str(out)])
        assert code == cli.EXIT_OK
        assert (tmp_path / "suite.csv").exists()
        assert all(r["verdict"] == verify.PASS for r in _json_lines(out.read_text()))

    def test_bare_report_name_goes_to_reports_dir(self, capsys, tmp_path):
        with patch("config.REPORTS_DIR", str(tmp_path)):
            assert cli.main(["verify", "ball-closure", "--n", "2", "--s", "0", "--out", "one.jsonl"]) == cli.EXIT_OK
        assert (tmp_path / "one.jsonl").exists()
        assert (tmp_path / "one.csv").exists()

    def test_archive_and_history(self, capsys, tmp_path):
        with patch("config.DATABASE_FILE", str(tmp_path / "archive.db")):
            assert cli.main(["verify", "ball-closure", "--n", "2", "--s", "1", "--archive"]) == cli.EXIT_OK
            capsys.readouterr()
            assert cli.main(["history", "--format", "json"]) == cli.EXIT_OK
            runs = _json_lines(capsys.readouterr().out)
            assert len(runs) == 1
            assert runs[0]["suite"] == "ball-closure"
            assert cli.main(["history", "--run", str(runs[0]["id"]), "--format", "json"]) == cli.EXIT_OK
            reports = _json_lines(capsys.readouterr().out)
            assert reports[0]["check_id"] == "ball-closure"


class TestSample:

    def test_frames_are_reproducible(self, capsys):
        cli.main(["sample", "--n", "4", "--r", "2", "--count", "3", "--seed", "5", "--format", "json"])
        first = capsys.readouterr().out
        cli.main(["sample", "--n", "4", "--r", "2", "--count", "3", "--seed", "5", "--format", "json"])
        assert capsys.readouterr().out == first
        assert len(_json_lines(first)) == 3

    def test_bad_rank(self, capsys):
        assert cli.main(["sample", "--n", "3", "--r", "3"]) == cli.EXIT_USAGE


class TestArguments:

    def test_missing_subcommand(self, capsys):
        assert cli.main([]) == cli.EXIT_USAGE

    def test_unknown_subcommand(self, capsys):
        assert cli.main(["frobnicate"]) == cli.EXIT_USAGE

    def test_threads_must_be_positive(self, capsys):
        assert cli.main(["eval", "eq-2.4", "--n", "3", "--r", "1", "--threads", "0"]) == cli.EXIT_USAGE

    def test_help(self, capsys):
        assert cli.main(["--help"]) == 0
        assert "workbench" in capsys.readouterr().out

    def test_unexpected_error_exits_one(self, capsys):
        with patch("formulas.FormulaSpec.build", side_effect=RuntimeError("boom")):
            assert cli.main(["eval", "eq-2.4", "--n", "3", "--r", "1"]) == cli.EXIT_FAILURE
