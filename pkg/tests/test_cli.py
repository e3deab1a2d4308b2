import csv
import io
import json
import subprocess
import sys

import pytest

from parisian_ruin.asymptotics import normal_survival
from parisian_ruin.cli import EXIT_NUMERIC, EXIT_OK, EXIT_PARAMETER, fmt, main, parse_floats, parse_graded
from parisian_ruin.errors import ParameterError

FAST = ["--n-paths", "3000", "--grid-step", "1/64", "--seed", "5"]


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.reader(io.StringIO(text)))


class TestParsing:
    def test_fmt_round_trip(self):
        for x in (0.1, 1 / 3, 1e-300, 2.5):
            assert float(fmt(x)) == x

    def test_parse_floats(self):
        assert parse_floats("1, 2.5;3") == [1.0, 2.5, 3.0]
        with pytest.raises(ParameterError):
            parse_floats("1,x")

    def test_parse_graded(self):
        g = parse_graded("0.125:1/1024,0.5:1/256,1:1/64")
        assert g.points[1] == 1 / 1024 and g.end == 1.0
        assert len(g) == 1 + 128 + 96 + 32

    def test_parse_graded_bad(self):
        with pytest.raises(ParameterError):
            parse_graded("0.5-0.1")


class TestClassify:
    def test_ex32(self, capsys):
        code, out, _ = run(["classify", "--example", "ex32", "--alpha", "1.5"], capsys)
        assert code == EXIT_OK
        rec = json.loads(out.strip().splitlines()[-1])
        assert rec["case_label"] == "III" and rec["p"] == 0.0

    def test_ex34_case_ii(self, capsys):
        code, out, _ = run(["classify", "--example", "ex34", "--a", "2", "--kappa", "0.5", "--epsilon", "0.6667"],
                           capsys)
        rec = json.loads(out.strip().splitlines()[-1])
        assert code == EXIT_OK and rec["case_label"] == "II"
        assert rec["p"] == pytest.approx(1.0, rel=1e-12)

    def test_missing_epsilon(self, capsys):
        code, _, err = run(["classify", "--example", "ex34", "--a", "2", "--kappa", "0.5"], capsys)
        assert code == EXIT_PARAMETER
        assert "(0, 0.666" in err

    def test_bad_parameter(self, capsys):
        code, _, err = run(["classify", "--example", "ex31", "--alpha", "2.5"], capsys)
        assert code == EXIT_PARAMETER and "alpha" in err

    def test_json_file(self, tmp_path, capsys):
        out = tmp_path / "r.json"
        code, _, _ = run(["classify", "--example", "ex31", "-o", str(out)], capsys)
        assert code == EXIT_OK
        assert json.loads(out.read_text())["case_label"] == "III_DEGENERATE"

    def test_config_and_flag_override(self, tmp_path, capsys):
        cfg = tmp_path / "m.ini"
        cfg.write_text("[model]\nexample = ex32\nalpha = 1.2\n")
        _, out, _ = run(["classify", "--config", str(cfg)], capsys)
        assert json.loads(out.strip().splitlines()[-1])["inputs"]["alpha"] == 1.2
        _, out, _ = run(["classify", "--config", str(cfg), "--alpha", "1.7"], capsys)
        assert json.loads(out.strip().splitlines()[-1])["inputs"]["alpha"] == 1.7

    def test_missing_config(self, tmp_path, capsys):
        code, _, _ = run(["classify", "--config", str(tmp_path / "none.ini")], capsys)
        assert code == EXIT_PARAMETER


class TestPickands:
    def test_header_and_reproducible(self, tmp_path, capsys):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        argv = ["pickands", "--kappa", "1", "--L-grid", "0,0.5", *FAST]
        assert run(argv + ["-o", str(a)], capsys)[0] == EXIT_OK
        assert run(argv + ["-o", str(b)], capsys)[0] == EXIT_OK
        assert a.read_bytes() == b.read_bytes()
        table = rows(a.read_text())
        assert table[0] == ["L", "H", "std_error", "n_samples", "seed"]
        assert float(table[1][1]) >= float(table[2][1]) > 0

    def test_env_seed(self, tmp_path, capsys, monkeypatch):
        argv = ["pickands", "--kappa", "1", "--n-paths", "500", "--grid-step", "1/32"]
        monkeypatch.setenv("PARISIAN_SEED", "11")
        _, out, _ = run(argv, capsys)
        assert rows(out)[1][4] == "11"
        _, out, _ = run(argv + ["--seed", "12"], capsys)
        assert rows(out)[1][4] == "12"

    def test_worker_count_does_not_change_output(self, capsys):
        argv = ["pickands", "--kappa", "0.7", "--L-grid", "0,0.25", *FAST]
        _, one, _ = run(argv + ["--workers", "1"], capsys)
        _, three, _ = run(argv + ["--workers", "3"], capsys)
        assert one == three


class TestRuinAndAsymptotics:
    def test_ruin_mc(self, capsys):
        code, out, _ = run(["ruin-mc", "--example", "ex31", "--u", "1,2", "--L", "0.05", *FAST], capsys)
        table = rows(out)
        assert code == EXIT_OK and len(table) == 3
        assert float(table[1][2]) >= float(table[2][2])

    def test_ruin_mc_graded(self, capsys):
        argv = ["ruin-mc", "--example", "ex31", "--u", "1", "--graded", "0.5:1/64,1.5:1/16", "--n-paths", "500"]
        code, out, _ = run(argv, capsys)
        assert code == EXIT_OK and rows(out)[1][6] == fmt(1 / 64)

    def test_graded_coverage(self, capsys):
        argv = ["ruin-mc", "--example", "ex31", "--u", "1", "--L", "1", "--graded", "1:1/16", "--n-paths", "10"]
        assert run(argv, capsys)[0] == EXIT_PARAMETER

    def test_asymptotics_degenerate(self, capsys):
        code, out, err = run(["asymptotics", "--example", "ex31", "--u", "3,4", "--L", "0"], capsys)
        table = rows(out)
        assert code == EXIT_OK
        assert float(table[2][-1]) == normal_survival(4.0)
        assert "III_DEGENERATE" in err

    def test_validate(self, capsys):
        argv = ["validate", "--example", "ex31", "--u", "1,1.5", "--L", "0", *FAST]
        code, out, err = run(argv, capsys)
        table = rows(out)
        assert code == EXIT_OK
        assert table[0] == ["u", "L_u", "mc", "mc_std_error", "n_samples", "asymptotic", "ratio", "z_score", "note"]
        for row in table[1:]:
            assert float(row[5]) == normal_survival(float(row[0]))
            assert float(row[6]) == pytest.approx(float(row[2]) / float(row[5]), rel=1e-15)
            assert float(row[6]) > 0
        assert "non-increasing" in err

    def test_validate_needs_increasing_u(self, capsys):
        assert run(["validate", "--example", "ex31", "--u", "2,1", *FAST], capsys)[0] == EXIT_PARAMETER


class TestScalingAndSample:
    def test_scaling_json(self, capsys):
        code, out, _ = run(["scaling-check", "--family", "fbm", "--kappa", "1", "--L", "0", *FAST], capsys)
        rec = json.loads(out)
        assert code == EXIT_OK
        assert {"lhs", "rhs", "combined_se", "z_score"} <= set(rec)
        assert rec["lhs"]["std_error"] > 0 and rec["rhs"]["std_error"] > 0

    def test_scaling_rejects_class(self, capsys):
        argv = ["scaling-check", "--family", "weighted_fbm", *FAST]
        assert run(argv, capsys)[0] == EXIT_PARAMETER

    def test_unknown_family(self, capsys):
        assert run(["sample", "--family", "nope", "--n-paths", "2"], capsys)[0] == EXIT_PARAMETER

    def test_sample(self, tmp_path, capsys):
        out = tmp_path / "p.csv"
        argv = ["sample", "--family", "sub_fbm", "--alpha", "1.5", "--n-paths", "3", "--grid-step", "0.25", "-o",
                str(out)]
        assert run(argv, capsys)[0] == EXIT_OK
        table = rows(out.read_text())
        assert table[0] == ["0.0", "0.25", "0.5", "0.75", "1.0"]
        assert len(table) == 4 and table[1][0] == "0.0"

    def test_numeric_exit_code(self, capsys, monkeypatch):
        import parisian_ruin.sampler as sampler

        monkeypatch.setattr(sampler, "JITTER_LADDER", (0.0,))
        argv = ["sample", "--family", "fbm", "--kappa", "2", "--n-paths", "2", "--grid-step", "0.25"]
        code, _, err = run(argv, capsys)
        assert code == EXIT_NUMERIC and "numeric error" in err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "parisian_ruin", "classify", "--example", "ex31"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert "III_DEGENERATE" in proc.stdout


def test_no_partial_file_on_error(tmp_path, capsys):
    out = tmp_path / "x.csv"
    code, _, _ = run(["ruin-mc", "--example", "ex31", "--u", "1", "--L", "5", "--graded", "1:1/16", "-o", str(out)],
                     capsys)
    assert code == EXIT_PARAMETER
    assert list(tmp_path.iterdir()) == []
