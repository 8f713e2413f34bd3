"""End-to-end tests for the command-line interface, run in-process."""

import json

import numpy as np
import pytest

from ordmed import PointSet, write_instance
from ordmed.cli import main

from helpers import T1_COORDS


@pytest.fixture(scope="module")
def t1_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "t1.txt"
    coords = np.array(T1_COORDS).reshape(-1, 1)
    write_instance(path, points=PointSet(coords), p=1)
    return str(path)


@pytest.fixture(scope="module")
def ball_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "ball.txt"
    code = main(["generate", "ball", "--m", "12", "--clusters", "3",
                 "--radius", "0.1", "--sep", "10", "--seed", "7",
                 "-o", str(path)])
    assert code == 0
    return str(path)


def run(capsys, *args):
    code = main(list(args))
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def pairs(text):
    out = {}
    for line in text.strip().split("\n"):
        key, _, val = line.partition(" ")
        out[key] = val
    return out


class TestSolve:
    def test_center_single(self, capsys, t1_path):
        code, out, _ = run(capsys, "solve", "--instance", t1_path,
                           "--weights", "center", "--p", "1")
        assert code == 0
        got = pairs(out)
        assert got["v_ip"] == "7"
        assert got["centers"] == "3"
        assert got["assignment"] == "3 3 3 3 3"

    def test_median_single(self, capsys, t1_path):
        code, out, _ = run(capsys, "solve", "--instance", t1_path,
                           "--weights", "median", "--p", "1")
        assert code == 0
        got = pairs(out)
        assert got["v_ip"] == "18"
        assert got["centers"] == "2"

    def test_p_defaults_to_file(self, capsys, t1_path):
        code, out, _ = run(capsys, "solve", "--instance", t1_path,
                           "--weights", "median")
        assert code == 0
        assert pairs(out)["v_ip"] == "18"


class TestRelax:
    def test_median_recovers(self, capsys, t1_path):
        code, out, err = run(capsys, "relax", "--instance", t1_path,
                             "--weights", "median", "--p", "1")
        assert code == 0
        got = pairs(out)
        assert got["v_ip"] == "18"
        assert got["v_lp"] == "18"
        assert got["gap_lp"] == "0"
        assert got["recovered"] == "true"
        assert got["vertex_integral"] == "true"
        assert "matches" in err

    def test_center_gap(self, capsys, t1_path):
        code, out, err = run(capsys, "relax", "--instance", t1_path,
                             "--weights", "center", "--p", "1")
        assert code == 0
        got = pairs(out)
        assert got["recovered"] == "false"
        assert float(got["v_lp"]) < float(got["v_ip"])
        assert "below" in err

    def test_ot_formulation_agrees(self, capsys, t1_path):
        base = run(capsys, "relax", "--instance", t1_path,
                   "--weights", "median", "--p", "1")[1]
        code, out, _ = run(capsys, "relax", "--instance", t1_path,
                           "--weights", "median", "--p", "1",
                           "--formulation", "ot")
        assert code == 0
        assert float(pairs(out)["v_lp"]) == pytest.approx(
            float(pairs(base)["v_lp"]), rel=1e-9)

    def test_closest_assignment_tightens(self, capsys, t1_path):
        plain = pairs(run(capsys, "relax", "--instance", t1_path,
                          "--weights", "center", "--p", "1")[1])
        cut = pairs(run(capsys, "relax", "--instance", t1_path,
                        "--weights", "center", "--p", "1",
                        "--closest-assignment")[1])
        assert float(cut["v_lp"]) >= float(plain["v_lp"]) - 1e-9
        assert float(cut["v_lp"]) <= float(cut["v_ip"]) + 1e-9

    def test_json_output(self, capsys, t1_path):
        code, out, _ = run(capsys, "relax", "--instance", t1_path,
                           "--weights", "median", "--p", "1", "--json")
        assert code == 0
        rec = json.loads(out)
        assert rec["v_ip"] == 18.0
        assert rec["v_lp"] == 18.0
        assert rec["recovered"] is True

    def test_output_file(self, capsys, t1_path, tmp_path):
        dest = tmp_path / "relax.txt"
        code, out, err = run(capsys, "relax", "--instance", t1_path,
                             "--weights", "median", "--p", "1",
                             "-o", str(dest))
        assert code == 0
        assert out == ""
        assert f"wrote {dest}" in err
        assert pairs(dest.read_text())["v_lp"] == "18"


class TestCertify:
    def test_center_infeasible_still_succeeds(self, capsys, t1_path):
        code, out, err = run(capsys, "certify", "--instance", t1_path,
                             "--weights", "center", "--p", "1")
        assert code == 0
        got = pairs(out)
        assert got["found"] == "false"
        assert got["v_ip"] == "7"
        assert "infeasible" in err

    def test_median_found_and_holds(self, capsys, t1_path):
        code, out, _ = run(capsys, "certify", "--instance", t1_path,
                           "--weights", "median", "--p", "1")
        assert code == 0
        got = pairs(out)
        assert got["found"] == "true"
        assert got["holds"] == "true"
        assert got["centers"] == "2"
        assert len(got["alpha"].split()) == 5

    def test_strict_search(self, capsys, t1_path):
        code, out, _ = run(capsys, "certify", "--instance", t1_path,
                           "--weights", "median", "--p", "1", "--strict")
        assert code == 0
        got = pairs(out)
        assert got["found"] == "true"
        assert got["strict"] == "true"


class TestClusterability:
    def test_csv_and_labels(self, capsys, t1_path, ball_path):
        code, out, _ = run(capsys, "clusterability",
                           "--instance", ball_path, "--instance", t1_path,
                           "--bootstrap", "100", "--seed", "3")
        assert code == 0
        lines = out.strip().split("\n")
        assert lines[0] == "instance,dip,dip_pvalue,label_dip,label_pvalue"
        assert len(lines) == 3
        ball_row = lines[1].split(",")
        t1_row = lines[2].split(",")
        assert ball_row[0] == ball_path
        assert float(ball_row[1]) > float(t1_row[1])
        assert ball_row[3] == "High"
        assert t1_row[3] == "Low"

    def test_single_instance_blank_labels(self, capsys, t1_path):
        code, out, _ = run(capsys, "clusterability", "--instance", t1_path,
                           "--bootstrap", "100")
        assert code == 0
        row = out.strip().split("\n")[1].split(",")
        assert row[3] == ""
        assert row[4] == ""

    def test_json_lines(self, capsys, t1_path, ball_path):
        code, out, _ = run(capsys, "clusterability",
                           "--instance", ball_path, "--instance", t1_path,
                           "--bootstrap", "100", "--json")
        assert code == 0
        recs = [json.loads(line) for line in out.strip().split("\n")]
        assert len(recs) == 2
        assert set(recs[0]) == {"instance", "dip", "dip_pvalue",
                                "label_dip", "label_pvalue"}

    def test_sample_mode_flag(self, capsys, ball_path):
        code, out, _ = run(capsys, "clusterability", "--instance", ball_path,
                           "--bootstrap", "100", "--sample-mode", "mds")
        assert code == 0
        assert out.count("\n") == 2


class TestGenerate:
    def test_chain_recovers(self, capsys, ball_path):
        code, out, _ = run(capsys, "relax", "--instance", ball_path,
                           "--weights", "median", "--p", "3")
        assert code == 0
        assert pairs(out)["recovered"] == "true"

    def test_declared_header(self, capsys, ball_path):
        with open(ball_path) as fh:
            assert fh.readline().split() == ["12", "2", "3"]

    def test_stdout_when_no_output(self, capsys):
        code, out, _ = run(capsys, "generate", "uniform", "--m", "8",
                           "--seed", "1")
        assert code == 0
        assert out.split("\n")[0].split() == ["8", "2", "1"]

    def test_seeded_reruns_identical(self, capsys):
        first = run(capsys, "generate", "ball", "--m", "10", "--clusters", "2",
                    "--sep", "5", "--seed", "4")[1]
        second = run(capsys, "generate", "ball", "--m", "10", "--clusters", "2",
                     "--sep", "5", "--seed", "4")[1]
        assert first == second
        assert first != run(capsys, "generate", "ball", "--m", "10",
                            "--clusters", "2", "--sep", "5", "--seed", "5")[1]


class TestExperiment:
    def test_csv_schema_and_rows(self, capsys, t1_path, ball_path):
        code, out, err = run(capsys, "experiment",
                             "--instance", t1_path, "--instance", ball_path,
                             "--weights", "median", "--weights", "center",
                             "--p", "1", "--bootstrap", "100")
        assert code == 0
        lines = out.strip().split("\n")
        assert lines[0].startswith("instance,m,p,family,param,v_ip,v_lp,gap_lp")
        assert len(lines) == 5
        assert "4 rows, 0 failed" in err
        assert lines[1].split(",")[0] == "t1.txt"
        assert lines[3].split(",")[0] == "ball.txt"

    def test_byte_identical_reruns(self, capsys, t1_path, ball_path):
        args = ("experiment", "--instance", t1_path, "--instance", ball_path,
                "--weights", "median", "--p", "2", "--bootstrap", "100",
                "--seed", "9")
        assert run(capsys, *args)[1] == run(capsys, *args)[1]

    def test_json_rows(self, capsys, t1_path):
        code, out, _ = run(capsys, "experiment", "--instance", t1_path,
                           "--weights", "median", "--p", "1",
                           "--bootstrap", "100", "--json")
        assert code == 0
        rec = json.loads(out.strip().split("\n")[0])
        assert len(rec) == 19
        assert rec["recovered"] is True
        assert rec["time_lp"] is None

    def test_include_times(self, capsys, t1_path):
        code, out, _ = run(capsys, "experiment", "--instance", t1_path,
                           "--weights", "median", "--p", "1",
                           "--bootstrap", "100", "--json", "--include-times")
        assert code == 0
        rec = json.loads(out.strip().split("\n")[0])
        assert rec["time_lp"] >= 0.0
        assert rec["time_enumeration"] >= 0.0

    def test_subsample(self, capsys, ball_path):
        code, out, _ = run(capsys, "experiment", "--instance", ball_path,
                           "--weights", "median", "--p", "2",
                           "--subsample", "6", "--bootstrap", "100")
        assert code == 0
        assert out.strip().split("\n")[1].split(",")[1] == "6"

    def test_profile_dir(self, capsys, t1_path, ball_path, tmp_path):
        prof = tmp_path / "profiles"
        code, _, err = run(capsys, "experiment",
                           "--instance", t1_path, "--instance", ball_path,
                           "--weights", "median", "--weights", "centdian:0.5",
                           "--p", "1", "--bootstrap", "100",
                           "--profile-dir", str(prof))
        assert code == 0
        names = sorted(f.name for f in prof.iterdir())
        assert names == ["profile_centdian_0.5.csv", "profile_median.csv"]
        for name in names:
            table = (prof / name).read_text().strip().split("\n")
            assert table[0] == "threshold_seconds,fraction_solved"
            assert table[-1].endswith(",1")
            assert f"wrote {prof / name}" in err


class TestExitCodes:
    def test_p_exceeds_m(self, capsys, t1_path):
        code, _, err = run(capsys, "solve", "--instance", t1_path, "--p", "9")
        assert code == 1
        assert err.startswith("error:")

    def test_missing_file(self, capsys):
        code, _, err = run(capsys, "relax", "--instance", "/nonexistent/x.txt")
        assert code == 1
        assert err.startswith("error:")

    def test_experiment_without_inputs(self, capsys):
        code, _, err = run(capsys, "experiment", "--weights", "median")
        assert code == 1
        assert "needs" in err

    def test_bad_weight_spec(self, capsys, t1_path):
        code = run(capsys, "relax", "--instance", t1_path,
                   "--weights", "blah")[0]
        assert code == 2

    def test_missing_required_argument(self, capsys):
        assert run(capsys, "relax")[0] == 2

    def test_unknown_subcommand(self, capsys):
        assert run(capsys, "frobnicate")[0] == 2

    def test_bad_ksum_parameter_text(self, capsys, t1_path):
        assert run(capsys, "relax", "--instance", t1_path,
                   "--weights", "ksum:x")[0] == 2


HELP_FLAGS = {
    "solve": ["--instance", "--weights", "--subsample", "--output", "--json",
              "--p"],
    "relax": ["--instance", "--weights", "--subsample", "--output", "--json",
              "--p", "--formulation", "--closest-assignment"],
    "certify": ["--instance", "--weights", "--subsample", "--output",
                "--json", "--p", "--strict", "--eps"],
    "clusterability": ["--instance", "--weights", "--subsample", "--output",
                       "--json", "--bootstrap", "--seed", "--sample-mode"],
    "generate": ["--m", "--clusters", "--radius", "--sep", "--dim", "--seed",
                 "--p", "--output"],
    "experiment": ["--instance", "--pmed", "--weights", "--p", "--subsample",
                   "--seed", "--bootstrap", "--jobs", "--include-times",
                   "--profile-dir", "--output", "--json"],
}


class TestHelp:
    def test_top_level(self, capsys):
        code, out, _ = run(capsys, "--help")
        assert code == 0
        for name in HELP_FLAGS:
            assert name in out

    @pytest.mark.parametrize("sub", sorted(HELP_FLAGS))
    def test_subcommand_documents_flags(self, capsys, sub):
        code, out, _ = run(capsys, sub, "--help")
        assert code == 0
        for flag in HELP_FLAGS[sub]:
            assert flag in out, f"{sub} help is missing {flag}"
