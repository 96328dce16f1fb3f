import json

import pytest

from splitmodel.cli import build_parser, main


def _run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_config_rejections(capsys):
    code, _, err = _run(["census", "--n", "5"], capsys)
    assert code == 2
    assert err.strip() == "n must be even"
    code, _, err = _run(["census", "--n", "4", "--s", "8"], capsys)
    assert code == 2
    assert "s must be at most n/2" in err
    code, _, err = _run(["census", "--n", "4", "--q", "4"], capsys)
    assert code == 2
    assert "odd prime" in err
    code, _, err = _run(["closure", "--format", "csv"], capsys)
    assert code == 2
    assert "census strata" in err
    code, _, err = _run(["closure", "--truncation", "2"], capsys)
    assert code == 2
    assert "truncation" in err
    code, _, err = _run(["groebner", "--s", "4"], capsys)
    assert code == 2
    assert "--allow-long" in err
    code, _, err = _run(["groebner", "--s", "5"], capsys)
    assert code == 2
    assert "basis jobs" in err


def test_census_exhaustive_report(tmp_path, capsys):
    out = tmp_path / "census.json"
    code, stdout, _ = _run(["census", "--n", "4", "--s", "2", "--q", "3",
                            "--strategy", "exhaustive",
                            "--output", str(out)], capsys)
    assert code == 0
    assert stdout == ""
    report = json.loads(out.read_text())
    assert report["schema"] == 1
    assert report["failures"] == 0
    assert report["census"]["strata"] == [
        {"h": 0, "l": 0, "count": 90},
        {"h": 0, "l": 2, "count": 40},
        {"h": 2, "l": 2, "count": 120},
    ]


def test_census_csv_projection(tmp_path, capsys):
    out = tmp_path / "census.csv"
    code, _, _ = _run(["census", "--n", "4", "--s", "2", "--format", "csv",
                       "--output", str(out)], capsys)
    assert code == 0
    assert out.read_text() == "h,l,count\n0,0,90\n0,2,40\n2,2,120\n"


def test_reruns_are_byte_identical(tmp_path, capsys):
    out = tmp_path / "charts.json"
    argv = ["charts", "--n", "6", "--s", "2", "--budget", "60",
            "--seed", "11", "--output", str(out)]
    assert main(argv) == 0
    first = out.read_bytes()
    assert main(argv) == 0
    capsys.readouterr()
    assert out.read_bytes() == first


def test_env_var_names_output_directory(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("SPLITMODEL_OUTPUT_DIR", str(tmp_path))
    code, _, _ = _run(["flatlift", "--budget", "2", "--output", "lift.json"],
                      capsys)
    assert code == 0
    report = json.loads((tmp_path / "lift.json").read_text())
    assert report["failures"] == 0


def test_closure_report(capsys):
    code, stdout, _ = _run(["closure", "--s", "2"], capsys)
    assert code == 0
    report = json.loads(stdout)
    assert report["config"]["n"] == 6
    assert report["closures"] == {"0,0": [[0, 0], [0, 2]],
                                  "0,2": [[0, 2]],
                                  "2,2": [[0, 2], [2, 2]]}
    assert len(report["lifts"]) == 5
    assert all(entry["ok"] for entry in report["lifts"])
    assert [w["label"] for w in report["witnesses"]] == [[0, 2]]
    assert report["witnesses"][0]["matches_expected"]
    assert "closure-maximal" in report["poset"]["component_count_note"]


def test_charts_report(capsys):
    code, stdout, _ = _run(["charts", "--n", "6", "--s", "3",
                            "--budget", "80"], capsys)
    assert code == 0
    report = json.loads(stdout)
    assert report["checked"] == 80
    assert report["agreed"] == 80
    assert report["certificates"] == []
    labels = {(row["h"], row["l"]) for row in report["strata"]}
    assert labels <= {(1, 1), (1, 3), (3, 3)}


def test_flatlift_report(capsys):
    code, stdout, _ = _run(["flatlift", "--budget", "4"], capsys)
    assert code == 0
    report = json.loads(stdout)
    assert report["config"]["q"] == 5
    assert [p["profile"] for p in report["profiles"]] == [
        [1, 0], [0, 1], [1, 1], [2, 0], [2, 1]]
    assert all(p["ok"] == 4 for p in report["profiles"])


def test_groebner_base_case_report(capsys):
    code, stdout, _ = _run(["groebner", "--s", "2"], capsys)
    assert code == 0
    report = json.loads(stdout)
    assert report["basis_special"]["basis"] == ["1*t_1_2*w_1_2"]
    assert report["basis_generic"]["basis"] == ["1*t_1_2*w_1_2 + 2*pi"]
    certs = report["certificates"]
    assert certs["principal"] and certs["generator_squarefree"]
    assert certs["product_square_in_special_ideal"]
    assert certs["product_square_in_special_ideal_brute"]
    assert certs["routes_agree"]
    assert certs["product_outside_generic_ideal"]
    assert certs["generic_leftover"] == "1*pi"
    assert report["substitution"]["ok"]


def test_groebner_long_job(capsys):
    code, stdout, _ = _run(["groebner", "--s", "4", "--allow-long"], capsys)
    assert code == 0
    report = json.loads(stdout)
    assert report["failures"] == 0
    assert len(report["basis_special"]["basis"]) == 20
    assert "certificates" not in report
    assert "substitution" not in report


def test_schubert_exhaustive_small(capsys):
    code, stdout, _ = _run(["schubert", "--n", "4", "--s", "1"], capsys)
    assert code == 0
    report = json.loads(stdout)
    assert report["tau"]["cells"] == [
        {"cell": 1, "labels": [{"h": 1, "l": 1}], "count": 40}]
    assert report["phi"] == {"z_points": 40, "passed": 40, "failures": []}


def test_schubert_sampled(capsys):
    code, stdout, _ = _run(["schubert", "--n", "6", "--s", "2",
                            "--strategy", "chart-sampled",
                            "--budget", "40"], capsys)
    assert code == 0
    report = json.loads(stdout)
    assert report["tau"]["exhaustive"] is False
    assert not report["tau"]["problems"]
    assert report["phi"]["passed"] == report["phi"]["z_points"] > 0


def test_parser_lists_all_subcommands():
    parser = build_parser()
    text = parser.format_help()
    for name in ("census", "closure", "charts", "flatlift", "groebner",
                 "schubert"):
        assert name in text
