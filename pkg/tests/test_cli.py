import json

import pytest

from attachsim.cli import EXIT_CONFIG, EXIT_FAILURE, EXIT_OK, main


def test_simulate_writes_csv(tmp_path, capsys):
    out = tmp_path / "snap.csv"
    code = main(["simulate", "--model", "pam", "--m", "2", "--delta", "1/2",
                 "--t-max", "500", "--seed", "3", "--observer", "matching",
                 "--out", str(out)])
    assert code == EXIT_OK
    lines = out.read_text().splitlines()
    assert lines[0] == "t,metric,value"
    assert any(line.startswith("500,matched_frac,") for line in lines)


def test_simulate_stdout(capsys):
    code = main(["simulate", "--model", "uam", "--m", "1", "--t-max", "100",
                 "--seed", "1", "--observer", "independent",
                 "--schedule", "10,100"])
    assert code == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "t,metric,value"
    assert {line.split(",")[0] for line in lines[1:]} == {"10", "100"}


def test_simulate_rejects_bad_delta(capsys):
    code = main(["simulate", "--model", "pam", "--m", "1", "--delta", "-2",
                 "--t-max", "100", "--seed", "1"])
    assert code == EXIT_CONFIG
    assert "delta below -m" in capsys.readouterr().err


def test_constants_table(capsys):
    code = main(["constants", "--kind", "uam-matching", "--m", "1,2"])
    assert code == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "kind,m,delta,value,bracket_width"
    row = dict(zip(lines[0].split(","), lines[1].split(",")))
    assert row["kind"] == "uam_matching_r" and row["m"] == "1"
    assert abs(float(row["value"]) - 2 / 3) < 1e-9
    assert float(row["bracket_width"]) <= 1e-12


def test_constants_pam_with_delta(capsys):
    code = main(["constants", "--kind", "pam-matching", "--m", "2",
                 "--delta", "0,1/2"])
    assert code == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 3
    assert lines[1].split(",")[2] == "0"
    assert lines[2].split(",")[2] == "1/2"


@pytest.mark.parametrize("suite,extra", [
    ("martingale", ["--t-max", "8", "--ell-max", "3"]),
    ("stirling", ["--ell-max", "8"]),
    ("steplaw", ["--t-max", "3", "--m-max", "2"]),
])
def test_verify_suites_pass(suite, extra, capsys):
    assert main(["verify", suite] + extra) == EXIT_OK
    assert "all checks passed" in capsys.readouterr().out


def test_verify_coupling(capsys):
    code = main(["verify", "coupling", "--m", "2", "--delta", "1/2",
                 "--t", "50", "--trials", "5", "--seed", "1",
                 "--prefix-t", "3", "--prefixes", "2"])
    assert code == EXIT_OK
    assert "all checks passed" in capsys.readouterr().out


def test_experiment_with_config_file(tmp_path):
    cfg = {"model": "uam", "m": 1, "t_max": 2000, "seed": 4, "trials": 100,
           "observer": "descendants", "root": 2, "tolerance": 0.1}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    out = tmp_path / "report.json"
    code = main(["experiment", "--config", str(path), "--out", str(out)])
    assert code == EXIT_OK
    report = json.loads(out.read_text())
    assert report["passed"] is True
    assert len(report["samples"]) == 100


def test_experiment_config_overrides_keep_paths(tmp_path):
    out = tmp_path / "by_config.json"
    cfg = {"model": "uam", "m": 1, "t_max": 500, "seed": 4, "trials": 5,
           "observer": "descendants", "root": 2, "law": "none",
           "report_path": str(out)}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    code = main(["experiment", "--config", str(path), "--trials", "7"])
    assert code == EXIT_OK
    report = json.loads(out.read_text())
    assert len(report["samples"]) == 7  # override applied, path kept


def test_experiment_inline_flags(tmp_path):
    out = tmp_path / "r.json"
    code = main(["experiment", "--model", "pam", "--m", "2", "--delta", "1",
                 "--t-max", "5000", "--seed", "9", "--trials", "3",
                 "--observer", "independent", "--tolerance", "0.05",
                 "--out", str(out)])
    assert code == EXIT_OK
    report = json.loads(out.read_text())
    assert report["law_kind"] == "independent"


def test_experiment_failure_exit_code(tmp_path, capsys):
    # impossible tolerance forces a verdict failure -> exit 3
    code = main(["experiment", "--model", "uam", "--m", "2", "--t-max", "500",
                 "--seed", "2", "--trials", "3", "--observer", "matching",
                 "--tolerance", "1e-9"])
    assert code == EXIT_FAILURE


def test_experiment_malformed_config(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{"model": "uam", "m": 0, "t_max": 10, "seed": 1}')
    assert main(["experiment", "--config", str(path)]) == EXIT_CONFIG
    assert "m" in capsys.readouterr().err


def test_experiment_missing_required(capsys):
    assert main(["experiment", "--model", "uam"]) == EXIT_CONFIG
    assert "required" in capsys.readouterr().err
