import json

import pytest

from rieszlab import cli


def write_config(tmp_path, **body):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(body))
    return str(path)


# -- schema --------------------------------------------------------------


def test_unknown_experiment_id_is_schema_error(tmp_path, capsys):
    cfg = write_config(tmp_path, experiment="warp_drive")
    assert cli.main(["run", cfg]) == 2
    err = capsys.readouterr().err
    assert "unknown experiment id" in err and "warp_drive" in err


def test_unknown_top_level_key_rejected(tmp_path, capsys):
    cfg = write_config(tmp_path, experiment="jensen", seeed=1)
    assert cli.main(["run", cfg]) == 2
    assert "seeed" in capsys.readouterr().err


def test_unknown_param_rejected(tmp_path, capsys):
    cfg = write_config(tmp_path, experiment="jensen", params={"paths": 4})
    assert cli.main(["run", cfg]) == 2
    assert "paths" in capsys.readouterr().err


def test_non_object_config_rejected(tmp_path, capsys):
    path = tmp_path / "cfg.json"
    path.write_text("[1, 2]")
    assert cli.main(["run", str(path)]) == 2
    assert "root must be an object" in capsys.readouterr().err


def test_type_checked_fields(tmp_path):
    cfg = write_config(tmp_path, experiment="jensen", seed="zero")
    assert cli.main(["run", cfg]) == 2


def test_missing_config_file(tmp_path):
    assert cli.main(["run", str(tmp_path / "absent.json")]) == 2


# -- list-fixtures -------------------------------------------------------


def test_list_fixtures_prints_catalog(capsys):
    assert cli.main(["list-fixtures"]) == 0
    out = capsys.readouterr().out
    lines = [l for l in out.splitlines() if l]
    assert len(lines) >= 25
    assert any(l.startswith("moment-kernel\toperators") for l in lines)


def test_list_fixtures_module_filter(capsys):
    assert cli.main(["list-fixtures", "--module", "stochastic"]) == 0
    out = capsys.readouterr().out
    assert out and all("\tstochastic\t" in l for l in out.splitlines())


def test_list_fixtures_empty_filter_is_quiet_success(capsys):
    assert cli.main(["list-fixtures", "--module", "nope"]) == 0
    assert capsys.readouterr().out == ""


# -- run -----------------------------------------------------------------


def test_run_jensen_writes_report_pair(tmp_path, capsys):
    cfg = write_config(tmp_path, experiment="jensen", seed=3, params={"count": 50})
    assert cli.main(["run", cfg, "--out-dir", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "jensen: PASS" in out
    report = json.loads((tmp_path / "jensen.json").read_text())
    assert report["passed"] is True
    assert report["params"]["count"] == 50
    assert report["params"]["seed"] == 3
    assert {o["provenance"] for o in report["oracles"]} <= {"closed-form", "quadrature", "monte-carlo", "identity"}
    csv_lines = (tmp_path / "jensen.csv").read_text().splitlines()
    assert csv_lines[0] == "trial,shape,dim,min_gap"
    assert len(csv_lines) == 51


def test_run_modular_law_emits_law_table(tmp_path):
    cfg = write_config(tmp_path, experiment="modular_law", horizon=6)
    assert cli.main(["run", cfg, "--out-dir", str(tmp_path)]) == 0
    lines = (tmp_path / "modular_law.csv").read_text().splitlines()
    assert lines[0] == "n,rho,reference,abs_error"
    assert len(lines) == 7
    first = lines[1].split(",")
    assert first[0] == "1"
    assert float(first[2]) == 0.25
    assert float(first[3]) <= 1e-6


def test_run_flag_overrides_config(tmp_path):
    cfg = write_config(tmp_path, experiment="reproduction", horizon=12)
    assert cli.main(["run", cfg, "--out-dir", str(tmp_path), "--horizon", "5"]) == 0
    report = json.loads((tmp_path / "reproduction.json").read_text())
    assert report["params"]["horizon"] == 5
    assert len(report["rows"]) == 5


def test_run_failure_names_clause_and_exits_one(tmp_path, capsys):
    # twelve indices certify fine but cannot reach the default tolerance
    cfg = write_config(tmp_path, experiment="uniform_tent", horizon=12, resolution=2**10)
    assert cli.main(["run", cfg, "--out-dir", str(tmp_path)]) == 1
    captured = capsys.readouterr()
    assert "uniform_tent: FAIL" in captured.out
    assert "final_error_below_tolerance" in captured.err
    report = json.loads((tmp_path / "uniform_tent.json").read_text())
    assert report["passed"] is False


def test_run_refuses_when_certification_cannot_close(tmp_path, capsys):
    # a six-index audit window still carries visible tail mass
    cfg = write_config(tmp_path, experiment="uniform_tent", horizon=6, resolution=2**10)
    assert cli.main(["run", cfg, "--out-dir", str(tmp_path)]) == 1
    assert "refused" in capsys.readouterr().err


def test_run_is_byte_deterministic(tmp_path):
    cfg = write_config(tmp_path, experiment="ito", seed=11, params={"paths": 2048, "steps": 128})
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli.main(["run", cfg, "--out-dir", str(a)]) == 0
    assert cli.main(["run", cfg, "--out-dir", str(b)]) == 0
    assert (a / "ito.csv").read_bytes() == (b / "ito.csv").read_bytes()
    ja = json.loads((a / "ito.json").read_text())
    jb = json.loads((b / "ito.json").read_text())
    assert {k for k in set(ja) | set(jb) if ja.get(k) != jb.get(k)} <= {"generated_at"}


def test_run_renders_figure_when_series_present(tmp_path):
    cfg = write_config(tmp_path, experiment="moment_tail", horizon=8)
    assert cli.main(["run", cfg, "--out-dir", str(tmp_path)]) == 0
    assert (tmp_path / "moment_tail.png").exists()


# -- plot-data -----------------------------------------------------------


def test_plot_data_long_format(tmp_path, capsys):
    cfg = write_config(tmp_path, experiment="moment_tail", horizon=8)
    assert cli.main(["run", cfg, "--out-dir", str(tmp_path)]) == 0
    capsys.readouterr()
    assert cli.main(["plot-data", str(tmp_path / "moment_tail.json")]) == 0
    out = capsys.readouterr().out
    lines = out.splitlines()
    assert lines[0] == "series,x,y"
    assert len(lines) == 1 + 2 * 8
    assert lines[1].startswith("tail_mass,1,")


def test_plot_data_to_file(tmp_path, capsys):
    cfg = write_config(tmp_path, experiment="jensen", params={"count": 20})
    assert cli.main(["run", cfg, "--out-dir", str(tmp_path)]) == 0
    target = tmp_path / "long.csv"
    assert cli.main(["plot-data", str(tmp_path / "jensen.json"), "--out", str(target)]) == 0
    assert target.read_text().splitlines()[0] == "series,x,y"


def test_plot_data_parse_error(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{ nope")
    assert cli.main(["plot-data", str(bad)]) == 2
    assert "cannot parse" in capsys.readouterr().err
