import json

import pytest

import oracles
from bqpt.cli import main


def test_goldens_prints_reference_values(capsys):
    assert main(["goldens"]) == 0
    out = capsys.readouterr().out
    values = {}
    for line in out.splitlines():
        if "=" in line and line[0] in "vw":
            key, text = line.split("=", 1)
            values[key.strip().split()[0]] = float(text)
    assert values["v"] == pytest.approx(oracles.GOLDEN["v_tau1"], abs=1e-12)
    assert values["w1"] == pytest.approx(oracles.GOLDEN["w1_tau2"], abs=1e-12)
    assert values["w2"] == pytest.approx(oracles.GOLDEN["w2_tau2"], abs=1e-12)
    assert "M (tau3)" in out


def test_run_json_output(capsys):
    code = main(
        ["run", "--n-states", "2000", "--k-copies", "1", "--seed", "7", "--json"]
    )
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["seed"] == 7
    assert payload["preparations"] == 6 * 2000
    assert payload["error"] is None
    assert abs(payload["v_hat"] - payload["truth"]["v"]) < 0.1


def test_run_human_output(capsys):
    assert main(["run", "--n-states", "1000", "--seed", "3"]) == 0
    out = capsys.readouterr().out
    assert "v_hat" in out and "m_rel_error" in out


def test_run_reports_estimation_failure(capsys):
    code = main(
        [
            "run",
            "--preset-w-b",
            "w_eq1",
            "--exact-expectations",
            "true",
            "--json",
        ]
    )
    assert code == 2
    payload = json.loads(capsys.readouterr().out)
    assert "NearSingularSystem" in payload["error"]


def test_sweep_writes_csvs(tmp_path, capsys):
    code = main(
        [
            "sweep",
            "--nk-budget",
            "1000",
            "--k-sweep",
            "1,10",
            "--repetitions",
            "2",
            "--output-dir",
            str(tmp_path),
            "--no-timing",
            "--full",
        ]
    )
    assert code == 0
    for name in ("nrmse_v", "nrmse_w1", "nrmse_w2", "m_rel_error"):
        assert (tmp_path / f"{name}.csv").exists()
    assert (tmp_path / "sweep_full.json").exists()
    out = capsys.readouterr().out
    assert "K=1" in out and "wrote" in out


def test_sweep_divisibility_error(tmp_path, capsys):
    code = main(
        [
            "sweep",
            "--nk-budget",
            "1000",
            "--k-sweep",
            "3",
            "--output-dir",
            str(tmp_path),
        ]
    )
    assert code == 1
    assert "configuration error" in capsys.readouterr().err


def test_sweep_failure_rate_exit_code(tmp_path, capsys):
    code = main(
        [
            "sweep",
            "--nk-budget",
            "100",
            "--k-sweep",
            "1",
            "--repetitions",
            "2",
            "--preset-w-b",
            "w_eq1",
            "--exact-expectations",
            "true",
            "--output-dir",
            str(tmp_path),
        ]
    )
    assert code == 2
    assert "failure rate" in capsys.readouterr().err


def test_config_file_and_flag_precedence(tmp_path, capsys):
    cfg_file = tmp_path / "exp.cfg"
    cfg_file.write_text("n_states = 500\nmaster_seed = 11\n")
    code = main(
        [
            "--config",
            str(cfg_file),
            "run",
            "--n-states",
            "250",  # flag beats file
            "--json",
        ]
    )
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["preparations"] == 6 * 250
    assert payload["seed"] == 11  # file beats default


def test_unknown_config_key_is_a_config_error(tmp_path, capsys):
    cfg_file = tmp_path / "bad.cfg"
    cfg_file.write_text("not_a_key = 5\n")
    assert main(["--config", str(cfg_file), "goldens"]) == 1
    assert "configuration error" in capsys.readouterr().err


def test_output_dir_env_override(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("BQPT_OUTPUT_DIR", str(tmp_path / "from_env"))
    code = main(
        [
            "sweep",
            "--nk-budget",
            "1000",
            "--k-sweep",
            "1",
            "--repetitions",
            "1",
            "--no-timing",
        ]
    )
    assert code == 0
    assert (tmp_path / "from_env" / "nrmse_v.csv").exists()


def test_selftest_passes(capsys):
    assert main(["selftest"]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == 4 and "FAIL" not in out
