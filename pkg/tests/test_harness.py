import json
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

import bqpt.harness as harness
from bqpt.estimators import IndeterminateSignError
from bqpt.harness import (
    ConfigError,
    ExperimentConfig,
    aggregate_point,
    config_from_mapping,
    derive_seed,
    parse_config_file,
    run_elementary_test,
    run_sweep,
    truth_for,
    write_full_json,
    write_sweep_csvs,
)
from conftest import PAIRED_SEEDS


def small_cfg(**overrides):
    base = dict(n_states=800, k_copies=1, repetitions=2, record_timing=False)
    base.update(overrides)
    return ExperimentConfig(**base)


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


def test_default_config_is_valid():
    ExperimentConfig().validate()


def test_config_rejects_bad_values():
    with pytest.raises(ConfigError):
        ExperimentConfig(n_states=0).validate()
    with pytest.raises(ConfigError):
        ExperimentConfig(k_sweep=(3,), nk_budget=100).validate()
    with pytest.raises(ConfigError):
        ExperimentConfig(preset_v_mag="nope").validate()
    with pytest.raises(ConfigError):
        ExperimentConfig(series_n=(1, 2)).validate()
    with pytest.raises(ConfigError):
        # a symmetric-phase ensemble cannot carry the sign information
        ExperimentConfig(preset_v_sign="step1").validate()
    with pytest.raises(ConfigError):
        # the w step needs identical laws for both qubits
        ExperimentConfig(preset_w_a="step1").validate()


def test_config_mapping_parsers():
    cfg = config_from_mapping(
        {
            "n_states": "123",
            "k_sweep": "1, 2,4",
            "tau1_ns": "0.7",
            "record_timing": "false",
            "full_records": "on",
        }
    )
    assert cfg.n_states == 123
    assert cfg.k_sweep == (1, 2, 4)
    assert cfg.tau1_ns == 0.7
    assert cfg.record_timing is False
    assert cfg.full_records is True


def test_config_mapping_rejects_unknown_keys():
    with pytest.raises(ConfigError):
        config_from_mapping({"bogus": "1"})
    with pytest.raises(ConfigError):
        config_from_mapping({"n_states": "abc"})


def test_parse_config_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(
        """
        # comment
        n_states = 42
        master_seed = 9   # trailing comment
        preset_w_a = w_eq1
        """
    )
    entries = parse_config_file(path)
    assert entries == {"n_states": "42", "master_seed": "9", "preset_w_a": "w_eq1"}
    cfg = config_from_mapping(entries)
    assert cfg.n_states == 42 and cfg.master_seed == 9


def test_parse_config_file_rejects_garbage(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("just words\n")
    with pytest.raises(ConfigError):
        parse_config_file(path)


def test_physical_constants_overridable():
    cfg = config_from_mapping({"mu_e": "1.0e-23", "hbar": "1.0e-34"})
    params = cfg.process_params()
    assert params.constants.mu_e == 1.0e-23
    assert params.constants.hbar == 1.0e-34
    assert params.big_g == pytest.approx(2.0e-23, rel=1e-15)
    with pytest.raises(ConfigError):
        ExperimentConfig(mu_e=-1.0).validate()


def test_derived_seeds_are_distinct():
    seeds = {
        derive_seed(42, point, rep) for point in range(8) for rep in range(100)
    }
    assert len(seeds) == 800


# ---------------------------------------------------------------------------
# elementary tests
# ---------------------------------------------------------------------------


def test_same_seed_gives_bit_identical_results():
    cfg = small_cfg()
    a = run_elementary_test(cfg, 5)
    b = run_elementary_test(cfg, 5)
    assert a == b  # includes float-exact equality of every field


def test_different_seeds_give_different_results():
    cfg = small_cfg()
    assert run_elementary_test(cfg, 5) != run_elementary_test(cfg, 6)


def test_preparation_budget_is_six_nk():
    cfg = small_cfg(n_states=300, k_copies=4)
    result = run_elementary_test(cfg, 1)
    assert result.preparations == 6 * 300 * 4
    assert result.error is None


def test_per_series_overrides():
    cfg = small_cfg(series_n=(100, 100, 200, 200, 300, 300), series_k=(1,) * 6)
    result = run_elementary_test(cfg, 1)
    assert result.preparations == 2 * (100 + 200 + 300)


def test_exact_expectation_mode_is_noise_free():
    cfg = ExperimentConfig(exact_expectations=True, record_timing=False)
    result = run_elementary_test(cfg, 0)
    assert result.m_rel_error <= 1e-8  # stated harness bound
    assert result.m_rel_error <= 1e-10  # analytic-moment bound
    assert result.preparations == 0
    assert result.clamp_flags == ()
    # exact mode ignores the seed entirely (apart from recording it)
    assert result == replace(run_elementary_test(cfg, 99), seed=result.seed)


def test_estimates_approach_truth(golden_truth):
    cfg = ExperimentConfig(n_states=20_000, k_copies=1, record_timing=False)
    result = run_elementary_test(cfg, 77)
    assert result.error is None
    assert result.v_hat == pytest.approx(golden_truth.v, abs=0.02)
    assert result.w1_hat == pytest.approx(golden_truth.w1, abs=0.15)
    assert np.sign(result.w2_hat) == np.sign(golden_truth.w2)
    assert 0.0 < result.m_rel_error < 0.2


def test_estimation_failure_is_recorded_not_raised():
    # identical w ensembles make the two w equations exactly dependent in
    # noise-free mode
    cfg = small_cfg(preset_w_b="w_eq1", exact_expectations=True)
    result = run_elementary_test(cfg, 3)
    assert result.error is not None
    assert "NearSingularSystem" in result.error
    assert np.isnan(result.v_hat) and np.isnan(result.m_rel_error)


def test_sign_retry_policy(monkeypatch):
    calls = {"n": 0}
    original = harness.single_preparation_estimates

    def flaky(*args, **kwargs):
        calls["n"] += 1
        if calls["n"] == 1:
            raise IndeterminateSignError("forced")
        return original(*args, **kwargs)

    monkeypatch.setattr(harness, "single_preparation_estimates", flaky)
    cfg = small_cfg(retry_sign_failure=True)
    result = run_elementary_test(cfg, 8)
    assert result.error is None
    assert calls["n"] == 2
    assert result.preparations == 7 * 800  # one extra sign series

    calls["n"] = 0
    cfg_no_retry = small_cfg(retry_sign_failure=False)
    result = run_elementary_test(cfg_no_retry, 8)
    assert result.error is not None and "IndeterminateSign" in result.error


def test_record_file_dump(tmp_path):
    path = tmp_path / "trials.csv"
    cfg = small_cfg(n_states=50, k_copies=2, record_file=str(path))
    run_elementary_test(cfg, 4)
    lines = Path(path).read_text().splitlines()
    assert lines[0] == "series_id,axis,state_index,outcome"
    assert len(lines) == 1 + 6 * 50 * 2
    series, axes = set(), set()
    for line in lines[1:]:
        sid, axis, state_index, outcome = line.split(",")
        series.add(int(sid))
        axes.add(axis)
        assert 0 <= int(state_index) < 50
        assert 1 <= int(outcome) <= 4
    assert series == set(range(6))
    assert axes == {"z", "x"}


# ---------------------------------------------------------------------------
# sweeps and outputs
# ---------------------------------------------------------------------------


def sweep_cfg(tmp_path, **overrides):
    base = dict(
        nk_budget=2000,
        k_sweep=(1, 10),
        repetitions=3,
        record_timing=False,
        output_dir=str(tmp_path),
    )
    base.update(overrides)
    return ExperimentConfig(**base)


def test_run_sweep_shape(tmp_path):
    result = run_sweep(sweep_cfg(tmp_path))
    assert [p.k for p in result.points] == [1, 10]
    assert [p.n for p in result.points] == [2000, 200]
    for point in result.points:
        assert point.repetitions == 3
        assert point.excluded == 0
        assert set(point.criteria) == set(harness.CRITERIA)
        for mean, std in point.criteria.values():
            assert np.isfinite(mean) and np.isfinite(std)
    assert result.failure_rate == 0.0


def test_single_repetition_sweep(tmp_path):
    result = run_sweep(sweep_cfg(tmp_path, repetitions=1))
    for point in result.points:
        for _, std in point.criteria.values():
            assert std == 0.0


def test_sweep_csv_schema_and_determinism(tmp_path):
    cfg = sweep_cfg(tmp_path)
    result = run_sweep(cfg)
    dir_a, dir_b = tmp_path / "a", tmp_path / "b"
    paths_a = write_sweep_csvs(result, dir_a)
    paths_b = write_sweep_csvs(run_sweep(cfg), dir_b)
    assert [p.name for p in paths_a] == [
        "nrmse_v.csv",
        "nrmse_w1.csv",
        "nrmse_w2.csv",
        "m_rel_error.csv",
    ]
    for pa, pb in zip(paths_a, paths_b):
        assert pa.read_bytes() == pb.read_bytes()  # byte-identical reruns
    text = paths_a[0].read_text().splitlines()
    assert text[0] == "# bqpt sweep"
    assert any(line.startswith("# master_seed: ") for line in text)
    header_index = next(i for i, l in enumerate(text) if not l.startswith("#"))
    assert text[header_index] == (
        "K,N,repetitions,criterion_mean,criterion_std,clamp_rate,wall_seconds"
    )
    rows = text[header_index + 1 :]
    assert len(rows) == 2
    assert rows[0].split(",")[:3] == ["1", "2000", "3"]


def test_full_json_records(tmp_path):
    cfg = sweep_cfg(tmp_path, full_records=True)
    result = run_sweep(cfg)
    path = write_full_json(result, tmp_path)
    payload = json.loads(path.read_text())
    assert payload["master_seed"] == cfg.master_seed
    assert len(payload["points"]) == 2
    reps = payload["points"][0]["repetitions"]
    assert len(reps) == 3
    assert {"seed", "v_hat", "m_rel_error", "clamp_flags"} <= set(reps[0])
    assert payload["truth"]["v"] == pytest.approx(truth_for(cfg).v)


def test_failed_repetitions_are_excluded_from_aggregates(tmp_path):
    cfg = sweep_cfg(
        tmp_path, preset_w_b="w_eq1", repetitions=2, exact_expectations=True
    )
    result = run_sweep(cfg)
    assert result.failure_rate == 1.0
    for point in result.points:
        assert point.excluded == 2
        assert all(np.isnan(mean) for mean, _ in point.criteria.values())
    text = (write_sweep_csvs(result, tmp_path)[0]).read_text()
    assert "# excluded: K=1:2 K=10:2" in text


def test_aggregate_point_excludes_failures(golden_truth):
    cfg = small_cfg()
    good = [run_elementary_test(cfg, s) for s in (1, 2, 3)]
    bad = run_elementary_test(
        small_cfg(preset_w_b="w_eq1", exact_expectations=True), 4
    )
    point = aggregate_point(1, 800, good + [bad], golden_truth)
    assert point.excluded == 1
    assert np.isfinite(point.criteria["m_rel_error"][0])


# ---------------------------------------------------------------------------
# statistical monotonicity at fixed budget (paired seeds)
# ---------------------------------------------------------------------------


def test_fewer_copies_per_state_beat_more_at_fixed_budget(
    paired_sweep_batch, golden_truth
):
    m_err = {
        k: np.array([r.m_rel_error for r in results])
        for k, results in paired_sweep_batch.items()
    }
    assert all(np.all(np.isfinite(v)) for v in m_err.values())
    # aggregate ordering of the mean matrix error
    assert m_err[1].mean() < m_err[100].mean() < m_err[1000].mean()
    # per-seed: strict majority against K=100, and dominance against K=1000
    assert np.mean(m_err[1] < m_err[100]) > 0.5
    assert np.sum(m_err[1] < m_err[1000]) >= 0.9 * len(PAIRED_SEEDS)
