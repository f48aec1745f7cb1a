from __future__ import annotations

from dataclasses import replace

import pytest

from bqpt.harness import ExperimentConfig, run_elementary_test, truth_for

# Budget and K ladder of the paired-seed trend experiments; the same seeds are
# reused at every K so comparisons are paired.
PAIRED_BUDGET = 100_000
PAIRED_K_SWEEP = (1, 10, 100, 1000)
PAIRED_SEEDS = tuple(range(100))

DESK_SEEDS = tuple(range(100))


@pytest.fixture(scope="session")
def default_cfg() -> ExperimentConfig:
    return ExperimentConfig()


@pytest.fixture(scope="session")
def golden_params(default_cfg):
    return default_cfg.process_params()


@pytest.fixture(scope="session")
def protocol_times(default_cfg):
    return default_cfg.protocol_times()


@pytest.fixture(scope="session")
def golden_truth(default_cfg):
    return truth_for(default_cfg)


@pytest.fixture(scope="session")
def paired_sweep_batch(default_cfg):
    """Elementary-test results at fixed budget, every K run with the same seeds."""
    batches = {}
    for k in PAIRED_K_SWEEP:
        cfg = replace(default_cfg, n_states=PAIRED_BUDGET // k, k_copies=k)
        batches[k] = [run_elementary_test(cfg, seed) for seed in PAIRED_SEEDS]
    return batches


@pytest.fixture(scope="session")
def desk_batch_1e4(default_cfg):
    """100 repetitions at N = 10^4, K = 1."""
    cfg = replace(default_cfg, n_states=10_000, k_copies=1)
    return [run_elementary_test(cfg, seed) for seed in DESK_SEEDS]
