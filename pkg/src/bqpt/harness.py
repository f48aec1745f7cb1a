"""Experiment orchestration: elementary tests, fixed-budget sweeps and output.

An elementary test runs six measurement series (two z series at tau1 for the
magnitude and sign of v, then a z and an x series at tau2 for each of the two
w ensembles), feeds the estimated expectations through the single-preparation
chain, reconstructs the propagator at tau3 and scores it against the truth.
A sweep holds the preparation budget N*K fixed, varies the number of copies K
per state, and repeats each point to estimate the four error criteria.
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np

from . import rng
from .estimators import (
    AsymmetricStatisticsError,
    EstimationError,
    IndeterminateSignError,
    OxStatistics,
    OzStatistics,
    check_w_step_moments,
    exact_ox_expectations,
    exact_oz_expectations,
    single_preparation_estimates,
)
from .measurement import (
    FrequencyAccumulator,
    dump_records,
    ox_probabilities,
    oz_probabilities,
    sample_outcomes,
)
from .physics import (
    PhysicalConstants,
    ProcessParams,
    apply_process,
    build_evolution_matrix,
    mixing_parameters,
)
from .reconstruction import (
    ProtocolTimes,
    extended_protocol,
    relative_error,
    nrmse,
)
from .states import (
    PRESETS,
    PrepDistribution,
    analytic_moments,
    product_states,
    sample_ensemble,
)

CRITERIA = ("nrmse_v", "nrmse_w1", "nrmse_w2", "m_rel_error")

# Role, measurement axis and interval index (1 -> tau1, 2 -> tau2) of the six
# series of one elementary test, in stream order.
SERIES = (
    ("v_mag", "z", 1),
    ("v_sign", "z", 1),
    ("w_a", "z", 2),
    ("w_a", "x", 2),
    ("w_b", "z", 2),
    ("w_b", "x", 2),
)

# Stream series-id used when the sign series is re-drawn after an
# indeterminate-sign failure.
RETRY_SIGN_SERIES_ID = len(SERIES) + 1


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything an elementary test or sweep needs, with protocol defaults."""

    n_states: int = 10_000
    k_copies: int = 1
    repetitions: int = 100
    nk_budget: int = 100_000
    k_sweep: tuple[int, ...] = (1, 10, 100, 1000)
    master_seed: int = 42
    g: float = 2.0
    b_field: float = 1.0
    jz_kelvin: float = 1.0
    jxy_kelvin: float = 0.3
    tau1_ns: float = 0.51
    mu_e: float = 0.927e-23
    hbar: float = 1.054571817e-34
    k_b: float = 1.380649e-23
    preset_v_mag: str = "step1"
    preset_v_sign: str = "step2"
    preset_w_a: str = "w_eq1"
    preset_w_b: str = "w_eq2"
    k_xy_hat: int = 0
    k_z_hat: int = 0
    output_dir: str = "results"
    full_records: bool = False
    record_timing: bool = True
    retry_sign_failure: bool = False
    failure_threshold: float = 0.05
    exact_expectations: bool = False
    record_file: str | None = None
    series_n: tuple[int, ...] | None = None
    series_k: tuple[int, ...] | None = None

    def validate(self) -> None:
        if self.n_states < 1 or self.k_copies < 1:
            raise ConfigError("n_states and k_copies must be >= 1")
        if self.repetitions < 1:
            raise ConfigError("repetitions must be >= 1")
        if self.tau1_ns <= 0:
            raise ConfigError("tau1_ns must be positive")
        try:
            self.constants()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        for k in self.k_sweep:
            if k < 1 or self.nk_budget % k:
                raise ConfigError(
                    f"sweep entry K={k} does not divide nk_budget={self.nk_budget}"
                )
        for role in ("v_mag", "v_sign", "w_a", "w_b"):
            name = getattr(self, f"preset_{role}")
            if name not in PRESETS:
                raise ConfigError(f"unknown preset {name!r} for {role}")
        for attr in ("series_n", "series_k"):
            override = getattr(self, attr)
            if override is not None and len(override) != len(SERIES):
                raise ConfigError(f"{attr} must list one value per series")
        sign = analytic_moments(self.preset("v_sign")).sign_e_sin_delta_i
        if sign == 0:
            raise ConfigError(
                "the v-sign preset must have a non-zero E{sin delta_i}"
            )
        for role in ("w_a", "w_b"):
            try:
                check_w_step_moments(analytic_moments(self.preset(role)))
            except AsymmetricStatisticsError as exc:
                raise ConfigError(f"preset for {role}: {exc}") from exc
        if not 0.0 <= self.failure_threshold <= 1.0:
            raise ConfigError("failure_threshold must lie in [0, 1]")

    def preset(self, role: str) -> PrepDistribution:
        return PRESETS[getattr(self, f"preset_{role}")]

    def constants(self) -> PhysicalConstants:
        return PhysicalConstants(mu_e=self.mu_e, hbar=self.hbar, k_B=self.k_b)

    def process_params(self) -> ProcessParams:
        return ProcessParams.from_kelvin(
            g=self.g,
            b_field=self.b_field,
            j_z_kelvin=self.jz_kelvin,
            j_xy_kelvin=self.jxy_kelvin,
            constants=self.constants(),
        )

    def protocol_times(self) -> ProtocolTimes:
        return ProtocolTimes.from_tau1(self.tau1_ns * 1e-9)

    def series_sizes(self, series_index: int) -> tuple[int, int]:
        n = self.series_n[series_index] if self.series_n else self.n_states
        k = self.series_k[series_index] if self.series_k else self.k_copies
        return n, k


# Parsers for config-file / CLI string values, one per configurable field.
def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


def _parse_int_tuple(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError as exc:
        raise ConfigError(f"expected comma-separated integers, got {text!r}") from exc


CONFIG_PARSERS = {
    "n_states": int,
    "k_copies": int,
    "repetitions": int,
    "nk_budget": int,
    "k_sweep": _parse_int_tuple,
    "master_seed": int,
    "g": float,
    "b_field": float,
    "jz_kelvin": float,
    "jxy_kelvin": float,
    "tau1_ns": float,
    "mu_e": float,
    "hbar": float,
    "k_b": float,
    "preset_v_mag": str,
    "preset_v_sign": str,
    "preset_w_a": str,
    "preset_w_b": str,
    "k_xy_hat": int,
    "k_z_hat": int,
    "output_dir": str,
    "full_records": _parse_bool,
    "record_timing": _parse_bool,
    "retry_sign_failure": _parse_bool,
    "failure_threshold": float,
    "exact_expectations": _parse_bool,
    "record_file": str,
    "series_n": _parse_int_tuple,
    "series_k": _parse_int_tuple,
}


def config_from_mapping(
    entries: dict[str, str], base: ExperimentConfig | None = None
) -> ExperimentConfig:
    """Apply string-valued settings (config file or CLI) over a base config."""
    cfg = base or ExperimentConfig()
    updates = {}
    for key, text in entries.items():
        parser = CONFIG_PARSERS.get(key)
        if parser is None:
            raise ConfigError(f"unknown configuration key {key!r}")
        try:
            updates[key] = parser(text) if isinstance(text, str) else text
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"bad value for {key}: {text!r}") from exc
    return replace(cfg, **updates)


def parse_config_file(path: str | Path) -> dict[str, str]:
    """Read ``key = value`` lines; '#' starts a comment, blank lines ignored."""
    entries: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = line.split("=", 1)
        entries[key.strip()] = value.strip()
    return entries


@dataclass(frozen=True)
class TestResult:
    """Outcome of one elementary test (or its failure record)."""

    seed: int
    v_hat: float
    w1_hat: float
    w2_hat: float
    jxy_scaled: float
    jz_scaled: float
    m_rel_error: float
    clamp_flags: tuple[str, ...]
    condition_number: float
    preparations: int
    wall_seconds: float
    error: str | None = None


def _run_series(
    params: ProcessParams,
    dist: PrepDistribution,
    axis: str,
    dt: float,
    n: int,
    k: int,
    master_seed: int,
    series_id: int,
    record_file: str | None = None,
) -> np.ndarray:
    """Simulate one series of n states with k copies each; return the four
    estimated outcome-probability expectations."""
    ensemble = sample_ensemble(dist, master_seed, series_id, n)
    m = build_evolution_matrix(params, dt)
    states = apply_process(m, product_states(ensemble))
    probs = oz_probabilities(states) if axis == "z" else ox_probabilities(states)
    trial_probs = probs if k == 1 else np.repeat(probs, k, axis=1)
    u = rng.stream(master_seed, series_id, rng.PARAM_OUTCOME).uniform(size=n * k)
    outcomes = sample_outcomes(trial_probs, u)
    if record_file:
        state_index = np.arange(n * k) // k
        dump_records(
            record_file,
            zip([series_id] * (n * k), [axis] * (n * k), state_index, outcomes),
            append=True,
        )
    acc = FrequencyAccumulator()
    acc.add_outcomes(outcomes)
    return acc.estimate()


def _oz_stats(estimate: np.ndarray) -> OzStatistics:
    return OzStatistics(
        e_p1zz=float(estimate[0]), e_p2zz=float(estimate[1]), e_p4zz=float(estimate[3])
    )


def run_elementary_test(cfg: ExperimentConfig, seed: int) -> TestResult:
    """One full identification run; estimation failures are recorded, not raised."""
    cfg.validate()
    start = time.perf_counter()
    params = cfg.process_params()
    times = cfg.protocol_times()
    mix2 = mixing_parameters(params, times.tau2)
    sign = analytic_moments(cfg.preset("v_sign")).sign_e_sin_delta_i

    preparations = 0
    if cfg.exact_expectations:
        mix1 = mixing_parameters(params, times.tau1)
        oz_sym = _exact_oz(cfg, "v_mag", mix1.v)
        oz_signed = _exact_oz(cfg, "v_sign", mix1.v)
        ox_a = _exact_ox(cfg, "w_a", mix2)
        ox_b = _exact_ox(cfg, "w_b", mix2)
    else:
        estimates = []
        for series_id, (role, axis, tau_index) in enumerate(SERIES):
            n, k = cfg.series_sizes(series_id)
            dt = times.tau1 if tau_index == 1 else times.tau2
            estimates.append(
                _run_series(
                    params,
                    cfg.preset(role),
                    axis,
                    dt,
                    n,
                    k,
                    seed,
                    series_id,
                    cfg.record_file,
                )
            )
            preparations += n * k
        oz_sym = _oz_stats(estimates[0])
        oz_signed = _oz_stats(estimates[1])
        ox_a = OxStatistics(
            e_p1xx=float(estimates[3][0]),
            e_p4xx=float(estimates[3][3]),
            e_p1zz=float(estimates[2][0]),
        )
        ox_b = OxStatistics(
            e_p1xx=float(estimates[5][0]),
            e_p4xx=float(estimates[5][3]),
            e_p1zz=float(estimates[4][0]),
        )

    def wall() -> float:
        return time.perf_counter() - start if cfg.record_timing else 0.0

    def failure(exc: EstimationError) -> TestResult:
        nan = float("nan")
        return TestResult(
            seed=seed,
            v_hat=nan,
            w1_hat=nan,
            w2_hat=nan,
            jxy_scaled=nan,
            jz_scaled=nan,
            m_rel_error=nan,
            clamp_flags=(),
            condition_number=nan,
            preparations=preparations,
            wall_seconds=wall(),
            error=f"{type(exc).__name__}: {exc}",
        )

    try:
        try:
            est = single_preparation_estimates(
                oz_sym, oz_signed, sign, ox_a, ox_b, mix2.delta_phi_1m1
            )
        except IndeterminateSignError:
            if cfg.exact_expectations or not cfg.retry_sign_failure:
                raise
            series_id = 1  # fresh draw of the sign series only
            n, k = cfg.series_sizes(series_id)
            retry = _run_series(
                params,
                cfg.preset("v_sign"),
                "z",
                times.tau1,
                n,
                k,
                seed,
                RETRY_SIGN_SERIES_ID,
                cfg.record_file,
            )
            preparations += n * k
            est = single_preparation_estimates(
                oz_sym, _oz_stats(retry), sign, ox_a, ox_b, mix2.delta_phi_1m1
            )
    except EstimationError as exc:
        return failure(exc)

    result = extended_protocol(
        est_tau1=est,
        est_tau2=est,
        times=times,
        gb=params.gb,
        hbar=params.constants.hbar,
        k_xy_hat=cfg.k_xy_hat,
        k_z_hat=cfg.k_z_hat,
    )
    m_true = build_evolution_matrix(params, times.tau3)
    return TestResult(
        seed=seed,
        v_hat=est.v_hat,
        w1_hat=est.w1_hat,
        w2_hat=est.w2_hat,
        jxy_scaled=result.jxy_scaled,
        jz_scaled=result.jz_scaled,
        m_rel_error=relative_error(result.m_hat, m_true),
        clamp_flags=est.clamp_flags,
        condition_number=est.condition_number,
        preparations=preparations,
        wall_seconds=wall(),
        error=None,
    )


def _exact_oz(cfg: ExperimentConfig, role: str, v: float) -> OzStatistics:
    return exact_oz_expectations(analytic_moments(cfg.preset(role)), v)


def _exact_ox(cfg: ExperimentConfig, role: str, mix) -> OxStatistics:
    return exact_ox_expectations(analytic_moments(cfg.preset(role)), mix)


@dataclass(frozen=True)
class Truth:
    """Actual parameter values an experiment is scored against."""

    v: float
    w1: float
    w2: float
    m_tau3: np.ndarray


def truth_for(cfg: ExperimentConfig) -> Truth:
    params = cfg.process_params()
    times = cfg.protocol_times()
    mix1 = mixing_parameters(params, times.tau1)
    mix2 = mixing_parameters(params, times.tau2)
    return Truth(
        v=mix1.v,
        w1=mix2.w1,
        w2=mix2.w2,
        m_tau3=build_evolution_matrix(params, times.tau3),
    )


@dataclass(frozen=True)
class SweepPoint:
    """Aggregated criteria of one (K, N) point of a sweep."""

    k: int
    n: int
    repetitions: int
    excluded: int
    criteria: dict[str, tuple[float, float]]  # name -> (mean, std)
    clamp_rate: float
    wall_seconds: float
    results: tuple[TestResult, ...]


@dataclass(frozen=True)
class SweepResult:
    config: ExperimentConfig
    truth: Truth
    points: tuple[SweepPoint, ...]

    @property
    def failure_rate(self) -> float:
        total = sum(len(p.results) for p in self.points)
        failed = sum(p.excluded for p in self.points)
        return failed / total if total else 0.0


def _std(values: np.ndarray) -> float:
    return float(np.std(values, ddof=1)) if values.size > 1 else 0.0


def aggregate_point(
    k: int,
    n: int,
    results: list[TestResult],
    truth: Truth,
    record_timing: bool = True,
) -> SweepPoint:
    """Reduce the repetitions of one sweep point to the four criteria."""
    ok = [r for r in results if r.error is None]
    criteria: dict[str, tuple[float, float]] = {}
    if ok:
        for name, attr, actual in (
            ("nrmse_v", "v_hat", truth.v),
            ("nrmse_w1", "w1_hat", truth.w1),
            ("nrmse_w2", "w2_hat", truth.w2),
        ):
            estimates = np.array([getattr(r, attr) for r in ok])
            normalized = (estimates - actual) / abs(actual)
            criteria[name] = (nrmse(estimates, actual), _std(normalized))
        rel = np.array([r.m_rel_error for r in ok])
        criteria["m_rel_error"] = (float(rel.mean()), _std(rel))
        clamp_rate = sum(1 for r in ok if r.clamp_flags) / len(ok)
    else:
        criteria = {name: (float("nan"), float("nan")) for name in CRITERIA}
        clamp_rate = float("nan")
    wall = sum(r.wall_seconds for r in results) if record_timing else 0.0
    return SweepPoint(
        k=k,
        n=n,
        repetitions=len(results),
        excluded=len(results) - len(ok),
        criteria=criteria,
        clamp_rate=clamp_rate,
        wall_seconds=wall,
        results=tuple(results),
    )


def run_sweep(cfg: ExperimentConfig) -> SweepResult:
    """Repeat elementary tests over the K sweep at fixed budget N*K.

    Every repetition owns an independent stream derived from
    (master_seed, point index, repetition index); results merge by index.
    """
    cfg.validate()
    truth = truth_for(cfg)
    points = []
    for point_index, k in enumerate(cfg.k_sweep):
        n = cfg.nk_budget // k
        point_cfg = replace(cfg, n_states=n, k_copies=k)
        results = []
        for repetition in range(cfg.repetitions):
            seed = derive_seed(cfg.master_seed, point_index, repetition)
            results.append(run_elementary_test(point_cfg, seed))
        points.append(
            aggregate_point(k, n, results, truth, record_timing=cfg.record_timing)
        )
    return SweepResult(config=cfg, truth=truth, points=tuple(points))


def derive_seed(master_seed: int, point_index: int, repetition: int) -> int:
    """Independent per-repetition seed; stable, collision-free packing."""
    return (master_seed << 20) ^ (point_index << 10) ^ repetition


def write_sweep_csvs(result: SweepResult, out_dir: str | Path) -> list[Path]:
    """One CSV per criterion, schema: K,N,repetitions,criterion_mean,
    criterion_std,clamp_rate,wall_seconds. Header comments carry the seed and
    physical configuration."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg = result.config
    written = []
    for name in CRITERIA:
        path = out / f"{name}.csv"
        with open(path, "w", newline="") as fh:
            fh.write("# bqpt sweep\n")
            fh.write(f"# criterion: {name}\n")
            fh.write(f"# master_seed: {cfg.master_seed}\n")
            fh.write(f"# nk_budget: {cfg.nk_budget}\n")
            fh.write(
                f"# params: g={cfg.g} b_field={cfg.b_field} "
                f"jz_kelvin={cfg.jz_kelvin} jxy_kelvin={cfg.jxy_kelvin} "
                f"tau1_ns={cfg.tau1_ns}\n"
            )
            excluded = " ".join(f"K={p.k}:{p.excluded}" for p in result.points)
            fh.write(f"# excluded: {excluded}\n")
            writer = csv.writer(fh)
            writer.writerow(
                [
                    "K",
                    "N",
                    "repetitions",
                    "criterion_mean",
                    "criterion_std",
                    "clamp_rate",
                    "wall_seconds",
                ]
            )
            for p in result.points:
                mean, std = p.criteria[name]
                writer.writerow(
                    [
                        p.k,
                        p.n,
                        p.repetitions,
                        repr(mean),
                        repr(std),
                        repr(p.clamp_rate),
                        repr(p.wall_seconds),
                    ]
                )
        written.append(path)
    return written


def _json_safe(value):
    if isinstance(value, float) and math.isnan(value):
        return None
    return value


def write_full_json(result: SweepResult, out_dir: str | Path) -> Path:
    """Combined JSON with every per-repetition record."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg_dict = asdict(result.config)
    payload = {
        "master_seed": result.config.master_seed,
        "config": cfg_dict,
        "truth": {
            "v": result.truth.v,
            "w1": result.truth.w1,
            "w2": result.truth.w2,
        },
        "points": [
            {
                "k": p.k,
                "n": p.n,
                "excluded": p.excluded,
                "criteria": {
                    name: {"mean": _json_safe(m), "std": _json_safe(s)}
                    for name, (m, s) in p.criteria.items()
                },
                "repetitions": [
                    {
                        key: _json_safe(value)
                        for key, value in asdict(r).items()
                        if key != "clamp_flags"
                    }
                    | {"clamp_flags": list(r.clamp_flags)}
                    for r in p.results
                ],
            }
            for p in result.points
        ],
    }
    path = out / "sweep_full.json"
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")
    return path
