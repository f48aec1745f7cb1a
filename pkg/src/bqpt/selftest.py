"""Built-in oracle battery, runnable without a test framework.

Each check re-derives a result along an independent route (spin-operator
Hamiltonian exponential, state-vector probabilities, noiseless inversion) and
compares it against the closed-form implementation.
"""

from __future__ import annotations

import numpy as np

from .estimators import (
    exact_ox_expectations,
    exact_oz_expectations,
    single_preparation_estimates,
)
from .harness import ExperimentConfig
from .measurement import (
    closed_form_ox,
    closed_form_oz,
    ox_probabilities,
    oz_probabilities,
)
from .physics import (
    DEFAULT_CONSTANTS,
    ProcessParams,
    Q_MATRIX,
    apply_process,
    build_evolution_matrix,
    mixing_parameters,
)
from .reconstruction import extended_protocol, relative_error
from .states import PRESETS, PreparedPair, QubitParams, analytic_moments, product_state

Check = tuple[str, bool, str]

_SX = np.array([[0.0, 1.0], [1.0, 0.0]]) / 2.0
_SY = np.array([[0.0, -1j], [1j, 0.0]]) / 2.0
_SZ = np.diag([0.5, -0.5])
_I2 = np.eye(2)


def _hamiltonian(params: ProcessParams) -> np.ndarray:
    """Two-spin Hamiltonian assembled from spin operators (oracle route)."""
    gb = params.gb
    h = gb * (np.kron(_SZ, _I2) + np.kron(_I2, _SZ)).astype(complex)
    h -= 2.0 * params.j_xy * (np.kron(_SX, _SX) + np.kron(_SY, _SY))
    h -= 2.0 * params.j_z * np.kron(_SZ, _SZ)
    return h


def _expm_oracle(params: ProcessParams, dt: float) -> np.ndarray:
    """exp(-i H dt / hbar) by eigendecomposition of the Hermitian H."""
    evals, vecs = np.linalg.eigh(_hamiltonian(params))
    phases = np.exp(-1j * evals * dt / params.constants.hbar)
    return vecs @ np.diag(phases) @ vecs.conj().T


def _random_params(gen: np.random.Generator) -> tuple[ProcessParams, float]:
    k_b = DEFAULT_CONSTANTS.k_B
    params = ProcessParams(
        g=gen.uniform(1.0, 3.0),
        b_field=gen.uniform(0.0, 1.5),
        j_xy=gen.uniform(-1.5, 1.5) * k_b,
        j_z=gen.uniform(-1.5, 1.5) * k_b,
    )
    return params, gen.uniform(0.0, 1.2e-9)


def _random_pair(gen: np.random.Generator) -> PreparedPair:
    return PreparedPair(
        QubitParams(gen.uniform(), gen.uniform(0, 2 * np.pi), gen.uniform(0, 2 * np.pi)),
        QubitParams(gen.uniform(), gen.uniform(0, 2 * np.pi), gen.uniform(0, 2 * np.pi)),
    )


def check_structure(trials: int = 200) -> Check:
    """Q involution, unitarity and interval composition of the propagator."""
    gen = np.random.default_rng(0)
    worst = np.max(np.abs(Q_MATRIX @ Q_MATRIX - np.eye(4)))
    for _ in range(trials):
        params, dt = _random_params(gen)
        m = build_evolution_matrix(params, dt)
        worst = max(worst, np.max(np.abs(m @ m.conj().T - np.eye(4))))
        m2 = build_evolution_matrix(params, 2 * dt)
        worst = max(worst, np.max(np.abs(m @ m - m2)))
    return "structure (involution, unitarity, composition)", worst < 1e-12, f"max dev {worst:.2e}"


def check_hamiltonian_exponential(trials: int = 100) -> Check:
    """Closed-form propagator against the spin-operator matrix exponential."""
    gen = np.random.default_rng(1)
    worst = 0.0
    for _ in range(trials):
        params, dt = _random_params(gen)
        diff = build_evolution_matrix(params, dt) - _expm_oracle(params, dt)
        worst = max(worst, np.max(np.abs(diff)))
    return "hamiltonian exponential", worst < 1e-10, f"max entry dev {worst:.2e}"


def check_closed_forms(trials: int = 2000) -> Check:
    """Closed-form outcome models against state-vector probabilities."""
    gen = np.random.default_rng(2)
    worst = 0.0
    for _ in range(trials):
        params, dt = _random_params(gen)
        pair = _random_pair(gen)
        mix = mixing_parameters(params, dt)
        state = apply_process(build_evolution_matrix(params, dt), product_state(pair))
        pz = oz_probabilities(state)
        p1, p2, p4 = closed_form_oz(pair, mix.v)
        worst = max(worst, abs(pz[0] - p1), abs(pz[1] - p2), abs(pz[3] - p4))
        px = ox_probabilities(state)
        cf = closed_form_ox(pair, mix)
        worst = max(worst, abs((px[0] - px[3]) - cf.diff), abs((px[0] + px[3]) - cf.sum))
    return "closed-form outcome models", worst < 1e-12, f"max prob dev {worst:.2e}"


def check_noiseless_chain() -> Check:
    """Exact expectations through the full chain recover the truth."""
    cfg = ExperimentConfig()
    params = cfg.process_params()
    times = cfg.protocol_times()
    mix1 = mixing_parameters(params, times.tau1)
    mix2 = mixing_parameters(params, times.tau2)
    est = single_preparation_estimates(
        exact_oz_expectations(analytic_moments(PRESETS["step1"]), mix1.v),
        exact_oz_expectations(analytic_moments(PRESETS["step2"]), mix1.v),
        analytic_moments(PRESETS["step2"]).sign_e_sin_delta_i,
        exact_ox_expectations(analytic_moments(PRESETS["w_eq1"]), mix2),
        exact_ox_expectations(analytic_moments(PRESETS["w_eq2"]), mix2),
        mix2.delta_phi_1m1,
    )
    dev = max(
        abs(est.v_hat - mix1.v), abs(est.w1_hat - mix2.w1), abs(est.w2_hat - mix2.w2)
    )
    rec = extended_protocol(est, est, times, params.gb, params.constants.hbar)
    rel = relative_error(rec.m_hat, build_evolution_matrix(params, times.tau3))
    ok = dev < 1e-10 and rel < 1e-9
    return "noiseless estimation chain", ok, f"param dev {dev:.2e}, matrix rel err {rel:.2e}"


def run_all() -> list[Check]:
    return [
        check_structure(),
        check_hamiltonian_exponential(),
        check_closed_forms(),
        check_noiseless_chain(),
    ]
