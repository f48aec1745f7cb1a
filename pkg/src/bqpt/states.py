"""Input qubit pairs: polar parameterization, product states, random ensembles
and the closed-form moments of the uniform preparation laws.

A qubit is described by (r, theta, phi): amplitude r*exp(i*theta) on |+> and
sqrt(1-r^2)*exp(i*phi) on |->, with only phi - theta physically meaningful.
Ensembles draw each parameter independently, either fixed or uniform on a
half-open interval, from the counter-based streams of :mod:`bqpt.rng`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import rng

FixedOrRange = float | tuple[float, float]


@dataclass(frozen=True)
class QubitParams:
    """Polar parameters of one qubit: modulus r in [0, 1], phases in radians."""

    r: float
    theta: float
    phi: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.r <= 1.0:
            raise ValueError(f"r must lie in [0, 1], got {self.r}")

    @property
    def q(self) -> float:
        """Modulus of the |-> amplitude, sqrt(1 - r^2). Never stored."""
        return math.sqrt(1.0 - self.r * self.r)

    @property
    def alpha(self) -> complex:
        return self.r * np.exp(1j * self.theta)

    @property
    def beta(self) -> complex:
        return self.q * np.exp(1j * self.phi)


@dataclass(frozen=True)
class PreparedPair:
    """One prepared two-qubit input."""

    q1: QubitParams
    q2: QubitParams

    def delta_i(self) -> float:
        """Relative physical phase (phi2 - theta2) - (phi1 - theta1)."""
        return (self.q2.phi - self.q2.theta) - (self.q1.phi - self.q1.theta)


def product_state(pair: PreparedPair) -> np.ndarray:
    """Unit-norm amplitudes of the unentangled pair in the product basis."""
    a1, b1 = pair.q1.alpha, pair.q1.beta
    a2, b2 = pair.q2.alpha, pair.q2.beta
    return np.array([a1 * a2, a1 * b2, b1 * a2, b1 * b2])


def _validate_range(name: str, value: FixedOrRange, lo: float, hi: float) -> None:
    if isinstance(value, tuple):
        a, b = value
        if not (lo <= a <= b <= hi):
            raise ValueError(f"{name} range {value} outside [{lo}, {hi}] or inverted")
    else:
        if not lo <= value <= hi:
            raise ValueError(f"{name}={value} outside [{lo}, {hi}]")


@dataclass(frozen=True)
class PrepDistribution:
    """Independent per-parameter laws of a preparation ensemble.

    Each entry is either a fixed value or a half-open uniform interval
    ``(low, high)``. Only uniform laws are supported, which is what makes the
    closed-form moments of :func:`analytic_moments` available.
    """

    r1: tuple[float, float]
    r2: tuple[float, float]
    theta1: FixedOrRange = 0.0
    theta2: FixedOrRange = 0.0
    phi1: FixedOrRange = (0.0, 2.0 * math.pi)
    phi2: FixedOrRange = (0.0, 2.0 * math.pi)

    def __post_init__(self) -> None:
        _validate_range("r1", self.r1, 0.0, 1.0)
        _validate_range("r2", self.r2, 0.0, 1.0)
        for name in ("theta1", "theta2", "phi1", "phi2"):
            value = getattr(self, name)
            if isinstance(value, tuple) and value[1] < value[0]:
                raise ValueError(f"{name} interval {value} is inverted")


# Protocol presets. The two v-step ensembles satisfy 0 < r1 < 1/2 < r2 < 1 so
# the two moduli can be told apart; the two w-step ensembles deliberately do
# not, and use a symmetric phase law with positive mean cosine.
PRESETS: dict[str, PrepDistribution] = {
    "step1": PrepDistribution(r1=(0.1, 0.4), r2=(0.6, 0.9)),
    "step2": PrepDistribution(
        r1=(0.1, 0.4), r2=(0.6, 0.9), phi1=0.0, phi2=(0.0, math.pi)
    ),
    "w_eq1": PrepDistribution(
        r1=(0.1, 0.4),
        r2=(0.1, 0.4),
        phi1=(-math.pi / 2, math.pi / 2),
        phi2=(-math.pi / 2, math.pi / 2),
    ),
    "w_eq2": PrepDistribution(
        r1=(0.6, 0.9),
        r2=(0.6, 0.9),
        phi1=(-math.pi / 2, math.pi / 2),
        phi2=(-math.pi / 2, math.pi / 2),
    ),
}


@dataclass(frozen=True)
class MomentSet:
    """First moments of an ensemble used by the estimation chain.

    e_cos_phi_theta is the common E{cos(phi_i - theta_i)} when both qubits
    share the same phase law, and None otherwise.  sign_e_sin_delta_i is the
    sign (-1/0/+1) of E{sin delta_i}.
    """

    e_r2_1: float
    e_r2_2: float
    e_rq_1: float
    e_rq_2: float
    e_cos_phi_theta: float | None
    e_sin_delta_i: float
    sign_e_sin_delta_i: int

    def symmetric(self) -> bool:
        """True when both qubits have identical first moments (w-step requirement)."""
        return (
            self.e_cos_phi_theta is not None
            and math.isclose(self.e_r2_1, self.e_r2_2, rel_tol=0, abs_tol=1e-12)
            and math.isclose(self.e_rq_1, self.e_rq_2, rel_tol=0, abs_tol=1e-12)
        )


@dataclass(frozen=True)
class Ensemble:
    """Arrays of per-state parameters, one entry per prepared pair."""

    r1: np.ndarray
    r2: np.ndarray
    theta1: np.ndarray
    theta2: np.ndarray
    phi1: np.ndarray
    phi2: np.ndarray

    def __len__(self) -> int:
        return self.r1.shape[0]

    def delta_i(self) -> np.ndarray:
        return (self.phi2 - self.theta2) - (self.phi1 - self.theta1)

    def pair(self, n: int) -> PreparedPair:
        return PreparedPair(
            QubitParams(self.r1[n], self.theta1[n], self.phi1[n]),
            QubitParams(self.r2[n], self.theta2[n], self.phi2[n]),
        )


def sample_pair(dist: PrepDistribution, gen: np.random.Generator) -> PreparedPair:
    """Draw one pair from the given generator (one uniform per non-fixed law)."""

    def draw(value: FixedOrRange) -> float:
        if isinstance(value, tuple):
            return gen.uniform(value[0], value[1])
        return value

    q1 = QubitParams(draw(dist.r1), draw(dist.theta1), draw(dist.phi1))
    q2 = QubitParams(draw(dist.r2), draw(dist.theta2), draw(dist.phi2))
    return PreparedPair(q1, q2)


def sample_ensemble(
    dist: PrepDistribution, master_seed: int, series_id: int, n: int
) -> Ensemble:
    """Draw n pairs, one independent stream per parameter.

    The k-th entry of each array is the k-th draw of the stream keyed by
    (master_seed, series_id, parameter id), so prefixes are stable in n and
    parameters are independent by construction.
    """

    def draws(value: FixedOrRange, param_id: int) -> np.ndarray:
        if isinstance(value, tuple):
            gen = rng.stream(master_seed, series_id, param_id)
            return gen.uniform(value[0], value[1], size=n)
        return np.full(n, float(value))

    return Ensemble(
        r1=draws(dist.r1, rng.PARAM_R1),
        r2=draws(dist.r2, rng.PARAM_R2),
        theta1=draws(dist.theta1, rng.PARAM_THETA1),
        theta2=draws(dist.theta2, rng.PARAM_THETA2),
        phi1=draws(dist.phi1, rng.PARAM_PHI1),
        phi2=draws(dist.phi2, rng.PARAM_PHI2),
    )


def product_states(ens: Ensemble) -> np.ndarray:
    """Column state vectors (4, n) of every pair of the ensemble."""
    a1 = ens.r1 * np.exp(1j * ens.theta1)
    b1 = np.sqrt(1.0 - ens.r1**2) * np.exp(1j * ens.phi1)
    a2 = ens.r2 * np.exp(1j * ens.theta2)
    b2 = np.sqrt(1.0 - ens.r2**2) * np.exp(1j * ens.phi2)
    return np.stack([a1 * a2, a1 * b2, b1 * a2, b1 * b2])


def _uniform_r_moments(interval: tuple[float, float]) -> tuple[float, float]:
    """(E{r^2}, E{r sqrt(1-r^2)}) for r uniform on [a, b)."""
    a, b = interval
    e_r2 = (a * a + a * b + b * b) / 3.0
    if b == a:
        e_rq = a * math.sqrt(1.0 - a * a)
    else:
        e_rq = ((1.0 - a * a) ** 1.5 - (1.0 - b * b) ** 1.5) / (3.0 * (b - a))
    return e_r2, e_rq


def _trig_moments(value: FixedOrRange) -> tuple[float, float]:
    """(E{cos x}, E{sin x}) for x fixed or uniform on [lo, hi)."""
    if not isinstance(value, tuple):
        return math.cos(value), math.sin(value)
    lo, hi = value
    if hi == lo:
        return math.cos(lo), math.sin(lo)
    width = hi - lo
    return (math.sin(hi) - math.sin(lo)) / width, (math.cos(lo) - math.cos(hi)) / width


def analytic_moments(dist: PrepDistribution) -> MomentSet:
    """Exact first moments of the uniform laws of a distribution.

    Serves as the noiseless reference for every estimator test: sample means
    over the ensemble converge to these values.
    """
    if not isinstance(dist, PrepDistribution):
        raise TypeError("analytic moments are defined only for uniform-law specs")
    e_r2_1, e_rq_1 = _uniform_r_moments(dist.r1)
    e_r2_2, e_rq_2 = _uniform_r_moments(dist.r2)

    c_phi1, s_phi1 = _trig_moments(dist.phi1)
    c_th1, s_th1 = _trig_moments(dist.theta1)
    c_phi2, s_phi2 = _trig_moments(dist.phi2)
    c_th2, s_th2 = _trig_moments(dist.theta2)

    # angle differences of independent draws compose through first trig moments
    cos_a = c_phi1 * c_th1 + s_phi1 * s_th1
    sin_a = s_phi1 * c_th1 - c_phi1 * s_th1
    cos_b = c_phi2 * c_th2 + s_phi2 * s_th2
    sin_b = s_phi2 * c_th2 - c_phi2 * s_th2

    e_sin_delta_i = sin_b * cos_a - cos_b * sin_a
    if abs(e_sin_delta_i) < 1e-15:
        e_sin_delta_i = 0.0

    same_phase_law = (
        math.isclose(cos_a, cos_b, rel_tol=0, abs_tol=1e-12)
        and math.isclose(sin_a, sin_b, rel_tol=0, abs_tol=1e-12)
    )
    e_cos = cos_a if same_phase_law else None

    sign = 0 if e_sin_delta_i == 0.0 else (1 if e_sin_delta_i > 0 else -1)
    return MomentSet(
        e_r2_1=e_r2_1,
        e_r2_2=e_r2_2,
        e_rq_1=e_rq_1,
        e_rq_2=e_rq_2,
        e_cos_phi_theta=e_cos,
        e_sin_delta_i=e_sin_delta_i,
        sign_e_sin_delta_i=sign,
    )
