"""Inversion from estimated mixing parameters to scaled couplings, assembly of
the estimated propagator, and error metrics.

The arcsine/arccosine inversions determine each scaled coupling only up to an
integer number of half or full turns, so any integer shift may be chosen while
estimating.  A single-interval estimate then reproduces the true propagator up
to a global fourth-root-of-unity phase fixed by the shift differences.  The
three-interval protocol (identify v at tau1 and (w1, w2) at tau2 = 2*tau1,
operate at tau3 = 2*tau2) doubles the shifts into full turns, so the phase
cancels and the propagator at tau3 is recovered exactly, for every choice of
the integer shifts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .estimators import ParamEstimates
from .physics import (
    DEFAULT_CONSTANTS,
    evolution_matrix_from_scaled,
    sign_with_positive_zero,
)


class UndefinedMetricError(ValueError):
    """Raised when a normalized metric is requested against a zero reference."""


@dataclass(frozen=True)
class ProtocolTimes:
    """The three intervals of the identification/computation protocol (seconds).

    Each interval must be an even integer multiple of the previous one; the
    default ladder is tau2 = 2*tau1 and tau3 = 2*tau2.
    """

    tau1: float
    tau2: float
    tau3: float

    def __post_init__(self) -> None:
        if self.tau1 <= 0:
            raise ValueError("tau1 must be positive")
        _even_ratio("tau2/tau1", self.tau2, self.tau1)
        _even_ratio("tau3/tau2", self.tau3, self.tau2)

    @classmethod
    def from_tau1(cls, tau1: float) -> "ProtocolTimes":
        return cls(tau1=tau1, tau2=2.0 * tau1, tau3=4.0 * tau1)

    @property
    def ratio_21(self) -> int:
        return _even_ratio("tau2/tau1", self.tau2, self.tau1)

    @property
    def ratio_32(self) -> int:
        return _even_ratio("tau3/tau2", self.tau3, self.tau2)


def _even_ratio(name: str, num: float, den: float) -> int:
    ratio = num / den
    nearest = round(ratio)
    if abs(ratio - nearest) > 1e-9 * max(abs(ratio), 1.0) or nearest < 2 or nearest % 2:
        raise ValueError(f"{name} must be an even integer >= 2, got {ratio}")
    return int(nearest)


@dataclass(frozen=True)
class ReconstructionResult:
    """Scaled coupling estimates and the assembled propagator.

    jxy_scaled and jz_scaled are the dimensionless J*tau/hbar values at the
    interval of m_hat; delta_ed and delta_phi_10d are the principal-branch
    angle determinations the scaled values were built from.
    """

    jxy_scaled: float
    jz_scaled: float
    k_xy_hat: int
    k_z_hat: int
    delta_ed: float
    delta_phi_10d: float
    m_hat: np.ndarray


def invert_v(v_hat: float, k_xy_hat: int = 0) -> tuple[float, float]:
    """Principal exchange-phase determination and the shifted scaled coupling.

    Returns (delta_ed, jxy_scaled) at the interval v_hat was estimated for:
    delta_ed = arcsin(v_hat) and jxy_scaled = -delta_ed + k_xy_hat * pi.
    """
    if abs(v_hat) > 1.0:
        raise ValueError(f"|v_hat|={abs(v_hat)} exceeds 1; clamp upstream")
    delta_ed = math.asin(v_hat)
    return delta_ed, -delta_ed + k_xy_hat * math.pi


def invert_w(
    w1_hat: float,
    w2_hat: float,
    jxy_scaled: float,
    gb_scaled: float,
    k_z_hat: int = 0,
) -> tuple[float, float]:
    """Principal phase-gap determination and the shifted scaled z coupling.

    All scaled inputs must refer to the same interval. Returns
    (delta_phi_10d, jz_scaled) with delta_phi_10d = sgn(w2)*arccos(w1) and
    jz_scaled = delta_phi_10d + 2*k_z_hat*pi + jxy_scaled + gb_scaled.
    """
    if abs(w1_hat) > 1.0 + 1e-9:
        raise ValueError(f"|w1_hat|={abs(w1_hat)} exceeds 1; clamp upstream")
    w1_hat = min(max(w1_hat, -1.0), 1.0)
    delta_phi_10d = sign_with_positive_zero(w2_hat) * math.acos(w1_hat)
    return delta_phi_10d, delta_phi_10d + 2.0 * k_z_hat * math.pi + jxy_scaled + gb_scaled


def extended_protocol(
    est_tau1: ParamEstimates,
    est_tau2: ParamEstimates,
    times: ProtocolTimes,
    gb: float,
    hbar: float = DEFAULT_CONSTANTS.hbar,
    k_xy_hat: int = 0,
    k_z_hat: int = 0,
) -> ReconstructionResult:
    """Three-interval reconstruction of the propagator at tau3.

    est_tau1 supplies v_hat (estimated at tau1); est_tau2 supplies w1_hat and
    w2_hat (estimated at tau2). gb is the known Zeeman energy G*B in joules.
    The assembled m_hat at tau3 is independent of the integer shifts.
    """
    delta_ed, jxy_t1 = invert_v(est_tau1.v_hat, k_xy_hat)
    jxy_t2 = times.ratio_21 * jxy_t1
    gb_t2 = gb * times.tau2 / hbar
    delta_phi_10d, jz_t2 = invert_w(
        est_tau2.w1_hat, est_tau2.w2_hat, jxy_t2, gb_t2, k_z_hat
    )
    jxy_t3 = times.ratio_32 * jxy_t2
    jz_t3 = times.ratio_32 * jz_t2
    m_hat = evolution_matrix_from_scaled(jxy_t3, jz_t3, gb * times.tau3 / hbar)
    return ReconstructionResult(
        jxy_scaled=jxy_t3,
        jz_scaled=jz_t3,
        k_xy_hat=k_xy_hat,
        k_z_hat=k_z_hat,
        delta_ed=delta_ed,
        delta_phi_10d=delta_phi_10d,
        m_hat=m_hat,
    )


def single_interval(
    est: ParamEstimates,
    tau: float,
    gb: float,
    hbar: float = DEFAULT_CONSTANTS.hbar,
    k_xy_hat: int = 0,
    k_z_hat: int = 0,
) -> ReconstructionResult:
    """Single-interval reconstruction at tau, with both v and (w1, w2)
    estimated at that same interval.

    The result equals the true propagator only up to the global phase of
    :func:`single_interval_phase`.
    """
    delta_ed, jxy_s = invert_v(est.v_hat, k_xy_hat)
    gb_s = gb * tau / hbar
    delta_phi_10d, jz_s = invert_w(est.w1_hat, est.w2_hat, jxy_s, gb_s, k_z_hat)
    m_hat = evolution_matrix_from_scaled(jxy_s, jz_s, gb_s)
    return ReconstructionResult(
        jxy_scaled=jxy_s,
        jz_scaled=jz_s,
        k_xy_hat=k_xy_hat,
        k_z_hat=k_z_hat,
        delta_ed=delta_ed,
        delta_phi_10d=delta_phi_10d,
        m_hat=m_hat,
    )


def single_interval_phase(delta_k_xy: int, delta_k_z: int) -> complex:
    """Global phase of a single-interval estimate relative to the truth.

    For shift differences (delta_k_xy, delta_k_z) between chosen and actual
    integer determinations, every entry of the estimate equals
    (-1)**delta_k_z * 1j**delta_k_xy times the true entry: a fourth root of
    unity, equal to one whenever delta_k_z is even and delta_k_xy a multiple
    of four.
    """
    return (-1.0) ** delta_k_z * 1j**delta_k_xy


def relative_error(m_hat: np.ndarray, m: np.ndarray) -> float:
    """Frobenius norm of the error matrix over that of the reference."""
    if m_hat.shape != m.shape:
        raise ValueError("shape mismatch")
    return float(np.linalg.norm(m_hat - m) / np.linalg.norm(m))


def nrmse(estimates, actual: float) -> float:
    """Root-mean-square error of repeated estimates over the actual value."""
    values = np.asarray(estimates, dtype=float)
    if values.size == 0:
        raise ValueError("no estimates")
    if actual == 0.0:
        raise UndefinedMetricError("normalized error undefined for a zero reference")
    return float(np.sqrt(np.mean((values - actual) ** 2)) / abs(actual))
