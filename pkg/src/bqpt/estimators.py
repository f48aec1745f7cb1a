"""Blind estimation of the mixing parameters (v, w1, w2) from outcome statistics.

Two routes are implemented.  The multiple-preparation route inverts the
modulus pair state by state from well-estimated per-state probabilities.  The
single-preparation route never needs per-state probabilities: it works purely
on expectations of outcome probabilities, inverting the moment equations of
the z model for E{r_i^2} and v, then combining x- and z-axis expectations from
two ensembles with different modulus laws into a 2x2 linear system for
(w1, w2).  All inversions are closed-form; finite-sample noise is absorbed by
explicit clamps that raise diagnostic flags, never silently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .physics import MixingParams, sign_with_positive_zero
from .states import MomentSet

# Conditioning guards; engineering choices, overridable per call.
DENOMINATOR_THRESHOLD = 1e-6
SIGN_THRESHOLD = 1e-9
CONDITION_LIMIT = 1e6


class EstimationError(RuntimeError):
    """Base class for failures of the closed-form estimation chain."""


class InconsistentStatisticsError(EstimationError):
    """Probability statistics violate the modulus-pair model (negative discriminant)."""


class IllConditionedError(EstimationError):
    """A denominator is too small for a reliable inversion."""


class IndeterminateSignError(EstimationError):
    """The sign-carrying statistic is too close to zero to decide sgn(v)."""


class SingularGeometryError(EstimationError):
    """The known phase gap makes the x-axis inversion singular at this interval."""


class NearSingularSystemError(EstimationError):
    """The two w equations are too similar to be solved."""


class AsymmetricStatisticsError(EstimationError):
    """The w step requires identical laws for both qubits."""


@dataclass(frozen=True)
class OzStatistics:
    """Estimated expectations of the z-axis outcome probabilities."""

    e_p1zz: float
    e_p2zz: float
    e_p4zz: float


@dataclass(frozen=True)
class OxStatistics:
    """Estimated x-axis expectations plus the companion z statistic of the
    same series (used to recover the common modulus moment)."""

    e_p1xx: float
    e_p4xx: float
    e_p1zz: float


@dataclass(frozen=True)
class ParamEstimates:
    """Output of the estimation chain with diagnostics.

    w1_hat is clamped into [-1, 1] (the angle extraction needs an arccos);
    w2_hat is the raw solve component, of which only the sign is consumed
    downstream.  clamp_flags names every feasibility clamp that fired;
    condition_number is that of the 2x2 solve for (w1, w2).
    """

    v_hat: float
    w1_hat: float
    w2_hat: float
    clamp_flags: tuple[str, ...] = ()
    condition_number: float = float("nan")


def _modulus_pair_from_probs(p1: float, p4: float) -> tuple[float, float]:
    """Shared quadratic inversion: the two roots x satisfying
    x1*x2 = p1 and (1-x1)*(1-x2) = p4, ordered x1 <= x2."""
    s = 1.0 + p1 - p4
    disc = s * s - 4.0 * p1
    if disc < 0.0:
        raise InconsistentStatisticsError(
            f"negative discriminant {disc:.3e}: statistics inconsistent with "
            "an ordered modulus pair (noise too large or ordering violated)"
        )
    root = math.sqrt(disc)
    return (s - root) / 2.0, (s + root) / 2.0


def recover_r_pair(p1zz: float, p4zz: float) -> tuple[float, float]:
    """Moduli (r1, r2) of one state from its exact z probabilities.

    Requires the preparation ordering 0 < r1 < 1/2 < r2 < 1, which makes the
    assignment of the two quadratic roots unambiguous.
    """
    for name, p in (("p1zz", p1zz), ("p4zz", p4zz)):
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"{name}={p} outside [0, 1]")
    lo, hi = _modulus_pair_from_probs(p1zz, p4zz)
    return math.sqrt(max(lo, 0.0)), math.sqrt(max(hi, 0.0))


def moment_r2_pair(e_p1zz: float, e_p4zz: float) -> tuple[float, float]:
    """(E{r1^2}, E{r2^2}) from expectations of the z probabilities.

    Same algebra as :func:`recover_r_pair`: under independent moduli the
    expectations factorize, so the quadratic applies to the moments directly.
    """
    return _modulus_pair_from_probs(e_p1zz, e_p4zz)


def estimate_v_squared(
    oz: OzStatistics,
    moments: tuple[float, float],
    denominator_threshold: float = DENOMINATOR_THRESHOLD,
) -> tuple[float, bool]:
    """v^2 from symmetric-phase z statistics (E{sin delta_i} = 0).

    Returns (v_squared, clamped); the value is clamped to [0, 1] and the flag
    reports whether noise pushed it outside.
    """
    e_r2_1, e_r2_2 = moments
    denom = e_r2_2 - e_r2_1
    if abs(denom) < denominator_threshold:
        raise IllConditionedError(
            f"modulus moments too close (denominator {denom:.3e})"
        )
    v_sq = (oz.e_p2zz - e_r2_1 * (1.0 - e_r2_2)) / denom
    clamped = not 0.0 <= v_sq <= 1.0
    return min(max(v_sq, 0.0), 1.0), clamped


def estimate_v_sign(
    oz: OzStatistics,
    moments: tuple[float, float],
    v_squared: float,
    sign_e_sin_delta_i: int,
    sign_threshold: float = SIGN_THRESHOLD,
) -> int:
    """Sign of v from an ensemble whose E{sin delta_i} has a known non-zero sign."""
    if sign_e_sin_delta_i not in (-1, 1):
        raise ValueError("the sign of E{sin delta_i} must be known and non-zero")
    e_r2_1, e_r2_2 = moments
    argument = (
        e_r2_1 * (1.0 - e_r2_2) + (e_r2_2 - e_r2_1) * v_squared - oz.e_p2zz
    )
    if abs(argument) < sign_threshold:
        raise IndeterminateSignError(
            f"sign statistic {argument:.3e} below threshold; add preparations"
        )
    return int(sign_with_positive_zero(argument)) * sign_e_sin_delta_i


def estimate_cross_moment(
    ox: OxStatistics,
    delta_phi_1m1: float,
    denominator_threshold: float = DENOMINATOR_THRESHOLD,
) -> tuple[float, bool]:
    """The product E{r sqrt(1-r^2)} E{cos(phi-theta)} from the x-axis sum.

    Returns (value, clamped). The radicand is clamped at zero when sampling
    noise drives the estimated sum below 1/2.
    """
    denom = 1.0 + math.cos(delta_phi_1m1)
    if denom < denominator_threshold:
        raise SingularGeometryError(
            "phase gap too close to a half turn; choose a different interval"
        )
    radicand = (ox.e_p1xx + ox.e_p4xx - 0.5) / denom
    clamped = radicand < 0.0
    return math.sqrt(max(radicand, 0.0)), clamped


def expected_r14_i14(
    e_r2: float, cross: float, delta_phi_1m1: float
) -> tuple[float, float]:
    """Expected x-axis coefficients (E{R14}, E{I14}) of the w equations for an
    ensemble with identical qubit laws."""
    c = math.cos(delta_phi_1m1)
    s = math.sin(delta_phi_1m1)
    e_r14 = 2.0 * cross * (e_r2 * (1.0 - c) + c)
    e_i14 = -2.0 * cross * (1.0 - e_r2) * s
    return e_r14, e_i14


def solve_w(
    eq1: tuple[float, float, float],
    eq2: tuple[float, float, float],
    condition_limit: float = CONDITION_LIMIT,
) -> tuple[float, float, float]:
    """(w1, w2) from two equations r14*w1 - i14*w2 = diff.

    The unconstrained 2x2 solution is returned as-is, without projecting onto
    the unit circle.  The downstream angle extraction sgn(w2)*arccos(w1) uses
    only w1 and the sign of w2; for these ensembles the solve's noise
    concentrates along w2, so re-normalizing would leak that noise into the
    angle and roughly double the final matrix error.  Returns
    (w1, w2, condition_number).
    """
    a = np.array([[eq1[0], -eq1[1]], [eq2[0], -eq2[1]]])
    b = np.array([eq1[2], eq2[2]])
    cond = float(np.linalg.cond(a))
    if not np.isfinite(cond) or cond > condition_limit:
        raise NearSingularSystemError(
            f"w equations nearly dependent (condition {cond:.3e}); the two "
            "ensembles' statistics are too similar"
        )
    w1, w2 = np.linalg.solve(a, b)
    return float(w1), float(w2), cond


def single_preparation_estimates(
    oz_sym: OzStatistics,
    oz_signed: OzStatistics,
    sign_e_sin_delta_i: int,
    ox_a: OxStatistics,
    ox_b: OxStatistics,
    delta_phi_1m1: float,
) -> ParamEstimates:
    """Full chain from four series of expectation statistics to (v, w1, w2).

    oz_sym comes from an ensemble with E{sin delta_i} = 0 (magnitude of v),
    oz_signed from one with a known sign of E{sin delta_i} (sign of v), and
    ox_a / ox_b from two symmetric ensembles with different modulus laws
    measured along both axes at the interval whose phase gap is
    delta_phi_1m1.
    """
    flags: list[str] = []

    v_sq, clamped = estimate_v_squared(oz_sym, moment_r2_pair(oz_sym.e_p1zz, oz_sym.e_p4zz))
    if clamped:
        flags.append("v_squared")

    sign = estimate_v_sign(
        oz_signed,
        moment_r2_pair(oz_signed.e_p1zz, oz_signed.e_p4zz),
        v_sq,
        sign_e_sin_delta_i,
    )
    v_hat = sign * math.sqrt(v_sq)

    equations = []
    for label, ox in (("a", ox_a), ("b", ox_b)):
        if not 0.0 <= ox.e_p1zz <= 1.0:
            raise ValueError("e_p1zz outside [0, 1]")
        e_r2 = math.sqrt(ox.e_p1zz)
        cross, clamped = estimate_cross_moment(ox, delta_phi_1m1)
        if clamped:
            flags.append(f"cross_moment_{label}")
        e_r14, e_i14 = expected_r14_i14(e_r2, cross, delta_phi_1m1)
        equations.append((e_r14, e_i14, ox.e_p1xx - ox.e_p4xx))

    w1, w2, cond = solve_w(equations[0], equations[1])
    if abs(w1) > 1.0:
        flags.append("w1_hat")
        w1 = math.copysign(1.0, w1)
    return ParamEstimates(
        v_hat=v_hat,
        w1_hat=w1,
        w2_hat=w2,
        clamp_flags=tuple(flags),
        condition_number=cond,
    )


def check_w_step_moments(moments: MomentSet) -> None:
    """Reject ensembles whose two qubits have different laws (w step)."""
    if not moments.symmetric():
        raise AsymmetricStatisticsError(
            "w estimation requires identical statistics for both qubits"
        )


def exact_oz_expectations(moments: MomentSet, v: float) -> OzStatistics:
    """Noiseless z expectations implied by ensemble moments and a given v."""
    m1, m2 = moments.e_r2_1, moments.e_r2_2
    vsq = v * v
    cross = (
        2.0
        * moments.e_rq_1
        * moments.e_rq_2
        * math.sqrt(max(1.0 - vsq, 0.0))
        * v
        * moments.e_sin_delta_i
    )
    return OzStatistics(
        e_p1zz=m1 * m2,
        e_p2zz=m1 * (1.0 - m2) * (1.0 - vsq) + (1.0 - m1) * m2 * vsq - cross,
        e_p4zz=(1.0 - m1) * (1.0 - m2),
    )


def exact_ox_expectations(moments: MomentSet, mix: MixingParams) -> OxStatistics:
    """Noiseless x expectations for a symmetric ensemble at the given mixing."""
    check_w_step_moments(moments)
    e_r2 = moments.e_r2_1
    cross = moments.e_rq_1 * moments.e_cos_phi_theta
    e_r14, e_i14 = expected_r14_i14(e_r2, cross, mix.delta_phi_1m1)
    total = cross * cross * (1.0 + math.cos(mix.delta_phi_1m1)) + 0.5
    diff = e_r14 * mix.w1 - e_i14 * mix.w2
    return OxStatistics(
        e_p1xx=(total + diff) / 2.0,
        e_p4xx=(total - diff) / 2.0,
        e_p1zz=e_r2 * e_r2,
    )


@dataclass(frozen=True)
class MultiPrepResult:
    """Output of the per-state (multiple-preparation) z-axis route."""

    v_squared: float
    e_r2_1: float
    e_r2_2: float
    clamped_states: int
    clamped_v: bool


def multiple_preparation_v_squared(
    p1zz: np.ndarray, p2zz: np.ndarray, p4zz: np.ndarray
) -> MultiPrepResult:
    """Per-state inversion route: recover each state's moduli, average their
    statistics, then invert for v^2.

    Accepts per-state probability estimates (sample frequencies over the
    copies of each state). States whose discriminant goes negative under
    noise are clamped to the double root and counted.
    """
    p1 = np.asarray(p1zz, dtype=float)
    p4 = np.asarray(p4zz, dtype=float)
    s = 1.0 + p1 - p4
    disc = s * s - 4.0 * p1
    clamped_states = int(np.sum(disc < 0.0))
    root = np.sqrt(np.maximum(disc, 0.0))
    r1_sq = np.maximum((s - root) / 2.0, 0.0)
    r2_sq = np.maximum((s + root) / 2.0, 0.0)
    e_r2_1 = float(np.mean(r1_sq))
    e_r2_2 = float(np.mean(r2_sq))
    oz = OzStatistics(
        e_p1zz=float(np.mean(p1)),
        e_p2zz=float(np.mean(np.asarray(p2zz, dtype=float))),
        e_p4zz=float(np.mean(p4)),
    )
    v_sq, clamped_v = estimate_v_squared(oz, (e_r2_1, e_r2_2))
    return MultiPrepResult(
        v_squared=v_sq,
        e_r2_1=e_r2_1,
        e_r2_2=e_r2_2,
        clamped_states=clamped_states,
        clamped_v=clamped_v,
    )
