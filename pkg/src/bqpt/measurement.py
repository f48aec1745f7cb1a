"""Measurement-outcome probabilities, outcome sampling and frequency accumulation.

Outcomes of a simultaneous two-spin component measurement are indexed j = 1..4
in the fixed order (+1/2,+1/2), (+1/2,-1/2), (-1/2,+1/2), (-1/2,-1/2), for both
the quantization axis (z) and the orthogonal axis (x).  The z probabilities are
squared moduli of the state amplitudes; the x probabilities are obtained by an
exact change to the x-product basis.  Closed-form polar-parameter expressions
for the z probabilities and for the two x combinations p1 - p4 and p1 + p4 are
provided as cross-checks; the sampler always draws from the state-vector
probabilities.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .physics import MixingParams
from .states import PreparedPair

# Rows are the x-basis product kets (|+> +- |->)/sqrt(2) in outcome order.
_X_BASIS = 0.5 * np.array(
    [
        [1.0, 1.0, 1.0, 1.0],
        [1.0, -1.0, 1.0, -1.0],
        [1.0, 1.0, -1.0, -1.0],
        [1.0, -1.0, -1.0, 1.0],
    ]
)


class EmptyAccumulatorError(RuntimeError):
    """Raised when an estimate is requested before any outcome was recorded."""


def oz_probabilities(state: np.ndarray) -> np.ndarray:
    """Outcome probabilities along z: |c_j|^2. Accepts (4,) or columns (4, n)."""
    return np.abs(state) ** 2


def ox_probabilities(state: np.ndarray) -> np.ndarray:
    """Outcome probabilities along x, via exact basis change. (4,) or (4, n)."""
    return np.abs(_X_BASIS @ state) ** 2


def oz_closed_form_values(r1, r2, delta_i, v):
    """Closed-form z probabilities (p1, p2, p4) from polar parameters.

    Vectorized over numpy inputs; p3 follows from normalization.
    """
    r1sq = np.square(r1)
    r2sq = np.square(r2)
    p1 = r1sq * r2sq
    p4 = (1.0 - r1sq) * (1.0 - r2sq)
    vsq = v * v
    cross = (
        2.0
        * r1
        * r2
        * np.sqrt(1.0 - r1sq)
        * np.sqrt(1.0 - r2sq)
        * np.sqrt(1.0 - vsq)
        * v
        * np.sin(delta_i)
    )
    p2 = r1sq * (1.0 - r2sq) * (1.0 - vsq) + (1.0 - r1sq) * r2sq * vsq - cross
    return p1, p2, p4


def closed_form_oz(pair: PreparedPair, v: float) -> tuple[float, float, float]:
    """Closed-form (p1zz, p2zz, p4zz) for one prepared pair."""
    if abs(v) > 1.0:
        raise ValueError("|v| must not exceed 1")
    p1, p2, p4 = oz_closed_form_values(pair.q1.r, pair.q2.r, pair.delta_i(), v)
    return float(p1), float(p2), float(p4)


@dataclass(frozen=True)
class ClosedFormOx:
    """Closed-form x-axis combinations for one pair.

    diff = r14*w1 - i14*w2 equals p1xx - p4xx; sum equals p1xx + p4xx.
    """

    r14: float
    i14: float
    diff: float
    sum: float


def ox_closed_form_values(r1, r2, a1, a2, mix: MixingParams):
    """Closed-form x-axis combinations from polar parameters.

    a1 and a2 are the physical phases phi_i - theta_i. Vectorized; returns
    (r14, i14, diff, sum).
    """
    q1 = np.sqrt(1.0 - np.square(r1))
    q2 = np.sqrt(1.0 - np.square(r2))
    gap = mix.delta_phi_1m1
    r14 = (
        np.square(r1) * r2 * q2 * np.cos(a2)
        + np.square(r2) * r1 * q1 * np.cos(a1)
        + (1.0 - np.square(r1)) * r2 * q2 * np.cos(a2 - gap)
        + (1.0 - np.square(r2)) * r1 * q1 * np.cos(a1 - gap)
    )
    i14 = (
        -np.square(r1) * r2 * q2 * np.sin(a2)
        - np.square(r2) * r1 * q1 * np.sin(a1)
        + (1.0 - np.square(r1)) * r2 * q2 * np.sin(a2 - gap)
        + (1.0 - np.square(r2)) * r1 * q1 * np.sin(a1 - gap)
    )
    diff = r14 * mix.w1 - i14 * mix.w2
    total = 0.5 + r1 * r2 * q1 * q2 * (np.cos(a2 - a1) + np.cos(a1 + a2 - gap))
    return r14, i14, diff, total


def closed_form_ox(pair: PreparedPair, mix: MixingParams) -> ClosedFormOx:
    """Closed-form x-axis combinations for one prepared pair."""
    a1 = pair.q1.phi - pair.q1.theta
    a2 = pair.q2.phi - pair.q2.theta
    r14, i14, diff, total = ox_closed_form_values(
        pair.q1.r, pair.q2.r, a1, a2, mix
    )
    return ClosedFormOx(float(r14), float(i14), float(diff), float(total))


def sample_outcome(p: np.ndarray, gen: np.random.Generator) -> int:
    """Draw one outcome index j in 1..len(p) by inverse CDF (one uniform)."""
    p = np.asarray(p, dtype=float)
    if np.any(p < -1e-12) or abs(p.sum() - 1.0) > 1e-9:
        raise ValueError("probabilities must be non-negative and sum to 1")
    u = gen.uniform()
    cdf = np.cumsum(p)
    return int(np.sum(u >= cdf[:-1])) + 1


def sample_outcomes(probs: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Inverse-CDF outcomes (1-based) for per-column probabilities (m, n)
    against one uniform per column."""
    cdf = np.cumsum(probs, axis=0)
    return (u[None, :] >= cdf[:-1]).sum(axis=0) + 1


@dataclass
class FrequencyAccumulator:
    """Per-outcome tallies over a series of trials.

    The estimate of each outcome probability expectation is counts_j / total,
    regardless of how the trials were grouped into states and copies.  Counts
    add, so partial accumulators merge associatively.
    """

    counts: np.ndarray = field(
        default_factory=lambda: np.zeros(4, dtype=np.int64)
    )

    @classmethod
    def for_qubits(cls, n_qubits: int) -> "FrequencyAccumulator":
        return cls(counts=np.zeros(2**n_qubits, dtype=np.int64))

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def n_outcomes(self) -> int:
        return self.counts.shape[0]

    def add(self, outcome: int) -> None:
        """Record one outcome index (1-based)."""
        if not 1 <= outcome <= self.n_outcomes:
            raise ValueError(f"outcome {outcome} out of range 1..{self.n_outcomes}")
        self.counts[outcome - 1] += 1

    def add_outcomes(self, outcomes: np.ndarray) -> None:
        """Record a batch of outcome indices (1-based)."""
        outcomes = np.asarray(outcomes)
        if outcomes.size and (outcomes.min() < 1 or outcomes.max() > self.n_outcomes):
            raise ValueError("outcome out of range")
        self.counts += np.bincount(outcomes - 1, minlength=self.n_outcomes)

    def merged(self, other: "FrequencyAccumulator") -> "FrequencyAccumulator":
        """New accumulator equal to accumulating the concatenated trials."""
        if self.n_outcomes != other.n_outcomes:
            raise ValueError("outcome spaces differ")
        return FrequencyAccumulator(counts=self.counts + other.counts)

    def estimate(self) -> np.ndarray:
        """Relative outcome frequencies; the estimator of E{P(A_j)}."""
        if self.total == 0:
            raise EmptyAccumulatorError("no trials recorded")
        return self.counts / self.total


RECORD_FIELDS = ("series_id", "axis", "state_index", "outcome")


def dump_records(
    path: str | Path,
    records: Iterable[tuple[int, str, int, int]],
    append: bool = False,
) -> None:
    """Write one CSV line per trial: series id, axis (z|x), state index, outcome."""
    mode = "a" if append else "w"
    path = Path(path)
    write_header = not (append and path.exists() and path.stat().st_size > 0)
    with open(path, mode, newline="") as fh:
        writer = csv.writer(fh)
        if write_header:
            writer.writerow(RECORD_FIELDS)
        writer.writerows(records)


def iter_records(path: str | Path) -> Iterator[tuple[int, str, int, int]]:
    """Yield trial records back from a dump, for audit or replay."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != RECORD_FIELDS:
            raise ValueError(f"unexpected record header {header!r}")
        for row in reader:
            yield int(row[0]), row[1], int(row[2]), int(row[3])
