"""Deterministic counter-based random streams.

Every random draw in the package comes from a Philox generator keyed by an
integer path (master seed, series id, parameter id).  Distinct paths give
statistically independent streams, and the n-th draw of a stream is a pure
function of (path, n): generating a prefix never changes later values, so
ensembles are bit-reproducible and independent blocks can be produced in
parallel with ``uniform_block``.
"""

from __future__ import annotations

import numpy as np

# Parameter ids used as the last component of a stream path.
PARAM_R1 = 0
PARAM_R2 = 1
PARAM_THETA1 = 2
PARAM_THETA2 = 3
PARAM_PHI1 = 4
PARAM_PHI2 = 5
PARAM_OUTCOME = 6


def stream(master_seed: int, *path: int) -> np.random.Generator:
    """Generator for the counter-based stream keyed by (master_seed, *path)."""
    ss = np.random.SeedSequence(master_seed, spawn_key=tuple(path))
    return np.random.Generator(np.random.Philox(ss))


def uniform_block(
    master_seed: int,
    path: tuple[int, ...],
    start: int,
    count: int,
    low: float = 0.0,
    high: float = 1.0,
) -> np.ndarray:
    """Draws ``count`` uniforms at positions [start, start+count) of a stream.

    Equivalent to skipping the first ``start`` draws of ``stream(...)``, which
    allows disjoint index blocks of one stream to be generated out of order or
    in parallel. Each double consumes one 64-bit Philox output; ``advance``
    moves the counter in blocks of four outputs, so sub-block offsets are
    handled by drawing and discarding the remainder.
    """
    bg = np.random.Philox(np.random.SeedSequence(master_seed, spawn_key=tuple(path)))
    whole, frac = divmod(start, 4)
    if whole:
        bg.advance(whole)
    vals = np.random.Generator(bg).uniform(low, high, size=frac + count)
    return vals[frac:]
