"""Reader for the sweep CSV schema emitted by the bqpt harness.

Each criterion file carries '#'-prefixed metadata lines, a fixed header row
``K,N,repetitions,criterion_mean,criterion_std,clamp_rate,wall_seconds`` and
one row per sweep point. The product K*N (the preparation budget per series)
must be constant across rows of one file.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

CRITERION_FILES = (
    "nrmse_v.csv",
    "nrmse_w1.csv",
    "nrmse_w2.csv",
    "m_rel_error.csv",
)

EXPECTED_HEADER = [
    "K",
    "N",
    "repetitions",
    "criterion_mean",
    "criterion_std",
    "clamp_rate",
    "wall_seconds",
]


class SweepFormatError(ValueError):
    """A sweep CSV is missing or does not match the schema."""

    def __init__(self, path: Path | str, reason: str):
        self.path = Path(path)
        super().__init__(f"{self.path}: {reason}")


@dataclass(frozen=True)
class SweepRow:
    k: int
    n: int
    repetitions: int
    mean: float
    std: float
    clamp_rate: float
    wall_seconds: float


@dataclass(frozen=True)
class SweepTable:
    """Rows of one criterion file plus its '#' metadata."""

    criterion: str
    rows: tuple[SweepRow, ...]
    metadata: dict[str, str]

    @property
    def budget(self) -> int:
        return self.rows[0].k * self.rows[0].n

    def plottable_rows(self) -> list[SweepRow]:
        return [r for r in self.rows if math.isfinite(r.mean)]


def read_table(path: str | Path) -> SweepTable:
    """Parse and validate one criterion CSV."""
    path = Path(path)
    if not path.exists():
        raise SweepFormatError(path, "file not found")
    metadata: dict[str, str] = {}
    data_lines: list[str] = []
    for raw in path.read_text().splitlines():
        if raw.startswith("#"):
            body = raw.lstrip("#").strip()
            if ":" in body:
                key, value = body.split(":", 1)
                metadata[key.strip()] = value.strip()
            continue
        if raw.strip():
            data_lines.append(raw)
    if not data_lines:
        raise SweepFormatError(path, "no header row")
    reader = csv.reader(data_lines)
    header = next(reader)
    if header != EXPECTED_HEADER:
        raise SweepFormatError(path, f"unexpected header {header!r}")
    rows = []
    for lineno, record in enumerate(reader, start=2):
        if len(record) != len(EXPECTED_HEADER):
            raise SweepFormatError(path, f"row {lineno}: wrong field count")
        try:
            rows.append(
                SweepRow(
                    k=int(record[0]),
                    n=int(record[1]),
                    repetitions=int(record[2]),
                    mean=float(record[3]),
                    std=float(record[4]),
                    clamp_rate=float(record[5]),
                    wall_seconds=float(record[6]),
                )
            )
        except ValueError as exc:
            raise SweepFormatError(path, f"row {lineno}: {exc}") from exc
    if not rows:
        raise SweepFormatError(path, "no data rows")
    budgets = {row.k * row.n for row in rows}
    if len(budgets) != 1:
        raise SweepFormatError(path, f"K*N budget not constant: {sorted(budgets)}")
    criterion = metadata.get("criterion", path.stem)
    return SweepTable(criterion=criterion, rows=tuple(rows), metadata=metadata)


def read_sweep_dir(csv_dir: str | Path) -> dict[str, SweepTable]:
    """Read all four criterion files of a completed sweep."""
    csv_dir = Path(csv_dir)
    return {name: read_table(csv_dir / name) for name in CRITERION_FILES}
