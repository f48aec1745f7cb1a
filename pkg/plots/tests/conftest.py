from __future__ import annotations

from pathlib import Path

import pytest

from bqpt_plots.reader import CRITERION_FILES

HEADER = "K,N,repetitions,criterion_mean,criterion_std,clamp_rate,wall_seconds"


def criterion_csv(name: str, rows: list[str], seed: int = 42) -> str:
    lines = [
        "# bqpt sweep",
        f"# criterion: {Path(name).stem}",
        f"# master_seed: {seed}",
        "# nk_budget: 100000",
        "# params: g=2.0 b_field=1.0 jz_kelvin=1.0 jxy_kelvin=0.3 tau1_ns=0.51",
        "# excluded: K=1:0 K=10:0",
        HEADER,
        *rows,
    ]
    return "\n".join(lines) + "\n"


DEFAULT_ROWS = [
    "1,100000,100,0.01,0.002,0.0,12.5",
    "10,10000,100,0.02,0.004,0.0,8.1",
    "100,1000,100,0.05,0.01,0.01,6.7",
    "1000,100,100,0.12,0.03,0.05,6.2",
]


@pytest.fixture
def sweep_dir(tmp_path) -> Path:
    """A schema-valid synthetic sweep directory with all four criterion files."""
    for name in CRITERION_FILES:
        (tmp_path / name).write_text(criterion_csv(name, DEFAULT_ROWS))
    return tmp_path
