"""Figure rendering for bqpt sweep results."""

from .reader import SweepFormatError, SweepRow, SweepTable, read_sweep_dir, read_table
from .render import render_figures, render_table

__version__ = "0.1.0"
