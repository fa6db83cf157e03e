"""Render sweep CSV files into phase-transition figures."""

from ._version import __version__
from .csvio import EXPECTED_HEADER, SchemaError, SweepRow, SweepTable, read_sweep_csv
from .render import FORMATS, PlotSpec, render

__all__ = [
    "__version__",
    "EXPECTED_HEADER",
    "SchemaError",
    "SweepRow",
    "SweepTable",
    "read_sweep_csv",
    "FORMATS",
    "PlotSpec",
    "render",
]
