"""Trend figures and regime maps for the sweep CSV corpus."""

from .data import REQUIRED_COLUMNS, SchemaError, SweepTable, load_table
from .render import FigureSpec, RenderResult, default_figures, load_figure_spec, render

__version__ = "0.1.0"
