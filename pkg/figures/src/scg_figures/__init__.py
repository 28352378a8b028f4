"""Batch renderer for scg-lab experiment CSVs."""

from scg_figures.render import FigureSpec, SchemaMismatch, render

__all__ = ["FigureSpec", "SchemaMismatch", "render"]
__version__ = "0.1.0"
