"""Figure rendering for freehorizon solver outputs."""

__version__ = "0.1.0"

from .figures import (FIGURE_KINDS, FigureSpec, SchemaError, build_figure, load_solution,
                      load_sweep, load_trajectory, render, spec_for_directory)

__all__ = [
    "__version__", "FIGURE_KINDS", "FigureSpec", "SchemaError", "build_figure",
    "load_solution", "load_sweep", "load_trajectory", "render", "spec_for_directory",
]
