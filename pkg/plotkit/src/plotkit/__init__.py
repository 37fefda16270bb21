"""Strategy-comparison figure rendering for simulation result CSVs."""

from .render import (
    BASELINES,
    MEASURES,
    PlotDataError,
    PlotSpec,
    ResultTable,
    aggregate_points,
    build_figure,
    load_results,
    plot_measures,
)

__version__ = "0.1.0"

__all__ = [
    "BASELINES",
    "MEASURES",
    "PlotDataError",
    "PlotSpec",
    "ResultTable",
    "aggregate_points",
    "build_figure",
    "load_results",
    "plot_measures",
    "__version__",
]
