"""Figure generation for nhcurrent run directories.

A read-only consumer of the published file formats (observables and
currents tables, field snapshots, run_meta.json). Nothing here recomputes
physics from quantum states; every curve is arithmetic on the tabulated
columns.
"""

from .loader import RunData, RunDataError, load_run
from .figures import (KINDS, current_extrema, density_figure, currents_figure,
                      eoc_curves, fields_figure, plot_run, residual_figure)

__version__ = "0.1.0"

__all__ = [
    "RunData", "RunDataError", "load_run",
    "KINDS", "plot_run", "density_figure", "currents_figure",
    "residual_figure", "fields_figure", "current_extrema", "eoc_curves",
    "__version__",
]
