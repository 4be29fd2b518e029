"""Static multi-panel figure rendering for spin-chain sweep CSVs."""

from .csvdata import Series, read_master, read_sweep
from .errors import ContractError, PlotKitError, RecipeError
from .render import FigureRecipe, PanelSpec, render

__version__ = "0.1.0"

__all__ = [
    "ContractError",
    "FigureRecipe",
    "PanelSpec",
    "PlotKitError",
    "RecipeError",
    "Series",
    "read_master",
    "read_sweep",
    "render",
    "__version__",
]
