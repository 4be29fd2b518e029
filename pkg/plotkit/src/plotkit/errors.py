"""Exceptions for the figure renderer."""


class PlotKitError(Exception):
    """Base class for all plotkit errors."""


class ContractError(PlotKitError, ValueError):
    """Input file violates the sweep CSV / master-table contract; the message
    names the offending file and, where applicable, the missing column."""


class RecipeError(PlotKitError, ValueError):
    """Figure recipe is internally inconsistent."""
