"""Figure recipes and deterministic SVG/PNG rendering.

A :class:`FigureRecipe` lists input sweep CSVs and a row of panels; each
panel plots one y column against one x column for every series found in the
inputs, optionally normalized per series and optionally overlaid with a
dashed reference curve from a master table (``kappa,f_M,f_gap``).

Rendering is deterministic: a committed style file pins every style
parameter, the SVG hash salt is fixed, and date metadata is stripped, so a
fixed set of input files always produces byte-identical SVG output.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import matplotlib
matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .csvdata import Series, read_master, read_sweep
from .errors import RecipeError

_STYLE_FILE = Path(__file__).with_name("style.mplstyle")

#: Fixed salt for SVG element ids; part of the determinism contract.
SVG_HASHSALT = "plotkit-fixed-salt"

NORMALIZATIONS = ("none", "max", "absmax")

#: Deterministic per-series colors (cycled by series order).
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd",
           "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f")


@dataclass(frozen=True)
class PanelSpec:
    """One panel: ``y_column`` against ``x_column`` for every series.

    ``x_scales`` maps a series label to a multiplicative factor applied to
    the x column (for plotting against a scaling variable proportional to
    the field); labels without an entry use ``default_x_scale``.
    ``reference`` names a master-table file whose ``reference_column`` is
    drawn as a dashed black curve behind the data.
    """

    x_column: str = "field"
    y_column: str = "entanglement"
    normalize: str = "none"
    x_label: str | None = None
    y_label: str | None = None
    title: str | None = None
    x_scales: dict[str, float] = field(default_factory=dict)
    default_x_scale: float = 1.0
    reference: Path | None = None
    reference_column: str = "f_M"

    def __post_init__(self):
        if self.normalize not in NORMALIZATIONS:
            raise RecipeError(
                f"normalize must be one of {NORMALIZATIONS}, "
                f"got {self.normalize!r}"
            )
        if self.reference_column not in ("f_M", "f_gap"):
            raise RecipeError(
                f"reference_column must be f_M or f_gap, "
                f"got {self.reference_column!r}"
            )


@dataclass(frozen=True)
class FigureRecipe:
    """Input CSVs, a row of panels, and the output image base path.

    ``output`` is written twice, with ``.svg`` and ``.png`` suffixes.
    """

    inputs: tuple[Path, ...]
    panels: tuple[PanelSpec, ...]
    output: Path
    suptitle: str | None = None

    def __post_init__(self):
        if not self.inputs:
            raise RecipeError("recipe needs at least one input CSV")
        if not self.panels:
            raise RecipeError("recipe needs at least one panel")


def _normalized(panel: PanelSpec, series: Series) -> tuple[np.ndarray, np.ndarray]:
    x = series.column(panel.x_column).copy()
    y = series.column(panel.y_column).copy()
    scale = panel.x_scales.get(series.label, panel.default_x_scale)
    x *= scale
    if panel.normalize != "none":
        norm = y.max() if panel.normalize == "max" else np.abs(y).max()
        if norm == 0.0:
            raise RecipeError(
                f"cannot normalize {panel.y_column!r} of series "
                f"{series.label}: extremum is zero"
            )
        y = y / norm
    return x, y


def render(recipe: FigureRecipe) -> tuple[Path, Path]:
    """Render one figure; returns the (svg, png) paths.

    All inputs are read and validated before any output file is touched, so
    a contract violation never leaves a partial image behind.
    """
    all_series: list[Series] = []
    for path in recipe.inputs:
        all_series.extend(read_sweep(path))
    # validate every referenced column and reference table up front
    references = {}
    for panel in recipe.panels:
        for s in all_series:
            s.column(panel.x_column)
            s.column(panel.y_column)
        if panel.reference is not None:
            references[panel.reference] = read_master(panel.reference)

    with plt.style.context(str(_STYLE_FILE)), \
            matplotlib.rc_context({"svg.hashsalt": SVG_HASHSALT}):
        n = len(recipe.panels)
        fig, axes = plt.subplots(1, n, figsize=(4.0 * n, 3.2), squeeze=False)
        for ax, panel in zip(axes[0], recipe.panels):
            if panel.reference is not None:
                table = references[panel.reference]
                (line,) = ax.plot(table["kappa"],
                                  table[panel.reference_column],
                                  "k--", linewidth=1.0, zorder=1,
                                  label="two-level")
                line.set_gid("two-level-reference")
            for k, s in enumerate(all_series):
                x, y = _normalized(panel, s)
                ax.plot(x, y, marker="o", color=_COLORS[k % len(_COLORS)],
                        zorder=2, label=s.label)
            ax.set_xlabel(panel.x_label or panel.x_column)
            ax.set_ylabel(panel.y_label or panel.y_column)
            if panel.title:
                ax.set_title(panel.title)
        axes[0][0].legend(loc="best")
        if recipe.suptitle:
            fig.suptitle(recipe.suptitle)
        fig.tight_layout()
        out = Path(recipe.output)
        out.parent.mkdir(parents=True, exist_ok=True)
        svg = out.with_suffix(".svg")
        png = out.with_suffix(".png")
        fig.savefig(svg, format="svg", metadata={"Date": None})
        fig.savefig(png, format="png",
                    metadata={"Software": "plotkit"})
        plt.close(fig)
    return svg, png
