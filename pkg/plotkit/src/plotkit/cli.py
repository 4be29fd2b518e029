"""Command-line renderer: ``plotkit <recipe.json>``.

The recipe file is JSON with the fields of :class:`plotkit.FigureRecipe`::

    {
      "inputs": ["sweep.csv"],
      "output": "figure",
      "suptitle": "optional",
      "panels": [
        {"x_column": "field", "y_column": "entanglement",
         "normalize": "max", "reference": "master.csv",
         "reference_column": "f_M"}
      ]
    }
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import PlotKitError
from .render import FigureRecipe, PanelSpec, render


def _recipe_from_json(path: Path) -> FigureRecipe:
    spec = json.loads(path.read_text())
    panels = []
    for p in spec.get("panels", []):
        if "reference" in p and p["reference"] is not None:
            p = {**p, "reference": Path(p["reference"])}
        panels.append(PanelSpec(**p))
    return FigureRecipe(
        inputs=tuple(Path(x) for x in spec["inputs"]),
        panels=tuple(panels),
        output=Path(spec["output"]),
        suptitle=spec.get("suptitle"),
    )


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="plotkit",
        description="Render multi-panel SVG+PNG figures from sweep CSVs.",
    )
    parser.add_argument("recipe", type=Path, help="JSON recipe file")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        svg, png = render(_recipe_from_json(args.recipe))
    except (PlotKitError, OSError, KeyError, TypeError,
            json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {svg} and {png}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
