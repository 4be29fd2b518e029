"""Reader for the sweep CSV contract and the master-curve table.

This package communicates with the simulation engine only through its file
formats: the sweep CSV (fixed 15-column header, one row per field point) and
the two-level master table (``kappa,f_M,f_gap``) written by the engine's
``master`` command.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ContractError

#: Fixed sweep CSV header (the engine's external contract).
SWEEP_COLUMNS = (
    "model", "L", "coupling_name", "coupling_value", "field_name", "field",
    "E0", "E1", "gap", "magnetization", "entanglement",
    "rdm_11", "rdm_12_re", "rdm_12_im", "flags",
)

NUMERIC_COLUMNS = ("field", "E0", "E1", "gap", "magnetization",
                   "entanglement", "rdm_11", "rdm_12_re", "rdm_12_im")

MASTER_COLUMNS = ("kappa", "f_M", "f_gap")


@dataclass(frozen=True)
class Series:
    """One (model, L, coupling) line of a sweep file."""

    model: str
    L: int
    coupling_name: str
    coupling_value: float
    field_name: str
    columns: dict[str, np.ndarray]
    source: Path

    @property
    def label(self) -> str:
        return f"L={self.L}, {self.coupling_name}={self.coupling_value:g}"

    @property
    def key(self) -> tuple:
        return (self.model, self.L, self.coupling_name, self.coupling_value)

    def column(self, name: str) -> np.ndarray:
        if name not in self.columns:
            raise ContractError(
                f"column {name!r} not found in {self.source} "
                f"(available: {sorted(self.columns)})"
            )
        return self.columns[name]


def read_sweep(path: str | Path) -> list[Series]:
    """Parse one sweep CSV into its series, in file order."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ContractError(f"cannot read {path}: {exc}") from exc
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ContractError(f"{path} is empty")
    header = lines[0].split(",")
    for col in SWEEP_COLUMNS:
        if col not in header:
            raise ContractError(f"column {col!r} missing from {path}")
    if len(lines) == 1:
        raise ContractError(f"{path} has a header but no data rows")
    idx = {c: header.index(c) for c in SWEEP_COLUMNS}
    groups: dict[tuple, list] = {}
    order: list[tuple] = []
    for n, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        if len(cells) != len(header):
            raise ContractError(f"{path} line {n}: expected {len(header)} "
                                f"cells, got {len(cells)}")
        try:
            key = (cells[idx["model"]], int(cells[idx["L"]]),
                   cells[idx["coupling_name"]],
                   float(cells[idx["coupling_value"]]),
                   cells[idx["field_name"]])
            row = [float(cells[idx[c]]) for c in NUMERIC_COLUMNS]
        except ValueError as exc:
            raise ContractError(f"{path} line {n}: {exc}") from exc
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(row)
    series = []
    for key in order:
        data = np.array(groups[key])
        columns = {c: data[:, k] for k, c in enumerate(NUMERIC_COLUMNS)}
        model, L, cname, cvalue, fname = key
        series.append(Series(model=model, L=L, coupling_name=cname,
                             coupling_value=cvalue, field_name=fname,
                             columns=columns, source=path))
    return series


def read_master(path: str | Path) -> dict[str, np.ndarray]:
    """Parse a two-level master table (``kappa,f_M,f_gap``)."""
    path = Path(path)
    try:
        lines = [ln for ln in path.read_text().splitlines() if ln.strip()]
    except OSError as exc:
        raise ContractError(f"cannot read {path}: {exc}") from exc
    if not lines or lines[0].split(",") != list(MASTER_COLUMNS):
        raise ContractError(
            f"{path} is not a master table (expected header "
            f"{','.join(MASTER_COLUMNS)})"
        )
    try:
        data = np.array([[float(x) for x in ln.split(",")]
                         for ln in lines[1:]])
    except ValueError as exc:
        raise ContractError(f"{path}: {exc}") from exc
    if data.size == 0:
        raise ContractError(f"{path} has no data rows")
    return {c: data[:, k] for k, c in enumerate(MASTER_COLUMNS)}
