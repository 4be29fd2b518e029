"""Configuration-driven sweep execution, CSV persistence and solver dispatch.

External contracts (consumed by the plotting frontend and by the CLI):

* CSV column header, bit-exact::

    model,L,coupling_name,coupling_value,field_name,field,E0,E1,gap,
    magnetization,entanglement,rdm_11,rdm_12_re,rdm_12_im,flags

  (one line; wrapped here for readability).  Numeric cells are printed with
  17 significant digits so that read(write(s)) round-trips bit-exactly.

* one metadata sidecar per run at ``<output>.meta`` with ``key=value`` lines.

* config files are INI-style: one section per sweep, flat keys (see
  :func:`parse_config`).

The environment variable ``SPINFSS_WORKERS`` overrides the worker count for
field-point parallelism; it is recorded in the sidecar.  Results are merged
in grid order, so parallel and serial runs produce identical files.
"""

from __future__ import annotations

import configparser
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .errors import CapacityError, SeriesFormatError, SpinFssError
from .eigensolve import DENSE_DIM_LIMIT, Method, lowest_two
from .entanglement import concurrence, negativity, rdm_element
from .fss import SweepSeries
from .hilbert import Model, SPIN1_Z, SpinChainSpec, build_hamiltonian
from .measure import (
    central_pair,
    magnetization,
    partial_trace,
    staggered_magnetization_rms,
)
from .mpsdmrg import (
    DmrgConfig,
    dmrg_excited,
    dmrg_ground,
    mps_local_expectation,
    mps_rdm,
    mps_staggered_rms,
)

CSV_COLUMNS = (
    "model", "L", "coupling_name", "coupling_value", "field_name", "field",
    "E0", "E1", "gap", "magnetization", "entanglement",
    "rdm_11", "rdm_12_re", "rdm_12_im", "flags",
)

#: Numeric series columns, in CSV order.
NUMERIC_COLUMNS = ("field", "E0", "E1", "gap", "magnetization",
                   "entanglement", "rdm_11", "rdm_12_re", "rdm_12_im")

WORKERS_ENV = "SPINFSS_WORKERS"

SOLVERS = ("dense", "lanczos", "dmrg")

MAGNETIZATION_MODES = ("x", "z", "staggered", "staggered_rms")


@dataclass(frozen=True)
class SweepConfig:
    model: Model
    L_list: tuple[int, ...]
    field_name: str
    grid: tuple[float, ...]
    solver: str = "lanczos"
    couplings: dict = field(default_factory=dict)
    magnetization: str = "x"
    compute_gap: bool = True
    eig_tol: float = 1e-12
    dmrg: DmrgConfig | None = None
    warm_start: bool = True
    output: Path | None = None

    def __post_init__(self):
        if len(self.grid) < 2:
            raise ValueError("field grid needs at least 2 points")
        if self.solver not in SOLVERS:
            raise ValueError(f"unknown solver {self.solver!r}")
        if self.magnetization not in MAGNETIZATION_MODES:
            raise ValueError(f"unknown magnetization mode {self.magnetization!r}")
        if any(l < 2 for l in self.L_list):
            raise ValueError("all L must be >= 2")


def _spec_for(cfg: SweepConfig, L: int, value: float) -> SpinChainSpec:
    params = dict(cfg.couplings)
    params[cfg.field_name] = value
    return SpinChainSpec(model=cfg.model, L=L, **params)


def _coupling_tag(cfg: SweepConfig) -> tuple[str, float]:
    """The single (name, value) pair identifying the series line."""
    if cfg.model is Model.ISING_HALF:
        prefer = ("Bz", "Bx", "J")
    else:
        prefer = ("Jz", "D", "Bz_staggered", "Bz_uniform")
    for name in prefer:
        if name != cfg.field_name and name in cfg.couplings:
            return name, float(cfg.couplings[name])
    return "none", 0.0


def _eval_point_ed(cfg: SweepConfig, L: int, value: float) -> dict:
    spec = _spec_for(cfg, L, value)
    if cfg.solver == "lanczos" and spec.dim > 2 ** 21 or \
            cfg.solver == "dense" and spec.dim > DENSE_DIM_LIMIT:
        raise CapacityError(f"dim {spec.dim} too large for solver {cfg.solver}")
    H = build_hamiltonian(spec)
    method = Method.DENSE if cfg.solver == "dense" else Method.LANCZOS
    res = lowest_two(H, method, cfg.eig_tol)
    state = res.v0
    if cfg.magnetization == "staggered_rms":
        mag = staggered_magnetization_rms(state, spec)
    else:
        axis = "x" if cfg.magnetization == "x" else "z"
        mag = magnetization(state, spec, axis=axis,
                            staggered=cfg.magnetization == "staggered")
    i, j = central_pair(L)
    rho = partial_trace(state, (i, j), spec)
    ent = concurrence(rho) if spec.local_dim == 2 else negativity(rho)
    r11 = rho.matrix[0, 0].real
    r12 = rho.matrix[0, 1]
    flags = ["ok"]
    if res.degenerate:
        flags.append("degenerate")
    return {
        "field": value, "E0": res.E0, "E1": res.E1, "gap": res.gap,
        "magnetization": mag, "entanglement": ent,
        "rdm_11": float(r11), "rdm_12_re": float(np.real(r12)),
        "rdm_12_im": float(np.imag(r12)),
        "flags": "+".join(flags),
    }


def _eval_point_dmrg(cfg: SweepConfig, L: int, value: float, warm):
    spec = _spec_for(cfg, L, value)
    dmrg_cfg = cfg.dmrg or DmrgConfig()
    e0, mps, report = dmrg_ground(spec, dmrg_cfg, initial=warm)
    if cfg.compute_gap:
        e1, _, _ = dmrg_excited(spec, dmrg_cfg, mps)
        gap = e1 - e0
    else:
        e1, gap = float("nan"), float("nan")
    if cfg.magnetization == "staggered_rms":
        mag = mps_staggered_rms(mps, SPIN1_Z)
    else:
        from .hilbert import SIGMA_X, SIGMA_Z, SPIN1_X
        if spec.local_dim == 2:
            op = SIGMA_X if cfg.magnetization == "x" else SIGMA_Z
        else:
            op = SPIN1_X.real if cfg.magnetization == "x" else SPIN1_Z
        from .measure import staggered_weight
        mag = sum(
            (staggered_weight(i) if cfg.magnetization == "staggered" else 1.0)
            * mps_local_expectation(mps, i, op)
            for i in range(1, L + 1)
        )
    i, j = central_pair(L)
    rho = mps_rdm(mps, (i, j))
    ent = concurrence(rho) if spec.local_dim == 2 else negativity(rho)
    flags = ["ok"] if report.converged else ["not_converged"]
    row = {
        "field": value, "E0": e0, "E1": e1, "gap": gap,
        "magnetization": float(mag), "entanglement": ent,
        "rdm_11": float(rho.matrix[0, 0].real),
        "rdm_12_re": float(rho.matrix[0, 1].real),
        "rdm_12_im": float(rho.matrix[0, 1].imag),
        "flags": "+".join(flags),
    }
    return row, mps


def _failed_row(value: float, exc: Exception) -> dict:
    nan = float("nan")
    return {
        "field": value, "E0": nan, "E1": nan, "gap": nan,
        "magnetization": nan, "entanglement": nan,
        "rdm_11": nan, "rdm_12_re": nan, "rdm_12_im": nan,
        "flags": f"failed:{type(exc).__name__}",
    }


def _worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{WORKERS_ENV} must be an integer, got {raw!r}")
    return max(1, n)


def run_sweep(cfg: SweepConfig) -> list[SweepSeries]:
    """One series per L; per-point failures are flagged, not dropped, and a
    run aborts if more than 10% of its points fail."""
    # fail fast on capacity before doing any work
    for L in cfg.L_list:
        _spec_for(cfg, L, cfg.grid[0])  # validates parameters
        dim = (2 if cfg.model is Model.ISING_HALF else 3) ** L
        if cfg.solver == "dense" and dim > DENSE_DIM_LIMIT:
            raise CapacityError(
                f"dense solver cannot handle dim {dim} at L={L}"
            )
        if cfg.solver == "lanczos" and dim > 2 ** 21:
            raise CapacityError(
                f"Lanczos ceiling exceeded at L={L} (dim {dim})"
            )
    name, cvalue = _coupling_tag(cfg)
    series_list = []
    workers = _worker_count()
    for L in cfg.L_list:
        rows = _sweep_one_L(cfg, L, workers)
        nfail = sum(1 for r in rows if r["flags"].startswith("failed"))
        if nfail > 0.1 * len(rows):
            raise SpinFssError(
                f"{nfail}/{len(rows)} points failed at L={L}; aborting run"
            )
        columns = {
            key: np.array([r[key] for r in rows], dtype=float)
            for key in NUMERIC_COLUMNS
        }
        series_list.append(SweepSeries(
            model=cfg.model.value, L=L, coupling_name=name,
            coupling_value=cvalue, field_name=cfg.field_name,
            columns=columns,
            flags=tuple(r["flags"] for r in rows),
            meta=run_metadata(cfg, workers),
        ))
    return series_list


def _sweep_one_L(cfg: SweepConfig, L: int, workers: int) -> list[dict]:
    if cfg.solver == "dmrg":
        # warm-started DMRG is inherently sequential along the grid
        rows = []
        warm = None
        for value in cfg.grid:
            try:
                row, mps = _eval_point_dmrg(cfg, L, value,
                                            warm if cfg.warm_start else None)
                warm = mps
            except SpinFssError as exc:
                row = _failed_row(value, exc)
            rows.append(row)
        return rows
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_point_task,
                                 [(cfg, L, v) for v in cfg.grid]))
    return [_point_task((cfg, L, v)) for v in cfg.grid]


def _point_task(args) -> dict:
    cfg, L, value = args
    try:
        return _eval_point_ed(cfg, L, value)
    except SpinFssError as exc:
        return _failed_row(value, exc)


def run_metadata(cfg: SweepConfig, workers: int) -> dict[str, str]:
    meta = {
        "code_version": __version__,
        "solver": cfg.solver,
        "eig_tol": repr(cfg.eig_tol),
        "magnetization": cfg.magnetization,
        "workers": str(workers),
    }
    if cfg.solver == "dmrg":
        d = cfg.dmrg or DmrgConfig()
        meta.update(chi_max=str(d.chi_max), svd_cutoff=repr(d.svd_cutoff),
                    max_sweeps=str(d.max_sweeps),
                    energy_tol=repr(d.energy_tol))
    return meta


# ---------------------------------------------------------------------------
# persistence

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_series(series_list: list[SweepSeries], path: str | Path) -> None:
    """All series into one CSV plus a ``<path>.meta`` sidecar."""
    path = Path(path)
    lines = [",".join(CSV_COLUMNS)]
    for s in series_list:
        flags = s.flags or ("ok",) * len(s)
        for k in range(len(s)):
            cells = [s.model, str(s.L), s.coupling_name,
                     _fmt(s.coupling_value), s.field_name]
            cells += [_fmt(s.columns[c][k]) for c in NUMERIC_COLUMNS]
            cells.append(flags[k])
            lines.append(",".join(cells))
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")
    meta = dict(series_list[0].meta) if series_list else {}
    meta_lines = [f"{k}={v}" for k, v in sorted(meta.items())]
    Path(str(path) + ".meta").write_text("\n".join(meta_lines) + "\n")


def read_series(path: str | Path) -> list[SweepSeries]:
    """Parse a sweep CSV back into series, grouped by (model, L, coupling)."""
    path = Path(path)
    text = path.read_text()
    lines = text.splitlines()
    if not lines:
        raise SeriesFormatError("empty file", line=1)
    header = lines[0].split(",")
    for col in CSV_COLUMNS:
        if col not in header:
            raise SeriesFormatError(f"missing column {col!r}", line=1)
    idx = {col: header.index(col) for col in CSV_COLUMNS}
    groups: dict[tuple, list] = {}
    order: list[tuple] = []
    for ln, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cells = line.split(",")
        if len(cells) != len(header):
            raise SeriesFormatError(
                f"expected {len(header)} cells, got {len(cells)}", line=ln)
        try:
            key = (cells[idx["model"]], int(cells[idx["L"]]),
                   cells[idx["coupling_name"]],
                   float(cells[idx["coupling_value"]]),
                   cells[idx["field_name"]])
            row = {c: float(cells[idx[c]]) for c in NUMERIC_COLUMNS}
        except ValueError as exc:
            raise SeriesFormatError(str(exc), line=ln) from exc
        row["flags"] = cells[idx["flags"]]
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(row)
    meta_path = Path(str(path) + ".meta")
    meta = {}
    if meta_path.exists():
        for raw in meta_path.read_text().splitlines():
            if "=" in raw:
                k, v = raw.split("=", 1)
                meta[k] = v
    out = []
    for key in order:
        rows = groups[key]
        model, L, cname, cvalue, fname = key
        columns = {c: np.array([r[c] for r in rows]) for c in NUMERIC_COLUMNS}
        out.append(SweepSeries(
            model=model, L=L, coupling_name=cname, coupling_value=cvalue,
            field_name=fname, columns=columns,
            flags=tuple(r["flags"] for r in rows), meta=meta,
        ))
    return out


# ---------------------------------------------------------------------------
# config files

def _parse_grid(raw: str) -> tuple[float, ...]:
    raw = raw.strip()
    if ":" in raw:
        start, stop, count = raw.split(":")
        return tuple(np.linspace(float(start), float(stop), int(count)))
    return tuple(float(x) for x in raw.replace(",", " ").split())


_COUPLING_KEYS = ("J", "Bz", "Bx", "Jz", "D", "Bz_uniform", "Bz_staggered")


def parse_config(path: str | Path) -> list[SweepConfig]:
    """Every section of the INI file describes one sweep."""
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise SeriesFormatError(f"cannot read config {path}")
    configs = []
    for section in parser.sections():
        sec = parser[section]
        try:
            model = Model(sec["model"])
            L_list = tuple(int(x) for x in
                           sec["L"].replace(",", " ").split())
            field_name = sec["field"]
            grid = _parse_grid(sec["grid"])
        except KeyError as exc:
            raise SeriesFormatError(
                f"section [{section}] missing key {exc}") from exc
        couplings = {k: float(sec[k]) for k in _COUPLING_KEYS if k in sec}
        dmrg = None
        if sec.get("solver", "lanczos") == "dmrg":
            dmrg = DmrgConfig(
                chi_max=sec.getint("chi_max", 128),
                svd_cutoff=sec.getfloat("svd_cutoff", 1e-10),
                max_sweeps=sec.getint("max_sweeps", 30),
                energy_tol=sec.getfloat("energy_tol", 1e-10),
            )
        configs.append(SweepConfig(
            model=model, L_list=L_list, field_name=field_name, grid=grid,
            solver=sec.get("solver", "lanczos"),
            couplings=couplings,
            magnetization=sec.get(
                "magnetization",
                "x" if model is Model.ISING_HALF else "staggered"),
            compute_gap=sec.getboolean("compute_gap", True),
            eig_tol=sec.getfloat("eig_tol", 1e-12),
            dmrg=dmrg,
            warm_start=sec.getboolean("warm_start", True),
            output=Path(sec["output"]) if "output" in sec else None,
        ))
    if not configs:
        raise SeriesFormatError(f"config {path} defines no sweep sections")
    return configs
