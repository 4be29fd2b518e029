"""Finite-size-scaling analytics: scaling variables, derivatives,
normalizations, pseudo-critical-point location, data-collapse cost and the
two-level master curves.

All operations are pure functions over immutable :class:`SweepSeries` data.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DegenerateSeriesError, DomainError, InconclusiveError

#: Second-order critical point of the spin-1 XXZ chain at D = 0, used to map
#: the Ising spontaneous-magnetization formula onto the Neel order parameter.
JZC_SPIN1 = 1.186

#: Smallest meaningful field step; below this a jump is treated as a genuine
#: discontinuity rather than an unresolved slope.
FIELD_STEP_FLOOR = 1e-13


@dataclass(frozen=True)
class SweepSeries:
    """Ordered sweep records for one (model, L, coupling) line.

    ``columns`` maps column name to a 1-D array; all arrays share the grid of
    the mandatory, strictly increasing ``field`` column.
    """

    model: str
    L: int
    coupling_name: str
    coupling_value: float
    field_name: str
    columns: dict[str, np.ndarray]
    flags: tuple[str, ...] = ()
    meta: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if "field" not in self.columns:
            raise ValueError("series must carry a 'field' column")
        f = self.columns["field"]
        n = len(f)
        if any(len(col) != n for col in self.columns.values()):
            raise ValueError("all columns must share one grid length")
        if np.any(np.diff(f) <= 0):
            raise ValueError("field values must be strictly increasing")
        if self.flags and len(self.flags) != n:
            raise ValueError("flags length must match the grid")

    def __len__(self) -> int:
        return len(self.columns["field"])

    @property
    def field_values(self) -> np.ndarray:
        return self.columns["field"]

    def column(self, name: str) -> np.ndarray:
        if name not in self.columns:
            raise KeyError(f"series has no column {name!r}; "
                           f"available: {sorted(self.columns)}")
        return self.columns[name]

    def with_column(self, name: str, values: np.ndarray,
                    **meta: str) -> "SweepSeries":
        cols = dict(self.columns)
        cols[name] = np.asarray(values, dtype=float)
        return replace(self, columns=cols, meta={**self.meta, **meta})

    def key(self) -> str:
        return (f"{self.model}:L={self.L}:"
                f"{self.coupling_name}={self.coupling_value:g}")


@dataclass(frozen=True)
class CollapseResult:
    series_keys: tuple[str, ...]
    x_column: str
    y_column: str
    cost: float
    per_series_rms: tuple[float, ...]


# ---------------------------------------------------------------------------
# analytic ingredients of the scaling variables

def m0_ising(Bz: float) -> float:
    """Spontaneous longitudinal magnetization (1 - Bz^2)^(1/8); ferromagnetic
    phase only."""
    if not 0.0 <= Bz < 1.0:
        raise DomainError(f"m0 is defined for 0 <= Bz < 1, got {Bz}")
    return float((1.0 - Bz * Bz) ** 0.125)


def gap_analytic_ising(Bz: float, L: int) -> float:
    """Asymptotic OBC gap 2 (1 - Bz^2) Bz^L at the Bx = 0 crossing."""
    if not 0.0 < Bz < 1.0:
        raise DomainError(f"gap formula needs 0 < Bz < 1, got {Bz}")
    if L < 2:
        raise DomainError(f"L must be >= 2, got {L}")
    return float(2.0 * (1.0 - Bz * Bz) * Bz ** L)


def m0_staggered(Jz: float) -> float:
    """Neel order parameter via the Ising formula with Bz -> Jzc/Jz."""
    if Jz <= JZC_SPIN1:
        raise DomainError(f"Neel phase requires Jz > {JZC_SPIN1}, got {Jz}")
    return float((1.0 - (JZC_SPIN1 / Jz) ** 2) ** 0.125)


def kappa1(Bx, Bz: float, L: int):
    """Scaling variable 2 m0 Bx L / gap for the Ising longitudinal field."""
    return 2.0 * m0_ising(Bz) * np.asarray(Bx, dtype=float) * L \
        / gap_analytic_ising(Bz, L)


def kappa2(D, Dc_L: float, L: int, gap_L: float):
    """Scaling variable (D - Dc_L) L / gap_L for the anisotropy sweep; the
    gap is the numerically measured one at the pseudo-critical point."""
    if gap_L <= 0.0:
        raise DomainError(f"gap_L must be positive, got {gap_L}")
    return (np.asarray(D, dtype=float) - Dc_L) * L / gap_L


def kappa3(Bz_st, Jz: float, L: int, gap_L: float):
    """Scaling variable 2 m0_st Bst L / gap_L for the staggered field."""
    if gap_L <= 0.0:
        raise DomainError(f"gap_L must be positive, got {gap_L}")
    return 2.0 * m0_staggered(Jz) * np.asarray(Bz_st, dtype=float) * L / gap_L


# ---------------------------------------------------------------------------
# series transforms

def numerical_derivative(series: SweepSeries, column: str) -> SweepSeries:
    """d(column)/d(field) on the sweep grid: second-order central differences
    in the interior, second-order one-sided at the ends.  The result is
    stored as column ``d_<column>``."""
    if len(series) < 5:
        raise ValueError("derivative needs at least 5 grid points")
    x = series.field_values
    y = series.column(column)
    dy = np.gradient(y, x, edge_order=2)
    return series.with_column(f"d_{column}", dy)


def normalize_by_extremum(series: SweepSeries, column: str,
                          mode: str = "max") -> SweepSeries:
    """Divide a column by its maximum or minimum; the normalizing value is
    retained in the series metadata."""
    if mode not in ("max", "min"):
        raise ValueError(f"mode must be 'max' or 'min', got {mode!r}")
    y = series.column(column)
    norm = float(y.max() if mode == "max" else y.min())
    if norm == 0.0:
        raise DegenerateSeriesError(f"{mode} of column {column!r} is zero")
    return series.with_column(column, y / norm,
                              **{f"norm_{column}": repr(norm)})


def locate_pseudocritical(series: SweepSeries,
                          column: str) -> tuple[float, float]:
    """Field value of steepest slope of an order-parameter column, refined by
    quadratic interpolation of |derivative| over the three nearest grid
    points; returns (critical field, gap interpolated there)."""
    x = series.field_values
    d = np.abs(numerical_derivative(series, column).column(f"d_{column}"))
    i = int(np.argmax(d))
    if i == 0 or i == len(x) - 1:
        raise InconclusiveError(
            "steepest slope sits on the grid edge; widen the scan"
        )
    x0, x1, x2 = x[i - 1], x[i], x[i + 1]
    y0, y1, y2 = d[i - 1], d[i], d[i + 1]
    denom = (x0 - x1) * (x0 - x2) * (x1 - x2)
    a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom
    b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / denom
    xc = x1 if a == 0.0 else -b / (2.0 * a)
    if not x0 <= xc <= x2:
        xc = x1
    gap = float(np.interp(xc, x, series.column("gap"))) \
        if "gap" in series.columns else float("nan")
    return float(xc), gap


def detect_spike(series: SweepSeries, column: str, center: float = 0.0,
                 ratio_threshold: float = 0.5) -> bool:
    """Cusp detector at ``center``.

    Compares the one-sided slope between the center and its nearest grid
    neighbor with the slope scale a few grid steps away.  For an analytic
    extremum the near slope vanishes linearly with the grid step, so the
    ratio is small; a cusp keeps it of order one.
    """
    x = series.field_values
    y = series.column(column)
    ic = int(np.argmin(np.abs(x - center)))
    if ic < 5 or ic > len(x) - 6:
        raise InconclusiveError("spike detection needs >= 5 points per side")
    far = 5
    near_slopes = []
    far_slopes = []
    for sgn in (-1, +1):
        near_slopes.append(abs((y[ic + sgn] - y[ic]) / (x[ic + sgn] - x[ic])))
        far_slopes.append(abs((y[ic + sgn * far] - y[ic + sgn * (far - 1)])
                              / (x[ic + sgn * far] - x[ic + sgn * (far - 1)])))
    scale = max(far_slopes)
    if scale == 0.0:
        return False
    return min(near_slopes) / scale > ratio_threshold


def collapse_cost(series_list: list[SweepSeries], x_column: str,
                  y_column: str) -> CollapseResult:
    """Leave-one-series-out data-collapse cost.

    For every point of every series, the master value is the piecewise-linear
    interpolation of the pooled points of all *other* series at the same x;
    points outside the others' x range are excluded.  The cost Q is the mean
    squared residual divided by the variance of all included y values, so
    Q = 0 iff the rescaled curves coincide and Q ~ 1 means no collapse at
    all.
    """
    if len(series_list) < 2:
        raise ValueError("collapse needs at least two series")
    xs = [s.column(x_column) for s in series_list]
    ys = [s.column(y_column) for s in series_list]
    residuals = []
    included = []
    per_series = []
    for i in range(len(series_list)):
        ox = np.concatenate([xs[j] for j in range(len(series_list)) if j != i])
        oy = np.concatenate([ys[j] for j in range(len(series_list)) if j != i])
        order = np.argsort(ox, kind="stable")
        ox, oy = ox[order], oy[order]
        mask = (xs[i] >= ox[0]) & (xs[i] <= ox[-1])
        if not np.any(mask):
            per_series.append(float("nan"))
            continue
        master = np.interp(xs[i][mask], ox, oy)
        res = ys[i][mask] - master
        residuals.append(res)
        included.append(ys[i][mask])
        per_series.append(float(np.sqrt(np.mean(res ** 2))))
    if not residuals:
        raise ValueError("series have no overlapping x ranges")
    res = np.concatenate(residuals)
    inc = np.concatenate(included)
    var = float(np.var(inc))
    cost = 0.0 if var == 0.0 and np.allclose(res, 0.0) \
        else float(np.mean(res ** 2) / var)
    return CollapseResult(
        series_keys=tuple(s.key() for s in series_list),
        x_column=x_column, y_column=y_column,
        cost=cost, per_series_rms=tuple(per_series),
    )


# ---------------------------------------------------------------------------
# two-level avoided-crossing model

def two_level_master(kappa):
    """Universal curves of the 2x2 crossing model.

    The model H2 = [[-x, g/2], [g/2, x]] with x = m0 h L and kappa = 2 x / g
    has gap g sqrt(1 + kappa^2) and ground-state polarization
    kappa / sqrt(1 + kappa^2); hence f_M and f_Delta below.
    """
    k = np.asarray(kappa, dtype=float)
    root = np.sqrt(1.0 + k * k)
    f_m = k / root
    if np.ndim(kappa) == 0:
        return float(f_m), float(root)
    return f_m, root


# ---------------------------------------------------------------------------
# attaching scaling variables to measured series

def attach_kappa1(series: SweepSeries) -> SweepSeries:
    """Add a 'kappa' column from the analytic Ising ingredients; the series
    coupling is Bz and the swept field Bx."""
    k = kappa1(series.field_values, series.coupling_value, series.L)
    return series.with_column("kappa", k)


def attach_kappa2(series: SweepSeries, Dc_L: float,
                  gap_L: float) -> SweepSeries:
    k = kappa2(series.field_values, Dc_L, series.L, gap_L)
    return series.with_column("kappa", k, kappa2_Dc=repr(Dc_L),
                              kappa2_gap=repr(gap_L))


def attach_kappa3(series: SweepSeries, gap_L: float) -> SweepSeries:
    """The series coupling is Jz and the swept field the staggered one; the
    gap must be measured at zero field."""
    k = kappa3(series.field_values, series.coupling_value, series.L, gap_L)
    return series.with_column("kappa", k, kappa3_gap=repr(gap_L))
