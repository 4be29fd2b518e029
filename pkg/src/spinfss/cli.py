"""Command-line entry point.

Subcommands::

    spinfss sweep    <config.ini> [--section NAME] [--output PATH]
    spinfss collapse <sweep.csv ...> --x {field,kappa1,kappa2,kappa3}
                     --y COL [--normalize {max,min}] [--derivative]
                     [--output PATH]
    spinfss locate   <sweep.csv> --column COL
    spinfss validate [sweep.csv]
    spinfss master   --kappa-range A:B:N --output PATH

``validate`` without an argument runs the built-in oracle suite (closed-form
spot checks of the solvers, entanglement measures and persistence); with a
CSV argument it checks that file against the sweep contract.

Exit codes: 0 success, 1 validation failure, 2 configuration / usage /
capacity error, 3 solver failure.
"""

from __future__ import annotations

import argparse
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .errors import (
    CapacityError,
    InconclusiveError,
    NoConvergenceError,
    OrthogonalityLossError,
    SeriesFormatError,
    SpinFssError,
)
from .fss import (
    SweepSeries,
    attach_kappa1,
    attach_kappa2,
    attach_kappa3,
    collapse_cost,
    locate_pseudocritical,
    normalize_by_extremum,
    numerical_derivative,
    two_level_master,
)
from .pipeline import parse_config, read_series, run_sweep, write_series

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_USAGE = 2
EXIT_SOLVER = 3


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="spinfss",
        description="Spin-chain ground-state sweeps and finite-size-scaling "
                    "analysis.",
    )
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("sweep", help="run the sweeps described by an INI "
                                      "config and write CSV output")
    sp.add_argument("config", type=Path)
    sp.add_argument("--section", help="run only the named config section")
    sp.add_argument("--output", type=Path,
                    help="override the config's output path")

    cp = sub.add_parser("collapse", help="rescale series onto a scaling "
                                         "variable and print the "
                                         "leave-one-out collapse cost Q")
    cp.add_argument("csvs", type=Path, nargs="+")
    cp.add_argument("--x", default="field",
                    choices=("field", "kappa1", "kappa2", "kappa3"))
    cp.add_argument("--y", required=True, help="observable column")
    cp.add_argument("--normalize", choices=("max", "min"),
                    help="divide each series' y column by its extremum")
    cp.add_argument("--derivative", action="store_true",
                    help="analyze d(y)/d(field) instead of y")
    cp.add_argument("--output", type=Path,
                    help="write the rescaled series as CSV")

    lp = sub.add_parser("locate", help="pseudo-critical field of each series "
                                       "(steepest slope of a column)")
    lp.add_argument("csv", type=Path)
    lp.add_argument("--column", default="magnetization")

    vp = sub.add_parser("validate", help="run the built-in oracle suite, or "
                                         "check a sweep CSV if given")
    vp.add_argument("csv", type=Path, nargs="?")

    mp = sub.add_parser("master", help="tabulate the two-level master curves "
                                       "f_M and f_Delta on a kappa grid")
    mp.add_argument("--kappa-range", default="-5:5:101", metavar="A:B:N")
    mp.add_argument("--output", type=Path, required=True)
    return p


def _cmd_sweep(args) -> int:
    configs = parse_config(args.config)
    if args.section is not None:
        import configparser
        raw = configparser.ConfigParser()
        raw.read(args.config)
        names = raw.sections()
        if args.section not in names:
            raise SeriesFormatError(
                f"config has no section {args.section!r}; "
                f"available: {names}")
        configs = [configs[names.index(args.section)]]
    for cfg in configs:
        out = args.output or cfg.output
        if out is None:
            raise SeriesFormatError(
                "no output path: set 'output' in the config section or pass "
                "--output")
        series = run_sweep(cfg)
        write_series(series, out)
        npts = sum(len(s) for s in series)
        print(f"wrote {npts} points ({len(series)} series) to {out}")
    return EXIT_OK


def _attach_scaling(series: SweepSeries, x: str) -> SweepSeries:
    """Attach the requested scaling variable, deriving its per-series scale
    factors from the series itself."""
    if x == "kappa1":
        return attach_kappa1(series)
    if x == "kappa2":
        dc, gap = locate_pseudocritical(series, "magnetization")
        return attach_kappa2(series, dc, gap)
    if x == "kappa3":
        gap0 = float(np.interp(0.0, series.field_values,
                               series.column("gap")))
        return attach_kappa3(series, gap0)
    return series


def _cmd_collapse(args) -> int:
    series = []
    for path in args.csvs:
        series.extend(read_series(path))
    if len(series) < 2:
        print("collapse needs at least two series", file=sys.stderr)
        return EXIT_USAGE
    x_col = "field" if args.x == "field" else "kappa"
    y_col = args.y
    rescaled = []
    for s in series:
        s = _attach_scaling(s, args.x)
        if args.derivative:
            s = numerical_derivative(s, y_col)
            col = f"d_{y_col}"
        else:
            col = y_col
        if args.normalize:
            s = normalize_by_extremum(s, col, mode=args.normalize)
        rescaled.append((s, col))
    col = rescaled[0][1]
    result = collapse_cost([s for s, _ in rescaled], x_col, col)
    print(f"Q = {result.cost:.6g}")
    for key, rms in zip(result.series_keys, result.per_series_rms):
        print(f"  {key}: rms residual {rms:.6g}")
    if args.output is not None:
        lines = [f"series,{x_col},{col}"]
        for s, c in rescaled:
            xs = s.column(x_col)
            ys = s.column(c)
            lines += [f"{s.key()},{x:.17g},{y:.17g}"
                      for x, y in zip(xs, ys)]
        args.output.parent.mkdir(parents=True, exist_ok=True)
        args.output.write_text("\n".join(lines) + "\n")
        print(f"wrote rescaled series to {args.output}")
    return EXIT_OK


def _cmd_locate(args) -> int:
    series = read_series(args.csv)
    for s in series:
        xc, gap = locate_pseudocritical(s, args.column)
        print(f"{s.key()}: {s.field_name}_c = {xc:.12g}  gap = {gap:.12g}")
    return EXIT_OK


def _oracle_suite() -> list[tuple[str, bool, str]]:
    """Closed-form spot checks spanning the solver, measurement and
    persistence layers; each returns (name, passed, detail)."""
    from .eigensolve import Method, lowest_two
    from .entanglement import concurrence, negativity
    from .hilbert import Model, SpinChainSpec, build_hamiltonian
    from .measure import DensityMatrix, central_pair, energy_reconstruction, \
        partial_trace

    checks = []

    spec = SpinChainSpec(model=Model.ISING_HALF, L=2, Bz=1.0)
    res = lowest_two(build_hamiltonian(spec), Method.DENSE)
    checks.append(("two-site ground energy -sqrt(5)",
                   abs(res.E0 + np.sqrt(5.0)) < 1e-10, f"E0 = {res.E0!r}"))

    spec = SpinChainSpec(model=Model.ISING_HALF, L=6, Bz=0.5, Bx=0.02)
    d = lowest_two(build_hamiltonian(spec), Method.DENSE)
    l = lowest_two(build_hamiltonian(spec), Method.LANCZOS, 1e-12)
    checks.append(("dense/Lanczos agreement",
                   abs(d.E0 - l.E0) < 1e-9 and abs(d.E1 - l.E1) < 1e-9,
                   f"dE0 = {abs(d.E0 - l.E0):.2e}"))

    checks.append(("energy reconstruction from reduced density matrices",
                   abs(energy_reconstruction(d.v0, spec) - d.E0) < 1e-10,
                   ""))

    rho = partial_trace(d.v0, central_pair(spec.L), spec)
    ok = True
    try:
        rho.assert_valid(1e-10)
    except ValueError:
        ok = False
    checks.append(("central-pair density matrix validity", ok, ""))

    bell = np.zeros((4, 4))
    bell[np.ix_((0, 3), (0, 3))] = 0.5
    rho_b = DensityMatrix((2, 2), bell.astype(complex))
    checks.append(("Bell state concurrence 1 and negativity 1/2",
                   abs(concurrence(rho_b) - 1.0) < 1e-12
                   and abs(negativity(rho_b) - 0.5) < 1e-12, ""))

    psi_minus = np.array([0, 1, -1, 0]) / np.sqrt(2)
    werner = DensityMatrix((2, 2), (0.8 * np.outer(psi_minus, psi_minus)
                                    + 0.05 * np.eye(4)).astype(complex))
    checks.append(("Werner state concurrence 0.7",
                   abs(concurrence(werner) - 0.7) < 1e-12, ""))

    k = np.linspace(-4, 4, 9)
    f_m, f_gap = two_level_master(k)
    checks.append(("two-level master curve identity",
                   np.allclose(f_m ** 2 + 1.0 / f_gap ** 2, 1.0,
                               atol=1e-12), ""))

    with tempfile.TemporaryDirectory() as tmp:
        cols = {c: np.linspace(0, 1, 3) for c in
                ("field", "E0", "E1", "gap", "magnetization", "entanglement",
                 "rdm_11", "rdm_12_re", "rdm_12_im")}
        s = SweepSeries(model="ising_half", L=4, coupling_name="Bz",
                        coupling_value=0.5, field_name="Bx", columns=cols)
        path = Path(tmp) / "probe.csv"
        write_series([s], path)
        back = read_series(path)[0]
        ok = all(np.array_equal(back.column(c), s.column(c)) for c in cols)
        checks.append(("CSV round-trip bit-exactness", ok, ""))

    return checks


def _cmd_validate(args) -> int:
    if args.csv is None:
        failures = 0
        for name, passed, detail in _oracle_suite():
            status = "ok" if passed else "FAIL"
            suffix = f" ({detail})" if detail and not passed else ""
            print(f"{status:4s} {name}{suffix}")
            failures += not passed
        return EXIT_OK if failures == 0 else EXIT_VALIDATION
    try:
        series = read_series(args.csv)
    except SeriesFormatError as exc:
        print(f"INVALID: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    problems = []
    for s in series:
        bad = [f for f in s.flags if f.split("+")[0] != "ok"]
        if bad:
            problems.append(f"{s.key()}: {len(bad)} flagged points "
                            f"(e.g. {bad[0]})")
        for name, col in s.columns.items():
            # failed points legitimately carry NaNs; anything else must be
            # finite
            for k in np.nonzero(~np.isfinite(col))[0]:
                if not (s.flags and s.flags[k].startswith("failed")):
                    problems.append(
                        f"{s.key()}: non-finite {name} at point {k}")
    if problems:
        for msg in problems:
            print(f"INVALID: {msg}", file=sys.stderr)
        return EXIT_VALIDATION
    npts = sum(len(s) for s in series)
    print(f"OK: {len(series)} series, {npts} points")
    return EXIT_OK


def _cmd_master(args) -> int:
    try:
        a, b, n = args.kappa_range.split(":")
        lo, hi, count = float(a), float(b), int(n)
    except ValueError:
        print(f"bad --kappa-range {args.kappa_range!r}; expected A:B:N",
              file=sys.stderr)
        return EXIT_USAGE
    if count < 2 or hi <= lo:
        print("master table needs A < B and N >= 2", file=sys.stderr)
        return EXIT_USAGE
    kappa = np.linspace(lo, hi, count)
    f_m, f_gap = two_level_master(kappa)
    lines = ["kappa,f_M,f_gap"]
    lines += [f"{k:.17g},{m:.17g},{g:.17g}"
              for k, m, g in zip(kappa, f_m, f_gap)]
    args.output.parent.mkdir(parents=True, exist_ok=True)
    args.output.write_text("\n".join(lines) + "\n")
    print(f"wrote {count} rows to {args.output}")
    return EXIT_OK


_HANDLERS = {
    "sweep": _cmd_sweep,
    "collapse": _cmd_collapse,
    "locate": _cmd_locate,
    "validate": _cmd_validate,
    "master": _cmd_master,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help/--version
        return int(exc.code or 0)
    try:
        return _HANDLERS[args.command](args)
    except (NoConvergenceError, OrthogonalityLossError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (CapacityError, SeriesFormatError, ValueError, KeyError,
            FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InconclusiveError as exc:
        print(f"inconclusive: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except SpinFssError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
