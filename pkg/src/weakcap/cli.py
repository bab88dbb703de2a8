"""Command-line sweeps writing plot-ready CSV files.

Examples
--------
    weakcap fig2a --grid -30:10:2 --out fig2a.csv
    weakcap fig3 --n 2000 --units nats --out -
    weakcap fi-structure --model ma1 --rho 0.3 --n 50
    weakcap colored --cov noise.csv --grid 0.001:0.01:0.001
"""
from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .capacity import (
    QUADRATURE_WARNING, c_bin, c_high_memoryless, c_high_per_power, c_low,
    exact_colored_capacity, waterfill_smallP, ar1_capacity,
)
from .channels import AwgnChannel, GammaChannel, ar1_covariance, load_covariance_csv, ma1_covariance
from .fisher import ar1_fisher, fisher_scalar, ma1_fisher
from .oracle import exact_awgn_amplitude_capacity

log = logging.getLogger("weakcap")

LN2 = math.log(2.0)
DEFAULT_GRIDS = {
    "fig2a": "-30:10:2",
    "fig2b": "0.75:4.5:0.25",
    "fig3": "-0.42:0.42:0.02",
    "colored": "0.0001:0.0101:0.001",
}
# failures a single cell may raise without aborting the sweep
NUMERIC_ERRORS = (ArithmeticError, ValueError, RuntimeError, np.linalg.LinAlgError)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # bad arguments exit with status 1
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


@dataclass
class SweepSpec:
    figure: str
    grid: tuple | None
    n: int | None
    units: str = "bits"
    out: str = "-"
    threads: int = 0
    options: dict = field(default_factory=dict)

    def values(self):
        return grid_values(*self.grid)


def parse_grid(text: str):
    """``MIN:MAX:STEP`` with ``MIN < MAX`` and ``STEP > 0``."""
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"grid must be MIN:MAX:STEP, got {text!r}")
    try:
        lo, hi, step = (float(p) for p in parts)
    except ValueError:
        raise UsageError(f"grid must hold three numbers, got {text!r}") from None
    if not all(map(math.isfinite, (lo, hi, step))):
        raise UsageError("grid values must be finite")
    if not lo < hi:
        raise UsageError(f"grid needs MIN < MAX, got {lo} and {hi}")
    if not step > 0:
        raise UsageError(f"grid needs STEP > 0, got {step}")
    return lo, hi, step


def grid_values(lo, hi, step):
    """Inclusive grid, rounded to 12 significant digits to drop float drift."""
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [float(f"{lo + i * step:.12g}") for i in range(count)]


def read_config(path):
    """Flat ``key = value`` file; ``#`` starts a comment."""
    cfg = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    for no, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{no}: expected key=value")
        key, val = (s.strip() for s in line.split("=", 1))
        if not key:
            raise UsageError(f"{path}:{no}: empty key")
        cfg[key.replace("-", "_")] = val
    return cfg


# --------------------------------------------------------------------------
# row computations: each returns (cells, messages); a cell is None on failure
# --------------------------------------------------------------------------


def _cell(fn, label, messages):
    try:
        est = fn()
    except NUMERIC_ERRORS as exc:
        messages.append(f"{label}: {exc}")
        return None
    flags = getattr(est, "flags", frozenset())
    if flags:
        messages.append(f"{label}: flagged {', '.join(sorted(flags))}")
        if QUADRATURE_WARNING not in flags and not math.isfinite(float(est)):
            return None
    val = float(est)
    return val if math.isfinite(val) else None


def row_fig2a(snr_db, opts):
    dt = 10.0 ** (snr_db / 20.0)
    ch = AwgnChannel(1.0)
    msgs = []
    cells = [
        _cell(lambda: exact_awgn_amplitude_capacity(dt, m=opts["m"], K=opts["K"]), "c_exact_oracle", msgs),
        _cell(lambda: c_high_memoryless(1.0, dt), "c_high", msgs),
        _cell(lambda: c_bin(ch, 0.0, dt), "c_bin", msgs),
        _cell(lambda: c_low(ch, -dt, dt), "c_low", msgs),
    ]
    return [snr_db, dt], cells, msgs


def row_fig2b(kappa, opts):
    ch = GammaChannel(kappa)
    theta0, dt = 27.5 / kappa, 22.5 / kappa
    msgs = []
    cells = [
        _cell(lambda: c_high_memoryless(fisher_scalar(ch, theta0, method="auto"), dt), "c_high", msgs),
        _cell(lambda: c_bin(ch, theta0, dt), "c_bin", msgs),
        _cell(lambda: c_low(ch, 5.0 / kappa, 50.0 / kappa), "c_low", msgs),
    ]
    return [kappa], cells, msgs


def row_fig3(rho, opts):
    n = opts["n"]
    msgs = []
    cells = [
        _cell(lambda: ar1_capacity(1.0, rho), "c_per_p_ar1", msgs),
        _cell(lambda: c_high_per_power("ar1", rho, n), "c_per_p_ar1_numeric", msgs),
        _cell(lambda: c_high_per_power("ma1", rho, n), "c_per_p_ma1_numeric", msgs),
    ]
    return [rho], cells, msgs


def row_colored(P, opts):
    cov = opts["cov"]
    msgs = []
    cells = [
        _cell(lambda: exact_colored_capacity(cov, P), "c_exact", msgs),
        _cell(lambda: waterfill_smallP(cov, P), "c_smallP", msgs),
    ]
    return [P], cells, msgs


SWEEPS = {
    "fig2a": (row_fig2a, ["snr_db", "delta_theta"], ["c_exact_oracle", "c_high", "c_bin", "c_low"]),
    "fig2b": (row_fig2b, ["kappa"], ["c_high", "c_bin", "c_low"]),
    "fig3": (row_fig3, ["rho"], ["c_per_p_ar1", "c_per_p_ar1_numeric", "c_per_p_ma1_numeric"]),
    "colored": (row_colored, ["P"], ["c_exact", "c_smallP"]),
}


def fmt(x):
    return "" if x is None else format(float(x), ".17g")


def run_sweep(spec: SweepSpec):
    """Compute every grid row; returns (header, rows, failed_rows)."""
    row_fn, keys, info = SWEEPS[spec.figure]
    values = spec.values()
    threads = spec.threads or (os.cpu_count() or 1)

    def job(v):
        return row_fn(v, spec.options)

    if threads > 1 and len(values) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(job, values))
    else:
        results = [job(v) for v in values]

    scale = 1.0 / LN2 if spec.units == "bits" else 1.0
    rows, failed = [], 0
    for v, (head, cells, msgs) in zip(values, results):
        for msg in msgs:
            log.warning("%s=%s: %s", keys[0], fmt(v), msg)
        if any(c is None for c in cells):
            failed += 1
        # unit conversion happens here and nowhere else
        rows.append([fmt(h) for h in head] + [fmt(None if c is None else c * scale) for c in cells])
    return keys + info, rows, failed


def write_csv(path, header, rows):
    text = ",".join(header) + "\n" + "".join(",".join(r) + "\n" for r in rows)
    if path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def run_fi_structure(spec: SweepSpec):
    model, rho, n = spec.options["model"], spec.options["rho"], spec.n
    J = (ar1_fisher(rho, n) if model == "ar1" else ma1_fisher(rho, n)).matrix
    header = ["i"] + [str(k) for k in range(1, n + 1)]
    rows = [[str(i + 1)] + [fmt(x) for x in J[i]] for i in range(n)]
    write_csv(spec.out, header, rows)
    profile = spec.options.get("profile")
    if profile is None and spec.out != "-":
        p = Path(spec.out)
        profile = str(p.with_name(p.stem + "_profile" + p.suffix))
    if profile:
        prow = [[str(k), fmt(J[0, k]), fmt(abs(J[0, k]))] for k in range(n)]
        write_csv(profile, ["k", "j_1_1pk", "abs_j_1_1pk"], prow)


# --------------------------------------------------------------------------
# argument handling
# --------------------------------------------------------------------------


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _nonneg_int(text):
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text}")
    return v


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--out", help="output CSV path, '-' for stdout (default: <figure>.csv)")
    common.add_argument("--units", choices=("bits", "nats"), default="bits")
    common.add_argument("--n", type=_positive_int, help="matrix dimension for memory models")
    common.add_argument("--grid", help="sweep grid MIN:MAX:STEP, both ends inclusive")
    common.add_argument("--config", help="key=value file; command-line flags take precedence")
    common.add_argument("--threads", type=_nonneg_int, default=0, help="worker threads, 0 = one per CPU")
    common.add_argument("-v", "--verbose", action="store_true")

    ap = _Parser(prog="weakcap", description="Weak-signal capacity sweeps.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="figure", required=True, metavar="FIGURE")

    p = sub.add_parser("fig2a", parents=[common], help="AWGN under an amplitude constraint vs SNR (dB)")
    p.add_argument("--K", type=_positive_int, default=800, help="output cells of the oracle")
    p.add_argument("--m", type=_positive_int, default=65, help="input grid points of the oracle")

    sub.add_parser("fig2b", parents=[common], help="Gamma channel vs shape parameter kappa")

    sub.add_parser("fig3", parents=[common], help="AR(1)/MA(1) capacity per unit power vs rho")

    p = sub.add_parser("fi-structure", parents=[common], help="Fisher matrix of AR(1)/MA(1) noise")
    p.add_argument("--model", choices=("ar1", "ma1"), default="ma1")
    p.add_argument("--rho", type=float, default=0.3)
    p.add_argument("--profile", help="row-profile CSV (default: <out>_profile.csv)")

    p = sub.add_parser("colored", parents=[common], help="water-filling capacity vs power P")
    p.add_argument("--cov", help="noise covariance CSV (square, symmetric)")
    p.add_argument("--model", choices=("ar1", "ma1"), default="ar1", help="used when --cov is absent")
    p.add_argument("--rho", type=float, default=0.5)
    return ap


def _join_grid(argv):
    # "--grid -30:10:2" would otherwise be read as an unknown option
    out = []
    it = iter(argv)
    for a in it:
        if a == "--grid":
            nxt = next(it, None)
            out.append(a if nxt is None else f"--grid={nxt}")
        else:
            out.append(a)
    return out


def parse_args(argv=None):
    ap = build_parser()
    argv = _join_grid(sys.argv[1:] if argv is None else list(argv))
    args = ap.parse_args(argv)
    if args.config:
        cfg = read_config(args.config)
        subparser = ap._subparsers._group_actions[0].choices[args.figure]
        known = {a.dest for a in subparser._actions}
        unknown = sorted(set(cfg) - known - {"config"})
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(unknown)}")
        cfg.pop("config", None)
        # string defaults go through each option's type converter
        subparser.set_defaults(**cfg)
        args = ap.parse_args(argv)
    return args


def make_spec(args) -> SweepSpec:
    fig = args.figure
    opts = {}
    n = args.n
    grid = None
    if fig in DEFAULT_GRIDS:
        grid = parse_grid(args.grid or DEFAULT_GRIDS[fig])
    elif args.grid:
        raise UsageError(f"{fig} takes no --grid")
    if fig == "fig2a":
        opts.update(K=args.K, m=args.m)
        if args.m < 2:
            raise UsageError("--m must be >= 2")
    elif fig == "fig2b":
        if grid[0] <= 0:
            raise UsageError("kappa grid must be positive")
    elif fig == "fig3":
        n = 2000 if n is None else n
        if grid[0] <= -1 or grid[1] >= 1:
            raise UsageError("rho grid must lie inside (-1, 1)")
        opts["n"] = n
    elif fig == "fi-structure":
        n = 50 if n is None else n
        opts.update(model=args.model, rho=args.rho, profile=args.profile)
        limit = 1.0 if args.model == "ar1" else 0.5
        if not abs(args.rho) < limit:
            raise UsageError(f"{args.model} needs |rho| < {limit}")
    elif fig == "colored":
        if grid[0] <= 0:
            raise UsageError("power grid must be positive")
        if args.cov:
            try:
                opts["cov"] = load_covariance_csv(args.cov)
            except (OSError, ValueError, np.linalg.LinAlgError) as exc:
                raise UsageError(f"bad covariance file {args.cov}: {exc}") from None
        else:
            n = 8 if n is None else n
            make = ar1_covariance if args.model == "ar1" else ma1_covariance
            try:
                opts["cov"] = make(args.rho, n)
            except ValueError as exc:
                raise UsageError(str(exc)) from None
    if n is not None and n < 2:
        raise UsageError("--n must be >= 2 for memory models")
    out = args.out if args.out else f"{fig}.csv"
    return SweepSpec(fig, grid, n, args.units, out, args.threads, opts)


def main(argv=None) -> int:
    logging.basicConfig(format="%(name)s: %(levelname)s: %(message)s", stream=sys.stderr)
    try:
        args = parse_args(argv)
        log.setLevel(logging.INFO if args.verbose else logging.WARNING)
        spec = make_spec(args)
    except UsageError as exc:
        print(f"weakcap: error: {exc}", file=sys.stderr)
        return 1

    if spec.figure == "fi-structure":
        try:
            run_fi_structure(spec)
        except NUMERIC_ERRORS as exc:
            log.error("%s", exc)
            return 2
        except OSError as exc:
            log.error("cannot write output: %s", exc)
            return 1
        return 0

    log.info("%s: %d grid points, units %s", spec.figure, len(spec.values()), spec.units)
    header, rows, failed = run_sweep(spec)
    try:
        write_csv(spec.out, header, rows)
    except OSError as exc:
        log.error("cannot write output: %s", exc)
        return 1
    if rows and failed == len(rows):
        log.error("numerical failure in every row")
        return 2
    if failed:
        log.warning("%d of %d rows have missing values", failed, len(rows))
    return 0


if __name__ == "__main__":
    sys.exit(main())
