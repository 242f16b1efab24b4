"""Command-line experiment runner.

Every experiment writes one CSV: a single ``#`` provenance line (tool
version, config echo, master seed), a header row, then data rows. Floats
are printed as shortest round-trip decimals, with hex columns where bit
exactness matters. Sample ``i`` always draws from the stream derived from
``(seed, stream id of i)``, so the output does not depend on ``--workers``.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from functools import partial
from typing import Callable, Sequence

import numpy as np

from . import __version__
from .algorithms import (
    H_MODE,
    H_NEAREST,
    TRAJECTORY_MEAN,
    TRAJECTORY_NEAREST,
    bias_table,
    horner_batch,
    integrate_batch,
    predicted_total_bias,
)
from .bounds import DEFAULT_LAMBDA, cond1, deterministic_bound, probabilistic_bound
from .chebyshev import chebyshev_z_coeffs, exact_eval, parse_poly
from .errors import ConfigError, NotRepresentable, RangeError, StochRoundError
from .fp_core import FloatFormat, format_from_name, round_nearest
from .sr_engine import SRMode, seed_from_env
from .verify import ALIASES, SUITES, run_suites

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SUITE_FAILED = 2
EXIT_RANGE = 3

# config keys that never reach the provenance line: they do not change the data
_NOT_ECHOED = {"output", "svg", "workers", "func", "inject_bug"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(f"{message} (see '{self.prog} --help')")


# ---------------------------------------------------------------------------
# argument types

def _rational(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1: {text!r}")
    return v


def _lambda(text: str) -> Fraction:
    lam = _rational(text)
    if not 0 < lam < 1:
        raise argparse.ArgumentTypeError("lambda must lie in (0, 1)")
    return lam


def _int_list(text: str) -> list[int]:
    try:
        out = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma list of integers: {text!r}") from None
    if not out:
        raise argparse.ArgumentTypeError("empty list")
    return out


def _modes(text: str) -> list[SRMode]:
    try:
        modes = [SRMode.parse(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    if not modes:
        raise argparse.ArgumentTypeError("no modes given")
    return list(dict.fromkeys(modes))


def _seed(text: str) -> int:
    try:
        v = int(text, 10)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be a decimal integer: {text!r}") from None
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return v


def _grid(text: str) -> tuple[Fraction, Fraction, int]:
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("grid must be start:end:count")
    start, end = _rational(parts[0]), _rational(parts[1])
    count = _positive_int(parts[2])
    if end < start:
        raise argparse.ArgumentTypeError("grid end must not precede start")
    return start, end, count


def _format(text: str) -> FloatFormat:
    try:
        return format_from_name(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


# ---------------------------------------------------------------------------
# output helpers

def _num(v) -> str:
    return repr(float(v))


def _hex(v) -> str:
    return float(v).hex()


def _jsonable(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, SRMode):
        return v.value
    if isinstance(v, FloatFormat):
        return v.name
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def _provenance(args, seed: int) -> str:
    echo = {k: _jsonable(v) for k, v in sorted(vars(args).items()) if k not in _NOT_ECHOED and k != "seed"}
    return f"# stochround {__version__} config={json.dumps(echo, sort_keys=True, separators=(',', ':'))} seed={seed}"


def _emit(args, seed: int, header: Sequence[str], rows: list[Sequence]) -> None:
    buf = io.StringIO()
    buf.write(_provenance(args, seed) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    text = buf.getvalue()
    if args.output in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# sample fan-out

def _integrate_chunk(N, fmt, mode, seed, h_rounding, ids):
    b = integrate_batch(N, fmt, mode, seed, ids, h_rounding)
    return np.stack([b.h, b.results, b.final_step_errors])


def _horner_chunk(P, x, fmt, mode, seed, ids):
    return horner_batch(P, x, fmt, mode, seed, ids)


class _Pool:
    """Runs per-sample work over contiguous chunks of stream ids, in order."""

    def __init__(self, workers: int):
        self.workers = workers
        self._ex = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        if self._ex is not None:
            self._ex.shutdown()

    def run(self, fn: Callable, ids: Sequence[int]) -> np.ndarray:
        """``fn(ids)`` computed chunk-wise; results concatenated along the last axis."""
        ids = list(ids)
        if self._ex is None or len(ids) < 2:
            return fn(ids)
        size = math.ceil(len(ids) / self.workers)
        chunks = [ids[i:i + size] for i in range(0, len(ids), size)]
        futures = [self._ex.submit(fn, c) for c in chunks]
        return np.concatenate([f.result() for f in futures], axis=-1)


# ---------------------------------------------------------------------------
# commands

def run_bias_table(args, seed: int) -> int:
    if args.n < 2:
        raise ConfigError("--n must be at least 2")
    rows = bias_table(args.n, args.format, args.trajectory)
    out = [
        [r.k, _num(r.s_k), _hex(r.s_k), _num(r.theta), _num(r.predicted_bias), _num(r.epsilon)]
        for r in rows
    ]
    _emit(args, seed, ["k", "s_k", "s_k_hex", "theta", "predicted_bias", "epsilon"], out)
    if args.svg:
        from .plots import plot_bias_table

        plot_bias_table(rows, args.svg)
    return EXIT_OK


def run_integrate(args, seed: int) -> int:
    if any(N < 1 for N in args.n_list):
        raise ConfigError("every N in --n-list must be at least 1")
    header = [
        "N", "mode", "sample_id", "h", "result", "result_hex",
        "error", "integral_error", "final_step_error", "predicted_bias",
    ]
    rows = []
    with _Pool(args.workers) as pool:
        for N in args.n_list:
            predicted = predicted_total_bias(N, args.format) if N >= 2 else Fraction(0)
            for mode in args.modes:
                count = args.samples if mode.stochastic else 1
                h, res, last = pool.run(partial(_integrate_chunk, N, args.format, mode, seed, args.h_rounding), range(count))
                pred = {SRMode.SR_UP_OR_DOWN: _num(predicted), SRMode.SR_NEARNESS: "0.0"}.get(mode, "")
                for i in range(count):
                    hq = Fraction(float(h[i]))
                    rq = Fraction(float(res[i]))
                    rows.append([
                        N, mode.value, i, _num(hq), _num(rq), _hex(rq),
                        _num(rq - N * hq), _num(rq - 1), _num(last[i]), pred,
                    ])
    _emit(args, seed, header, rows)
    if args.svg:
        from .plots import plot_integrate

        plot_integrate(rows, args.svg)
    return EXIT_OK


def grid_points(start: Fraction, end: Fraction, count: int, fmt: FloatFormat) -> list[float]:
    """``count`` evenly spaced points on [start, end], each rounded to nearest in ``fmt``."""
    if count == 1:
        return [round_nearest(start, fmt)]
    step = (end - start) / (count - 1)
    return [round_nearest(start + j * step, fmt) for j in range(count)]


def _horner_rows(pool, P, x, fmt, modes, samples, seed, id_base):
    """(kind, mode, sample_id, value, relative error) rows for one evaluation point."""
    ref = exact_eval(P, x)
    out = []
    for mode in modes:
        count = samples if mode.stochastic else 1
        ids = [(id_base << 32) | i for i in range(count)]
        vals = pool.run(partial(_horner_chunk, P, x, fmt, mode, seed), ids)
        errs = [abs(Fraction(float(v)) - ref) / abs(ref) for v in vals]
        if not mode.stochastic:
            out.append(("rn", mode, 0, float(vals[0]), errs[0]))
            continue
        for i, (v, e) in enumerate(zip(vals, errs)):
            out.append(("sr", mode, i, float(v), e))
        mean_val = sum((Fraction(float(v)) for v in vals), Fraction(0)) / count
        out.append(("mean_of_values", mode, "", mean_val, abs(mean_val - ref) / abs(ref)))
        out.append(("mean_of_errors", mode, "", None, sum(errs, Fraction(0)) / count))
    return out


def _format_polynomial(P, fmt):
    """P itself if its coefficients are exact in ``fmt``, else its coefficient-wise rounding.

    Errors and bounds then refer to the polynomial actually evaluated.
    """
    try:
        P.check_representable(fmt)
        return P, False
    except NotRepresentable:
        return P.rounded_to(fmt), True


def run_horner_x_sweep(args, seed: int) -> int:
    P, rounded = _format_polynomial(parse_poly(args.poly), args.format)
    u = args.format.unit_roundoff
    header = [
        "point", "x", "x_hex", "coeffs_rounded", "cond1", "det_bound", "prob_bound",
        "kind", "mode", "sample_id", "value_hex", "error",
    ]
    rows = []
    with _Pool(args.workers) as pool:
        for j, x in enumerate(grid_points(*args.x_grid, args.format)):
            c = cond1(P, x)
            det = deterministic_bound(P, x, u)
            prob = probabilistic_bound(P, x, u, args.lam)
            for kind, mode, sid, val, err in _horner_rows(pool, P, x, args.format, args.modes, args.samples, seed, j):
                rows.append([
                    j, _num(x), _hex(x), int(rounded), _num(c), _num(det), _num(prob), kind, mode.value, sid,
                    "" if val is None else _hex(val), _num(err),
                ])
    _emit(args, seed, header, rows)
    if args.svg:
        from .plots import plot_x_sweep

        plot_x_sweep(rows, args.svg)
    return EXIT_OK


def run_horner_n_sweep(args, seed: int) -> int:
    fmt = args.format
    x = round_nearest(args.x, fmt)
    u = fmt.unit_roundoff
    header = [
        "N", "n", "x", "coeffs_rounded", "cond1", "det_over_cond", "prob_over_cond",
        "kind", "mode", "sample_id", "value_hex", "error_over_cond",
    ]
    rows = []
    with _Pool(args.workers) as pool:
        for N in args.n_list:
            P, rounded = _format_polynomial(chebyshev_z_coeffs(N), fmt)
            c = cond1(P, x)
            det = deterministic_bound(P, x, u) / c
            prob = probabilistic_bound(P, x, u, args.lam) / float(c)
            for kind, mode, sid, val, err in _horner_rows(pool, P, x, fmt, args.modes, args.samples, seed, N):
                rows.append([
                    N, P.degree, _num(x), int(rounded), _num(c), _num(det), _num(prob), kind, mode.value, sid,
                    "" if val is None else _hex(val), _num(err / c),
                ])
    _emit(args, seed, header, rows)
    if args.svg:
        from .plots import plot_n_sweep

        plot_n_sweep(rows, args.svg)
    return EXIT_OK


def run_verify(args, seed: int) -> int:
    # suites keep their own default seeds unless one is given explicitly
    explicit = args.seed is not None or os.environ.get("SR_SEED", "").strip() != ""
    results = run_suites(args.suite, trials=args.trials, seed=seed if explicit else None, inject_bug=args.inject_bug)
    lines = [r.line() for r in results]
    failed = sum(not r.passed for r in results)
    lines.append(f"{len(results) - failed}/{len(results)} suites passed")
    text = "\n".join(lines) + "\n"
    if args.output in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    return EXIT_OK if failed == 0 else EXIT_SUITE_FAILED


# ---------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", type=_format, default=format_from_name("binary32"),
                        help="binary32 (default) or pN for a toy format with N significand bits")
    common.add_argument("--seed", type=_seed, default=None, help="master seed (default: $SR_SEED, else 0)")
    common.add_argument("--output", "-o", default="-", help="output file (default: stdout)")
    common.add_argument("--svg", default=None, help="also write a static SVG plot (needs matplotlib)")
    common.add_argument("--workers", type=_positive_int, default=1, help="processes for sample generation")

    sampled = _Parser(add_help=False)
    sampled.add_argument("--samples", type=_positive_int, default=30, help="samples per stochastic mode")

    horner = _Parser(add_help=False)
    horner.add_argument("--lambda", dest="lam", type=_lambda, default=Fraction(DEFAULT_LAMBDA),
                        help="failure probability of the probabilistic bound")
    horner.add_argument("--modes", type=_modes, default=[SRMode.RN_NEAREST, SRMode.SR_NEARNESS])

    parser = _Parser(prog="stochround", description="Stochastic rounding experiments.")
    parser.add_argument("--version", action="version", version=f"stochround {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bias-table", parents=[common], help="theta and SR-up-or-down bias along the summation")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--trajectory", choices=[TRAJECTORY_MEAN, TRAJECTORY_NEAREST], default=TRAJECTORY_MEAN)
    p.set_defaults(func=run_bias_table)

    p = sub.add_parser("integrate", parents=[common, sampled], help="rectangle rule for f = 1 on [0, 1]")
    p.add_argument("--n-list", type=_int_list, default=[20, 1000])
    p.add_argument("--modes", type=_modes, default=list(SRMode))
    p.add_argument("--h-rounding", choices=[H_NEAREST, H_MODE], default=H_NEAREST,
                   help="round 1/N to nearest (default) or under each run's mode")
    p.set_defaults(func=run_integrate)

    p = sub.add_parser("horner-x-sweep", parents=[common, sampled, horner], help="forward error of P over an x grid")
    p.add_argument("--poly", default="chebyshev:20", help="chebyshev:N (even N) or coeffs:a0,a1,...")
    p.add_argument("--x-grid", type=_grid, default=_grid("8/64:1:64"), help="start:end:count")
    p.set_defaults(func=run_horner_x_sweep)

    p = sub.add_parser("horner-n-sweep", parents=[common, sampled, horner], help="forward error of T_N at one x")
    p.add_argument("--x", type=_rational, default=Fraction(24, 26))
    p.add_argument("--n-list", type=_int_list, default=list(range(2, 41, 2)))
    p.set_defaults(func=run_horner_n_sweep)

    p = sub.add_parser("verify", parents=[common], help="run the invariant suites")
    p.add_argument("--suite", action="append", choices=sorted(SUITES) + sorted(ALIASES), default=None)
    p.add_argument("--trials", type=_positive_int, default=None, help="trial count for floor-scaling")
    p.add_argument("--inject-bug", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=run_verify)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        seed = args.seed if args.seed is not None else seed_from_env(0)
        return args.func(args, seed)
    except RangeError as exc:
        print(f"stochround: range error: {exc}", file=sys.stderr)
        return EXIT_RANGE
    except (StochRoundError, ValueError, ZeroDivisionError, ImportError) as exc:
        print(f"stochround: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
