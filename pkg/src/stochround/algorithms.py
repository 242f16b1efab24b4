"""Constant-integrand rectangle rule and Horner evaluation under any rounding mode.

Each algorithm has a scalar form (exact rational bookkeeping, optional trace)
and a batched form that runs many independent samples in lockstep, lane
``i`` using RNG stream ``stream_ids[i]``. Both forms consume draws in the
same order, so lane ``i`` of a batch equals the scalar run on
``RngStream(seed, stream_ids[i])``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import RangeError
from .chebyshev import Z_EQUALS_X_SQUARED, Polynomial, exact_eval
from .fp_core import (
    FloatFormat,
    exact_add,
    exact_div,
    neighborhood,
    round_nearest,
    to_fraction,
)
from .sr_engine import (
    RngStream,
    SRMode,
    StreamBank,
    outcome_law,
    sr_add,
    sr_mul,
    sr_round,
    vec_add,
    vec_mul,
    vec_round,
)

_HALF = Fraction(1, 2)

H_NEAREST = "nearest"
H_MODE = "mode"

TRAJECTORY_MEAN = "mean"
TRAJECTORY_NEAREST = "nearest"


# ---------------------------------------------------------------------------
# rectangle rule on f = 1 over [0, 1]

@dataclass(frozen=True)
class IntegrationRun:
    n_steps: int
    h: float
    partial_sums: tuple[float, ...]

    @property
    def result(self) -> float:
        return self.partial_sums[-1]

    @property
    def exact_sum(self) -> Fraction:
        """N * h: the exact sum of the summands actually added."""
        return self.n_steps * Fraction(self.h)

    @property
    def error(self) -> Fraction:
        return Fraction(self.result) - self.exact_sum

    @property
    def integral_error(self) -> Fraction:
        return Fraction(self.result) - 1

    @property
    def final_step_error(self) -> Fraction:
        """Rounding error committed by the last addition alone."""
        if self.n_steps < 2:
            return Fraction(0)
        return Fraction(self.result) - (Fraction(self.partial_sums[-2]) + Fraction(self.h))


def _step_size(N: int, fmt: FloatFormat, mode: SRMode, rng, h_rounding: str) -> float:
    if h_rounding == H_NEAREST:
        return round_nearest(Fraction(1, N), fmt)
    if h_rounding == H_MODE:
        return sr_round(Fraction(1, N), fmt, mode, rng)
    raise ValueError(f"unknown h_rounding {h_rounding!r}")


def integrate_constant(
    N: int,
    fmt: FloatFormat,
    mode: SRMode,
    rng: Optional[RngStream] = None,
    h_rounding: str = H_NEAREST,
) -> IntegrationRun:
    """Sum h = fl(1/N) N times, one rounding per addition.

    ``h_rounding="nearest"`` fixes h to the round-to-nearest value for every
    mode; ``"mode"`` rounds 1/N under ``mode`` as well (consuming a draw).
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    h = _step_size(N, fmt, mode, rng, h_rounding)
    s = h
    sums = [s]
    for _ in range(1, N):
        s = sr_add(s, h, fmt, mode, rng)
        sums.append(s)
    return IntegrationRun(N, h, tuple(sums))


@dataclass(frozen=True)
class IntegrationBatch:
    n_steps: int
    mode: SRMode
    h: np.ndarray
    results: np.ndarray
    final_step_errors: np.ndarray  # float64, exact: both terms share a binade scale

    def exact_sums(self) -> list[Fraction]:
        return [self.n_steps * Fraction(float(h)) for h in self.h]

    def errors(self) -> list[Fraction]:
        return [Fraction(float(r)) - s for r, s in zip(self.results, self.exact_sums())]


def integrate_batch(
    N: int,
    fmt: FloatFormat,
    mode: SRMode,
    master_seed: int,
    stream_ids: Sequence[int],
    h_rounding: str = H_NEAREST,
) -> IntegrationBatch:
    if N < 1:
        raise ValueError("N must be at least 1")
    lanes = len(stream_ids)
    bank = StreamBank(master_seed, stream_ids, N + 1) if mode.stochastic else None
    one = np.ones(lanes)
    if h_rounding == H_NEAREST:
        h = np.full(lanes, round_nearest(Fraction(1, N), fmt))
    elif h_rounding == H_MODE:
        h = vec_round(*exact_div(one, float(N) * one), fmt, mode, bank)
    else:
        raise ValueError(f"unknown h_rounding {h_rounding!r}")
    s = h.copy()
    last = np.zeros(lanes)
    for _ in range(1, N):
        hi, lo = exact_add(s, h)
        new = vec_round(hi, lo, fmt, mode, bank)
        # new - (hi + lo): new - hi is exact (same binade), lo is tiny
        last = (new - hi) - lo
        s = new
    return IntegrationBatch(N, mode, h, s, last)


# ---------------------------------------------------------------------------
# bias table

@dataclass(frozen=True)
class BiasTableRow:
    """One partial sum, stored as integers in units of 2**unit_exponent.

    ``rem`` is the distance above the lower neighbor and ``gap`` the
    neighbor spacing, both in those units; ``gap == 0`` marks a
    representable partial sum.
    """

    k: int
    s_units: int
    rem: int
    gap: int
    unit_exponent: int
    exponent: int

    def _scale(self, n: int) -> Fraction:
        return n * Fraction(2) ** self.unit_exponent

    @property
    def s_k(self) -> Fraction:
        return self._scale(self.s_units)

    @property
    def theta(self) -> Fraction:
        return Fraction(self.rem, self.gap) if self.gap else Fraction(0)

    @property
    def epsilon(self) -> Fraction:
        return self._scale(self.gap)

    @property
    def predicted_bias(self) -> Fraction:
        """epsilon * (1/2 - theta), the SR-up-or-down bias of rounding s_k."""
        return self._scale(self.gap // 2 - self.rem) if self.gap else Fraction(0)


def reference_trajectory(N: int, fmt: FloatFormat, trajectory: str = TRAJECTORY_MEAN) -> list[BiasTableRow]:
    """Exact partial sums s_k = fl(s_{k-1}) + h, k = 0..N-1, along a reference path.

    ``"nearest"`` rounds every partial sum to nearest. ``"mean"`` tracks the
    expected SR-up-or-down partial sum, accumulating the predicted per-step
    bias, and rounds each s_k to the neighbor closest to that expectation
    (ties to nearest).

    Every quantity is an integer multiple of ulp(h), so the walk runs on
    Python integers in that unit.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    if trajectory not in (TRAJECTORY_MEAN, TRAJECTORY_NEAREST):
        raise ValueError(f"unknown trajectory {trajectory!r}")
    p = fmt.precision
    h = to_fraction(round_nearest(Fraction(1, N), fmt))
    e_h = neighborhood(h, fmt).exponent
    base = e_h - p + 1
    H = int(h / fmt.ulp(e_h))
    rows = [BiasTableRow(0, H, 0, 0, base, e_h)]
    s_hat = mean = H
    for k in range(1, N):
        S = s_hat + H
        shift = max(S.bit_length() - p, 0)
        down = (S >> shift) << shift
        r = S - down
        exponent = base + S.bit_length() - 1
        if r == 0:
            rows.append(BiasTableRow(k, S, 0, 0, base, exponent))
            s_hat = S
            mean += H
            continue
        gap = 1 << shift
        rows.append(BiasTableRow(k, S, r, gap, base, exponent))
        up = down + gap
        twice = 2 * r
        nearest = up if twice > gap or (twice == gap and (S >> shift) & 1) else down
        if trajectory == TRAJECTORY_NEAREST:
            s_hat = nearest
            continue
        mean += H + gap // 2 - r
        dd, du = abs(mean - down), abs(up - mean)
        s_hat = down if dd < du else up if du < dd else nearest
    if rows[-1].s_k > fmt.max_finite:
        raise RangeError("partial sums overflow the format")
    return rows


def bias_table(N: int, fmt: FloatFormat, trajectory: str = TRAJECTORY_MEAN) -> list[BiasTableRow]:
    """Rows k = 2..N-1 of theta(s_k), the SR-up-or-down bias and epsilon(s_k)."""
    if N < 2:
        raise ValueError("N must be at least 2")
    return reference_trajectory(N, fmt, trajectory)[2:]


def theta_of_interval(h, e: int, fmt: FloatFormat) -> Fraction:
    """frac(h / ulp) for the binade [2**e, 2**(e+1)): theta of every partial
    sum whose predecessor already lies in that binade."""
    scaled = to_fraction(h) / fmt.ulp(e)
    return scaled - (scaled.numerator // scaled.denominator)


def predicted_total_bias(N: int, fmt: FloatFormat, trajectory: str = TRAJECTORY_MEAN) -> Fraction:
    """epsilon(s_{N-1}) * (1/2 - theta(s_{N-1})): expected error of the last
    SR-up-or-down addition."""
    if N < 2:
        raise ValueError("N must be at least 2")
    return reference_trajectory(N, fmt, trajectory)[-1].predicted_bias


@dataclass(frozen=True)
class ExactExpectations:
    mean_result: Fraction
    mean_final_step_error: Fraction
    support: int


def exact_expectations(N: int, fmt: FloatFormat, mode: SRMode) -> ExactExpectations:
    """Exact law of the partial sums (h rounded to nearest), by enumeration.

    The support stays small for moderate N because paths merge on the
    format grid; intended for N up to a few hundred.
    """
    if N < 2:
        raise ValueError("N must be at least 2")
    h = to_fraction(round_nearest(Fraction(1, N), fmt))
    law = {h: Fraction(1)}
    last = Fraction(0)
    for _ in range(1, N):
        nxt: dict[Fraction, Fraction] = {}
        last = Fraction(0)
        for s, pr in law.items():
            x = s + h
            for v, q in outcome_law(x, fmt, mode):
                v = Fraction(v)
                nxt[v] = nxt.get(v, 0) + pr * q
                last += pr * q * (v - x)
        law = nxt
    mean = sum((v * p for v, p in law.items()), Fraction(0))
    return ExactExpectations(mean, last, len(law))


# ---------------------------------------------------------------------------
# Horner

@dataclass(frozen=True)
class HornerTrace:
    """Computed and exact Horner intermediates r_0..r_2n at ``point``.

    ``point`` is the value the nested multiplications use: x itself, or the
    rounded square of x for a polynomial in z = x**2.
    """

    polynomial: Polynomial
    x: float
    point: float
    computed: tuple[float, ...]
    exact: tuple[Fraction, ...]

    @property
    def errors(self) -> list[Fraction]:
        return [Fraction(c) - r for c, r in zip(self.computed, self.exact)]

    @property
    def normalized(self) -> list[Fraction]:
        """Y_i = Z_i / point**floor((i+1)/2); requires point != 0."""
        v = Fraction(self.point)
        return [z / v ** ((i + 1) // 2) for i, z in enumerate(self.errors)]

    @property
    def deltas(self) -> list[Fraction]:
        """Relative error of each rounded operation, delta_1..delta_2n."""
        a = self.polynomial.coefficients
        n = self.polynomial.degree
        v = Fraction(self.point)
        r = [Fraction(c) for c in self.computed]
        out = []
        for k in range(1, n + 1):
            for i, exact_op in ((2 * k - 1, r[2 * k - 2] * v), (2 * k, r[2 * k - 1] + a[n - k])):
                out.append(r[i] / exact_op - 1 if exact_op else Fraction(0))
        return out


def horner_eval(
    P: Polynomial,
    x,
    fmt: FloatFormat,
    mode: SRMode,
    rng: Optional[RngStream] = None,
    with_trace: bool = False,
):
    """Evaluate P at the format value x; returns (value, trace or None)."""
    a = P.coefficients
    n = P.degree
    x = float(x)
    v = sr_mul(x, x, fmt, mode, rng) if P.variable == Z_EQUALS_X_SQUARED else x
    r = float(a[n])
    computed = [r]
    for k in range(1, n + 1):
        r = sr_mul(r, v, fmt, mode, rng)
        computed.append(r)
        r = sr_add(r, a[n - k], fmt, mode, rng)
        computed.append(r)
    if not with_trace:
        return r, None
    vq = Fraction(v)
    exact = [a[n]]
    for k in range(1, n + 1):
        exact.append(exact[-1] * vq)
        exact.append(exact[-1] + a[n - k])
    return r, HornerTrace(P, x, v, tuple(computed), tuple(exact))


def horner_batch(
    P: Polynomial,
    x,
    fmt: FloatFormat,
    mode: SRMode,
    master_seed: int = 0,
    stream_ids: Sequence[int] = (0,),
) -> np.ndarray:
    """Evaluate P at x once per lane; deterministic modes give equal lanes."""
    a = [float(c) for c in P.coefficients]
    n = P.degree
    lanes = len(stream_ids)
    bank = StreamBank(master_seed, stream_ids, 2 * n + 2) if mode.stochastic else None
    xs = np.full(lanes, float(x))
    v = vec_mul(xs, xs, fmt, mode, bank) if P.variable == Z_EQUALS_X_SQUARED else xs
    r = np.full(lanes, a[n])
    for k in range(1, n + 1):
        r = vec_mul(r, v, fmt, mode, bank)
        r = vec_add(r, a[n - k], fmt, mode, bank)
    return r


def relative_error(value, reference: Fraction) -> float:
    return float(abs(to_fraction(value) - reference) / abs(reference))


def horner_relative_errors(values, P: Polynomial, x) -> list[float]:
    ref = exact_eval(P, x)
    return [relative_error(float(v), ref) for v in values]


# ---------------------------------------------------------------------------
# chains of SR additions (empirical mean-independence data)

def addition_chain_deltas(
    start: float,
    summands: Sequence[float],
    fmt: FloatFormat,
    mode: SRMode,
    master_seed: int,
    runs: int,
) -> np.ndarray:
    """Relative errors delta_k of s_k = fl(s_{k-1} + summands[k]), one row per run."""
    bank = StreamBank(master_seed, range(runs), len(summands) + 1)
    s = np.full(runs, float(start))
    out = np.empty((runs, len(summands)))
    for k, b in enumerate(summands):
        hi, lo = exact_add(s, b)
        new = vec_round(hi, lo, fmt, mode, bank)
        out[:, k] = ((new - hi) - lo) / hi
        s = new
    return out
