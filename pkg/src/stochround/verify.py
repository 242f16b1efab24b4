"""Self-checking invariant suites run by ``stochround verify``.

Every suite returns a :class:`SuiteResult` instead of raising, so a run
reports all failures at once.
"""
from __future__ import annotations

import random
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .algorithms import (
    addition_chain_deltas,
    integrate_batch,
    reference_trajectory,
    theta_of_interval,
)
from .bounds import sqrt_gamma_ratio
from .fp_core import (
    BINARY32,
    FloatFormat,
    exact_add,
    exact_div,
    exact_mul,
    exact_sub,
    is_representable,
    neighborhood,
    toy_format,
)
from .sr_engine import (
    RngStream,
    SequentialDraws,
    SRMode,
    expected_round,
    inject_threshold_fault,
    vec_add,
    vec_div,
    vec_mul,
    vec_sub,
)
from .stats import SampleSet, conditional_mean_check, unbiasedness_test

_OPS = ((vec_add, exact_add), (vec_sub, exact_sub), (vec_mul, exact_mul), (vec_div, exact_div))


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return f"{verdict} {self.name}: {self.detail} ({self.seconds:.2f}s)"


def _timed(name: str, fn: Callable[[], tuple[bool, str]]) -> SuiteResult:
    t0 = time.perf_counter()
    ok, detail = fn()
    return SuiteResult(name, ok, detail, time.perf_counter() - t0)


def _random_dyadic(rnd: random.Random, bits: int = 50, span: int = 30) -> Fraction:
    """A random positive or negative dyadic with ``bits`` significant bits."""
    m = rnd.getrandbits(bits - 1) | (1 << (bits - 1))
    e = rnd.randint(-span, span)
    x = Fraction(m) * Fraction(2) ** (e - bits + 1)
    return -x if rnd.random() < 0.5 else x


def floor_scaling(trials: int = 100_000, seed: int = 0, fmt: FloatFormat = BINARY32) -> SuiteResult:
    """Scaling by 2**(p-1-e) maps the lower neighbor onto floor of the scaled value."""

    def run():
        rnd = random.Random(seed)
        fails = 0
        for _ in range(trials):
            x = _random_dyadic(rnd)
            nb = neighborhood(x, fmt)
            scale = Fraction(2) ** (fmt.precision - 1 - nb.exponent)
            lhs = Fraction(nb.down) * scale
            rhs = Fraction((x * scale).__floor__())
            if lhs != rhs or not nb.down <= x <= nb.up:
                fails += 1
        return fails == 0, f"trials={trials} failures={fails} seed={seed}"

    return _timed("floor-scaling", run)


def toy_oracle(precision: int = 4, grid_bits: int = 12) -> SuiteResult:
    """Exhaustive expectations on every non-representable multiple of 2**-grid_bits in [1, 2)."""

    def run():
        fmt = toy_format(precision)
        step = Fraction(1, 2 ** grid_bits)
        checked = fails = 0
        for j in range(2 ** grid_bits):
            x = 1 + j * step
            if is_representable(x, fmt):
                continue
            nb = neighborhood(x, fmt)
            mid = (Fraction(nb.down) + Fraction(nb.up)) / 2
            checked += 1
            if expected_round(x, fmt, SRMode.SR_NEARNESS) != x:
                fails += 1
            if expected_round(x, fmt, SRMode.SR_UP_OR_DOWN) != mid:
                fails += 1
        return fails == 0, f"p={precision} values={checked} failures={fails}"

    return _timed("toy-oracle", run)


def _theta_constant(N: int, fmt: FloatFormat) -> bool:
    rows = reference_trajectory(N, fmt)
    h = rows[0].s_k
    expected: dict[int, Fraction] = {}
    for row in rows[1:]:
        if row.exponent not in expected:
            # first index of a binade: its predecessor lies one binade lower
            expected[row.exponent] = theta_of_interval(h, row.exponent, fmt)
            continue
        if row.theta != expected[row.exponent]:
            return False
    return True


def theta_constancy(count: int = 50, max_n: int = 10_000, seed: int = 0, fmt: FloatFormat = BINARY32) -> SuiteResult:
    """theta is constant inside each binade after its first partial sum."""

    def run():
        rnd = random.Random(seed)
        ns = [20] + [rnd.randint(2, max_n) for _ in range(count)]
        bad = [N for N in ns if not _theta_constant(N, fmt)]
        return not bad, f"N values={len(ns)} failing={bad[:5]} seed={seed}"

    return _timed("theta-constancy", run)


def sqrt_gamma(ns=(10, 100, 1000), u=Fraction(1, 2 ** 23)) -> SuiteResult:
    """sqrt(u gamma_4n) / (2 sqrt(n) u) lies within 10 n u of 1."""

    def run():
        worst = []
        ok = True
        for n in ns:
            dev = abs(sqrt_gamma_ratio(n, u) - 1)
            tol = 10 * n * float(u)
            ok &= dev <= tol
            worst.append(f"n={n}:{float(dev):.3e}<={tol:.3e}")
        return bool(ok), " ".join(worst)

    return _timed("sqrt-gamma", run)


def unbiasedness(
    n_list=(20, 1000),
    samples: int = 10_000,
    seed: int = 12345,
    fmt: FloatFormat = BINARY32,
    sigma: float = 4.0,
) -> SuiteResult:
    """SR-nearness integration error has zero mean within ``sigma`` standard errors."""

    def run():
        parts = []
        ok = True
        for N in n_list:
            batch = integrate_batch(N, fmt, SRMode.SR_NEARNESS, seed, range(samples))
            ref = batch.exact_sums()[0]
            rep = unbiasedness_test(SampleSet(batch.results.tolist(), ref, seed, SRMode.SR_NEARNESS), sigma)
            ok &= rep.passed
            parts.append(f"N={N} z={rep.z_score:+.2f}")
        return ok, f"samples={samples} seed={seed} " + " ".join(parts)

    return _timed("unbiasedness", run)


def mean_independence(runs: int = 100_000, steps: int = 64, seed: int = 7, fmt: FloatFormat = BINARY32) -> SuiteResult:
    """Relative errors of an SR-nearness addition chain have zero mean, also given the previous sign."""

    def run():
        rnd = random.Random(seed)
        summands = [float(np.float32(rnd.uniform(0.01, 1.0))) for _ in range(steps)]
        deltas = addition_chain_deltas(0.0, summands, fmt, SRMode.SR_NEARNESS, seed, runs)
        rep = conditional_mean_check(deltas[:, 1:], 4.0)
        return rep.passed, f"runs={runs} steps={steps} groups={rep.checked} worst|z|={rep.worst_z:.2f} seed={seed}"

    return _timed("mean-independence", run)


def per_op_bound(count: int = 1_000_000, seed: int = 3, fmt: FloatFormat = BINARY32) -> SuiteResult:
    """|fl(a op b) - (a op b)| <= u |a op b| for random operands and every op and mode."""

    def run():
        gen = np.random.default_rng(seed)

        def operands():
            m = gen.integers(2 ** (fmt.precision - 1), 2 ** fmt.precision, count)
            e = gen.integers(-20, 21, count)
            sign = np.where(gen.random(count) < 0.5, -1.0, 1.0)
            return sign * np.ldexp(m.astype(float), e - fmt.precision + 1)

        a, b = operands(), operands()
        u = float(fmt.unit_roundoff)
        viol = 0
        for sid, mode in enumerate(SRMode):
            draws = SequentialDraws(RngStream(seed, sid))
            for vop, exact in _OPS:
                res = vop(a, b, fmt, mode, draws)
                hi, lo = exact(a, b)
                err = np.abs((res - hi) - lo)
                viol += int(np.count_nonzero(err > u * np.abs(hi + lo)))
        return viol == 0, f"ops={count}x4x{len(SRMode)} violations={viol} seed={seed}"

    return _timed("per-op-bound", run)


SUITES: dict[str, Callable[..., SuiteResult]] = {
    "floor-scaling": floor_scaling,
    "toy-oracle": toy_oracle,
    "theta-constancy": theta_constancy,
    "sqrt-gamma": sqrt_gamma,
    "unbiasedness": unbiasedness,
    "mean-independence": mean_independence,
    "per-op-bound": per_op_bound,
}


# short names accepted on the command line
ALIASES = {"lemma1": "floor-scaling", "remark": "sqrt-gamma"}


def run_suites(names=None, trials: int | None = None, seed: int | None = None, inject_bug: bool = False) -> list[SuiteResult]:
    """Run the named suites (all by default). ``trials`` overrides the floor-scaling count."""
    names = [ALIASES.get(n, n) for n in names] if names else list(SUITES)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise KeyError(f"unknown suite(s): {', '.join(unknown)}")
    out = []
    for name in names:
        kwargs = {}
        if name == "floor-scaling" and trials is not None:
            kwargs["trials"] = trials
        if seed is not None and name in ("floor-scaling", "theta-constancy", "unbiasedness", "mean-independence", "per-op-bound"):
            kwargs["seed"] = seed
        if inject_bug:
            with inject_threshold_fault():
                out.append(SUITES[name](**kwargs))
        else:
            out.append(SUITES[name](**kwargs))
    return out
