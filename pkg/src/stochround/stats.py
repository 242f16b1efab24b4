"""Sample aggregation and statistical gates.

Sums go through :func:`math.fsum`, which is correctly rounded, so every
summary is independent of the order in which samples were produced.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import EmptySampleSet
from .fp_core import to_fraction
from .sr_engine import SRMode

DEFAULT_SIGMA = 4.0


@dataclass(frozen=True)
class SampleSet:
    values: tuple[float, ...]
    exact_reference: Fraction
    master_seed: Optional[int] = None
    mode: Optional[SRMode] = None

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        object.__setattr__(self, "exact_reference", to_fraction(self.exact_reference))
        if not self.values:
            raise EmptySampleSet("a sample set needs at least one value")

    def deviations(self) -> list[float]:
        """value - reference for each sample, each rounded once from the exact difference."""
        ref = self.exact_reference
        return [float(Fraction(v) - ref) for v in self.values]


@dataclass(frozen=True)
class SummaryStats:
    count: int
    mean: float
    std: float
    standard_error: float
    min: float
    max: float
    empirical_bias: float


def summarize(s: SampleSet) -> SummaryStats:
    n = len(s.values)
    dev = s.deviations()
    bias = math.fsum(dev) / n
    std = math.sqrt(math.fsum((d - bias) ** 2 for d in dev) / (n - 1)) if n > 1 else 0.0
    mean = math.fsum(s.values) / n
    lo, hi = min(s.values), max(s.values)
    # a correctly rounded mean still lies inside [min, max]
    mean = min(max(mean, lo), hi)
    return SummaryStats(n, mean, std, std / math.sqrt(n), lo, hi, bias)


def coverage_fraction(errors: Sequence[float], bound) -> float:
    """Fraction of |errors| that do not exceed ``bound``."""
    if not len(errors):
        raise EmptySampleSet("no errors to cover")
    b = float(bound)
    if not b > 0:
        raise ValueError("bound must be positive")
    return sum(1 for e in errors if abs(float(e)) <= b) / len(errors)


@dataclass(frozen=True)
class UnbiasednessReport:
    passed: bool
    empirical_bias: float
    standard_error: float
    z_score: float
    sigma_multiplier: float
    count: int
    reference: float
    master_seed: Optional[int]
    mode: Optional[str]

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return (
            f"{verdict} bias={self.empirical_bias:.6e} se={self.standard_error:.3e} "
            f"z={self.z_score:+.2f} gate={self.sigma_multiplier}σ n={self.count} "
            f"seed={self.master_seed} mode={self.mode}"
        )


def unbiasedness_test(s: SampleSet, sigma_multiplier: float = DEFAULT_SIGMA) -> UnbiasednessReport:
    """Pass iff |mean - reference| <= sigma_multiplier * standard error."""
    if len(s.values) < 30:
        raise ValueError("unbiasedness_test needs at least 30 samples")
    st = summarize(s)
    if st.standard_error == 0:
        z = 0.0 if st.empirical_bias == 0 else math.copysign(math.inf, st.empirical_bias)
    else:
        z = st.empirical_bias / st.standard_error
    return UnbiasednessReport(
        passed=abs(z) <= sigma_multiplier,
        empirical_bias=st.empirical_bias,
        standard_error=st.standard_error,
        z_score=z,
        sigma_multiplier=sigma_multiplier,
        count=st.count,
        reference=float(s.exact_reference),
        master_seed=s.master_seed,
        mode=s.mode.value if s.mode else None,
    )


def mean_and_se(values: Sequence[float]) -> tuple[float, float]:
    n = len(values)
    if n == 0:
        raise EmptySampleSet("no values")
    m = math.fsum(values) / n
    if n == 1:
        return m, 0.0
    sd = math.sqrt(math.fsum((v - m) ** 2 for v in values) / (n - 1))
    return m, sd / math.sqrt(n)


@dataclass
class ConditionalMeanReport:
    """Per-step z-scores of delta_k, unconditionally and given sign(delta_{k-1})."""

    sigma_multiplier: float
    worst_z: float = 0.0
    failures: list = field(default_factory=list)
    checked: int = 0

    @property
    def passed(self) -> bool:
        return not self.failures


def conditional_mean_check(deltas: np.ndarray, sigma_multiplier: float = DEFAULT_SIGMA) -> ConditionalMeanReport:
    """Check that each column of ``deltas`` has zero mean, also when
    conditioned on the sign of the previous column."""
    rep = ConditionalMeanReport(sigma_multiplier)
    runs, steps = deltas.shape
    for k in range(steps):
        col = deltas[:, k]
        groups = [("all", col)]
        if k > 0:
            prev = deltas[:, k - 1]
            groups += [("prev>0", col[prev > 0]), ("prev<0", col[prev < 0])]
        for label, g in groups:
            if len(g) < 30:
                continue
            m, se = mean_and_se(g.tolist())
            if se == 0:
                z = 0.0 if m == 0 else math.copysign(math.inf, m)
            else:
                z = m / se
            rep.checked += 1
            rep.worst_z = max(rep.worst_z, abs(z))
            if abs(z) > sigma_multiplier:
                rep.failures.append((k, label, z))
    return rep
