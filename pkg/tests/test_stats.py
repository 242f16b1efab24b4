from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from stochround.errors import EmptySampleSet
from stochround.stats import (
    SampleSet,
    conditional_mean_check,
    coverage_fraction,
    mean_and_se,
    summarize,
    unbiasedness_test,
)


def test_summarize_trivial():
    s = summarize(SampleSet([2.5] * 5, Fraction(2)))
    assert s.std == 0 and s.empirical_bias == 0.5 and s.mean == 2.5
    s = summarize(SampleSet([0.0, 2.0], 1))
    assert s.mean == 1.0 and s.empirical_bias == 0.0
    with pytest.raises(EmptySampleSet):
        SampleSet([], 0)


@given(st.lists(st.floats(-1e6, 1e6), min_size=2, max_size=60), st.randoms())
def test_summary_order_independent(values, rnd):
    shuffled = values[:]
    rnd.shuffle(shuffled)
    a, b = summarize(SampleSet(values, 0)), summarize(SampleSet(shuffled, 0))
    assert a == b
    assert a.min <= a.mean <= a.max and a.std >= 0


def test_coverage():
    assert coverage_fraction([0.1, -0.2], 1.0) == 1.0
    assert coverage_fraction([5.0, -6.0], 1.0) == 0.0
    errs = np.random.default_rng(0).standard_normal(200)
    covs = [coverage_fraction(errs, b) for b in (0.1, 0.5, 1, 2, 3)]
    assert covs == sorted(covs)


def test_unbiasedness_gate():
    assert unbiasedness_test(SampleSet([1.0] * 40, 1)).passed
    base = np.random.default_rng(1).standard_normal(400)
    se = base.std(ddof=1) / np.sqrt(400)
    shifted = SampleSet((base - base.mean() + 10 * se).tolist(), 0)
    rep = unbiasedness_test(shifted, 4.0)
    assert not rep.passed and abs(rep.z_score - 10) < 1e-6
    assert "FAIL" in rep.line()
    with pytest.raises(ValueError):
        unbiasedness_test(SampleSet([1.0] * 10, 1))


def test_mean_and_se():
    m, se = mean_and_se([1.0, 3.0])
    assert m == 2.0 and se == 1.0


def test_conditional_mean_check_detects_dependence():
    gen = np.random.default_rng(2)
    iid = gen.standard_normal((20000, 5))
    assert conditional_mean_check(iid).passed
    dep = iid.copy()
    dep[:, 1] += np.where(dep[:, 0] > 0, 0.3, -0.3)
    # zero mean overall but not given the previous sign
    assert not conditional_mean_check(dep).passed


def test_conditional_mean_check_constant_offset_fails():
    assert not conditional_mean_check(np.full((100, 2), 0.5)).passed
