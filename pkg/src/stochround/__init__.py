"""Stochastic rounding emulation, bias analysis and Horner error bounds."""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    EmptyPolynomial,
    EmptySampleSet,
    InvalidLambda,
    NotRepresentable,
    OddDegree,
    RangeError,
    StochRoundError,
    SubnormalOrSpecial,
    ZeroDenominator,
    ZeroX,
)
from .fp_core import (
    BINARY32,
    FloatDecomposition,
    FloatFormat,
    RoundingNeighborhood,
    decompose,
    format_from_name,
    neighborhood,
    recompose,
    round_nearest,
    toy_format,
)
from .sr_engine import (
    RngStream,
    SRMode,
    StreamBank,
    expected_round,
    outcome_law,
    sr_add,
    sr_div,
    sr_mul,
    sr_round,
    sr_sub,
)
from .chebyshev import Polynomial, chebyshev_z_coeffs, exact_eval
from .algorithms import (
    bias_table,
    horner_batch,
    horner_eval,
    integrate_batch,
    integrate_constant,
    predicted_total_bias,
    theta_of_interval,
)
from .bounds import (
    azuma_threshold,
    cond1,
    deterministic_bound,
    gamma,
    martingale_constants,
    probabilistic_bound,
)
from .stats import SampleSet, SummaryStats, coverage_fraction, summarize, unbiasedness_test
