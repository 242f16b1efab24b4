from fractions import Fraction

import numpy as np
import pytest
from numpy.polynomial import chebyshev as npcheb

from stochround.chebyshev import (
    PLAIN_X,
    Z_EQUALS_X_SQUARED,
    Polynomial,
    abs_sum,
    chebyshev_plain_coeffs,
    chebyshev_z_coeffs,
    exact_eval,
    parse_poly,
)
from stochround.errors import EmptyPolynomial, NotRepresentable, OddDegree
from stochround.fp_core import BINARY32

X2426 = float(np.float32(24 / 26))


def test_small_cases():
    assert chebyshev_z_coeffs(2).coefficients == (-1, 2)
    assert chebyshev_z_coeffs(4).coefficients == (1, -8, 8)
    assert chebyshev_z_coeffs(0).coefficients == (1,)


@pytest.mark.parametrize("n", range(0, 41))
def test_plain_coeffs_match_numpy(n):
    ref = npcheb.cheb2poly([0] * n + [1])
    assert chebyshev_plain_coeffs(n) == [int(c) for c in ref]


@pytest.mark.parametrize("n", range(0, 41, 2))
def test_normalization(n):
    P = chebyshev_z_coeffs(n)
    assert sum(P.coefficients) == 1
    assert exact_eval(P, 1) == 1


def test_odd_and_out_of_range():
    with pytest.raises(OddDegree):
        chebyshev_z_coeffs(5)
    with pytest.raises(ValueError):
        chebyshev_z_coeffs(42)


def test_exact_eval_examples():
    assert exact_eval(chebyshev_z_coeffs(2), 1) == 1
    assert exact_eval(chebyshev_z_coeffs(4), 0) == 1
    v = exact_eval(chebyshev_z_coeffs(20), X2426)
    assert abs(v) < 1
    assert float(v) == -0.04182831479721556


def test_exact_eval_matches_cosine_form():
    # T_N(cos t) = cos(N t)
    x = X2426
    t = np.arccos(x)
    for n in (2, 10, 20):
        assert abs(float(exact_eval(chebyshev_z_coeffs(n), x)) - np.cos(n * t)) < 1e-9


def test_polynomial_validation():
    with pytest.raises(EmptyPolynomial):
        Polynomial(())
    with pytest.raises(ValueError):
        Polynomial((1, 0))
    P = Polynomial((1, 2, 3), Z_EQUALS_X_SQUARED)
    assert P.degree == 2 and P.horner_variable(Fraction(1, 2)) == Fraction(1, 4)
    assert abs_sum(Polynomial((1, -2)), 3) == 7


def test_representability():
    chebyshev_z_coeffs(36).check_representable(BINARY32)
    with pytest.raises(NotRepresentable):
        chebyshev_z_coeffs(40).check_representable(BINARY32)
    R = chebyshev_z_coeffs(40).rounded_to(BINARY32)
    R.check_representable(BINARY32)


def test_parse_poly():
    assert parse_poly("chebyshev:4") == chebyshev_z_coeffs(4)
    P = parse_poly("coeffs:1,0,-2")
    assert P.coefficients == (1, 0, -2) and P.variable == PLAIN_X
    with pytest.raises(ValueError):
        parse_poly("legendre:4")
