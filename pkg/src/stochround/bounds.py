"""Forward-error bounds for Horner evaluation.

Rational quantities (gamma, cond1, the deterministic bound, the martingale
increment constants) are exact Fractions. Anything involving a square root
or logarithm is an ``mpmath.mpf`` evaluated at ``WORKING_DPS`` digits.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import mpmath

from .chebyshev import Z_EQUALS_X_SQUARED, Polynomial, abs_sum, exact_eval
from .errors import InvalidLambda, ZeroDenominator, ZeroX
from .fp_core import to_fraction

WORKING_DPS = 60
DEFAULT_LAMBDA = 0.5


def _mpf(q) -> mpmath.mpf:
    q = to_fraction(q)
    with mpmath.workdps(WORKING_DPS):
        return mpmath.mpf(q.numerator) / q.denominator


def _check_lambda(lam) -> None:
    if not 0 < lam < 1:
        raise InvalidLambda(f"lambda must lie in (0, 1), got {lam}")


def gamma(n: int, u) -> Fraction:
    """(1 + u)**n - 1."""
    if n < 0:
        raise ValueError("n must be non-negative")
    u = to_fraction(u)
    if not 0 < u < 1:
        raise ValueError("u must lie in (0, 1)")
    return (1 + u) ** n - 1


def cond1(P: Polynomial, x) -> Fraction:
    """sum |a_i v**i| / |P(x)|, v the Horner variable."""
    px = exact_eval(P, x)
    if px == 0:
        raise ZeroDenominator("P(x) == 0: condition number undefined")
    return abs_sum(P, x) / abs(px)


def bound_degree(P: Polynomial, include_squaring: bool = False) -> int:
    """n entering gamma_{2n}/gamma_{4n}; optionally counts the x*x rounding."""
    return P.degree + (1 if include_squaring and P.variable == Z_EQUALS_X_SQUARED else 0)


def deterministic_bound(P: Polynomial, x, u, include_squaring: bool = False) -> Fraction:
    n = bound_degree(P, include_squaring)
    return cond1(P, x) * gamma(2 * n, u)


def probabilistic_factor(n: int, u, lam=DEFAULT_LAMBDA) -> mpmath.mpf:
    """sqrt(u * gamma_{4n}) * sqrt(ln(2/lambda))."""
    _check_lambda(lam)
    with mpmath.workdps(WORKING_DPS):
        return mpmath.sqrt(_mpf(to_fraction(u) * gamma(4 * n, u))) * mpmath.sqrt(
            mpmath.log(2 / _mpf(lam))
        )


def probabilistic_bound(P: Polynomial, x, u, lam=DEFAULT_LAMBDA, include_squaring: bool = False) -> mpmath.mpf:
    """Relative error bound holding with probability at least 1 - lambda under SR-nearness."""
    _check_lambda(lam)
    n = bound_degree(P, include_squaring)
    c = cond1(P, x)
    with mpmath.workdps(WORKING_DPS):
        return _mpf(c) * probabilistic_factor(n, u, lam)


def martingale_constants(P: Polynomial, x, u) -> list[Fraction]:
    """C_1..C_2n with |Y_i - Y_{i-1}| <= C_i * u for the normalized Horner errors."""
    v = abs(P.horner_variable(x))
    if v == 0:
        raise ZeroX("increment constants involve |x|**-j; x must be nonzero")
    u = to_fraction(u)
    a = [abs(c) for c in P.coefficients]
    n = P.degree
    g = [Fraction(1)]
    for _ in range(2 * n):
        g.append(g[-1] * (1 + u))
    w = [Fraction(1)]
    for _ in range(n):
        w.append(w[-1] / v)
    out = []
    for k in range(1, n + 1):
        odd = a[n] * g[2 * k - 2]
        even = a[n] * g[2 * k - 1]
        for j in range(1, k + 1):
            term = a[n - j] * w[j]
            if j <= k - 1:
                odd += term * g[2 * (k - j) - 1]
            even += term * g[2 * (k - j)]
        out.extend((odd, even))
    return out


def azuma_threshold(b: Sequence, lam=DEFAULT_LAMBDA) -> mpmath.mpf:
    """A with P(|M_n - M_0| >= A) <= lambda when |M_k - M_{k-1}| <= b_k."""
    _check_lambda(lam)
    if any(to_fraction(bk) <= 0 for bk in b):
        raise ValueError("increment bounds must be positive")
    ss = sum((to_fraction(bk) ** 2 for bk in b), Fraction(0))
    with mpmath.workdps(WORKING_DPS):
        return mpmath.sqrt(_mpf(ss)) * mpmath.sqrt(2 * mpmath.log(2 / _mpf(lam)))


def martingale_bound(P: Polynomial, x, u, lam=DEFAULT_LAMBDA) -> mpmath.mpf:
    """Relative bound straight from the martingale: |v|**n * A(u*C) / |P(x)|.

    Never larger than :func:`probabilistic_bound`; equal to it up to the
    factor sqrt(2 / (2 + u)) for a monomial.
    """
    u = to_fraction(u)
    px = exact_eval(P, x)
    if px == 0:
        raise ZeroDenominator("P(x) == 0: relative bound undefined")
    C = martingale_constants(P, x, u)
    if not C:
        return _mpf(0)
    scale = abs(P.horner_variable(x)) ** P.degree
    with mpmath.workdps(WORKING_DPS):
        return azuma_threshold([u * scale * c for c in C], lam) / _mpf(abs(px))


def chain_bound(P: Polynomial, x, u, lam=DEFAULT_LAMBDA) -> mpmath.mpf:
    """Intermediate step sum|a_j v^j| sqrt(u gamma_4n / (2+u)) sqrt(2 ln(2/lambda)) / |P(x)|."""
    _check_lambda(lam)
    u = to_fraction(u)
    n = P.degree
    c = cond1(P, x)
    with mpmath.workdps(WORKING_DPS):
        return _mpf(c) * mpmath.sqrt(_mpf(u * gamma(4 * n, u) / (2 + u))) * mpmath.sqrt(
            2 * mpmath.log(2 / _mpf(lam))
        )


def sqrt_gamma_ratio(n: int, u) -> mpmath.mpf:
    """sqrt(u * gamma_{4n}) / (2 sqrt(n) u), which tends to 1 as u -> 0."""
    u = to_fraction(u)
    with mpmath.workdps(WORKING_DPS):
        return mpmath.sqrt(_mpf(u * gamma(4 * n, u))) / (2 * mpmath.sqrt(n) * _mpf(u))


@dataclass(frozen=True)
class BoundReport:
    n: int
    u: Fraction
    cond1: Fraction
    gamma_2n: Fraction
    gamma_4n: Fraction
    lam: float
    deterministic_bound: Fraction
    probabilistic_bound: mpmath.mpf
    C: tuple[Fraction, ...]


def bound_report(
    P: Polynomial,
    x,
    u,
    lam=DEFAULT_LAMBDA,
    include_squaring: bool = False,
    with_constants: bool = True,
) -> BoundReport:
    u = to_fraction(u)
    n = bound_degree(P, include_squaring)
    c = cond1(P, x)
    g2, g4 = gamma(2 * n, u), gamma(4 * n, u)
    C = tuple(martingale_constants(P, x, u)) if with_constants and P.horner_variable(x) != 0 else ()
    return BoundReport(
        n=n,
        u=u,
        cond1=c,
        gamma_2n=g2,
        gamma_4n=g4,
        lam=lam,
        deterministic_bound=c * g2,
        probabilistic_bound=probabilistic_bound(P, x, u, lam, include_squaring),
        C=C,
    )
