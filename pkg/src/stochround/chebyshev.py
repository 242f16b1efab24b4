"""Polynomials with exact rational coefficients and Chebyshev generators."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import EmptyPolynomial, NotRepresentable, OddDegree
from .fp_core import FloatFormat, is_representable, round_nearest, to_fraction

PLAIN_X = "plain_x"
Z_EQUALS_X_SQUARED = "z_equals_x_squared"


@dataclass(frozen=True)
class Polynomial:
    """P = sum(coefficients[i] * v**i), ascending order.

    With ``variable == Z_EQUALS_X_SQUARED`` the polynomial is evaluated at
    ``v = x*x``; the degree refers to ``v``.
    """

    coefficients: tuple[Fraction, ...]
    variable: str = PLAIN_X

    def __post_init__(self):
        if not self.coefficients:
            raise EmptyPolynomial("a polynomial needs at least one coefficient")
        if self.variable not in (PLAIN_X, Z_EQUALS_X_SQUARED):
            raise ValueError(f"unknown variable convention {self.variable!r}")
        object.__setattr__(self, "coefficients", tuple(to_fraction(c) for c in self.coefficients))
        if len(self.coefficients) > 1 and self.coefficients[-1] == 0:
            raise ValueError("leading coefficient must be nonzero")

    @classmethod
    def from_coefficients(cls, coeffs: Sequence, variable: str = PLAIN_X) -> "Polynomial":
        return cls(tuple(coeffs), variable)

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def horner_variable(self, x) -> Fraction:
        x = to_fraction(x)
        return x * x if self.variable == Z_EQUALS_X_SQUARED else x

    def rounded_to(self, fmt: FloatFormat) -> "Polynomial":
        """The polynomial whose coefficients are the nearest ``fmt`` values."""
        return Polynomial(tuple(to_fraction(round_nearest(c, fmt)) for c in self.coefficients), self.variable)

    def check_representable(self, fmt: FloatFormat) -> None:
        for i, c in enumerate(self.coefficients):
            if not is_representable(c, fmt):
                raise NotRepresentable(f"coefficient a_{i} = {c} is not exact in {fmt}")


def chebyshev_plain_coeffs(n: int) -> list[int]:
    """Integer coefficients of T_n in x, from T_{m+1} = 2x T_m - T_{m-1}."""
    if n < 0:
        raise ValueError("degree must be non-negative")
    prev, cur = [1], [0, 1]
    if n == 0:
        return prev
    for _ in range(1, n):
        nxt = [0] + [2 * c for c in cur]
        for i, c in enumerate(prev):
            nxt[i] -= c
        prev, cur = cur, nxt
    return cur


def chebyshev_z_coeffs(n: int) -> Polynomial:
    """T_n for even n, written as a polynomial in z = x**2."""
    if n % 2:
        raise OddDegree(f"T_{n} has odd degree; only even N are supported")
    if not 0 <= n <= 40:
        raise ValueError("N must lie in [0, 40]")
    plain = chebyshev_plain_coeffs(n)
    return Polynomial(tuple(plain[0::2]), Z_EQUALS_X_SQUARED)


def chebyshev_polynomial(n: int) -> Polynomial:
    return Polynomial(tuple(chebyshev_plain_coeffs(n)), PLAIN_X)


def exact_eval(P: Polynomial, x) -> Fraction:
    v = P.horner_variable(x)
    acc = Fraction(0)
    for c in reversed(P.coefficients):
        acc = acc * v + c
    return acc


def abs_sum(P: Polynomial, x) -> Fraction:
    """sum |a_i v**i| at the Horner variable v for x."""
    v = abs(P.horner_variable(x))
    acc = Fraction(0)
    for c in reversed(P.coefficients):
        acc = acc * v + abs(c)
    return acc


def parse_poly(text: str) -> Polynomial:
    """``chebyshev:N`` or a comma list of ascending coefficients (``1,0,-2``)."""
    kind, _, arg = text.partition(":")
    if kind == "chebyshev":
        return chebyshev_z_coeffs(int(arg))
    if kind == "coeffs":
        return Polynomial(tuple(Fraction(c) for c in arg.split(",")))
    raise ValueError(f"unknown polynomial spec {text!r}")
