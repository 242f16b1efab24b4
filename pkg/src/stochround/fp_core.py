"""Binary floating-point formats, exact decomposition and rounding neighborhoods.

A value ``x = sign * m * 2**(e - p + 1)`` with ``2**(p-1) <= m < 2**p`` is a
normal number of a format with precision ``p``; ``e`` is the exponent of the
binade ``[2**e, 2**(e+1))`` that holds ``|x|`` (the IEEE-754 convention).

Two evaluation paths are provided:

* scalar functions working on exact rationals (:class:`fractions.Fraction`),
  used for traces, tables and oracles;
* vectorized numpy kernels that carry an exact value as an unevaluated sum
  ``hi + lo`` of two float64 numbers, used for Monte Carlo batches.
"""
from __future__ import annotations

import math
import numbers
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Union

import numpy as np

from .errors import NotRepresentable, RangeError, SubnormalOrSpecial

ExactValue = Union[Fraction, int, float]

_HALF = Fraction(1, 2)


@dataclass(frozen=True)
class FloatFormat:
    """A binary floating-point format restricted to its normal numbers."""

    precision: int
    emin: int
    emax: int
    name: str = ""

    def __post_init__(self):
        if not 2 <= self.precision <= 24:
            raise ValueError(f"precision must lie in [2, 24], got {self.precision}")
        if not self.emin < self.emax:
            raise ValueError("emin must be smaller than emax")
        # values are carried in float64, so the format must nest inside it
        if self.emin < -1022 or self.emax > 1023:
            raise ValueError("exponent range must fit inside binary64")

    @property
    def base(self) -> int:
        return 2

    @property
    def unit_roundoff(self) -> Fraction:
        """u = 2**(1 - p), the bound on |delta| for any of the rounding modes."""
        return Fraction(1, 1 << (self.precision - 1))

    @property
    def min_normal(self) -> float:
        return math.ldexp(1.0, self.emin)

    @property
    def max_finite(self) -> float:
        p = self.precision
        return math.ldexp((1 << p) - 1, self.emax - p + 1)

    def ulp(self, e: int) -> Fraction:
        """Spacing of format values in the binade [2**e, 2**(e+1))."""
        return _pow2(e - self.precision + 1)

    def __str__(self):
        return self.name or f"p{self.precision}[{self.emin},{self.emax}]"


BINARY32 = FloatFormat(24, -126, 127, "binary32")


def toy_format(precision: int, emin: int = -14, emax: int = 15) -> FloatFormat:
    """Small-precision format for exhaustive enumeration."""
    return FloatFormat(precision, emin, emax, f"p{precision}")


def format_from_name(name: str) -> FloatFormat:
    """Parse ``binary32`` or ``p<N>`` (a toy format of precision N)."""
    if name == "binary32":
        return BINARY32
    if name.startswith("p") and name[1:].isdigit():
        return toy_format(int(name[1:]))
    raise ValueError(f"unknown format {name!r}")


def _pow2(k: int) -> Fraction:
    return Fraction(1 << k) if k >= 0 else Fraction(1, 1 << -k)


def to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, numbers.Rational):
        return Fraction(x)
    xf = float(x)
    if not math.isfinite(xf):
        raise SubnormalOrSpecial(f"non-finite value {x!r}")
    return Fraction(xf)


def binade(a: Fraction) -> int:
    """Exponent e with 2**e <= a < 2**(e+1), for a > 0."""
    n, d = a.numerator, a.denominator
    e = n.bit_length() - d.bit_length()
    if e >= 0:
        if n < d << e:
            e -= 1
    elif n << -e < d:
        e -= 1
    return e


@dataclass(frozen=True)
class FloatDecomposition:
    sign: int
    significand: int
    exponent: int

    def value(self, fmt: FloatFormat) -> float:
        return recompose(self, fmt)


def decompose(x: float, fmt: FloatFormat) -> FloatDecomposition:
    """Split a format value into (sign, significand, exponent).

    Zero decomposes to significand 0 and exponent 0; the sign follows the
    sign bit so that ``-0.0`` survives a round trip.
    """
    x = float(x)
    if not math.isfinite(x):
        raise SubnormalOrSpecial(f"non-finite value {x!r}")
    sign = -1 if math.copysign(1.0, x) < 0 else 1
    if x == 0.0:
        return FloatDecomposition(sign, 0, 0)
    _, ex = math.frexp(abs(x))
    e = ex - 1
    if e < fmt.emin:
        raise SubnormalOrSpecial(f"{x!r} is below the normal range of {fmt}")
    if e > fmt.emax:
        raise NotRepresentable(f"{x!r} exceeds the range of {fmt}")
    scaled = math.ldexp(abs(x), fmt.precision - 1 - e)
    if scaled != math.floor(scaled):
        raise NotRepresentable(f"{x!r} needs more than {fmt.precision} significand bits")
    return FloatDecomposition(sign, int(scaled), e)


def recompose(d: FloatDecomposition, fmt: FloatFormat) -> float:
    return math.copysign(math.ldexp(d.significand, d.exponent - fmt.precision + 1), d.sign)


def is_representable(x, fmt: FloatFormat) -> bool:
    q = to_fraction(x)
    if q == 0:
        return True
    e = binade(abs(q))
    if not fmt.emin <= e <= fmt.emax:
        return False
    return (abs(q) / fmt.ulp(e)).denominator == 1


@dataclass(frozen=True)
class RoundingNeighborhood:
    """Floor/ceiling of an exact value in a format, with gap and fraction.

    ``epsilon`` is ``up - down`` (zero when x is representable) and ``ulp``
    the spacing of the binade containing x. ``theta`` is the fraction of the
    gap lying below x.
    """

    down: float
    up: float
    epsilon: Fraction
    theta: Fraction
    ulp: Fraction
    exponent: int

    @property
    def representable(self) -> bool:
        return self.theta == 0


def neighborhood(x: ExactValue, fmt: FloatFormat) -> RoundingNeighborhood:
    q = to_fraction(x)
    p = fmt.precision
    if q == 0:
        return RoundingNeighborhood(0.0, 0.0, Fraction(0), Fraction(0), Fraction(0), 0)
    a = abs(q)
    e = binade(a)
    if e < fmt.emin:
        raise RangeError(f"{float(q)!r} underflows the normal range of {fmt}")
    if e > fmt.emax:
        raise RangeError(f"{float(q)!r} overflows {fmt}")
    shift = p - 1 - e
    n, d = a.numerator, a.denominator
    if shift >= 0:
        f, rem = divmod(n << shift, d)
    else:
        d <<= -shift
        f, rem = divmod(n, d)
    r = Fraction(rem, d)
    if r and e == fmt.emax and f + 1 == 1 << p:
        raise RangeError(f"{float(q)!r} rounds up past the largest value of {fmt}")
    ulp = fmt.ulp(e)
    lo = math.ldexp(f, e - p + 1)
    hi = math.ldexp(f + 1, e - p + 1) if r else lo
    if q > 0:
        down, up, theta = lo, hi, r
    else:
        down, up, theta = -hi, -lo, (1 - r if r else r)
    return RoundingNeighborhood(down, up, ulp if r else Fraction(0), theta, ulp, e)


def round_nearest(x: ExactValue, fmt: FloatFormat) -> float:
    """Round to nearest, ties to even."""
    nb = neighborhood(x, fmt)
    if nb.theta < _HALF:
        return nb.down
    if nb.theta > _HALF:
        return nb.up
    m_down = abs(Fraction(nb.down)) / nb.ulp
    return nb.down if m_down % 2 == 0 else nb.up


# ---------------------------------------------------------------------------
# vectorized kernels (float64 carriers)

_SPLITTER = float((1 << 27) + 1)
_BELOW_ONE = float(np.nextafter(1.0, 0.0))


def two_sum(a, b):
    """Knuth's error-free sum: a + b == s + err exactly."""
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def _split(a):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def two_prod(a, b):
    """Dekker's error-free product: a * b == p + err exactly."""
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    err = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, err


def exact_add(a, b):
    return two_sum(np.asarray(a, np.float64), np.asarray(b, np.float64))


def exact_sub(a, b):
    return two_sum(np.asarray(a, np.float64), -np.asarray(b, np.float64))


def exact_mul(a, b):
    # a product of two p <= 24 bit significands fits in the 53-bit carrier
    p = np.asarray(a, np.float64) * np.asarray(b, np.float64)
    return p, np.zeros_like(p)


def exact_div(a, b):
    """Quotient as q + lo where the sign and zeroness of lo are exact.

    The remainder a - q*b of a correctly rounded quotient is itself a
    float64, so ``lo = rem / b`` is nonzero exactly when the quotient is
    inexact; its magnitude carries a relative error of 2**-53.
    """
    a = np.asarray(a, np.float64)
    b = np.asarray(b, np.float64)
    q = a / b
    ph, pl = two_prod(q, b)
    rem = (a - ph) - pl
    return q, rem / b


class VecNeighbors(NamedTuple):
    down: np.ndarray
    up: np.ndarray
    theta: np.ndarray
    representable: np.ndarray


def vec_neighbors(hi, lo, fmt: FloatFormat) -> VecNeighbors:
    """Neighbors and theta of the exact values ``hi + lo`` (elementwise).

    ``lo`` must be small relative to ``hi`` (as produced by the exact_*
    kernels). theta is accurate to a few float64 ulps; representability is
    decided exactly.
    """
    hi, lo = np.broadcast_arrays(np.asarray(hi, np.float64), np.asarray(lo, np.float64))
    p = fmt.precision
    neg = hi < 0
    a = np.abs(hi)
    low = np.where(neg, -lo, lo)
    zero = a == 0.0
    _, ex = np.frexp(a)
    e = ex.astype(np.int64) - 1
    shift = (p - 1) - e
    t = np.ldexp(a, shift)
    f = np.floor(t)
    s = np.ldexp(low, shift)
    r = (t - f) + s
    below = r < 0.0
    if below.any():
        # t integral and a tiny negative tail: step to the previous value
        top = f == float(1 << (p - 1))
        drop = below & top
        keep = below & ~top
        f = np.where(keep, f - 1.0, f)
        r = np.where(keep, 1.0 + s, r)
        # x sits just under a power of two: move to the binade below
        f = np.where(drop, float((1 << p) - 1), f)
        r = np.where(drop, 1.0 + 2.0 * s, r)
        e = np.where(drop, e - 1, e)
    r = np.minimum(r, _BELOW_ONE)
    nz = ~zero
    if nz.any():
        ez = e[nz]
        if ez.min() < fmt.emin:
            raise RangeError(f"value underflows the normal range of {fmt}")
        if ez.max() > fmt.emax:
            raise RangeError(f"value overflows {fmt}")
        if np.any(nz & (e == fmt.emax) & (f == float((1 << p) - 1)) & (r > 0)):
            raise RangeError(f"value rounds up past the largest value of {fmt}")
    inexact = nz & (r > 0.0)
    ulp = np.ldexp(1.0, np.where(zero, 0, e - p + 1))
    lo_mag = np.where(zero, 0.0, f * ulp)
    hi_mag = np.where(inexact, (f + 1.0) * ulp, lo_mag)
    down = np.where(neg, -hi_mag, lo_mag)
    up = np.where(neg, -lo_mag, hi_mag)
    theta = np.where(inexact, np.where(neg, np.minimum(1.0 - r, _BELOW_ONE), r), 0.0)
    return VecNeighbors(down, up, theta, ~inexact)
