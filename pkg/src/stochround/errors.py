"""Exception hierarchy shared by the library and the CLI."""


class StochRoundError(Exception):
    """Base class for all errors raised by this package."""


class SubnormalOrSpecial(StochRoundError, ValueError):
    """Value is subnormal, infinite or NaN (only normal numbers are modelled)."""


class NotRepresentable(StochRoundError, ValueError):
    """Value is not a member of the requested format."""


class RangeError(StochRoundError, ArithmeticError):
    """Exact value falls outside the normal range of the format."""


class EmptyPolynomial(StochRoundError, ValueError):
    pass


class OddDegree(StochRoundError, ValueError):
    pass


class InvalidLambda(StochRoundError, ValueError):
    pass


class ZeroDenominator(StochRoundError, ZeroDivisionError):
    """P(x) == 0, so relative quantities are undefined."""


class ZeroX(StochRoundError, ValueError):
    pass


class EmptySampleSet(StochRoundError, ValueError):
    pass


class ConfigError(StochRoundError, ValueError):
    pass
