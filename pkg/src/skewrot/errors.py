"""Exception types raised across the package."""


class SkewRotError(Exception):
    """Base class for all package errors."""


class DegenerateCenter(SkewRotError, ValueError):
    """A map was evaluated at (or numerically at) its own center.

    ``factor`` is the index of the failing factor inside a product and
    ``step`` the orbit step, when known.
    """

    def __init__(self, message, factor=None, step=None):
        super().__init__(message)
        self.factor = factor
        self.step = step


class NonPositiveRadius(SkewRotError, ValueError):
    pass


class InsufficientData(SkewRotError, ValueError):
    pass


class RefinementLimit(SkewRotError, RuntimeError):
    pass


class NoCrossings(SkewRotError, ValueError):
    pass


class UnboundedOrbit(SkewRotError, ValueError):
    pass


class DegenerateSeries(SkewRotError, ValueError):
    pass


class OutOfRegime(SkewRotError, ValueError):
    """Strip recurrences were applied where they do not hold (|h_n| <= a)."""

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


class ConfigError(SkewRotError, ValueError):
    pass
