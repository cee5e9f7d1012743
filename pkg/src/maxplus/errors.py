"""Exception hierarchy shared by every solver in the package."""


class MaxplusError(Exception):
    """Base class for errors raised by this package."""


class InvalidPosition(MaxplusError, IndexError):
    pass


class ShapeError(MaxplusError, ValueError):
    pass


class ArithmeticOverflow(MaxplusError, ArithmeticError):
    """A finite sum left the signed 64-bit range."""


class NonConcaveInput(MaxplusError, ValueError):
    pass


class InstanceTooLarge(MaxplusError):
    """The instance exceeds a configured enumeration or memory budget."""


class PreconditionViolated(MaxplusError, ValueError):
    pass


class UnboundedProfit(MaxplusError, ValueError):
    """A zero-weight item with positive profit may be taken infinitely often."""
