"""Exception types raised by the engine.

Every numeric failure mode has its own class so callers (and the CLI exit-code
mapping) can tell them apart. All derive from :class:`MovingWallError`.
"""

from __future__ import annotations


class MovingWallError(Exception):
    """Base class for all engine errors."""


class InvalidArgumentError(MovingWallError, ValueError):
    pass


class DomainExpiredError(MovingWallError, ValueError):
    """Requested time lies outside the validity window of a contracting box."""


class UnsupportedMethodError(MovingWallError, ValueError):
    pass


class NumericRangeError(MovingWallError, ArithmeticError):
    pass


class NumericConsistencyError(MovingWallError, ArithmeticError):
    pass


class SingularityError(MovingWallError, ArithmeticError):
    """A velocity field returned a non-finite value at ``(t, x)``."""

    def __init__(self, message: str, t: float, x: float):
        super().__init__(f"{message} at t={t!r}, x={x!r}")
        self.t = t
        self.x = x


class NodeSingularityError(SingularityError):
    """|psi| fell below the node floor, polar quantities are undefined there."""


class GridSolveError(MovingWallError, ArithmeticError):
    pass
