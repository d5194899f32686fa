"""Particle in a box with one uniformly moving wall: exact series wavefield,
observables, quantum effective force, Bohmian trajectories and a
finite-difference cross-check."""

from importlib.metadata import PackageNotFoundError, version as _version

from .errors import (DomainExpiredError, GridSolveError, InvalidArgumentError, MovingWallError,
                     NodeSingularityError, NumericConsistencyError, NumericRangeError,
                     SingularityError, UnsupportedMethodError)
from .spectral import InitialState, PhysicsConfig, SpectralState, build_spectrum, evaluate

try:
    __version__ = _version("artifact")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"

__all__ = [
    "DomainExpiredError", "GridSolveError", "InitialState", "InvalidArgumentError",
    "MovingWallError", "NodeSingularityError", "NumericConsistencyError", "NumericRangeError",
    "PhysicsConfig", "SingularityError", "SpectralState", "UnsupportedMethodError",
    "build_spectrum", "evaluate", "__version__",
]
