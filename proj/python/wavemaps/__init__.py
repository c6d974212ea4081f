"""Radial equivariant wave maps.

Bubble profiles and constants, a radial solver, modulation fits and the
reduced scale ODE. Everything is implemented in the compiled ``_core``
extension; this package re-exports it.
"""

from ._core import *  # noqa: F401,F403
from ._core import DomainError, FitError, ConfigError, NumericalError  # noqa: F401

__version__ = "0.1.0"
