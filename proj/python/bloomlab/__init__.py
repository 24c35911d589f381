"""Two-weight Bloom experiments on dyadic grids."""

from ._bloomlab import *  # noqa: F401,F403
from ._bloomlab import ConfigError, DomainError, Error, NumericalError  # noqa: F401

__version__ = "0.1.0"
