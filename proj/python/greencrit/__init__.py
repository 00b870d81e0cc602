"""Numerical existence criteria for positive solutions of Delta u + sigma u^q <= 0."""

from ._greencrit import *  # noqa: F401,F403
from ._greencrit import __doc__  # noqa: F401

__version__ = "0.1.0"
