"""Python view of the regsub C++ core."""

from ._regsub import *  # noqa: F401,F403
from ._regsub import ConfigError, DomainSpec, ScaleFunction, SpeedMeasure

__all__ = [name for name in dir() if not name.startswith("_")]
