"""DPP landmark selection for the Nystrom method."""

from ._core import *  # noqa: F401,F403
from ._core import BenchConfig, PsdMatrix

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
