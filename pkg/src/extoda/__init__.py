"""Exact symbolic computations for the extended Toda hierarchy and the CP^1 partition function."""
from .ring import TruncationConfig
from .ring.config import DEFAULT

__version__ = "0.1.0"

__all__ = ["TruncationConfig", "DEFAULT", "__version__"]
