"""Hyperplane sections and projections of l_p balls along diagonal directions."""

from .exceptions import BracketError, ConvergenceError, DomainError
from .volumes import Direction, VolumeEstimate, projection_volume, section_volume, volume

__all__ = [
    "BracketError",
    "ConvergenceError",
    "Direction",
    "DomainError",
    "VolumeEstimate",
    "projection_volume",
    "section_volume",
    "volume",
]
__version__ = "0.1.0"
