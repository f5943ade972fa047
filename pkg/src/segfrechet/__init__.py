"""Fréchet distance between subtrajectories and horizontal segments."""
from .breakdown import FrechetBreakdown, Term, TermValue
from .geometry import HorizontalSegment, Point, Subcurve, Trajectory, TrajectoryPos, subcurve
from .rangeindex import RangeIndex, build

__all__ = [
    "FrechetBreakdown",
    "HorizontalSegment",
    "Point",
    "RangeIndex",
    "Subcurve",
    "Term",
    "TermValue",
    "Trajectory",
    "TrajectoryPos",
    "build",
    "subcurve",
]
__version__ = "0.1.0"
