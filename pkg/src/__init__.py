"""pathmed: mediation and recursive path analysis."""

__version__ = "0.3.0"
