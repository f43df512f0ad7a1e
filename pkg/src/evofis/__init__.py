"""Evolving fuzzy inference learners (eTS, SAFIS, McFIS) for streaming forecasting."""

__version__ = "0.1.0"
