"""Shallow cuttings for 3-D dominance ranges in a simulated I/O model."""
from .iomodel import IoConfig, IoStats, Session, open_session

__all__ = ["IoConfig", "IoStats", "Session", "open_session"]
