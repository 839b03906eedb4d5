"""HTTP service wrapping the simulation library."""

from .app import app

__all__ = ["app"]
