"""Exact formal theory of linear systems of partial differential equations."""
from __future__ import annotations

__version__ = "0.1.0"
