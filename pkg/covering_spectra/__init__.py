"""Spectral instability of finite covers of discrete surfaces."""
from __future__ import annotations

__version__ = "0.1.0"
