"""Utility helpers for the heatcurve pipeline."""
from __future__ import annotations

__all__ = []
