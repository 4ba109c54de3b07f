"""Minimal Heatcurve package exports."""

from .cli import main as cli_main
from .config import RunConfig, load_config
from .pipeline import Pipeline

__all__ = [
    "cli_main",
    "Pipeline",
    "RunConfig",
    "load_config",
]
