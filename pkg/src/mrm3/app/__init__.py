"""Command-line and HTTP front ends."""

from .cli import main
from .service import GraphService

__all__ = ["GraphService", "main"]
