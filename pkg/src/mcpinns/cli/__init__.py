"""Command line interface."""

from mcpinns.cli.main import app, main

__all__ = ["app", "main"]
