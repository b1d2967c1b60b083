"""HTTP API backing the interactive tuning UI."""

from .app import app, create_app

__all__ = ["app", "create_app"]
