"""Session gateway: the engine behind a small JSON message protocol."""

from .app import create_app
from .service import SessionManager

__all__ = ["SessionManager", "create_app"]
