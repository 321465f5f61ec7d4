"""HTTP service wrapping the analysis pipeline."""

from .app import create_app
from .settings import Settings
from .state import ServiceState, SessionCache

__all__ = ["create_app", "Settings", "ServiceState", "SessionCache"]
