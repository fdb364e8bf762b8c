"""Human verification queue: file-backed store plus its HTTP API."""

from .store import REASON_AUDIT, REASON_BELOW_THRESHOLD, ReviewStore, ReviewTask
from .api import create_app

__all__ = [
    "REASON_AUDIT",
    "REASON_BELOW_THRESHOLD",
    "ReviewStore",
    "ReviewTask",
    "create_app",
]
