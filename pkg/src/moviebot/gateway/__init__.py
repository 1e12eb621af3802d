"""Serving layer: sessions, authentication, REST, and the wire channel."""

from .auth import (
    AuthRecord,
    AuthStore,
    BadCredentialsError,
    DuplicateUserError,
    UnknownUserError,
)
from .sessions import (
    NotAuthenticatedError,
    Session,
    SessionManager,
    TerminatedSessionError,
    UnknownSessionError,
    WireMessage,
)

__all__ = [
    "AuthRecord",
    "AuthStore",
    "BadCredentialsError",
    "DuplicateUserError",
    "UnknownUserError",
    "NotAuthenticatedError",
    "Session",
    "SessionManager",
    "TerminatedSessionError",
    "UnknownSessionError",
    "WireMessage",
]
