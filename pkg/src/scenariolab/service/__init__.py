from .app import create_app
from .sessions import (
    MIN_SCORED_SCENARIOS,
    ROLES,
    SessionError,
    SessionManager,
    build_comparison,
)
from .store import EventLog, replay_events

__all__ = ["EventLog", "MIN_SCORED_SCENARIOS", "ROLES", "SessionError",
           "SessionManager", "build_comparison", "create_app", "replay_events"]
