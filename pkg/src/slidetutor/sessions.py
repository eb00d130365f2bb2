"""In-memory sessions with opaque random tokens.

Sessions are deliberately ephemeral: restarting the service clears them
while the user store persists. Tokens carry 128 bits of randomness and
expired sessions never authenticate.
"""

from __future__ import annotations

import secrets
import threading
import time
from dataclasses import dataclass

DEFAULT_LIFETIME_SECONDS = 24 * 60 * 60


@dataclass
class Session:
    token: str
    user_id: int
    created_at: float
    expires_at: float


class SessionStore:
    """Thread-safe token -> session map with expiry."""

    def __init__(self, lifetime_seconds: float = DEFAULT_LIFETIME_SECONDS) -> None:
        if lifetime_seconds <= 0:
            raise ValueError("lifetime_seconds must be positive")
        self.lifetime_seconds = lifetime_seconds
        self._lock = threading.Lock()
        self._sessions: dict[str, Session] = {}

    def create(self, user_id: int) -> Session:
        now = time.time()
        session = Session(
            token=secrets.token_hex(16),
            user_id=user_id,
            created_at=now,
            expires_at=now + self.lifetime_seconds,
        )
        with self._lock:
            self._sessions[session.token] = session
        return session

    def get(self, token: str | None) -> Session | None:
        """Resolve a token; expired or unknown tokens yield None."""
        if not token:
            return None
        with self._lock:
            session = self._sessions.get(token)
            if session is None:
                return None
            if session.expires_at <= time.time():
                del self._sessions[token]
                return None
            return session

    def revoke(self, token: str) -> bool:
        """Delete one session; the token never authenticates again."""
        with self._lock:
            return self._sessions.pop(token, None) is not None

    def revoke_user(self, user_id: int) -> int:
        """Delete every session of ``user_id`` (used on account deletion)."""
        with self._lock:
            doomed = [t for t, s in self._sessions.items() if s.user_id == user_id]
            for token in doomed:
                del self._sessions[token]
        return len(doomed)
