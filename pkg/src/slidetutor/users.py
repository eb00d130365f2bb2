"""User accounts backed by a file-based SQLite store.

Passwords are stored only as salted PBKDF2-SHA256 hashes; nothing in this
module ever returns or persists plaintext password material. Writes are
serialized through a lock so the store is safe to share across request
handlers.
"""

from __future__ import annotations

import hashlib
import hmac
import secrets
import sqlite3
import threading
from dataclasses import dataclass
from pathlib import Path

from .errors import DuplicateUsernameError, UnknownUserError

USER_TYPES = frozenset({"admin", "regular"})

_PBKDF2_ITERATIONS = 100_000
_SCHEMA = """
CREATE TABLE IF NOT EXISTS users (
    user_id INTEGER PRIMARY KEY AUTOINCREMENT,
    username TEXT NOT NULL UNIQUE,
    password_hash TEXT NOT NULL,
    user_type TEXT NOT NULL CHECK (user_type IN ('admin', 'regular'))
)
"""


def hash_password(password: str) -> str:
    """Salted PBKDF2-SHA256, encoded as algorithm$iterations$salt$digest."""
    salt = secrets.token_hex(16)
    digest = hashlib.pbkdf2_hmac(
        "sha256", password.encode("utf-8"), bytes.fromhex(salt), _PBKDF2_ITERATIONS
    )
    return f"pbkdf2_sha256${_PBKDF2_ITERATIONS}${salt}${digest.hex()}"


def verify_password(password: str, stored: str) -> bool:
    try:
        algorithm, iterations, salt, expected = stored.split("$")
        if algorithm != "pbkdf2_sha256":
            return False
        digest = hashlib.pbkdf2_hmac(
            "sha256", password.encode("utf-8"), bytes.fromhex(salt), int(iterations)
        )
        return hmac.compare_digest(digest.hex(), expected)
    except (ValueError, TypeError):
        return False


@dataclass
class User:
    user_id: int
    username: str
    user_type: str

    def public_dict(self) -> dict:
        """Serialization used by the API; carries no password material."""
        return {
            "user_id": self.user_id,
            "username": self.username,
            "user_type": self.user_type,
        }


def _validate_user_type(user_type: str) -> None:
    if user_type not in USER_TYPES:
        raise ValueError(f"user_type must be one of {sorted(USER_TYPES)}")


class UserStore:
    """CRUD over the users table; usernames unique, ids assigned by SQLite."""

    def __init__(self, db_path: str | Path) -> None:
        self.db_path = Path(db_path)
        self.db_path.parent.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._conn = sqlite3.connect(self.db_path, check_same_thread=False)
        with self._lock:
            self._conn.execute(_SCHEMA)
            self._conn.commit()

    def close(self) -> None:
        self._conn.close()

    def add(self, username: str, password: str, user_type: str) -> User:
        """Create a user; the password is hashed before it touches disk.

        Raises:
            ValueError: empty username/password or bad user_type.
            DuplicateUsernameError: username already taken.
        """
        if not username:
            raise ValueError("username must be nonempty")
        if not password:
            raise ValueError("password must be nonempty")
        _validate_user_type(user_type)
        stored = hash_password(password)
        with self._lock:
            try:
                cursor = self._conn.execute(
                    "INSERT INTO users (username, password_hash, user_type) "
                    "VALUES (?, ?, ?)",
                    (username, stored, user_type),
                )
                self._conn.commit()
            except sqlite3.IntegrityError as exc:
                raise DuplicateUsernameError(
                    f"username already taken: {username!r}"
                ) from exc
        return User(user_id=cursor.lastrowid, username=username, user_type=user_type)

    def get(self, user_id: int) -> User:
        with self._lock:
            row = self._conn.execute(
                "SELECT user_id, username, user_type FROM users WHERE user_id = ?",
                (user_id,),
            ).fetchone()
        if row is None:
            raise UnknownUserError(f"no user with id {user_id}")
        return User(*row)

    def get_by_username(self, username: str) -> User | None:
        with self._lock:
            row = self._conn.execute(
                "SELECT user_id, username, user_type FROM users WHERE username = ?",
                (username,),
            ).fetchone()
        return User(*row) if row else None

    def authenticate(self, username: str, password: str) -> User | None:
        """Return the user when credentials verify, else None."""
        with self._lock:
            row = self._conn.execute(
                "SELECT user_id, username, user_type, password_hash "
                "FROM users WHERE username = ?",
                (username,),
            ).fetchone()
        if row is None or not verify_password(password, row[3]):
            return None
        return User(row[0], row[1], row[2])

    def update(
        self,
        user_id: int,
        username: str | None = None,
        password: str | None = None,
        user_type: str | None = None,
    ) -> User:
        """Mutate only the provided fields; passwords are re-hashed.

        Raises:
            UnknownUserError: no such id.
            DuplicateUsernameError: new username already taken.
            ValueError: bad user_type or empty replacement values.
        """
        current = self.get(user_id)
        sets: list[str] = []
        args: list = []
        if username is not None:
            if not username:
                raise ValueError("username must be nonempty")
            sets.append("username = ?")
            args.append(username)
        if password is not None:
            if not password:
                raise ValueError("password must be nonempty")
            sets.append("password_hash = ?")
            args.append(hash_password(password))
        if user_type is not None:
            _validate_user_type(user_type)
            sets.append("user_type = ?")
            args.append(user_type)
        if not sets:
            return current
        args.append(user_id)
        with self._lock:
            try:
                self._conn.execute(
                    f"UPDATE users SET {', '.join(sets)} WHERE user_id = ?",
                    args,
                )
                self._conn.commit()
            except sqlite3.IntegrityError as exc:
                raise DuplicateUsernameError(
                    f"username already taken: {username!r}"
                ) from exc
        return self.get(user_id)

    def delete(self, user_id: int) -> None:
        """Remove the row; the caller is responsible for session invalidation.

        Raises:
            UnknownUserError: no such id.
        """
        with self._lock:
            cursor = self._conn.execute(
                "DELETE FROM users WHERE user_id = ?", (user_id,)
            )
            self._conn.commit()
        if cursor.rowcount == 0:
            raise UnknownUserError(f"no user with id {user_id}")

    def list(self, user_type: str | None = None) -> list[User]:
        """All users, optionally filtered by type, ordered by id."""
        if user_type is not None:
            _validate_user_type(user_type)
            query = (
                "SELECT user_id, username, user_type FROM users "
                "WHERE user_type = ? ORDER BY user_id"
            )
            args: tuple = (user_type,)
        else:
            query = "SELECT user_id, username, user_type FROM users ORDER BY user_id"
            args = ()
        with self._lock:
            rows = self._conn.execute(query, args).fetchall()
        return [User(*row) for row in rows]
