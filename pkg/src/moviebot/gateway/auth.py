"""Credential storage with salted, iterated password hashing."""

from __future__ import annotations

import hashlib
import hmac
import json
import os
import secrets
import threading
from dataclasses import dataclass

STORE_VERSION = 1
HASH_NAME = "pbkdf2-hmac-sha256"
ITERATIONS = 100_000  # floor; recorded in the store header
SALT_BYTES = 16  # 128-bit salt
DIGEST_BYTES = 32


class BadCredentialsError(Exception):
    pass


class UnknownUserError(Exception):
    pass


class DuplicateUserError(Exception):
    pass


@dataclass(frozen=True)
class AuthRecord:
    user_id: str
    salt: bytes
    digest: bytes
    iterations: int

    def to_record(self) -> dict:
        return {
            "user_id": self.user_id,
            "salt": self.salt.hex(),
            "digest": self.digest.hex(),
            "iterations": self.iterations,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "AuthRecord":
        return cls(
            user_id=rec["user_id"],
            salt=bytes.fromhex(rec["salt"]),
            digest=bytes.fromhex(rec["digest"]),
            iterations=rec["iterations"],
        )


def _derive(password: str, salt: bytes, iterations: int) -> bytes:
    return hashlib.pbkdf2_hmac(
        "sha256", password.encode("utf-8"), salt, iterations, dklen=DIGEST_BYTES
    )


class AuthStore:
    """JSON file of auth records; plaintext passwords are never written."""

    def __init__(self, path):
        self.path = str(path)
        self._lock = threading.Lock()
        self._records: dict[str, AuthRecord] = {}
        if os.path.exists(self.path):
            self._load()
        else:
            self._save()

    def _load(self) -> None:
        with open(self.path, encoding="utf-8") as fh:
            data = json.load(fh)
        self._records = {
            rec["user_id"]: AuthRecord.from_record(rec) for rec in data["records"]
        }

    def _save(self) -> None:
        data = {
            "version": STORE_VERSION,
            "hash": HASH_NAME,
            "iterations": ITERATIONS,
            "records": [rec.to_record() for rec in self._records.values()],
        }
        with open(self.path, "w", encoding="utf-8") as fh:
            json.dump(data, fh)

    def register(self, user_id: str, password: str) -> None:
        if not user_id or not password:
            raise ValueError("user id and password must be non-empty")
        with self._lock:
            if user_id in self._records:
                raise DuplicateUserError(f"user {user_id!r} already exists")
            salt = secrets.token_bytes(SALT_BYTES)
            self._records[user_id] = AuthRecord(
                user_id, salt, _derive(password, salt, ITERATIONS), ITERATIONS
            )
            self._save()

    def verify(self, user_id: str, password: str) -> None:
        with self._lock:
            rec = self._records.get(user_id)
        if rec is None:
            raise UnknownUserError(f"unknown user {user_id!r}")
        candidate = _derive(password, rec.salt, rec.iterations)
        if not hmac.compare_digest(candidate, rec.digest):
            raise BadCredentialsError("wrong password")

    def known_users(self) -> list[str]:
        with self._lock:
            return sorted(self._records)
