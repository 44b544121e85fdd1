"""Canonical JSON serialization and hashing.

Every byte string that gets hashed or signed in this package comes from a
single encoder: UTF-8 JSON with lexicographically sorted keys, no
insignificant whitespace, and integers in plain decimal. One encoding per
value means one hash per value, on any platform.

Ledger content is integer/string only; NaN and infinity are rejected so a
canonical document can always be re-parsed to an equal value.
"""

from __future__ import annotations

import hashlib
import json


def canonical_dumps(value) -> str:
    return json.dumps(
        value,
        sort_keys=True,
        separators=(",", ":"),
        ensure_ascii=False,
        allow_nan=False,
    )


def canonical_bytes(value) -> bytes:
    return canonical_dumps(value).encode("utf-8")


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def hash_value(value) -> str:
    """SHA-256 of the canonical serialization, as 64 lowercase hex chars."""
    return sha256_hex(canonical_bytes(value))
