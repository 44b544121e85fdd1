"""Content-addressed off-chain document store.

Documents live under a local directory, fanned out two levels by hash
prefix (``ab/cd/<sha256>``). The address of a document is the SHA-256 of
its bytes, which makes storage idempotent and every fetch verifiable: a
ledger transaction references the hash, only the hash goes on-chain.
"""

from __future__ import annotations

import os
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path

from .canonical import sha256_hex
from .errors import NotFound, TooLarge

DEFAULT_MAX_BYTES = 10 * 1024 * 1024


@dataclass(frozen=True)
class DocumentRecord:
    content_hash: str
    size_bytes: int
    stored_at: int

    def to_dict(self) -> dict:
        return {
            "content_hash": self.content_hash,
            "size_bytes": self.size_bytes,
            "stored_at": self.stored_at,
        }


class DocumentStore:
    def __init__(self, root: str | Path, max_bytes: int = DEFAULT_MAX_BYTES):
        self.root = Path(root)
        self.max_bytes = max_bytes
        self.root.mkdir(parents=True, exist_ok=True)

    def _path_for(self, content_hash: str) -> Path:
        return self.root / content_hash[:2] / content_hash[2:4] / content_hash

    def put(self, data: bytes) -> DocumentRecord:
        if len(data) > self.max_bytes:
            raise TooLarge(f"document is {len(data)} bytes, limit {self.max_bytes}")
        content_hash = sha256_hex(data)
        path = self._path_for(content_hash)
        if not path.exists():
            path.parent.mkdir(parents=True, exist_ok=True)
            # Private tmp file per writer; concurrent puts of the same
            # content race harmlessly to an identical final file.
            fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
            with os.fdopen(fd, "wb") as fh:
                fh.write(data)
            os.replace(tmp, path)
        return DocumentRecord(
            content_hash=content_hash, size_bytes=len(data), stored_at=int(time.time())
        )

    def get(self, content_hash: str) -> bytes:
        path = self._path_for(content_hash)
        if not path.exists():
            raise NotFound(f"no document {content_hash}")
        data = path.read_bytes()
        if sha256_hex(data) != content_hash:
            raise NotFound(f"document {content_hash} failed its hash check")
        return data

    def has(self, content_hash: str) -> bool:
        return self._path_for(content_hash).exists()
