"""Ed25519 key pairs, addresses, and key files.

An address is the SHA-256 of the raw 32-byte public key, rendered as 64
lowercase hex characters. Key files are JSON with hex-encoded key material
and are written with owner-only permissions; the service never sees a
private key, signing always happens on the client side.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives.asymmetric import ed25519

from .canonical import sha256_hex


def address_for(public_key_hex: str) -> str:
    return sha256_hex(bytes.fromhex(public_key_hex))


@dataclass
class KeyPair:
    address: str
    public_key: str
    private_key: str

    @classmethod
    def generate(cls) -> "KeyPair":
        priv = ed25519.Ed25519PrivateKey.generate()
        return cls._from_private(priv)

    @classmethod
    def from_private_hex(cls, private_key_hex: str) -> "KeyPair":
        priv = ed25519.Ed25519PrivateKey.from_private_bytes(bytes.fromhex(private_key_hex))
        return cls._from_private(priv)

    @classmethod
    def _from_private(cls, priv: ed25519.Ed25519PrivateKey) -> "KeyPair":
        priv_raw = priv.private_bytes_raw()
        pub_raw = priv.public_key().public_bytes_raw()
        return cls(
            address=sha256_hex(pub_raw),
            public_key=pub_raw.hex(),
            private_key=priv_raw.hex(),
        )

    def sign(self, data: bytes) -> str:
        priv = ed25519.Ed25519PrivateKey.from_private_bytes(bytes.fromhex(self.private_key))
        return priv.sign(data).hex()

    def save(self, path: str | Path) -> None:
        path = Path(path)
        doc = {
            "address": self.address,
            "public_key": self.public_key,
            "private_key": self.private_key,
        }
        fd = os.open(path, os.O_WRONLY | os.O_CREAT | os.O_TRUNC, 0o600)
        with os.fdopen(fd, "w") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")

    @classmethod
    def load(cls, path: str | Path) -> "KeyPair":
        with open(path) as fh:
            doc = json.load(fh)
        kp = cls(
            address=doc["address"],
            public_key=doc["public_key"],
            private_key=doc["private_key"],
        )
        if kp.address != address_for(kp.public_key):
            raise ValueError(f"key file {path}: address does not match public key")
        return kp


def verify_signature(public_key_hex: str, data: bytes, signature_hex: str) -> bool:
    try:
        pub = ed25519.Ed25519PublicKey.from_public_bytes(bytes.fromhex(public_key_hex))
        pub.verify(bytes.fromhex(signature_hex), data)
        return True
    except (InvalidSignature, ValueError):
        return False
