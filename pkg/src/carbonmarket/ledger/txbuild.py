"""Building, signing and hashing transactions.

A signed transaction is a plain dict with six fields: tx_type, sender,
nonce, payload, timestamp, signature. The signature covers the canonical
serialization of the other five fields; the transaction hash covers all
six (Ed25519 is deterministic, so the hash is stable for a given signer
and content).
"""

from __future__ import annotations

from ..canonical import canonical_bytes, hash_value
from ..keys import KeyPair, verify_signature

TX_FIELDS = ("tx_type", "sender", "nonce", "payload", "timestamp", "signature")


def signing_bytes(tx: dict) -> bytes:
    body = {k: tx[k] for k in TX_FIELDS if k != "signature"}
    return canonical_bytes(body)


def tx_hash(tx: dict) -> str:
    return hash_value({k: tx[k] for k in TX_FIELDS})


def build_tx(key: KeyPair, tx_type: str, nonce: int, payload: dict, timestamp: int) -> dict:
    tx = {
        "tx_type": tx_type,
        "sender": key.address,
        "nonce": nonce,
        "payload": payload,
        "timestamp": timestamp,
    }
    tx["signature"] = key.sign(signing_bytes(tx))
    return tx


def check_signature(tx: dict, public_key_hex: str) -> bool:
    return verify_signature(public_key_hex, signing_bytes(tx), tx["signature"])
