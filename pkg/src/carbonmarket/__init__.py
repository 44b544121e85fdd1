"""Deterministic carbon-credit marketplace.

A self-contained trading platform for 1 tCO2e carbon credits: an
append-only hash-chained ledger with role-gated token/listing/refund
semantics, a CBAM/CCA compliance engine, an HTTP trading service with an
off-chain document store, a reproducible treatment-vs-control transaction
experiment, and Kano-model survey analytics.
"""

from .canonical import canonical_bytes, canonical_dumps, hash_value, sha256_hex
from .errors import DomainError
from .keys import KeyPair, address_for, verify_signature

__version__ = "0.1.0"

__all__ = [
    "DomainError",
    "KeyPair",
    "address_for",
    "canonical_bytes",
    "canonical_dumps",
    "hash_value",
    "sha256_hex",
    "verify_signature",
    "__version__",
]
