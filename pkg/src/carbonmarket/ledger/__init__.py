from .chain import (
    GENESIS_PREV_HASH,
    AuditReport,
    BlockLog,
    block_body_hash,
    make_block,
    make_genesis,
    replay,
    snapshot_document,
    verify_chain,
    write_snapshot,
)
from .config import DEFAULT_GAS_TABLE, TX_TYPES, LedgerConfig, round_half_up
from .state import (
    Account,
    CreditToken,
    LedgerState,
    Listing,
    accrue_reward,
    apply_transaction,
)
from .txbuild import build_tx, check_signature, signing_bytes, tx_hash

__all__ = [
    "Account",
    "AuditReport",
    "BlockLog",
    "CreditToken",
    "DEFAULT_GAS_TABLE",
    "GENESIS_PREV_HASH",
    "LedgerConfig",
    "LedgerState",
    "Listing",
    "TX_TYPES",
    "accrue_reward",
    "apply_transaction",
    "block_body_hash",
    "build_tx",
    "check_signature",
    "make_block",
    "make_genesis",
    "replay",
    "round_half_up",
    "signing_bytes",
    "snapshot_document",
    "tx_hash",
    "verify_chain",
    "write_snapshot",
]
