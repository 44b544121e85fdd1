"""Hash-chained block log: sealing, persistence, replay, verification.

The log is one file of JSON lines, one canonical-serialized block per line,
append-only, genesis at line 1. A block's hash covers its height, parent
hash, timestamp and the full (transaction, receipt) list, so any single-bit
change to a persisted block either breaks JSON parsing or breaks the hash
chain; ``verify_chain`` additionally re-verifies every signature and
replays every transaction from genesis, requiring the recomputed receipts
to match the recorded ones bit for bit.

Crash recovery: a torn final line (the only damage an interrupted append
can cause) is truncated on load. Anything else is treated as tampering.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from ..canonical import canonical_dumps, hash_value
from .config import LedgerConfig
from .state import LedgerState, apply_transaction
from .txbuild import tx_hash

GENESIS_PREV_HASH = "0" * 64
_RECEIPT_KEYS = ("tx_hash", "status", "reason", "message", "gas_used", "fee_cents")


def make_block(height: int, prev_hash: str, timestamp: int, txs: list[dict]) -> dict:
    """txs entries are {"tx": <signed tx>, "receipt": <receipt>}."""
    body = {"height": height, "prev_hash": prev_hash, "timestamp": timestamp, "txs": txs}
    return {**body, "block_hash": hash_value(body)}


def block_body_hash(block: dict) -> str:
    body = {k: block[k] for k in ("height", "prev_hash", "timestamp", "txs")}
    return hash_value(body)


def make_genesis(timestamp: int = 0) -> dict:
    return make_block(0, GENESIS_PREV_HASH, timestamp, [])


@dataclass
class AuditReport:
    ok: bool
    failures: list = field(default_factory=list)  # (height, reason) pairs

    def to_dict(self) -> dict:
        return {"ok": self.ok, "failures": [[h, r] for h, r in self.failures]}


class BlockLog:
    """Append-only file of canonical block lines."""

    def __init__(self, path: str | Path):
        self.path = Path(path)

    def exists(self) -> bool:
        return self.path.exists()

    def append(self, block: dict) -> None:
        line = canonical_dumps(block) + "\n"
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(line)
            fh.flush()
            os.fsync(fh.fileno())

    def read_lines(self) -> list[str]:
        if not self.path.exists():
            return []
        with open(self.path, encoding="utf-8") as fh:
            return [line for line in fh.read().split("\n") if line]

    def recover_torn_tail(self) -> bool:
        """Drop a torn final line; returns True if the file was truncated.

        A clean log ends with a newline. An interrupted append leaves a
        trailing fragment with no newline; no proper prefix of a canonical
        JSON object parses, so a parseable tail is a complete block that
        only lost its newline.
        """
        if not self.path.exists():
            return False
        raw = self.path.read_bytes()
        if not raw or raw.endswith(b"\n"):
            return False
        cut = raw.rfind(b"\n") + 1
        tail = raw[cut:]
        try:
            json.loads(tail.decode("utf-8"))
        except (ValueError, UnicodeDecodeError):
            self.path.write_bytes(raw[:cut])
            return True
        with open(self.path, "ab") as fh:
            fh.write(b"\n")
        return False


def replay(blocks: list[dict], config: LedgerConfig) -> tuple[LedgerState, list]:
    """Re-apply every recorded transaction; returns (state, failures).

    A failure is recorded when a recomputed receipt differs from the stored
    one - the recorded history does not match what the state machine would
    actually have done.
    """
    state = LedgerState()
    failures = []
    for block in blocks:
        for entry in block["txs"]:
            stored = entry["receipt"]
            state, recomputed = apply_transaction(state, entry["tx"], config)
            if _receipt_view(recomputed) != _receipt_view(stored):
                failures.append((block["height"], f"ReceiptMismatch: tx {stored.get('tx_hash', '?')[:16]}"))
    return state, failures


def _receipt_view(receipt: dict) -> tuple:
    return tuple(receipt.get(k) for k in _RECEIPT_KEYS)


def verify_chain(lines: list[str], config: LedgerConfig | None = None) -> AuditReport:
    """Full audit of a persisted block log.

    ok when every line parses, every block hash recomputes, heights are
    contiguous from 0, parent hashes link, and a genesis-to-tip replay
    reproduces every recorded receipt (which re-verifies every signature
    and re-runs every ownership and balance check on the way).
    """
    config = config or LedgerConfig()
    failures: list = []
    blocks: list[dict] = []
    for i, line in enumerate(lines):
        try:
            block = json.loads(line)
        except ValueError:
            failures.append((i, "ParseError: line is not valid JSON"))
            continue
        if not isinstance(block, dict) or not {"height", "prev_hash", "timestamp", "txs", "block_hash"} <= set(block):
            failures.append((i, "ParseError: line is not a block"))
            continue
        blocks.append(block)

    if not lines:
        failures.append((0, "EmptyLog: no genesis block"))
        return AuditReport(ok=False, failures=failures)

    prev_hash = GENESIS_PREV_HASH
    expected_height = 0
    for block in blocks:
        height = block["height"]
        if height != expected_height:
            failures.append((height, f"HeightGap: expected {expected_height}"))
            expected_height = height  # keep auditing from what is recorded
        if block["prev_hash"] != prev_hash:
            failures.append((height, "PrevHashMismatch"))
        try:
            recomputed = block_body_hash(block)
        except (TypeError, ValueError):
            failures.append((height, "HashError: block body is not canonically serializable"))
            recomputed = None
        if recomputed is not None and recomputed != block["block_hash"]:
            failures.append((height, "HashMismatch"))
        for entry in block["txs"]:
            if not isinstance(entry, dict) or "tx" not in entry or "receipt" not in entry:
                failures.append((height, "ParseError: malformed tx entry"))
                continue
            try:
                recorded_hash = entry["receipt"].get("tx_hash")
                if tx_hash(entry["tx"]) != recorded_hash:
                    failures.append((height, "TxHashMismatch"))
            except (TypeError, KeyError, AttributeError, ValueError):
                failures.append((height, "ParseError: malformed transaction"))
        prev_hash = block.get("block_hash", prev_hash)
        expected_height += 1

    if not failures:
        _, replay_failures = replay(blocks, config)
        failures.extend(replay_failures)

    return AuditReport(ok=not failures, failures=failures)


def snapshot_document(state: LedgerState, height: int, block_hash: str) -> str:
    doc = state.to_snapshot()
    doc["counters"]["height"] = height
    doc["counters"]["last_block_hash"] = block_hash
    return canonical_dumps(doc)


def write_snapshot(path: str | Path, document: str) -> None:
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(document)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)
