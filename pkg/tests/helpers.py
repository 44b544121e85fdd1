"""Shared test machinery: wallets, a ledger harness, and invariant oracles.

The oracles here are deliberately independent of the code under test: they
recount and re-add from raw state instead of reusing ledger bookkeeping.
"""

from __future__ import annotations

import itertools

from carbonmarket.keys import KeyPair
from carbonmarket.ledger import LedgerConfig, LedgerState, apply_transaction, build_tx

# Key generation is comparatively expensive; reuse a process-wide pool for
# tests that need many actors.
_KEY_POOL: list[KeyPair] = []


def pooled_keys(n: int) -> list[KeyPair]:
    while len(_KEY_POOL) < n:
        _KEY_POOL.append(KeyPair.generate())
    return _KEY_POOL[:n]


class Wallet:
    """A key pair plus client-side nonce tracking."""

    _ids = itertools.count()

    def __init__(self, key: KeyPair | None = None):
        self.key = key or KeyPair.generate()
        self.nonce = 0

    @property
    def address(self) -> str:
        return self.key.address


class Harness:
    """In-memory ledger with convenience senders; no blocks, just state."""

    def __init__(self, config: LedgerConfig | None = None):
        self.config = config or LedgerConfig()
        self.state = LedgerState()
        self.log: list[tuple[dict, dict]] = []
        self.clock = 1_700_000_000

    def send(self, wallet: Wallet, tx_type: str, payload: dict, nonce: int | None = None) -> dict:
        use_nonce = wallet.nonce if nonce is None else nonce
        tx = build_tx(wallet.key, tx_type, use_nonce, payload, self.clock)
        self.clock += 1
        self.state, receipt = apply_transaction(self.state, tx, self.config)
        self.log.append((tx, receipt))
        if receipt["status"] == "Accepted" and nonce is None:
            wallet.nonce += 1
        return receipt

    # -- convenience wrappers ------------------------------------------

    def register(self, wallet: Wallet, role: str = "Trader") -> dict:
        return self.send(wallet, "RegisterAccount", {"public_key": wallet.key.public_key, "role": role})

    def deposit(self, wallet: Wallet, amount_cents: int) -> dict:
        return self.send(wallet, "Deposit", {"amount_cents": amount_cents})

    def mint(self, wallet: Wallet, count: int, project_id: str = "proj", vintage_year: int = 2024) -> dict:
        return self.send(wallet, "Mint", {"project_id": project_id, "vintage_year": vintage_year, "count": count})

    def list_token(self, wallet: Wallet, token_id: int, price_cents: int) -> dict:
        return self.send(wallet, "List", {"token_id": token_id, "price_cents": price_cents})

    def buy(self, wallet: Wallet, listing_id: int) -> dict:
        return self.send(wallet, "Buy", {"listing_id": listing_id})

    def cancel(self, wallet: Wallet, listing_id: int) -> dict:
        return self.send(wallet, "CancelListing", {"listing_id": listing_id})

    def retire(self, wallet: Wallet, token_id: int) -> dict:
        return self.send(wallet, "Retire", {"token_id": token_id})

    def refund(self, wallet: Wallet, token_id: int, reason: str = "Invalidated") -> dict:
        return self.send(wallet, "Refund", {"token_id": token_id, "reason": reason})


def assert_money_conserved(state: LedgerState) -> None:
    """Independent oracle: re-add every balance from scratch."""
    total = sum(acct.balance_cents for acct in state.accounts.values())
    assert total + state.fees_collected_cents == state.deposits_total_cents, (
        f"money leak: balances {total} + fees {state.fees_collected_cents} "
        f"!= deposits {state.deposits_total_cents}"
    )
    assert all(acct.balance_cents >= 0 for acct in state.accounts.values())


def assert_tokens_conserved(state: LedgerState) -> None:
    """Independent oracle: statuses partition the minted set."""
    minted = state.next_token_id - 1
    by_status = {"Active": 0, "Listed": 0, "Retired": 0, "Cancelled": 0}
    for token in state.tokens.values():
        by_status[token.status] += 1
        assert token.quantity_tco2e == 1
        assert token.owner in state.accounts
    assert sum(by_status.values()) == minted == len(state.tokens)


def assert_nonces_monotonic(log: list[tuple[dict, dict]]) -> None:
    seen: dict[str, int] = {}
    for tx, receipt in log:
        if receipt["status"] != "Accepted":
            continue
        sender = tx["sender"]
        expected = seen.get(sender, 0)
        assert tx["nonce"] == expected, f"nonce gap for {sender[:8]}: {tx['nonce']} != {expected}"
        seen[sender] = expected + 1
