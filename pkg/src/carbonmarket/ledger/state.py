"""The ledger state machine.

``apply_transaction`` is the single entry point for state change. It
validates a signed transaction completely before touching anything, so a
rejected transaction provably leaves the state untouched, and an accepted
one applies exactly its documented effects plus a sender nonce bump. Given
the same state and transaction it always produces the same receipt: there
is no clock, no randomness, and no I/O in here.

Roles gate operations (the permission table below), statuses gate token
transitions, and every money movement happens in integer cents. Two
conservation laws hold after every accepted transaction and are asserted
by the test suite:

* token conservation - every minted token is in exactly one of
  Active/Listed/Retired/Cancelled;
* money conservation - sum of balances plus collected fees equals the sum
  of deposits.

Fees: every accepted receipt records ``fee = round(gas * gas_price)``, but
only Buy debits it (buyer pays price + fee; the fee goes to the platform's
collected-fees bucket). Charging a fee on RegisterAccount would make a
fresh, zero-balance account impossible to create.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..errors import TxRejected
from ..keys import address_for
from .config import TX_TYPES, LedgerConfig
from .txbuild import check_signature, tx_hash

ROLES = ("Issuer", "Trader", "Auditor", "Admin")
TOKEN_STATUSES = ("Active", "Listed", "Retired", "Cancelled")
LISTING_STATUSES = ("Open", "Filled", "Cancelled")
REFUND_REASONS = ("Unutilized", "Invalidated")

# Transaction types that require a specific role; everything else only
# requires a registered account.
PERMISSIONS = {
    "Mint": ("Issuer",),
    "Refund": ("Auditor", "Admin"),
}

MAX_MINT_COUNT = 10_000

_HEX64 = re.compile(r"^[0-9a-f]{64}$")
_HEX128 = re.compile(r"^[0-9a-f]{128}$")


def is_address(value) -> bool:
    return isinstance(value, str) and bool(_HEX64.match(value))


@dataclass
class Account:
    address: str
    role: str
    public_key: str
    balance_cents: int = 0
    reward_points: int = 0
    nonce: int = 0

    def to_dict(self) -> dict:
        return {
            "address": self.address,
            "role": self.role,
            "public_key": self.public_key,
            "balance_cents": self.balance_cents,
            "reward_points": self.reward_points,
            "nonce": self.nonce,
        }


@dataclass
class CreditToken:
    token_id: int
    project_id: str
    vintage_year: int
    status: str
    owner: str
    quantity_tco2e: int = 1
    last_price_cents: int | None = None  # most recent on-platform purchase
    last_seller: str | None = None

    def to_dict(self) -> dict:
        return {
            "token_id": self.token_id,
            "project_id": self.project_id,
            "vintage_year": self.vintage_year,
            "status": self.status,
            "owner": self.owner,
            "quantity_tco2e": self.quantity_tco2e,
            "last_price_cents": self.last_price_cents,
            "last_seller": self.last_seller,
        }


@dataclass
class Listing:
    listing_id: int
    token_id: int
    seller: str
    price_cents: int
    status: str
    created_at: int

    def to_dict(self) -> dict:
        return {
            "listing_id": self.listing_id,
            "token_id": self.token_id,
            "seller": self.seller,
            "price_cents": self.price_cents,
            "status": self.status,
            "created_at": self.created_at,
        }


@dataclass
class LedgerState:
    accounts: dict = field(default_factory=dict)   # address -> Account
    tokens: dict = field(default_factory=dict)     # token_id -> CreditToken
    listings: dict = field(default_factory=dict)   # listing_id -> Listing
    next_token_id: int = 1
    next_listing_id: int = 1
    accepted_buys: int = 0
    fees_collected_cents: int = 0
    deposits_total_cents: int = 0
    # Derived index for the one-open-listing-per-token invariant; not part
    # of the snapshot.
    open_listing_by_token: dict = field(default_factory=dict)

    def counters(self) -> dict:
        return {
            "next_token_id": self.next_token_id,
            "next_listing_id": self.next_listing_id,
            "accepted_buys": self.accepted_buys,
            "fees_collected_cents": self.fees_collected_cents,
            "deposits_total_cents": self.deposits_total_cents,
        }

    def to_snapshot(self) -> dict:
        return {
            "accounts": {a: acct.to_dict() for a, acct in self.accounts.items()},
            "tokens": {str(i): t.to_dict() for i, t in self.tokens.items()},
            "listings": {str(i): l.to_dict() for i, l in self.listings.items()},
            "counters": self.counters(),
        }


def accrue_reward(price_cents: int, buy_ordinal: int, config: LedgerConfig) -> int:
    """Points for the buyer of the ``buy_ordinal``-th accepted Buy (1-based).

    Early-participation window: the first ``reward_window`` Buys platform-wide
    earn ``floor(price_cents * reward_rate)`` points, later ones earn nothing.
    Exact rational arithmetic; floor(2900 * 0.05) must be 145, not 144.
    """
    if buy_ordinal > config.reward_window:
        return 0
    return int(price_cents * config.reward_rate)


def _require(cond: bool, code: str, message: str = "") -> None:
    if not cond:
        raise TxRejected(code, message)


def _payload_int(payload: dict, key: str) -> int:
    value = payload.get(key)
    _require(isinstance(value, int) and not isinstance(value, bool), "MalformedPayload", f"{key} must be an integer")
    return value


def _payload_str(payload: dict, key: str) -> str:
    value = payload.get(key)
    _require(isinstance(value, str), "MalformedPayload", f"{key} must be a string")
    return value


def _check_structure(tx: dict) -> None:
    _require(isinstance(tx, dict), "MalformedPayload", "transaction must be an object")
    for name in ("tx_type", "sender", "nonce", "payload", "timestamp", "signature"):
        _require(name in tx, "MalformedPayload", f"missing field {name}")
    _require(tx["tx_type"] in TX_TYPES, "MalformedPayload", f"unknown tx_type {tx['tx_type']!r}")
    _require(is_address(tx["sender"]), "MalformedPayload", "sender must be a 64-char lowercase hex address")
    _require(isinstance(tx["nonce"], int) and tx["nonce"] >= 0, "MalformedPayload", "nonce must be a non-negative integer")
    _require(isinstance(tx["timestamp"], int) and tx["timestamp"] >= 0, "MalformedPayload", "timestamp must be epoch seconds")
    _require(isinstance(tx["payload"], dict), "MalformedPayload", "payload must be an object")
    sig = tx["signature"]
    _require(isinstance(sig, str) and bool(_HEX128.match(sig)), "MalformedPayload", "signature must be 128 hex chars")


def apply_transaction(state: LedgerState, tx: dict, config: LedgerConfig) -> tuple[LedgerState, dict]:
    """Validate and apply one signed transaction; returns (state, receipt).

    The returned state is the input object, updated in place only when the
    receipt is Accepted. Writers are serialized by contract (one total
    order), so there is never a concurrent reader of a half-applied state.
    """
    try:
        receipt = _apply(state, tx, config)
    except TxRejected as rej:
        receipt = {
            "tx_hash": tx_hash(tx) if _hashable(tx) else "0" * 64,
            "status": "Rejected",
            "reason": rej.code,
            "message": rej.message,
            "gas_used": 0,
            "fee_cents": 0,
        }
    return state, receipt


def _hashable(tx) -> bool:
    try:
        tx_hash(tx)
        return True
    except Exception:
        return False


def _apply(state: LedgerState, tx: dict, config: LedgerConfig) -> dict:
    _check_structure(tx)
    tx_type = tx["tx_type"]
    sender = tx["sender"]
    payload = tx["payload"]

    if tx_type == "RegisterAccount":
        _require(sender not in state.accounts, "AccountExists", f"{sender} is already registered")
        public_key = _payload_str(payload, "public_key")
        role = _payload_str(payload, "role")
        _require(role in ROLES, "MalformedPayload", f"role must be one of {ROLES}")
        _require(bool(_HEX64.match(public_key)), "MalformedPayload", "public_key must be 64 hex chars")
        _require(
            address_for(public_key) == sender,
            "BadSignature",
            "sender address does not match the registered public key",
        )
        _require(check_signature(tx, public_key), "BadSignature")
        _require(tx["nonce"] == 0, "BadNonce", "first transaction must use nonce 0")
        account = Account(address=sender, role=role, public_key=public_key, nonce=0)
    else:
        account = state.accounts.get(sender)
        _require(account is not None, "UnknownAccount", f"{sender} is not registered")
        _require(check_signature(tx, account.public_key), "BadSignature")
        _require(
            tx["nonce"] == account.nonce,
            "BadNonce",
            f"expected nonce {account.nonce}, got {tx['nonce']}",
        )

    allowed = PERMISSIONS.get(tx_type)
    if allowed is not None:
        _require(account.role in allowed, "Unauthorized", f"{tx_type} requires role in {allowed}")

    gas_used = config.gas_for(tx_type)
    handler = _HANDLERS[tx_type]
    extra = handler(state, account, payload, tx, config)
    if extra is not None:
        gas_used = extra

    # Effects below this line are unconditional: every check has passed.
    if tx_type == "RegisterAccount":
        state.accounts[sender] = account
    account.nonce += 1
    fee_cents = config.fee_for(gas_used)
    return {
        "tx_hash": tx_hash(tx),
        "status": "Accepted",
        "reason": None,
        "message": None,
        "gas_used": gas_used,
        "fee_cents": fee_cents,
    }


def _handle_register(state, account, payload, tx, config):
    return None


def _handle_deposit(state, account, payload, tx, config):
    amount = _payload_int(payload, "amount_cents")
    _require(amount >= 1, "AmountOutOfRange", "deposit must be at least 1 cent")
    account.balance_cents += amount
    state.deposits_total_cents += amount
    return None


def _handle_mint(state, account, payload, tx, config):
    project_id = _payload_str(payload, "project_id")
    vintage_year = _payload_int(payload, "vintage_year")
    count = _payload_int(payload, "count")
    _require(1 <= count <= MAX_MINT_COUNT, "CountOutOfRange", f"count must be in 1..{MAX_MINT_COUNT}")
    for _ in range(count):
        token_id = state.next_token_id
        state.next_token_id += 1
        state.tokens[token_id] = CreditToken(
            token_id=token_id,
            project_id=project_id,
            vintage_year=vintage_year,
            status="Active",
            owner=account.address,
        )
    return config.gas_for("Mint", count)


def _handle_list(state, account, payload, tx, config):
    token_id = _payload_int(payload, "token_id")
    price_cents = _payload_int(payload, "price_cents")
    token = state.tokens.get(token_id)
    _require(token is not None, "UnknownToken", f"token {token_id} does not exist")
    _require(token.owner == account.address, "NotOwner", "only the owner can list a token")
    _require(token.status == "Active", "TokenNotActive", f"token is {token.status}")
    _require(price_cents >= 1, "PriceOutOfRange", "price must be at least 1 cent")
    listing_id = state.next_listing_id
    state.next_listing_id += 1
    state.listings[listing_id] = Listing(
        listing_id=listing_id,
        token_id=token_id,
        seller=account.address,
        price_cents=price_cents,
        status="Open",
        created_at=tx["timestamp"],
    )
    token.status = "Listed"
    state.open_listing_by_token[token_id] = listing_id
    return None


def _handle_buy(state, account, payload, tx, config):
    listing_id = _payload_int(payload, "listing_id")
    listing = state.listings.get(listing_id)
    _require(listing is not None, "UnknownListing", f"listing {listing_id} does not exist")
    _require(listing.status == "Open", "ListingNotOpen", f"listing is {listing.status}")
    _require(listing.seller != account.address, "SelfTrade", "buyer and seller are the same account")
    fee_cents = config.fee_for(config.gas_for("Buy"))
    total = listing.price_cents + fee_cents
    _require(
        account.balance_cents >= total,
        "InsufficientFunds",
        f"balance {account.balance_cents} < price+fee {total}",
    )

    token = state.tokens[listing.token_id]
    seller = state.accounts[listing.seller]
    account.balance_cents -= total
    seller.balance_cents += listing.price_cents
    state.fees_collected_cents += fee_cents
    listing.status = "Filled"
    state.open_listing_by_token.pop(listing.token_id, None)
    token.status = "Active"
    token.owner = account.address
    token.last_price_cents = listing.price_cents
    token.last_seller = listing.seller
    state.accepted_buys += 1
    account.reward_points += accrue_reward(listing.price_cents, state.accepted_buys, config)
    return None


def _handle_cancel_listing(state, account, payload, tx, config):
    listing_id = _payload_int(payload, "listing_id")
    listing = state.listings.get(listing_id)
    _require(listing is not None, "UnknownListing", f"listing {listing_id} does not exist")
    _require(listing.status == "Open", "ListingNotOpen", f"listing is {listing.status}")
    _require(listing.seller == account.address, "NotOwner", "only the seller can cancel a listing")
    listing.status = "Cancelled"
    state.open_listing_by_token.pop(listing.token_id, None)
    state.tokens[listing.token_id].status = "Active"
    return None


def _handle_retire(state, account, payload, tx, config):
    token_id = _payload_int(payload, "token_id")
    token = state.tokens.get(token_id)
    _require(token is not None, "UnknownToken", f"token {token_id} does not exist")
    _require(token.owner == account.address, "NotOwner", "only the owner can retire a token")
    _require(token.status == "Active", "TokenNotActive", f"token is {token.status}")
    token.status = "Retired"
    return None


def _handle_refund(state, account, payload, tx, config):
    token_id = _payload_int(payload, "token_id")
    reason = _payload_str(payload, "reason")
    _require(reason in REFUND_REASONS, "MalformedPayload", f"reason must be one of {REFUND_REASONS}")
    token = state.tokens.get(token_id)
    _require(token is not None, "UnknownToken", f"token {token_id} does not exist")
    _require(token.status != "Retired", "TokenRetired", "retired tokens cannot be refunded")
    _require(token.status != "Cancelled", "TokenNotActive", "token is already cancelled")

    # Reverse the most recent on-platform purchase, if any. Seller-funded:
    # without the funds the refund is rejected rather than creating debt.
    if token.last_price_cents is not None:
        seller = state.accounts[token.last_seller]
        buyer = state.accounts[token.owner]
        _require(
            seller.balance_cents >= token.last_price_cents,
            "InsufficientFunds",
            "seller cannot fund the refund",
        )
        seller.balance_cents -= token.last_price_cents
        buyer.balance_cents += token.last_price_cents
        token.owner = token.last_seller
        token.last_price_cents = None
        token.last_seller = None

    open_listing = state.open_listing_by_token.pop(token_id, None)
    if open_listing is not None:
        state.listings[open_listing].status = "Cancelled"
    token.status = "Cancelled"
    return None


def _handle_attach_document(state, account, payload, tx, config):
    content_hash = _payload_str(payload, "content_hash")
    _require(bool(_HEX64.match(content_hash)), "MalformedPayload", "content_hash must be 64 hex chars")
    return None


_HANDLERS = {
    "RegisterAccount": _handle_register,
    "Deposit": _handle_deposit,
    "Mint": _handle_mint,
    "List": _handle_list,
    "Buy": _handle_buy,
    "CancelListing": _handle_cancel_listing,
    "Retire": _handle_retire,
    "Refund": _handle_refund,
    "AttachDocument": _handle_attach_document,
}
