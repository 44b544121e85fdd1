"""State machine behavior: one test per documented rule or edge."""

from fractions import Fraction

import pytest

from carbonmarket.keys import KeyPair
from carbonmarket.ledger import (
    LedgerConfig,
    accrue_reward,
    apply_transaction,
    build_tx,
)
from helpers import Harness, Wallet, assert_money_conserved, assert_tokens_conserved


# -- registration, signatures, nonces ----------------------------------


def test_register_and_reregister(harness):
    w = Wallet()
    assert harness.register(w)["status"] == "Accepted"
    again = harness.send(w, "RegisterAccount", {"public_key": w.key.public_key, "role": "Trader"}, nonce=1)
    assert again["reason"] == "AccountExists"


def test_register_wrong_address_rejected(harness):
    w = Wallet()
    other = KeyPair.generate()
    receipt = harness.send(w, "RegisterAccount", {"public_key": other.public_key, "role": "Trader"})
    assert receipt["reason"] == "BadSignature"


def test_unknown_sender_rejected(harness):
    w = Wallet()
    receipt = harness.deposit(w, 100)
    assert receipt["reason"] == "UnknownAccount"


def test_bad_nonce_rejected_state_unchanged(harness, trader):
    snapshot = harness.state.to_snapshot()
    receipt = harness.send(trader, "Deposit", {"amount_cents": 100}, nonce=7)
    assert receipt["reason"] == "BadNonce"
    assert receipt["gas_used"] == 0 and receipt["fee_cents"] == 0
    assert harness.state.to_snapshot() == snapshot


def test_replayed_tx_rejected(harness, trader):
    tx = build_tx(trader.key, "Deposit", trader.nonce, {"amount_cents": 50}, 1_700_000_000)
    _, first = apply_transaction(harness.state, tx, harness.config)
    assert first["status"] == "Accepted"
    _, second = apply_transaction(harness.state, tx, harness.config)
    assert second["reason"] == "BadNonce"


def test_tampered_signature_rejected(harness, trader):
    tx = build_tx(trader.key, "Deposit", trader.nonce, {"amount_cents": 50}, 1_700_000_000)
    tx["payload"]["amount_cents"] = 5_000_000
    _, receipt = apply_transaction(harness.state, tx, harness.config)
    assert receipt["reason"] == "BadSignature"


# -- mint ----------------------------------------------------------------


def test_first_mint_ids_sequential_from_one(harness, issuer):
    harness.mint(issuer, 3)
    assert sorted(harness.state.tokens) == [1, 2, 3]
    assert all(t.status == "Active" and t.owner == issuer.address for t in harness.state.tokens.values())


def test_mint_count_zero_rejected(harness, issuer):
    assert harness.mint(issuer, 0)["reason"] == "CountOutOfRange"
    assert harness.mint(issuer, 10_001)["reason"] == "CountOutOfRange"


def test_mint_counter_continues(harness, issuer):
    harness.mint(issuer, 5)
    harness.mint(issuer, 2)
    assert sorted(harness.state.tokens) == [1, 2, 3, 4, 5, 6, 7]


def test_mint_requires_issuer_role(harness, trader):
    assert harness.mint(trader, 1)["reason"] == "Unauthorized"


def test_mint_gas_scales_per_token(harness, issuer):
    receipt = harness.mint(issuer, 3)
    assert receipt["gas_used"] == 180_000


# -- listing ---------------------------------------------------------------


def test_list_active_token(harness, issuer):
    harness.mint(issuer, 1)
    receipt = harness.list_token(issuer, 1, 150)
    assert receipt["status"] == "Accepted"
    assert harness.state.tokens[1].status == "Listed"
    listing = harness.state.listings[1]
    assert (listing.status, listing.seller, listing.price_cents) == ("Open", issuer.address, 150)


def test_list_already_listed_token(harness, issuer):
    harness.mint(issuer, 1)
    harness.list_token(issuer, 1, 150)
    assert harness.list_token(issuer, 1, 99)["reason"] == "TokenNotActive"


def test_list_price_zero_rejected(harness, issuer):
    harness.mint(issuer, 1)
    assert harness.list_token(issuer, 1, 0)["reason"] == "PriceOutOfRange"


def test_list_by_non_owner(harness, issuer, trader):
    harness.mint(issuer, 1)
    assert harness.list_token(trader, 1, 100)["reason"] == "NotOwner"


def test_list_unknown_token(harness, issuer):
    assert harness.list_token(issuer, 99, 100)["reason"] == "UnknownToken"


# -- buy -------------------------------------------------------------------


def buy_fixture(harness, issuer, trader, price=150, funds=10_000):
    harness.mint(issuer, 1)
    harness.list_token(issuer, 1, price)
    harness.deposit(trader, funds)
    return harness.state.listings[1]


def test_buy_happy_path_balances(harness, issuer, trader):
    # Spec worked example: balance 10,000, price 150, fee 190 -> 9,660.
    buy_fixture(harness, issuer, trader)
    receipt = harness.buy(trader, 1)
    assert receipt["status"] == "Accepted"
    assert receipt["fee_cents"] == 190
    assert harness.state.accounts[trader.address].balance_cents == 9_660
    assert harness.state.accounts[issuer.address].balance_cents == 150
    token = harness.state.tokens[1]
    assert token.owner == trader.address and token.status == "Active"
    assert harness.state.listings[1].status == "Filled"
    assert_money_conserved(harness.state)
    assert_tokens_conserved(harness.state)


def test_buy_self_trade_rejected(harness, issuer):
    harness.mint(issuer, 1)
    harness.list_token(issuer, 1, 150)
    harness.deposit(issuer, 10_000)
    assert harness.buy(issuer, 1)["reason"] == "SelfTrade"


def test_buy_insufficient_funds_boundary(harness, issuer, trader):
    # Exactly price + fee - 1 must fail; price + fee must succeed.
    buy_fixture(harness, issuer, trader, price=150, funds=150 + 190 - 1)
    assert harness.buy(trader, 1)["reason"] == "InsufficientFunds"
    harness.deposit(trader, 1)
    assert harness.buy(trader, 1)["status"] == "Accepted"
    assert harness.state.accounts[trader.address].balance_cents == 0
    assert_money_conserved(harness.state)


def test_buy_unknown_and_closed_listing(harness, issuer, trader):
    buy_fixture(harness, issuer, trader)
    assert harness.buy(trader, 42)["reason"] == "UnknownListing"
    harness.buy(trader, 1)
    assert harness.deposit(trader, 10_000)["status"] == "Accepted"
    assert harness.buy(trader, 1)["reason"] == "ListingNotOpen"


# -- cancel listing ----------------------------------------------------------


def test_cancel_restores_active(harness, issuer):
    harness.mint(issuer, 1)
    harness.list_token(issuer, 1, 150)
    receipt = harness.cancel(issuer, 1)
    assert receipt["status"] == "Accepted"
    assert harness.state.tokens[1].status == "Active"
    assert harness.state.tokens[1].owner == issuer.address
    assert harness.state.listings[1].status == "Cancelled"


def test_cancel_by_non_seller(harness, issuer, trader):
    harness.mint(issuer, 1)
    harness.list_token(issuer, 1, 150)
    assert harness.cancel(trader, 1)["reason"] == "NotOwner"


def test_cancel_twice(harness, issuer):
    harness.mint(issuer, 1)
    harness.list_token(issuer, 1, 150)
    harness.cancel(issuer, 1)
    assert harness.cancel(issuer, 1)["reason"] == "ListingNotOpen"


def test_relist_after_cancel_allowed(harness, issuer):
    harness.mint(issuer, 1)
    harness.list_token(issuer, 1, 150)
    harness.cancel(issuer, 1)
    assert harness.list_token(issuer, 1, 175)["status"] == "Accepted"
    assert harness.state.listings[2].price_cents == 175


# -- retire -------------------------------------------------------------------


def test_retire_active_token(harness, issuer):
    harness.mint(issuer, 1)
    assert harness.retire(issuer, 1)["status"] == "Accepted"
    assert harness.state.tokens[1].status == "Retired"


def test_retire_listed_token_rejected(harness, issuer):
    harness.mint(issuer, 1)
    harness.list_token(issuer, 1, 100)
    assert harness.retire(issuer, 1)["reason"] == "TokenNotActive"


def test_retire_twice_rejected(harness, issuer):
    harness.mint(issuer, 1)
    harness.retire(issuer, 1)
    assert harness.retire(issuer, 1)["reason"] == "TokenNotActive"


def test_retire_requires_ownership(harness, issuer, trader):
    harness.mint(issuer, 1)
    assert harness.retire(trader, 1)["reason"] == "NotOwner"


# -- refund -------------------------------------------------------------------


def test_refund_reverses_last_purchase(harness, issuer, trader, auditor):
    buy_fixture(harness, issuer, trader)
    harness.buy(trader, 1)
    receipt = harness.refund(auditor, 1)
    assert receipt["status"] == "Accepted"
    # Buyer made whole, seller debited, token cancelled and handed back.
    assert harness.state.accounts[trader.address].balance_cents == 9_660 + 150
    assert harness.state.accounts[issuer.address].balance_cents == 0
    token = harness.state.tokens[1]
    assert token.status == "Cancelled" and token.owner == issuer.address
    assert_money_conserved(harness.state)


def test_refund_by_trader_unauthorized(harness, issuer, trader):
    buy_fixture(harness, issuer, trader)
    harness.buy(trader, 1)
    assert harness.refund(trader, 1)["reason"] == "Unauthorized"


def test_refund_never_traded_token_no_money_movement(harness, issuer, auditor):
    harness.mint(issuer, 1)
    before = {a: acct.balance_cents for a, acct in harness.state.accounts.items()}
    receipt = harness.refund(auditor, 1, reason="Unutilized")
    assert receipt["status"] == "Accepted"
    assert harness.state.tokens[1].status == "Cancelled"
    after = {a: acct.balance_cents for a, acct in harness.state.accounts.items()}
    assert before == after


def test_refund_cancels_open_listing(harness, issuer, trader, auditor):
    buy_fixture(harness, issuer, trader)
    harness.buy(trader, 1)
    harness.list_token(trader, 1, 500)
    assert harness.refund(auditor, 1)["status"] == "Accepted"
    assert harness.state.listings[2].status == "Cancelled"
    assert harness.state.tokens[1].status == "Cancelled"


def test_refund_bounded_by_seller_balance(harness, issuer, trader, auditor):
    buy_fixture(harness, issuer, trader)
    harness.buy(trader, 1)
    # Seller spends the proceeds (send to a second trade as buyer of another token).
    other = Wallet()
    harness.register(other, "Issuer")
    harness.mint(other, 1)
    harness.list_token(other, 2, 100)
    harness.deposit(issuer, 200)  # 350 total, spends 100 + 190 fee = 290 -> 60 left
    harness.buy(issuer, 2)
    assert harness.state.accounts[issuer.address].balance_cents < 150
    receipt = harness.refund(auditor, 1)
    assert receipt["reason"] == "InsufficientFunds"
    assert harness.state.tokens[1].status == "Active"
    assert_money_conserved(harness.state)


def test_refund_retired_token_rejected(harness, issuer, auditor):
    harness.mint(issuer, 1)
    harness.retire(issuer, 1)
    assert harness.refund(auditor, 1)["reason"] == "TokenRetired"


def test_refund_twice_rejected(harness, issuer, auditor):
    harness.mint(issuer, 1)
    harness.refund(auditor, 1)
    assert harness.refund(auditor, 1)["reason"] == "TokenNotActive"


def test_refund_only_reverses_most_recent_hop(harness, issuer, trader, auditor):
    # issuer -> trader -> second; refund reverses only trader -> second.
    buy_fixture(harness, issuer, trader)
    harness.buy(trader, 1)
    second = Wallet()
    harness.register(second)
    harness.deposit(second, 1_000)
    harness.list_token(trader, 1, 300)
    harness.buy(second, 2)
    balances = {a: acct.balance_cents for a, acct in harness.state.accounts.items()}
    harness.refund(auditor, 1)
    after = {a: acct.balance_cents for a, acct in harness.state.accounts.items()}
    assert after[second.address] == balances[second.address] + 300
    assert after[trader.address] == balances[trader.address] - 300
    assert after[issuer.address] == balances[issuer.address]
    assert harness.state.tokens[1].owner == trader.address


def test_refund_unknown_token(harness, auditor):
    assert harness.refund(auditor, 9)["reason"] == "UnknownToken"


def test_refund_bad_reason(harness, issuer, auditor):
    harness.mint(issuer, 1)
    assert harness.refund(auditor, 1, reason="JustBecause")["reason"] == "MalformedPayload"


# -- rewards --------------------------------------------------------------


def test_reward_examples():
    config = LedgerConfig(reward_rate=Fraction(1, 20), reward_window=100)
    # floor(200 * 0.05) = 10 inside the window.
    assert accrue_reward(200, 1, config) == 10
    assert accrue_reward(200, 100, config) == 10
    assert accrue_reward(200, 101, config) == 0
    assert accrue_reward(1, 1, config) == 0  # floor(0.05)


def test_reward_exact_arithmetic():
    config = LedgerConfig()
    # 2900 * 0.05 must be exactly 145 (binary float would give 144.9999...).
    assert accrue_reward(2900, 1, config) == 145


def test_reward_window_counts_platform_wide(harness, issuer, trader):
    config = harness.config
    config.reward_window = 2
    harness.mint(issuer, 3)
    for token_id in (1, 2, 3):
        harness.list_token(issuer, token_id, 100)
    harness.deposit(trader, 10_000)
    for listing_id in (1, 2, 3):
        harness.buy(trader, listing_id)
    # Buys 1 and 2 reward floor(100 * 0.05) = 5 each; buy 3 is outside.
    assert harness.state.accounts[trader.address].reward_points == 10


# -- deposits and documents ---------------------------------------------------


def test_deposit_amount_validation(harness, trader):
    assert harness.send(trader, "Deposit", {"amount_cents": 0})["reason"] == "AmountOutOfRange"
    assert harness.send(trader, "Deposit", {"amount_cents": "12"})["reason"] == "MalformedPayload"


def test_attach_document(harness, trader):
    receipt = harness.send(trader, "AttachDocument", {"content_hash": "ab" * 32})
    assert receipt["status"] == "Accepted"
    assert harness.send(trader, "AttachDocument", {"content_hash": "xyz"})["reason"] == "MalformedPayload"


# -- gas and fees ---------------------------------------------------------


@pytest.mark.parametrize(
    "tx_type,expected",
    [
        ("Mint", 60_000),
        ("List", 45_000),
        ("Buy", 90_000),
        ("CancelListing", 30_000),
        ("Retire", 35_000),
        ("Refund", 50_000),
        ("Deposit", 21_000),
        ("RegisterAccount", 21_000),
        ("AttachDocument", 21_000),
    ],
)
def test_gas_table(tx_type, expected):
    assert LedgerConfig().gas_for(tx_type) == expected


def test_default_buy_fee_is_190_cents():
    config = LedgerConfig()
    assert config.fee_for(config.gas_for("Buy")) == 190


def test_fee_rounding_half_up():
    config = LedgerConfig()
    # 35,000 * 19/9000 = 73.888... -> 74; 30,000 -> 63.333... -> 63.
    assert config.fee_for(35_000) == 74
    assert config.fee_for(30_000) == 63
