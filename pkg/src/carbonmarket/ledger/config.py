"""Ledger rule parameters: gas table, gas price, reward policy.

Gas is a deterministic stand-in for network execution cost. The fee for an
accepted transaction is ``round_half_up(gas_used * gas_price)``. The gas
price is an exact rational (cents per gas unit) so that fees are
reproducible to the cent on every platform: the default 19/9000 makes a Buy
(90,000 gas) cost exactly 190 cents.

The whole record must ride along with a chain: replaying a block log under
a different config recomputes different receipts and fails verification.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

TX_TYPES = (
    "Mint",
    "List",
    "Buy",
    "CancelListing",
    "Retire",
    "Refund",
    "Deposit",
    "RegisterAccount",
    "AttachDocument",
)

DEFAULT_GAS_TABLE = {
    "Mint": 60_000,  # per token minted
    "List": 45_000,
    "Buy": 90_000,
    "CancelListing": 30_000,
    "Retire": 35_000,
    "Refund": 50_000,
    "Deposit": 21_000,
    "RegisterAccount": 21_000,
    "AttachDocument": 21_000,
}


def _as_fraction(value) -> Fraction:
    # str() of a float is its shortest round-tripping decimal, which Fraction
    # parses exactly; "19/9000" style strings pass through unchanged.
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(str(value))
    return Fraction(value)


def round_half_up(x: Fraction) -> int:
    return (2 * x.numerator + x.denominator) // (2 * x.denominator)


@dataclass
class LedgerConfig:
    gas_table: dict = field(default_factory=lambda: dict(DEFAULT_GAS_TABLE))
    gas_price_cents_per_unit: Fraction = Fraction(19, 9000)
    reward_rate: Fraction = Fraction(1, 20)
    reward_window: int = 100  # rewarded Buys, counted platform-wide

    def gas_for(self, tx_type: str, count: int = 1) -> int:
        units = self.gas_table.get(tx_type, 21_000)
        return units * count if tx_type == "Mint" else units

    def fee_for(self, gas_used: int) -> int:
        return round_half_up(gas_used * self.gas_price_cents_per_unit)

    def to_dict(self) -> dict:
        return {
            "gas_table": dict(self.gas_table),
            "gas_price_cents_per_unit": str(self.gas_price_cents_per_unit),
            "reward_rate": str(self.reward_rate),
            "reward_window": self.reward_window,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "LedgerConfig":
        cfg = cls()
        if "gas_table" in doc:
            cfg.gas_table.update({k: int(v) for k, v in doc["gas_table"].items()})
        if "gas_price_cents_per_unit" in doc:
            cfg.gas_price_cents_per_unit = _as_fraction(doc["gas_price_cents_per_unit"])
        if "reward_rate" in doc:
            cfg.reward_rate = _as_fraction(doc["reward_rate"])
        if "reward_window" in doc:
            cfg.reward_window = int(doc["reward_window"])
        return cfg
