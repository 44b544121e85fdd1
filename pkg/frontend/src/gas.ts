/**
 * Published gas table and the client-side fee preview.
 *
 * The preview is an estimate only: the service's receipt is the truth and
 * the UI re-displays the receipt fee after every confirmed transaction.
 */

export const GAS_TABLE: Record<string, number> = {
  Mint: 60_000, // per token
  List: 45_000,
  Buy: 90_000,
  CancelListing: 30_000,
  Retire: 35_000,
  Refund: 50_000,
  Deposit: 21_000,
  RegisterAccount: 21_000,
  AttachDocument: 21_000,
};

/** Gas price as an exact rational (cents per unit), service default. */
export interface GasPrice {
  num: number;
  den: number;
}

export const DEFAULT_GAS_PRICE: GasPrice = { num: 19, den: 9000 };

export function estimateFeeCents(txType: string, price: GasPrice = DEFAULT_GAS_PRICE, count = 1): number {
  const units = (GAS_TABLE[txType] ?? 21_000) * (txType === "Mint" ? count : 1);
  // round half up on the exact rational units * num / den
  return Math.floor((2 * units * price.num + price.den) / (2 * price.den));
}

export function formatCents(cents: number): string {
  return `$${(cents / 100).toFixed(2)}`;
}
