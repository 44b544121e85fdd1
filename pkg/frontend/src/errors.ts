/**
 * Human-readable banner text for every domain error code the service can
 * return. Unknown codes fall back to a generic message so nothing is ever
 * swallowed silently.
 */

export const BANNER_MESSAGES: Record<string, string> = {
  BadSignature: "The transaction signature was rejected. Check that your key file is intact.",
  BadNonce: "The transaction was out of sequence. Refresh and try again.",
  Unauthorized: "Your account role does not permit this action.",
  UnknownAccount: "That account is not registered on the ledger.",
  AccountExists: "This address is already registered.",
  UnknownToken: "That credit does not exist.",
  UnknownListing: "That listing does not exist.",
  NotOwner: "Only the owner can do that.",
  TokenNotActive: "The credit is not in an Active state.",
  TokenRetired: "The credit has been retired and is immutable.",
  ListingNotOpen: "The listing is no longer open.",
  InsufficientFunds: "Insufficient funds for this transaction.",
  SelfTrade: "You cannot buy your own listing.",
  CountOutOfRange: "The credit count must be between 1 and 10,000.",
  PriceOutOfRange: "The price must be at least 1 cent.",
  AmountOutOfRange: "The amount must be at least 1 cent.",
  MalformedPayload: "The transaction payload was malformed.",
  MalformedRequest: "The request was malformed.",
  MalformedResponse: "The service returned an unreadable response.",
  NotFound: "Not found.",
  TooLarge: "The document exceeds the size limit.",
  TamperedLog: "The service refused a tampered ledger. Contact the operator.",
  YearBeforeRegime: "The selected year is before the regime starts.",
  ConfigInvalid: "The request parameters are invalid.",
  ServiceUnreachable: "Cannot reach the trading service.",
};

export function bannerText(code: string, detail?: string | null): string {
  const base = BANNER_MESSAGES[code] ?? `Request failed (${code}).`;
  return detail ? `${base} (${detail})` : base;
}
