"""Shared error vocabulary.

Two kinds of failure exist in this system and they never mix:

* Transaction rejections. ``apply_transaction`` never raises for a bad
  transaction; it returns a Rejected receipt carrying one of the
  ``REJECTION_CODES``. Internally the ledger raises ``TxRejected`` and
  catches it at the boundary.
* Domain exceptions. Query/compute APIs (compliance, analytics, simulation,
  document store) raise ``DomainError`` subclasses. Each carries a stable
  ``code`` string that the HTTP service and CLI surface verbatim.
"""

from __future__ import annotations


class DomainError(Exception):
    code = "DomainError"

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)
        self.message = message or self.code


class UnknownAccount(DomainError):
    code = "UnknownAccount"


class NotFound(DomainError):
    code = "NotFound"


class TooLarge(DomainError):
    code = "TooLarge"


class MalformedRequest(DomainError):
    code = "MalformedRequest"


class YearBeforeRegime(DomainError):
    code = "YearBeforeRegime"


class TooFewSamples(DomainError):
    code = "TooFewSamples"


class DegenerateVariance(DomainError):
    code = "DegenerateVariance"


class NonPositiveBaseline(DomainError):
    code = "NonPositiveBaseline"


class OutOfRange(DomainError):
    code = "OutOfRange"


class EmptyResponses(DomainError):
    code = "EmptyResponses"


class ConfigInvalid(DomainError):
    code = "ConfigInvalid"


class ServiceUnreachable(DomainError):
    code = "ServiceUnreachable"


class ApiError(DomainError):
    """Error envelope returned by the trading service."""

    def __init__(self, code: str, message: str = ""):
        self.code = code
        super().__init__(message)


class TxRejected(Exception):
    """Internal control flow for ledger rejection; becomes a receipt."""

    def __init__(self, code: str, message: str = ""):
        super().__init__(message or code)
        self.code = code
        self.message = message or code


# Receipt rejection reasons the ledger can emit.
REJECTION_CODES = frozenset(
    {
        "BadSignature",
        "BadNonce",
        "Unauthorized",
        "UnknownAccount",
        "AccountExists",
        "UnknownToken",
        "UnknownListing",
        "NotOwner",
        "TokenNotActive",
        "TokenRetired",
        "ListingNotOpen",
        "InsufficientFunds",
        "SelfTrade",
        "CountOutOfRange",
        "PriceOutOfRange",
        "AmountOutOfRange",
        "MalformedPayload",
    }
)
