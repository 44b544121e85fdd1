"""HTTP client for the trading service, plus a signing session.

``ServiceClient`` is a thin wrapper over the JSON API: it unwraps the
``result``/``error`` envelope, turning error envelopes into ``ApiError``
and connection failures into ``ServiceUnreachable``.

``TradingSession`` binds a client to a key pair and signs transactions
locally - the private key never leaves the process. It tracks the account
nonce so sequential transactions need no round trip between signing and
submitting. A Rejected receipt raises ``ApiError`` with the rejection
reason as its code.
"""

from __future__ import annotations

import time

import requests

from .errors import ApiError, ServiceUnreachable
from .keys import KeyPair
from .ledger import build_tx


class ServiceClient:
    def __init__(self, endpoint: str, timeout: float = 60.0):
        self.endpoint = endpoint.rstrip("/")
        self.timeout = timeout
        self._session = requests.Session()

    def _request(self, method: str, path: str, **kwargs):
        url = self.endpoint + path
        try:
            resp = self._session.request(method, url, timeout=self.timeout, **kwargs)
        except requests.exceptions.RequestException as exc:
            raise ServiceUnreachable(f"{url}: {exc}") from exc
        try:
            doc = resp.json()
        except ValueError as exc:
            raise ApiError("MalformedResponse", f"{url} returned non-JSON ({resp.status_code})") from exc
        if "error" in doc:
            err = doc["error"]
            raise ApiError(err.get("code", "Unknown"), err.get("message", ""))
        return doc.get("result")

    def ping(self) -> None:
        self._request("GET", "/v1/listings")

    def submit_tx(self, tx: dict) -> dict:
        return self._request("POST", "/v1/tx", json=tx)

    def listings(self, status: str | None = None) -> list[dict]:
        params = {"status": status} if status else None
        return self._request("GET", "/v1/listings", params=params)

    def token(self, token_id: int) -> dict:
        return self._request("GET", f"/v1/tokens/{token_id}")

    def tokens_by_owner(self, address: str) -> list[dict]:
        return self._request("GET", "/v1/tokens", params={"owner": address})

    def account(self, address: str) -> dict:
        return self._request("GET", f"/v1/accounts/{address}")

    def history(self, address: str) -> list[dict]:
        return self._request("GET", f"/v1/history/{address}")

    def store_document(self, data: bytes) -> dict:
        url = self.endpoint + "/v1/documents"
        try:
            resp = self._session.post(
                url, data=data, headers={"Content-Type": "application/octet-stream"}, timeout=self.timeout
            )
        except requests.exceptions.RequestException as exc:
            raise ServiceUnreachable(f"{url}: {exc}") from exc
        doc = resp.json()
        if "error" in doc:
            raise ApiError(doc["error"].get("code", "Unknown"), doc["error"].get("message", ""))
        return doc["result"]

    def fetch_document(self, content_hash: str) -> bytes:
        url = f"{self.endpoint}/v1/documents/{content_hash}"
        try:
            resp = self._session.get(url, timeout=self.timeout)
        except requests.exceptions.RequestException as exc:
            raise ServiceUnreachable(f"{url}: {exc}") from exc
        if resp.status_code != 200:
            doc = resp.json()
            raise ApiError(doc["error"].get("code", "Unknown"), doc["error"].get("message", ""))
        return resp.content

    def compliance_report(self, address: str, regime: str, year: int, reported: float = 0.0) -> dict:
        return self._request(
            "GET",
            "/v1/compliance/report",
            params={"address": address, "regime": regime, "year": year, "reported": reported},
        )

    def cbam_phase(self, date: str) -> dict:
        return self._request("GET", "/v1/compliance/cbam/phase", params={"date": date})

    def audit_verify(self) -> dict:
        return self._request("GET", "/v1/audit/verify")


class TradingSession:
    def __init__(self, client: ServiceClient, key: KeyPair):
        self.client = client
        self.key = key
        self._nonce: int | None = None

    @classmethod
    def with_new_key(cls, client: ServiceClient, role: str = "Trader") -> "TradingSession":
        session = cls(client, KeyPair.generate())
        session.role = role
        return session

    @property
    def address(self) -> str:
        return self.key.address

    def _next_nonce(self) -> int:
        if self._nonce is None:
            self._nonce = self.client.account(self.address)["nonce"]
        return self._nonce

    def send(self, tx_type: str, payload: dict, nonce: int | None = None) -> dict:
        if nonce is None:
            nonce = self._next_nonce()
        tx = build_tx(self.key, tx_type, nonce, payload, int(time.time()))
        result = self.client.submit_tx(tx)
        receipt = result["receipt"]
        if receipt["status"] != "Accepted":
            self._nonce = None  # force a refetch after rejection
            raise ApiError(receipt["reason"], receipt.get("message") or receipt["reason"])
        self._nonce = nonce + 1
        return result

    def register(self, role: str | None = None) -> dict:
        role = role or getattr(self, "role", "Trader")
        result = self.send(
            "RegisterAccount", {"public_key": self.key.public_key, "role": role}, nonce=0
        )
        self._nonce = 1
        return result

    def deposit(self, amount_cents: int) -> dict:
        return self.send("Deposit", {"amount_cents": amount_cents})

    def mint(self, project_id: str, vintage_year: int, count: int) -> list[int]:
        before = {t["token_id"] for t in self.client.tokens_by_owner(self.address)}
        self.send(
            "Mint", {"project_id": project_id, "vintage_year": vintage_year, "count": count}
        )
        after = {t["token_id"] for t in self.client.tokens_by_owner(self.address)}
        return sorted(after - before)

    def list_token(self, token_id: int, price_cents: int) -> dict:
        result = self.send("List", {"token_id": token_id, "price_cents": price_cents})
        for row in reversed(self.client.listings("open")):
            if row["token_id"] == token_id and row["seller"] == self.address:
                return {**result, "listing_id": row["listing_id"]}
        raise ApiError("UnknownListing", "listing not visible after List")

    def buy(self, listing_id: int) -> dict:
        return self.send("Buy", {"listing_id": listing_id})

    def cancel_listing(self, listing_id: int) -> dict:
        return self.send("CancelListing", {"listing_id": listing_id})

    def retire(self, token_id: int) -> dict:
        return self.send("Retire", {"token_id": token_id})

    def refund(self, token_id: int, reason: str) -> dict:
        return self.send("Refund", {"token_id": token_id, "reason": reason})

    def attach_document(self, content_hash: str) -> dict:
        return self.send("AttachDocument", {"content_hash": content_hash})
