"""The running marketplace: one writer, many readers, a block log on disk.

``Node`` owns the ledger. Every submitted transaction goes through a
single FIFO queue; a sealer thread drains it into blocks (a block closes
when the oldest pending transaction has waited the block interval, or the
batch limit is reached, whichever comes first) and appends each block to
the JSON-lines log with an fsync before callers are released. Submission
is therefore atomic and read-your-writes: when a client holds an Accepted
receipt, the state it implies is already durable and visible.

On startup the node heals a torn final log line (the only damage an
interrupted append can leave), then verifies the whole chain and refuses
to serve a log that fails verification. State is rebuilt by replay; the
snapshot file is a convenience mirror, the log is the truth.

The FastAPI layer is a thin JSON envelope: every response body carries
either ``result`` or ``error: {code, message}``, with domain rejections
reported inside receipts (transport 200), and transport problems as 4xx.
"""

from __future__ import annotations

import datetime as dt
import json
import threading
import time
from pathlib import Path

import anyio.to_thread
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, Response

from .canonical import canonical_dumps
from .compliance import ComplianceParams, build_report, cbam_phase, cbam_requirements
from .docstore import DEFAULT_MAX_BYTES, DocumentStore
from .errors import DomainError, MalformedRequest, NotFound, UnknownAccount
from .ledger import (
    BlockLog,
    LedgerConfig,
    LedgerState,
    apply_transaction,
    make_block,
    make_genesis,
    snapshot_document,
    verify_chain,
    write_snapshot,
)

BLOCKS_FILE = "blocks.jsonl"
SNAPSHOT_FILE = "snapshot.json"
CONFIG_FILE = "ledger_config.json"
DOCUMENTS_DIR = "documents"


class TamperedLog(DomainError):
    code = "TamperedLog"

    def __init__(self, report):
        self.report = report
        failures = "; ".join(f"height {h}: {r}" for h, r in report.failures[:5])
        super().__init__(f"block log failed verification: {failures}")


class _Pending:
    __slots__ = ("tx", "event", "result", "enqueued_at")

    def __init__(self, tx: dict):
        self.tx = tx
        self.event = threading.Event()
        self.result = None
        self.enqueued_at = time.monotonic()


class Node:
    def __init__(
        self,
        state_dir: str | Path,
        ledger_config: LedgerConfig | None = None,
        compliance_params: ComplianceParams | None = None,
        block_interval_ms: int = 500,
        block_batch_max: int = 100,
        max_document_bytes: int = DEFAULT_MAX_BYTES,
    ):
        self.state_dir = Path(state_dir)
        self.state_dir.mkdir(parents=True, exist_ok=True)
        self.params = compliance_params or ComplianceParams.default()
        self.block_interval_s = block_interval_ms / 1000.0
        self.block_batch_max = block_batch_max
        self.log = BlockLog(self.state_dir / BLOCKS_FILE)
        self.documents = DocumentStore(self.state_dir / DOCUMENTS_DIR, max_bytes=max_document_bytes)

        config_path = self.state_dir / CONFIG_FILE
        if config_path.exists():
            # The persisted config wins: replaying the log under different
            # rules would recompute different receipts.
            self.config = LedgerConfig.from_dict(json.loads(config_path.read_text()))
        else:
            self.config = ledger_config or LedgerConfig()
            config_path.write_text(canonical_dumps(self.config.to_dict()) + "\n")

        self.state = LedgerState()
        self.height = -1
        self.last_hash = None
        self.history: dict[str, list] = {}
        self.retirements: dict[str, list] = {}

        self._state_lock = threading.RLock()
        self._queue_lock = threading.Condition()
        self._pending: list[_Pending] = []
        self._sealer: threading.Thread | None = None
        self._running = False

    # -- lifecycle -----------------------------------------------------

    def start(self) -> None:
        self.log.recover_torn_tail()
        if not self.log.exists():
            self.log.append(make_genesis(timestamp=int(time.time())))
        lines = self.log.read_lines()
        report = verify_chain(lines, self.config)
        if not report.ok:
            raise TamperedLog(report)
        for line in lines:
            self._ingest_block(json.loads(line))
        self._write_snapshot()
        self._running = True
        self._sealer = threading.Thread(target=self._seal_loop, name="block-sealer", daemon=True)
        self._sealer.start()

    def stop(self) -> None:
        with self._queue_lock:
            self._running = False
            self._queue_lock.notify_all()
        if self._sealer is not None:
            self._sealer.join(timeout=10)
            self._sealer = None

    # -- write path ----------------------------------------------------

    def submit(self, tx: dict, timeout: float = 30.0) -> dict:
        """Queue a signed transaction; blocks until its block is sealed."""
        if not isinstance(tx, dict):
            raise MalformedRequest("transaction must be a JSON object")
        if not self._running:
            raise DomainError("node is not running")
        pending = _Pending(tx)
        with self._queue_lock:
            self._pending.append(pending)
            self._queue_lock.notify_all()
        if not pending.event.wait(timeout):
            raise DomainError("timed out waiting for block inclusion")
        return pending.result

    def _seal_loop(self) -> None:
        while True:
            with self._queue_lock:
                while self._running and not self._pending:
                    self._queue_lock.wait()
                if not self._running and not self._pending:
                    return
                deadline = self._pending[0].enqueued_at + self.block_interval_s
                while (
                    self._running
                    and len(self._pending) < self.block_batch_max
                    and time.monotonic() < deadline
                ):
                    self._queue_lock.wait(timeout=deadline - time.monotonic())
                batch = self._pending[: self.block_batch_max]
                del self._pending[: len(batch)]
            if batch:
                self._seal(batch)

    def _seal(self, batch: list[_Pending]) -> None:
        with self._state_lock:
            height = self.height + 1
            entries = []
            receipts = []
            for pending in batch:
                self.state, receipt = apply_transaction(self.state, pending.tx, self.config)
                entries.append({"tx": pending.tx, "receipt": receipt})
                receipts.append(receipt)
            block = make_block(height, self.last_hash, int(time.time()), entries)
            self.log.append(block)
            self.height = height
            self.last_hash = block["block_hash"]
            for entry in entries:
                self._index_entry(height, entry)
            self._write_snapshot()
        for pending, receipt in zip(batch, receipts):
            pending.result = {
                "tx_hash": receipt["tx_hash"],
                "block_height": height,
                "receipt": receipt,
            }
            pending.event.set()

    # -- replay and indexing --------------------------------------------

    def _ingest_block(self, block: dict) -> None:
        for entry in block["txs"]:
            self.state, _ = apply_transaction(self.state, entry["tx"], self.config)
            self._index_entry(block["height"], entry)
        self.height = block["height"]
        self.last_hash = block["block_hash"]

    def _index_entry(self, height: int, entry: dict) -> None:
        tx, receipt = entry["tx"], entry["receipt"]
        if receipt["status"] != "Accepted":
            return
        tx_type = tx["tx_type"]
        payload = tx["payload"]
        sender = tx["sender"]
        parties = {sender}
        summary = tx_type
        if tx_type == "RegisterAccount":
            summary = f"registered as {payload['role']}"
        elif tx_type == "Deposit":
            summary = f"deposited {payload['amount_cents']} cents"
        elif tx_type == "Mint":
            summary = f"minted {payload['count']} credit(s) for {payload['project_id']}"
        elif tx_type == "List":
            summary = f"listed token {payload['token_id']} at {payload['price_cents']} cents"
        elif tx_type == "Buy":
            listing = self.state.listings[payload["listing_id"]]
            parties.add(listing.seller)
            summary = (
                f"bought token {listing.token_id} via listing {listing.listing_id} "
                f"for {listing.price_cents} cents"
            )
        elif tx_type == "CancelListing":
            summary = f"cancelled listing {payload['listing_id']}"
        elif tx_type == "Retire":
            summary = f"retired token {payload['token_id']}"
            self.retirements.setdefault(sender, []).append(tx["timestamp"])
        elif tx_type == "Refund":
            token = self.state.tokens[payload["token_id"]]
            parties.add(token.owner)
            summary = f"refunded token {payload['token_id']} ({payload['reason']})"
        elif tx_type == "AttachDocument":
            summary = f"attached document {payload['content_hash'][:16]}"
        for address in parties:
            self.history.setdefault(address, []).append(
                {
                    "block_height": height,
                    "tx_hash": receipt["tx_hash"],
                    "tx_type": tx_type,
                    "summary": summary,
                }
            )

    def _write_snapshot(self) -> None:
        doc = snapshot_document(self.state, self.height, self.last_hash)
        write_snapshot(self.state_dir / SNAPSHOT_FILE, doc)

    # -- read path -------------------------------------------------------

    def listings(self, status: str | None = None) -> list[dict]:
        with self._state_lock:
            rows = [l.to_dict() for l in self.state.listings.values()]
        if status is not None:
            rows = [r for r in rows if r["status"].lower() == status.lower()]
        return sorted(rows, key=lambda r: r["listing_id"])

    def token(self, token_id: int) -> dict:
        with self._state_lock:
            token = self.state.tokens.get(token_id)
            if token is None:
                raise NotFound(f"no token {token_id}")
            return token.to_dict()

    def tokens_by_owner(self, address: str) -> list[dict]:
        with self._state_lock:
            rows = [t.to_dict() for t in self.state.tokens.values() if t.owner == address]
        return sorted(rows, key=lambda r: r["token_id"])

    def account(self, address: str) -> dict:
        with self._state_lock:
            account = self.state.accounts.get(address)
            if account is None:
                raise NotFound(f"no account {address}")
            return account.to_dict()

    def account_history(self, address: str) -> list[dict]:
        with self._state_lock:
            if address not in self.state.accounts:
                raise NotFound(f"no account {address}")
            return list(self.history.get(address, []))

    def compliance_report(self, address: str, regime: str, year: int, reported: float = 0.0) -> dict:
        with self._state_lock:
            if address not in self.state.accounts:
                raise UnknownAccount(f"no account {address}")
            retire_ts = list(self.retirements.get(address, []))
        return build_report(
            account=address,
            period=year,
            regime=regime.upper(),
            params=self.params,
            reported_tco2e=reported,
            retire_timestamps=retire_ts,
        )

    def cbam_phase_on(self, date: dt.date) -> dict:
        return {
            "date": date.isoformat(),
            "phase": cbam_phase(date, self.params.cbam),
            "requirements": cbam_requirements(date, self.params.cbam),
        }

    def audit_verify(self) -> dict:
        with self._state_lock:
            lines = self.log.read_lines()
        return verify_chain(lines, self.config).to_dict()


# -- HTTP layer ----------------------------------------------------------


def create_app(node: Node) -> FastAPI:
    app = FastAPI(title="carbonmarket", docs_url=None, redoc_url=None)

    status_for = {
        "MalformedRequest": 400,
        "NotFound": 404,
        "UnknownAccount": 404,
        "TooLarge": 413,
        "TamperedLog": 503,
    }

    def ok(result, status_code: int = 200):
        return JSONResponse({"result": result}, status_code=status_code)

    def fail(code: str, message: str, status_code: int | None = None):
        return JSONResponse(
            {"error": {"code": code, "message": message}},
            status_code=status_code or status_for.get(code, 400),
        )

    @app.exception_handler(DomainError)
    async def _domain_error(request, exc: DomainError):
        return fail(exc.code, exc.message)

    @app.post("/v1/tx")
    async def submit_tx(request: Request):
        try:
            tx = json.loads(await request.body())
        except ValueError:
            return fail("MalformedRequest", "body is not valid JSON")
        if not isinstance(tx, dict):
            return fail("MalformedRequest", "body must be a JSON object")
        # submit() blocks until the sealer includes the transaction; keep
        # that wait off the event loop so submissions batch concurrently.
        result = await anyio.to_thread.run_sync(lambda: node.submit(tx))
        return ok(result)

    @app.get("/v1/listings")
    def listings(status: str | None = None):
        if status is not None and status.lower() not in ("open", "filled", "cancelled"):
            return fail("MalformedRequest", "status must be open|filled|cancelled")
        return ok(node.listings(status))

    @app.get("/v1/tokens")
    def tokens(owner: str):
        return ok(node.tokens_by_owner(owner))

    @app.get("/v1/tokens/{token_id}")
    def token(token_id: int):
        return ok(node.token(token_id))

    @app.get("/v1/accounts/{address}")
    def account(address: str):
        return ok(node.account(address))

    @app.get("/v1/history/{address}")
    def history(address: str):
        return ok(node.account_history(address))

    @app.post("/v1/documents")
    async def store_document(request: Request):
        data = await request.body()
        return ok(node.documents.put(data).to_dict())

    @app.get("/v1/documents/{content_hash}")
    def fetch_document(content_hash: str):
        return Response(content=node.documents.get(content_hash), media_type="application/octet-stream")

    @app.get("/v1/compliance/report")
    def compliance_report(address: str, regime: str, year: int, reported: float = 0.0):
        if regime.upper() not in ("CBAM", "CCA", "CORSIA"):
            return fail("MalformedRequest", "regime must be cbam|cca|corsia")
        return ok(node.compliance_report(address, regime, year, reported))

    @app.get("/v1/compliance/cbam/phase")
    def phase(date: str):
        try:
            parsed = dt.date.fromisoformat(date)
        except ValueError:
            return fail("MalformedRequest", "date must be YYYY-MM-DD")
        return ok(node.cbam_phase_on(parsed))

    @app.get("/v1/audit/verify")
    def audit_verify():
        return ok(node.audit_verify())

    return app


def serve(
    state_dir: str | Path,
    port: int = 8545,
    host: str = "127.0.0.1",
    **node_kwargs,
) -> None:
    """Run a node behind uvicorn until interrupted."""
    import uvicorn

    node = Node(state_dir, **node_kwargs)
    node.start()
    try:
        uvicorn.run(create_app(node), host=host, port=port, log_level="warning")
    finally:
        node.stop()
