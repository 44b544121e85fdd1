"""Command-line entry point.

Success prints JSON to stdout (``--plain`` for terse text) and exits 0.
Domain failures print one ``error: <code>: <message>`` line to stderr and
exit 1. Usage errors exit 2 with usage text (click's default).

Trading commands sign locally with the key file (the service never sees a
private key) and submit over HTTP. Compliance arithmetic and experiment
simulation run locally; ``compliance report`` and ``compliance cbam phase``
query the service (the latter takes ``--local`` to compute offline).
"""

from __future__ import annotations

import datetime as dt
import json
import sys
from pathlib import Path

import click

from . import compliance as comp
from . import kano as kano_mod
from . import simulate as sim
from .client import ServiceClient, TradingSession
from .errors import DomainError
from .keys import KeyPair

DEFAULT_ENDPOINT = "http://127.0.0.1:8545"
DEFAULT_PORT = 8545

# Endpoint table for the command/endpoint parity test.
ENDPOINT_COMMANDS = {
    "POST /v1/tx": ["register", "deposit", "mint", "list", "buy", "cancel", "retire", "refund"],
    "GET /v1/listings": ["listings"],
    "GET /v1/tokens": ["mint"],
    "GET /v1/tokens/{token_id}": ["token"],
    "GET /v1/accounts/{address}": ["account"],
    "GET /v1/history/{address}": ["history"],
    "POST /v1/documents": ["document put"],
    "GET /v1/documents/{content_hash}": ["document get"],
    "GET /v1/compliance/report": ["compliance report"],
    "GET /v1/compliance/cbam/phase": ["compliance cbam phase"],
    "GET /v1/audit/verify": ["audit verify"],
}


class DomainExit(click.ClickException):
    exit_code = 1

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code

    def show(self, file=None):
        click.echo(f"error: {self.code}: {self.message}", err=True)


def _guard(fn):
    """Convert DomainError (incl. service ApiError) into exit-1 output."""

    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except DomainError as exc:
            raise DomainExit(exc.code, exc.message) from exc

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


class Ctx:
    def __init__(self, endpoint, key_path, config_path, plain):
        self.file_config = {}
        if config_path:
            with open(config_path) as fh:
                self.file_config = json.load(fh)
        self.endpoint = endpoint or self.file_config.get("endpoint") or DEFAULT_ENDPOINT
        self.key_path = key_path or self.file_config.get("key")
        self.plain = plain

    def client(self) -> ServiceClient:
        return ServiceClient(self.endpoint)

    def session(self) -> TradingSession:
        if not self.key_path:
            raise click.UsageError("a key file is required: pass --key or set it in --config")
        return TradingSession(self.client(), KeyPair.load(self.key_path))

    def emit(self, doc, plain_text=None):
        if self.plain and plain_text is not None:
            click.echo(plain_text)
        else:
            click.echo(json.dumps(doc, indent=2, sort_keys=True))


@click.group()
@click.option("--endpoint", help=f"Service base URL (default {DEFAULT_ENDPOINT})")
@click.option("--key", "key_path", type=click.Path(exists=True, dir_okay=False), help="Key file used to sign transactions")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), help="JSON config file (endpoint, key, serve settings)")
@click.option("--plain", is_flag=True, help="Plain text output instead of JSON")
@click.pass_context
def cli(ctx, endpoint, key_path, config_path, plain):
    """Carbon-credit marketplace: ledger node, trading, compliance, experiments."""
    ctx.obj = Ctx(endpoint, key_path, config_path, plain)


@cli.command()
@click.option("--out", "out_path", type=click.Path(dir_okay=False), help="Key file to write (default <address prefix>.key)")
@click.pass_obj
@_guard
def keygen(obj: Ctx, out_path):
    """Generate an Ed25519 key pair and write a key file."""
    key = KeyPair.generate()
    path = Path(out_path) if out_path else Path(f"{key.address[:12]}.key")
    key.save(path)
    obj.emit(
        {"address": key.address, "public_key": key.public_key, "key_file": str(path)},
        plain_text=f"{key.address} -> {path}",
    )


@cli.command()
@click.option("--port", type=int, help=f"Listen port (default {DEFAULT_PORT})")
@click.option("--state-dir", type=click.Path(file_okay=False), help="Directory for the block log, snapshot and documents")
@click.option("--block-interval-ms", type=int, help="Block sealing interval (default 500)")
@click.option("--block-batch-max", type=int, help="Seal immediately at this many pending txs (default 100)")
@click.option("--params", "params_path", type=click.Path(exists=True, dir_okay=False), help="Compliance params JSON file")
@click.option("--host", default="127.0.0.1", show_default=True, help="Bind address")
@click.pass_obj
@_guard
def serve(obj: Ctx, port, state_dir, block_interval_ms, block_batch_max, params_path, host):
    """Run the trading service (single-writer ledger node)."""
    from .ledger import LedgerConfig
    from .service import serve as run_service

    cfg = obj.file_config
    state_dir = state_dir or cfg.get("state_dir")
    if not state_dir:
        raise click.UsageError("--state-dir is required (or set state_dir in --config)")
    params_path = params_path or cfg.get("params")
    params = comp.ComplianceParams.load(params_path) if params_path else comp.ComplianceParams.default()
    ledger_config = LedgerConfig.from_dict(cfg.get("ledger", {}))
    run_service(
        state_dir,
        port=port or cfg.get("port", DEFAULT_PORT),
        host=host,
        ledger_config=ledger_config,
        compliance_params=params,
        block_interval_ms=block_interval_ms or cfg.get("block_interval_ms", 500),
        block_batch_max=block_batch_max or cfg.get("block_batch_max", 100),
    )


@cli.command()
@click.option("--role", type=click.Choice(["Issuer", "Trader", "Auditor", "Admin"]), default="Trader", show_default=True)
@click.pass_obj
@_guard
def register(obj: Ctx, role):
    """Register the key file's address on the ledger."""
    result = obj.session().register(role)
    obj.emit(result, plain_text=f"registered ({role}) at block {result['block_height']}")


@cli.command()
@click.option("--amount-cents", type=int, required=True, help="Amount to credit, in USD cents")
@click.pass_obj
@_guard
def deposit(obj: Ctx, amount_cents):
    """Deposit funds into the signing account."""
    result = obj.session().deposit(amount_cents)
    obj.emit(result, plain_text=f"deposited {amount_cents} cents")


@cli.command()
@click.option("--project-id", required=True, help="Originating project identifier")
@click.option("--vintage-year", type=int, required=True, help="Vintage year of the credits")
@click.option("--count", type=int, required=True, help="Number of 1 tCO2e credits to mint")
@click.pass_obj
@_guard
def mint(obj: Ctx, project_id, vintage_year, count):
    """Mint credits (requires the Issuer role)."""
    session = obj.session()
    token_ids = session.mint(project_id, vintage_year, count)
    obj.emit({"token_ids": token_ids}, plain_text=f"minted tokens {token_ids}")


@cli.command(name="list")
@click.option("--token", "token_id", type=int, required=True, help="Token id to list for sale")
@click.option("--price-cents", type=int, required=True, help="Asking price in USD cents")
@click.pass_obj
@_guard
def list_cmd(obj: Ctx, token_id, price_cents):
    """List an owned Active token for sale."""
    result = obj.session().list_token(token_id, price_cents)
    obj.emit(result, plain_text=f"listing {result['listing_id']} open at {price_cents} cents")


@cli.command()
@click.option("--listing", "listing_id", type=int, required=True, help="Open listing id to buy")
@click.pass_obj
@_guard
def buy(obj: Ctx, listing_id):
    """Buy an open listing."""
    result = obj.session().buy(listing_id)
    receipt = result["receipt"]
    obj.emit(result, plain_text=f"bought via listing {listing_id}, fee {receipt['fee_cents']} cents")


@cli.command()
@click.option("--listing", "listing_id", type=int, required=True, help="Open listing id to cancel")
@click.pass_obj
@_guard
def cancel(obj: Ctx, listing_id):
    """Cancel an own open listing."""
    result = obj.session().cancel_listing(listing_id)
    obj.emit(result, plain_text=f"cancelled listing {listing_id}")


@cli.command()
@click.option("--token", "token_id", type=int, required=True, help="Token id to retire")
@click.pass_obj
@_guard
def retire(obj: Ctx, token_id):
    """Retire an owned Active token (permanent offset claim)."""
    result = obj.session().retire(token_id)
    obj.emit(result, plain_text=f"retired token {token_id}")


@cli.command()
@click.option("--token", "token_id", type=int, required=True, help="Token id to refund")
@click.option("--reason", type=click.Choice(["Unutilized", "Invalidated"]), required=True)
@click.pass_obj
@_guard
def refund(obj: Ctx, token_id, reason):
    """Cancel a credit and reverse its most recent purchase (Auditor/Admin)."""
    result = obj.session().refund(token_id, reason)
    obj.emit(result, plain_text=f"refunded token {token_id} ({reason})")


@cli.command()
@click.argument("address", required=False)
@click.pass_obj
@_guard
def history(obj: Ctx, address):
    """Transaction history for an address (default: own address)."""
    if address is None:
        address = obj.session().address
    rows = obj.client().history(address)
    obj.emit(rows, plain_text="\n".join(f"[{r['block_height']}] {r['summary']}" for r in rows) or "(empty)")


@cli.command()
@click.option("--status", type=click.Choice(["open", "filled", "cancelled"]), help="Filter by listing status")
@click.pass_obj
@_guard
def listings(obj: Ctx, status):
    """Show marketplace listings."""
    rows = obj.client().listings(status)
    obj.emit(
        rows,
        plain_text="\n".join(
            f"#{r['listing_id']} token {r['token_id']} at {r['price_cents']}c [{r['status']}]" for r in rows
        )
        or "(no listings)",
    )


@cli.command()
@click.argument("token_id", type=int)
@click.pass_obj
@_guard
def token(obj: Ctx, token_id):
    """Show one token."""
    obj.emit(obj.client().token(token_id))


@cli.command()
@click.argument("address", required=False)
@click.pass_obj
@_guard
def account(obj: Ctx, address):
    """Show an account (default: own address)."""
    if address is None:
        address = obj.session().address
    obj.emit(obj.client().account(address))


@cli.group()
def audit():
    """Chain audit operations."""


@audit.command(name="verify")
@click.pass_obj
@_guard
def audit_verify(obj: Ctx):
    """Verify the service's block log end to end."""
    report = obj.client().audit_verify()
    obj.emit(report, plain_text="chain ok" if report["ok"] else f"chain FAILED: {report['failures']}")
    if not report["ok"]:
        raise DomainExit("ChainVerificationFailed", f"{len(report['failures'])} failure(s)")


@cli.group()
def document():
    """Off-chain content-addressed documents."""


@document.command(name="put")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.pass_obj
@_guard
def document_put(obj: Ctx, file):
    """Store a file off-chain; prints its content hash."""
    record = obj.client().store_document(Path(file).read_bytes())
    obj.emit(record, plain_text=record["content_hash"])


@document.command(name="get")
@click.argument("content_hash")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), help="Write the bytes here instead of stdout")
@click.pass_obj
@_guard
def document_get(obj: Ctx, content_hash, out_path):
    """Fetch a stored document by content hash."""
    data = obj.client().fetch_document(content_hash)
    if out_path:
        Path(out_path).write_bytes(data)
        obj.emit({"content_hash": content_hash, "out": out_path, "size_bytes": len(data)})
    else:
        sys.stdout.buffer.write(data)


@cli.group()
def compliance():
    """CBAM/CCA compliance computations and reports."""


@compliance.command(name="cca")
@click.option("--year", type=int, required=True, help="Compliance year")
@click.option("--emissions", type=float, required=True, help="Reported emissions in tCO2e")
@click.option("--retired", type=int, default=0, show_default=True, help="Retired credits to offset")
@click.option("--params", "params_path", type=click.Path(exists=True, dir_okay=False), help="Compliance params JSON file")
@click.pass_obj
@_guard
def compliance_cca(obj: Ctx, year, emissions, retired, params_path):
    """Compute the CCA baseline, rate and tax for one year."""
    params = comp.ComplianceParams.load(params_path) if params_path else comp.ComplianceParams.default()
    net = comp.net_emissions(emissions, retired)
    baseline = comp.cca_baseline(year, params.cca)
    doc = {
        "year": year,
        "reported_emissions_tco2e": emissions,
        "retired_credits": retired,
        "net_emissions_tco2e": net,
        "baseline_tco2e": float(baseline),
        "rate_cents_per_tco2e": comp.cca_rate(year, params.cca),
        "tax_cents": comp.cca_tax(net, year, params.cca),
        "schedule": params.cca.schedule,
    }
    obj.emit(doc, plain_text=f"tax {doc['tax_cents']} cents (net {net} t vs baseline {baseline})")


@compliance.group(name="cbam")
def compliance_cbam():
    """CBAM phase timeline."""


@compliance_cbam.command(name="phase")
@click.option("--date", required=True, help="Date to classify, YYYY-MM-DD")
@click.option("--params", "params_path", type=click.Path(exists=True, dir_okay=False), help="Compliance params JSON file")
@click.option("--local", is_flag=True, help="Compute locally instead of querying the service")
@click.pass_obj
@_guard
def cbam_phase_cmd(obj: Ctx, date, params_path, local):
    """Which CBAM phase a date falls in, and what it requires."""
    if local or params_path:
        params = comp.ComplianceParams.load(params_path) if params_path else comp.ComplianceParams.default()
        try:
            parsed = dt.date.fromisoformat(date)
        except ValueError:
            raise click.UsageError("--date must be YYYY-MM-DD")
        doc = {
            "date": date,
            "phase": comp.cbam_phase(parsed, params.cbam),
            "requirements": comp.cbam_requirements(parsed, params.cbam),
        }
    else:
        doc = obj.client().cbam_phase(date)
    obj.emit(doc, plain_text=f"{date}: {doc['phase']} {doc['requirements']}")


@compliance.command(name="report")
@click.option("--address", required=True, help="Account to report on")
@click.option("--regime", type=click.Choice(["cca", "cbam", "corsia"]), required=True)
@click.option("--year", type=int, required=True, help="Reporting year")
@click.option("--reported", type=float, default=0.0, show_default=True, help="Reported emissions in tCO2e")
@click.pass_obj
@_guard
def compliance_report(obj: Ctx, address, regime, year, reported):
    """Fetch a compliance report from the service."""
    report = obj.client().compliance_report(address, regime, year, reported)
    obj.emit(report)


@cli.group()
def experiment():
    """Treatment-vs-control transaction experiments."""


@experiment.command(name="run")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), help="Experiment config JSON")
@click.option("--seed", type=int, help="PRNG seed (overrides config)")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default="result.json", show_default=True)
@click.option("--mode", type=click.Choice(["parametric", "mechanistic", "e2e"]), help="Sampling mode (overrides config)")
@click.option("--endpoint", "e2e_endpoint", help="Service URL for e2e mode")
@click.pass_obj
@_guard
def experiment_run(obj: Ctx, config_path, seed, out_path, mode, e2e_endpoint):
    """Run the experiment; writes result.json and a companion result.csv."""
    doc = {}
    if config_path:
        with open(config_path) as fh:
            doc = json.load(fh)
    if seed is not None:
        doc["seed"] = seed
    if mode is not None:
        doc["mode"] = mode
    config = sim.ExperimentConfig.from_dict(doc)
    if config.mode == "e2e":
        result = sim.run_e2e_experiment(config, e2e_endpoint or obj.endpoint)
    else:
        result = sim.run_experiment(config)
    out_path = Path(out_path)
    sim.write_result_files(result, out_path)
    first = result["replications"][0]
    summary = {
        "out": str(out_path),
        "csv": str(out_path.with_suffix(".csv")),
        "welch": first["welch"],
        "reduction_pct": first["reduction_pct"],
    }
    obj.emit(
        summary,
        plain_text=(
            f"time p={first['welch']['time']['p']:.3g} "
            f"cost p={first['welch']['cost']['p']:.3g} "
            f"reductions {first['reduction_pct']['time']:.1f}%/{first['reduction_pct']['cost']:.1f}%"
        ),
    )


@cli.group()
def kano():
    """Kano-model survey analytics."""


@kano.command(name="analyze")
@click.argument("survey", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", type=click.Path(dir_okay=False), help="Write the full analysis JSON here")
@click.pass_obj
@_guard
def kano_analyze(obj: Ctx, survey, out_path):
    """Classify survey features into Kano categories."""
    responses = kano_mod.load_survey_csv(survey)
    analysis = kano_mod.analyze_survey(responses)
    if out_path:
        Path(out_path).write_text(json.dumps(analysis, indent=2, sort_keys=True) + "\n")
    obj.emit(
        analysis,
        plain_text="\n".join(
            f"{bucket}: {', '.join(features) or '(none)'}"
            for bucket, features in analysis["buckets"].items()
        ),
    )


def main():
    cli(prog_name="carbonmarket")


if __name__ == "__main__":
    main()
