"""Regulatory compliance: CBAM phase timeline and CCA carbon tax.

CBAM is a phased import-carbon regime: a reporting-only trial from
2023-10-01, certificate payments from 2026, full coverage from 2034. The
phases partition the timeline, so exactly one phase holds on any date.

CCA is a carbon tax on emissions above a baseline that declines year over
year while the per-ton rate escalates. All intermediate arithmetic is
exact (rationals); a single terminal half-up rounding produces the
reported figure. The numeric defaults here are illustrative configuration,
not sourced values: the enacted schedules publish sector baselines that
this artifact does not model.

Money is integer cents throughout. ``build_report`` is pure: it consumes
retirement timestamps extracted from the block log, so a report is always
reproducible from the chain alone.
"""

from __future__ import annotations

import datetime as dt
import decimal
import json
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from pathlib import Path

from .canonical import canonical_dumps
from .errors import ConfigInvalid, YearBeforeRegime

CBAM_PHASES = ("PreTrial", "Reporting", "Payment", "Full")
REGIMES = ("CBAM", "CCA", "CORSIA")

REQ_DECLARATION = "EmissionsDeclarationRequired"
REQ_PAYMENT = "CertificatePaymentDue"


def _exact(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(str(value))
    return Fraction(value)


def _round_half_up(x: Fraction, decimals: int = 0) -> Fraction:
    scale = 10**decimals
    scaled = x * scale
    return Fraction((2 * scaled.numerator + scaled.denominator) // (2 * scaled.denominator), scale)


def _to_decimal(x: Fraction, decimals: int) -> Decimal:
    # x is already rounded to `decimals` places, so this conversion is exact.
    with decimal.localcontext() as ctx:
        ctx.prec = 60
        return (Decimal(x.numerator) / Decimal(x.denominator)).quantize(Decimal(1).scaleb(-decimals))


@dataclass(frozen=True)
class CbamSchedule:
    reporting_start: dt.date = dt.date(2023, 10, 1)
    payment_start: dt.date = dt.date(2026, 1, 1)
    full_start: dt.date = dt.date(2034, 1, 1)

    def __post_init__(self):
        if not (self.reporting_start < self.payment_start < self.full_start):
            raise ConfigInvalid("CBAM dates must satisfy reporting < payment < full")


@dataclass(frozen=True)
class CcaParams:
    start_year: int = 2024
    baseline_0: float = 100.0        # tCO2e; illustrative default
    decline_rate: float = 0.025      # fraction per year, in [0, 1)
    rate_0_cents: int = 5500         # $55.00 per tCO2e; illustrative default
    escalation: float = 0.05         # fraction per year, >= 0
    schedule: str = "geometric"      # or "linear"

    def __post_init__(self):
        if self.baseline_0 <= 0:
            raise ConfigInvalid("baseline_0 must be positive")
        if self.rate_0_cents <= 0:
            raise ConfigInvalid("rate_0_cents must be positive")
        if not 0 <= self.decline_rate < 1:
            raise ConfigInvalid("decline_rate must be in [0, 1)")
        if self.escalation < 0:
            raise ConfigInvalid("escalation must be non-negative")
        if self.schedule not in ("geometric", "linear"):
            raise ConfigInvalid("schedule must be geometric or linear")


def cbam_phase(date: dt.date, schedule: CbamSchedule | None = None) -> str:
    schedule = schedule or CbamSchedule()
    if date < schedule.reporting_start:
        return "PreTrial"
    if date < schedule.payment_start:
        return "Reporting"
    if date < schedule.full_start:
        return "Payment"
    return "Full"


def cbam_requirements(date: dt.date, schedule: CbamSchedule | None = None) -> list[str]:
    """Importer obligations for a covered good on the given date."""
    phase = cbam_phase(date, schedule)
    if phase == "PreTrial":
        return []
    if phase == "Reporting":
        return [REQ_DECLARATION]
    return [REQ_DECLARATION, REQ_PAYMENT]


def _check_year(year: int, params: CcaParams) -> int:
    if year < params.start_year:
        raise YearBeforeRegime(f"{year} precedes regime start {params.start_year}")
    return year - params.start_year


def _baseline_exact(year: int, params: CcaParams) -> Fraction:
    k = _check_year(year, params)
    b0 = _exact(params.baseline_0)
    d = _exact(params.decline_rate)
    if params.schedule == "linear":
        return max(Fraction(0), b0 * (1 - d * k))
    return b0 * (1 - d) ** k


def _rate_exact(year: int, params: CcaParams) -> Fraction:
    k = _check_year(year, params)
    r0 = _exact(params.rate_0_cents)
    e = _exact(params.escalation)
    if params.schedule == "linear":
        return r0 * (1 + e * k)
    return r0 * (1 + e) ** k


def cca_baseline(year: int, params: CcaParams) -> Decimal:
    """Permissible-emissions baseline for the year, in tCO2e (6 decimals)."""
    return _to_decimal(_round_half_up(_baseline_exact(year, params), 6), 6)


def cca_rate(year: int, params: CcaParams) -> int:
    """Tax rate for the year, in whole cents per tCO2e (half-up)."""
    return int(_round_half_up(_rate_exact(year, params)))


def cca_tax(net_emissions_tco2e, year: int, params: CcaParams) -> int:
    """Tax due in cents: max(0, net - baseline) * rate, rounded once at the end.

    Intermediate values stay exact rationals; only the final cent amount is
    rounded (half-up), so the result never accumulates rounding error.
    """
    net = _exact(net_emissions_tco2e)
    if net < 0:
        raise ConfigInvalid("net emissions must be non-negative")
    excess = net - _baseline_exact(year, params)
    if excess <= 0:
        return 0
    return int(_round_half_up(excess * _rate_exact(year, params)))


def net_emissions(reported_tco2e, retired_token_count: int) -> float:
    """Reported emissions offset by retired credits (1 tCO2e per credit)."""
    if reported_tco2e < 0 or retired_token_count < 0:
        raise ConfigInvalid("reported emissions and retired count must be non-negative")
    return float(max(Fraction(0), _exact(reported_tco2e) - retired_token_count))


@dataclass(frozen=True)
class ComplianceParams:
    cbam: CbamSchedule
    cca: CcaParams

    @classmethod
    def default(cls) -> "ComplianceParams":
        return cls(cbam=CbamSchedule(), cca=CcaParams())

    @classmethod
    def from_dict(cls, doc: dict) -> "ComplianceParams":
        def date(key, default):
            return dt.date.fromisoformat(doc[key]) if key in doc else default

        cbam = CbamSchedule(
            reporting_start=date("reporting_start", dt.date(2023, 10, 1)),
            payment_start=date("payment_start", dt.date(2026, 1, 1)),
            full_start=date("full_start", dt.date(2034, 1, 1)),
        )
        defaults = CcaParams()
        cca = CcaParams(
            start_year=int(doc.get("start_year", defaults.start_year)),
            baseline_0=float(doc.get("baseline_0", defaults.baseline_0)),
            decline_rate=float(doc.get("decline_rate", defaults.decline_rate)),
            rate_0_cents=int(doc.get("rate_0_cents", defaults.rate_0_cents)),
            escalation=float(doc.get("escalation", defaults.escalation)),
            schedule=str(doc.get("schedule", defaults.schedule)),
        )
        return cls(cbam=cbam, cca=cca)

    @classmethod
    def load(cls, path: str | Path) -> "ComplianceParams":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return {
            "reporting_start": self.cbam.reporting_start.isoformat(),
            "payment_start": self.cbam.payment_start.isoformat(),
            "full_start": self.cbam.full_start.isoformat(),
            "start_year": self.cca.start_year,
            "baseline_0": self.cca.baseline_0,
            "decline_rate": self.cca.decline_rate,
            "rate_0_cents": self.cca.rate_0_cents,
            "escalation": self.cca.escalation,
            "schedule": self.cca.schedule,
        }


def period_bounds(period) -> tuple[int, int, dict]:
    """Normalize a period (year or (start, end) dates) to a UTC epoch range.

    Returns (start_epoch, end_epoch_exclusive, json_echo).
    """
    if isinstance(period, int):
        start = dt.datetime(period, 1, 1, tzinfo=dt.timezone.utc)
        end = dt.datetime(period + 1, 1, 1, tzinfo=dt.timezone.utc)
        return int(start.timestamp()), int(end.timestamp()), {"year": period}
    start_d, end_d = period
    start = dt.datetime(start_d.year, start_d.month, start_d.day, tzinfo=dt.timezone.utc)
    end = dt.datetime(end_d.year, end_d.month, end_d.day, tzinfo=dt.timezone.utc) + dt.timedelta(days=1)
    return (
        int(start.timestamp()),
        int(end.timestamp()),
        {"start": start_d.isoformat(), "end": end_d.isoformat()},
    )


def period_end_date(period) -> dt.date:
    if isinstance(period, int):
        return dt.date(period, 12, 31)
    return period[1]


def period_year(period) -> int:
    return period if isinstance(period, int) else period[1].year


def build_report(
    account: str,
    period,
    regime: str,
    params: ComplianceParams,
    reported_tco2e: float = 0.0,
    retire_timestamps: list[int] | None = None,
) -> dict:
    """Assemble a compliance report for one account and period.

    ``retire_timestamps`` are the UTC timestamps of the account's accepted
    Retire transactions, as extracted from the block log; only those inside
    the period count toward the offset.
    """
    if regime not in REGIMES:
        raise ConfigInvalid(f"regime must be one of {REGIMES}")
    start, end, echo = period_bounds(period)
    retired = sum(1 for ts in (retire_timestamps or []) if start <= ts < end)
    net = net_emissions(reported_tco2e, retired)

    if regime == "CCA":
        year = period_year(period)
        baseline = cca_baseline(year, params.cca)
        obligations = {
            "baseline_tco2e": float(baseline),
            "rate_cents_per_tco2e": cca_rate(year, params.cca),
            "excess_tco2e": float(max(0.0, net - float(baseline))),
            "tax_cents": cca_tax(net, year, params.cca),
            "schedule": params.cca.schedule,
        }
    elif regime == "CBAM":
        at = period_end_date(period)
        obligations = {
            "phase": cbam_phase(at, params.cbam),
            "requirements": cbam_requirements(at, params.cbam),
        }
    else:
        obligations = {"status": "NotImplemented"}

    return {
        "account": account,
        "period": echo,
        "regime": regime,
        "reported_emissions_tco2e": float(reported_tco2e),
        "retired_credits": retired,
        "net_emissions_tco2e": net,
        "obligations": obligations,
    }


def report_json(report: dict) -> str:
    return canonical_dumps(report)
