"""Descriptive statistics and two-sample t-tests.

Self-contained: the Student-t CDF is computed from the regularized
incomplete beta function (continued fraction, modified Lentz evaluation),
accurate to well under 1e-9 absolute error over the ranges used here. The
test suite cross-checks it against an independent library implementation
and published critical-value tables.

Welch's unequal-variance test is the default because observed group
variances typically differ; the pooled-variance variant is available
behind a flag. P-values are two-sided.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DegenerateVariance, NonPositiveBaseline, TooFewSamples

_BETACF_MAX_ITER = 300
_BETACF_EPS = 1e-16
_FPMIN = 1e-300


@dataclass(frozen=True)
class SummaryStats:
    n: int
    mean: float
    sd: float

    def to_dict(self) -> dict:
        return {"n": self.n, "mean": self.mean, "sd": self.sd}


@dataclass(frozen=True)
class WelchResult:
    t: float
    df: float
    p: float

    def to_dict(self) -> dict:
        return {"t": self.t, "df": self.df, "p": self.p}


def summarize(samples) -> SummaryStats:
    """Sample mean and standard deviation (n-1 denominator)."""
    xs = list(samples)
    n = len(xs)
    if n < 2:
        raise TooFewSamples(f"need at least 2 samples, got {n}")
    mean = math.fsum(xs) / n
    # Corrected two-pass variance: the second term cancels the rounding of
    # the computed mean, which otherwise dominates when sd << |mean|.
    diffs = [x - mean for x in xs]
    var = (math.fsum(d * d for d in diffs) - math.fsum(diffs) ** 2 / n) / (n - 1)
    return SummaryStats(n=n, mean=mean, sd=math.sqrt(max(var, 0.0)))


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta function (Lentz)."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _FPMIN:
        d = _FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _BETACF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _BETACF_EPS:
            return h
    raise ArithmeticError(f"incomplete beta did not converge for a={a}, b={b}, x={x}")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) for a, b > 0 and x in [0, 1]."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must be in [0, 1], got {x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    # The continued fraction converges fast for x < (a+1)/(a+b+2);
    # otherwise use the symmetry I_x(a,b) = 1 - I_{1-x}(b,a).
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def t_cdf(t: float, df: float) -> float:
    """CDF of Student's t with ``df`` degrees of freedom.

    Uses whichever incomplete-beta form keeps its argument at or below 1/2:
    both t^2/(df+t^2) and df/(df+t^2) are computed directly, so neither
    region loses digits to cancellation.
    """
    if df <= 0:
        raise ValueError(f"df must be positive, got {df}")
    if t == 0.0:
        return 0.5
    if math.isinf(t):
        return 1.0 if t > 0 else 0.0
    tt = t * t
    if tt <= df:
        half_center = 0.5 * regularized_incomplete_beta(0.5, df / 2.0, tt / (df + tt))
        return 0.5 + half_center if t > 0 else 0.5 - half_center
    tail = 0.5 * regularized_incomplete_beta(df / 2.0, 0.5, df / (df + tt))
    return 1.0 - tail if t > 0 else tail


def t_sf(t: float, df: float) -> float:
    return t_cdf(-t, df)


def welch_t_summary(
    m1: float, s1: float, n1: int, m2: float, s2: float, n2: int, pooled: bool = False
) -> WelchResult:
    """Two-sample t-test from summary statistics; two-sided p.

    Welch by default (Satterthwaite degrees of freedom); ``pooled=True``
    gives the classic equal-variance test.
    """
    if n1 < 2 or n2 < 2:
        raise TooFewSamples("both groups need n >= 2")
    if s1 < 0 or s2 < 0:
        raise ValueError("standard deviations must be non-negative")
    if s1 == 0 and s2 == 0:
        raise DegenerateVariance("both groups have zero variance")
    if pooled:
        sp2 = ((n1 - 1) * s1**2 + (n2 - 1) * s2**2) / (n1 + n2 - 2)
        t = (m1 - m2) / math.sqrt(sp2 * (1.0 / n1 + 1.0 / n2))
        df = float(n1 + n2 - 2)
    else:
        v1 = s1**2 / n1
        v2 = s2**2 / n2
        t = (m1 - m2) / math.sqrt(v1 + v2)
        df = (v1 + v2) ** 2 / (v1**2 / (n1 - 1) + v2**2 / (n2 - 1))
    p = 2.0 * t_sf(abs(t), df)
    return WelchResult(t=t, df=df, p=min(1.0, p))


def welch_t_samples(xs1, xs2, pooled: bool = False) -> WelchResult:
    a = summarize(xs1)
    b = summarize(xs2)
    return welch_t_summary(a.mean, a.sd, a.n, b.mean, b.sd, b.n, pooled=pooled)


def percent_reduction(baseline: float, new: float) -> float:
    """Reduction from baseline to new, in percent of baseline."""
    if baseline <= 0:
        raise NonPositiveBaseline(f"baseline must be positive, got {baseline}")
    return 100.0 * (baseline - new) / baseline
