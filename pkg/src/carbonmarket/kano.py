"""Kano-model survey classification.

Each respondent answers a functional ("feature present") and a
dysfunctional ("feature absent") question on the 1..5 scale
(1=Like, 2=Must-be, 3=Neutral, 4=Live-with, 5=Dislike). The pair maps
through the evaluation table below to one of six categories:

* M  Must-be        * O  One-dimensional   * A  Attractive
* I  Indifferent    * R  Reverse           * Q  Questionable

A feature's category is the mode over its respondents, ties broken by
M > O > A > I > R > Q.
"""

from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

from .errors import EmptyResponses, MalformedRequest, OutOfRange

ANSWER_LABELS = {1: "Like", 2: "Must-be", 3: "Neutral", 4: "Live-with", 5: "Dislike"}

# Rows are the functional answer, columns the dysfunctional answer,
# both ordered Like, Must-be, Neutral, Live-with, Dislike.
EVALUATION_TABLE = (
    ("Q", "A", "A", "A", "O"),
    ("R", "I", "I", "I", "M"),
    ("R", "I", "I", "I", "M"),
    ("R", "I", "I", "I", "M"),
    ("R", "R", "R", "R", "Q"),
)

CATEGORY_PRIORITY = ("M", "O", "A", "I", "R", "Q")

CATEGORY_NAMES = {
    "M": "Must-Be",
    "O": "One-Dimensional",
    "A": "Attractive",
    "I": "Indifferent",
    "R": "Reverse",
    "Q": "Questionable",
}


@dataclass(frozen=True)
class KanoResponse:
    feature_id: str
    respondent_id: str
    functional: int
    dysfunctional: int


def kano_classify_pair(functional: int, dysfunctional: int) -> str:
    if functional not in ANSWER_LABELS or dysfunctional not in ANSWER_LABELS:
        raise OutOfRange(f"answers must be in 1..5, got ({functional}, {dysfunctional})")
    return EVALUATION_TABLE[functional - 1][dysfunctional - 1]


def kano_classify_feature(responses: list[KanoResponse]) -> tuple[str, dict]:
    """Modal category for one feature plus the per-category counts."""
    if not responses:
        raise EmptyResponses("feature has no responses")
    counts = Counter(kano_classify_pair(r.functional, r.dysfunctional) for r in responses)
    best = max(counts.values())
    category = next(c for c in CATEGORY_PRIORITY if counts.get(c, 0) == best)
    return category, dict(counts)


def load_survey_csv(path: str | Path) -> list[KanoResponse]:
    """Read `feature_id,respondent_id,functional,dysfunctional` rows."""
    responses = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        required = {"feature_id", "respondent_id", "functional", "dysfunctional"}
        if reader.fieldnames is None or not required <= set(reader.fieldnames):
            raise MalformedRequest(f"survey CSV must have columns {sorted(required)}")
        for row in reader:
            try:
                responses.append(
                    KanoResponse(
                        feature_id=row["feature_id"],
                        respondent_id=row["respondent_id"],
                        functional=int(row["functional"]),
                        dysfunctional=int(row["dysfunctional"]),
                    )
                )
            except (TypeError, ValueError) as exc:
                raise MalformedRequest(f"bad survey row {row!r}") from exc
    return responses


def analyze_survey(responses: list[KanoResponse]) -> dict:
    """Per-feature classification plus the headline M/O/A buckets."""
    if not responses:
        raise EmptyResponses("survey has no responses")
    by_feature: dict[str, list[KanoResponse]] = {}
    for r in responses:
        by_feature.setdefault(r.feature_id, []).append(r)

    features = {}
    buckets = {"must_be": [], "one_dimensional": [], "attractive": []}
    bucket_for = {"M": "must_be", "O": "one_dimensional", "A": "attractive"}
    for feature_id in sorted(by_feature):
        category, counts = kano_classify_feature(by_feature[feature_id])
        features[feature_id] = {
            "category": category,
            "category_name": CATEGORY_NAMES[category],
            "counts": {c: counts[c] for c in sorted(counts)},
            "n": len(by_feature[feature_id]),
        }
        if category in bucket_for:
            buckets[bucket_for[category]].append(feature_id)

    return {"features": features, "buckets": buckets}
