"""Likelihood/impact risk scoring and mitigation prioritization.

Likelihood is the weight-scaled share of historical incidents a pattern
accounts for (a simplex across patterns). Impact is the pattern's
individuals-affected total on a log scale, normalized so the worst pattern
scores 1 (raw impacts span single digits to 10^8 persons, so a linear scale
would drown everything below the top pattern). Composite is their product.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, replace
from typing import Any, Callable, Sequence

from .errors import RiskInputError
from .library import ThreatLibrary
from .pipeline import AttackPattern
from .provenance import Provenance

LIKELIHOOD_SOURCE_NOTE = (
    "likelihood derives from historical breach frequencies in the bundled "
    "dataset snapshot; no live network-traffic feed is consulted"
)


@dataclass(frozen=True)
class RiskScore:
    """Scored pattern; rank is 0 until assigned by :func:`prioritize`."""

    pattern: AttackPattern
    likelihood: float  # in [0, 1]; sums to 1 across patterns
    impact: float  # in [0, 1]; 1 = worst observed
    composite: float  # likelihood * impact exactly
    rank: int = 0

    def to_dict(self) -> dict[str, Any]:
        return {
            "rank": self.rank,
            "entry_id": self.pattern.entry_id,
            "actor": self.pattern.actor,
            "breach_type": self.pattern.breach_type.value,
            "incident_count": self.pattern.incident_count,
            "total_impact": self.pattern.total_impact,
            "likelihood": self.likelihood,
            "impact": self.impact,
            "composite": self.composite,
        }


def likelihood(
    pattern: AttackPattern, all_patterns: Sequence[AttackPattern], library: ThreatLibrary
) -> float:
    """Weight-scaled incident share: (count x weight) / sum over all patterns."""
    total = sum(
        p.incident_count * library.entry(p.entry_id).likelihood_weight for p in all_patterns
    )
    if total <= 0:
        raise RiskInputError("no weighted incidents to normalize against")
    weight = library.entry(pattern.entry_id).likelihood_weight
    return (pattern.incident_count * weight) / total


def impact(pattern: AttackPattern, all_patterns: Sequence[AttackPattern]) -> float:
    """Log-scaled impact normalized to the worst pattern (1.0); zero stays 0."""
    worst = max((p.total_impact for p in all_patterns), default=0)
    if worst <= 0:
        return 0.0
    return math.log10(1 + pattern.total_impact) / math.log10(1 + worst)


LikelihoodFn = Callable[[AttackPattern, Sequence[AttackPattern], ThreatLibrary], float]
ImpactFn = Callable[[AttackPattern, Sequence[AttackPattern]], float]


def score_patterns(
    patterns: Sequence[AttackPattern],
    library: ThreatLibrary,
    likelihood_fn: LikelihoodFn = likelihood,
    impact_fn: ImpactFn = impact,
) -> list[RiskScore]:
    """Score every pattern and return the prioritized, rank-assigned list.

    Both scoring functions are pluggable; the defaults are the
    frequency-share likelihood and log-scaled impact above.
    """
    if not patterns:
        return []
    scores = []
    for pattern in patterns:
        like = likelihood_fn(pattern, patterns, library)
        imp = impact_fn(pattern, patterns)
        scores.append(
            RiskScore(pattern=pattern, likelihood=like, impact=imp, composite=like * imp)
        )
    return prioritize(scores)


def _priority_key(score: RiskScore) -> tuple:
    # Descending composite, then descending impact, then stable lexical keys.
    return (
        -score.composite,
        -score.impact,
        score.pattern.entry_id,
        score.pattern.breach_type.value,
        score.pattern.actor,
    )


def prioritize(scores: Sequence[RiskScore]) -> list[RiskScore]:
    """Order by descending composite (ties: higher impact, then entry id) and rank 1..n."""
    ordered = sorted(scores, key=_priority_key)
    return [replace(score, rank=i) for i, score in enumerate(ordered, start=1)]


RISK_CSV_COLUMNS = (
    "rank",
    "entry_id",
    "actor",
    "breach_type",
    "incident_count",
    "total_impact",
    "likelihood",
    "impact",
    "composite",
)


def risk_csv_text(scores: Sequence[RiskScore]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(RISK_CSV_COLUMNS)
    for score in scores:
        writer.writerow(
            [
                score.rank,
                score.pattern.entry_id,
                score.pattern.actor,
                score.pattern.breach_type.value,
                score.pattern.incident_count,
                score.pattern.total_impact,
                score.likelihood,
                score.impact,
                score.composite,
            ]
        )
    return buf.getvalue()


def risk_json_doc(scores: Sequence[RiskScore], provenance: Provenance) -> dict[str, Any]:
    """JSON mirror of the risk report with its provenance block."""
    return {
        "provenance": provenance.to_dict(),
        "notes": [LIKELIHOOD_SOURCE_NOTE],
        "scores": [score.to_dict() for score in scores],
    }
