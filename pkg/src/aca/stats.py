"""Descriptive statistics over normalized breach records.

Four views: individuals affected per covered-entity type (with share of the
overall total), breach counts per submission year, breach-type frequencies
under primary attribution, and response actions extracted from web
descriptions by keyword matching. Plus impact distributions over arbitrary
scopes for downstream risk scoring.
"""

from __future__ import annotations

import csv
import io
import json
import statistics
from collections import Counter
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence, Union

from .errors import ArtifactError
from .ingest import BreachRecord, BreachType, EntityType
from .library import ThreatCategory, ThreatLibrary, default_library, map_breach_to_threat


class ResponseAction(str, Enum):
    """Post-breach response categories extracted from web descriptions."""

    SAFEGUARDS = "Safeguards"
    NOTIFIED_INDIVIDUALS = "NotifiedIndividuals"
    TRAINING = "Training"
    POLICIES_REVISED = "PoliciesRevised"
    ENCRYPTION = "Encryption"
    OTHER = "Other"


# Seed keyword sets for response extraction. Substring matching is
# case-insensitive; stems like "notif" catch notified/notification/notifying.
DEFAULT_KEYWORD_RULES: dict[ResponseAction, tuple[str, ...]] = {
    ResponseAction.SAFEGUARDS: ("safeguard",),
    ResponseAction.NOTIFIED_INDIVIDUALS: ("notif",),
    ResponseAction.TRAINING: ("train", "retrain"),
    ResponseAction.POLICIES_REVISED: ("polic", "procedure"),
    ResponseAction.ENCRYPTION: ("encrypt",),
    ResponseAction.OTHER: (),
}

RESPONSE_COUNTING_NOTE = (
    "response actions are keyword matches over web descriptions, counted "
    "once per action per record; a record naming several actions "
    "contributes to each"
)


def format_percent(numerator: int, denominator: int) -> str:
    """Percentage display with 2 decimals, half-up (e.g. 39.93)."""
    if denominator == 0:
        return "0.00"
    ratio = Decimal(numerator * 100) / Decimal(denominator)
    return str(ratio.quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


@dataclass(frozen=True)
class EntityImpactRow:
    """Individuals affected for one covered-entity type and its overall share."""

    entity_type: EntityType
    total_individuals: int
    percent_of_total: float  # fraction in [0, 1]
    percent_display: str  # 2-decimal percentage, half-up


@dataclass(frozen=True)
class YearlySeries:
    """Breach counts per submission year, contiguous over the observed span."""

    counts: dict[int, int] = field(default_factory=dict)

    @property
    def years(self) -> list[int]:
        return sorted(self.counts)

    def count(self, year: int) -> int:
        return self.counts.get(year, 0)

    def total(self) -> int:
        return sum(self.counts.values())

    def slope(self) -> float:
        """Least-squares slope of count over year; 0.0 when under-determined."""
        if len(self.counts) < 2:
            return 0.0
        years = self.years
        return statistics.linear_regression(years, [self.counts[y] for y in years]).slope


@dataclass(frozen=True)
class ResponseActionCounts:
    """Counts of (entity type, response action) keyword hits."""

    counts: dict[tuple[EntityType, ResponseAction], int] = field(default_factory=dict)

    def count(self, entity_type: EntityType, action: ResponseAction) -> int:
        return self.counts.get((entity_type, action), 0)

    def total_for_entity(self, entity_type: EntityType) -> int:
        return sum(n for (et, _), n in self.counts.items() if et is entity_type)

    def entity_types(self) -> list[EntityType]:
        return sorted({et for et, _ in self.counts}, key=lambda et: et.value)


@dataclass(frozen=True)
class ImpactSummary:
    """Order statistics of known individuals-affected counts within a scope.

    ``min``/``median``/``mean``/``max`` are None when the scope holds no
    records with a known impact.
    """

    scope: str
    count: int
    total: int
    min: int | None
    median: float | None
    mean: float | None
    max: int | None


def individuals_by_entity_type(records: Sequence[BreachRecord]) -> list[EntityImpactRow]:
    """Sum known individuals affected per entity type, largest first.

    Rows with unknown impact count toward presence but not sums; percentages
    are shares of the grand total across all entity types.
    """
    totals: Counter[EntityType] = Counter()
    present: set[EntityType] = set()
    for record in records:
        present.add(record.entity_type)
        if record.individuals_affected is not None:
            totals[record.entity_type] += record.individuals_affected
    grand = sum(totals.values())
    rows = []
    for entity_type in sorted(present, key=lambda et: (-totals[et], et.value)):
        total = totals.get(entity_type, 0)
        rows.append(
            EntityImpactRow(
                entity_type=entity_type,
                total_individuals=total,
                percent_of_total=(total / grand) if grand else 0.0,
                percent_display=format_percent(total, grand),
            )
        )
    return rows


def grand_total_individuals(records: Sequence[BreachRecord]) -> int:
    """Sum of all known individuals-affected counts."""
    return sum(
        r.individuals_affected for r in records if r.individuals_affected is not None
    )


def breaches_per_year(records: Sequence[BreachRecord]) -> YearlySeries:
    """Breach count per submission year, with gap years filled as 0."""
    raw: Counter[int] = Counter(r.submission_year for r in records)
    if not raw:
        return YearlySeries()
    first, last = min(raw), max(raw)
    return YearlySeries(counts={year: raw.get(year, 0) for year in range(first, last + 1)})


def breaches_by_type(records: Sequence[BreachRecord]) -> dict[BreachType, int]:
    """Breach count per type under primary attribution (first listed type)."""
    counts = {bt: 0 for bt in BreachType}
    for record in records:
        counts[record.primary_breach_type] += 1
    return counts


def response_actions_by_entity(
    records: Sequence[BreachRecord],
    keyword_rules: Mapping[ResponseAction, Sequence[str]] = DEFAULT_KEYWORD_RULES,
) -> ResponseActionCounts:
    """Count response actions per entity type from web-description keywords.

    A record contributes at most once per action regardless of how many of
    that action's keywords appear.
    """
    counts: dict[tuple[EntityType, ResponseAction], int] = {}
    for record in records:
        text = record.web_description.lower()
        if not text:
            continue
        for action, keywords in keyword_rules.items():
            if any(keyword in text for keyword in keywords):
                key = (record.entity_type, action)
                counts[key] = counts.get(key, 0) + 1
    return ResponseActionCounts(counts=counts)


def impact_distribution(
    records: Sequence[BreachRecord],
    scope: Union[str, BreachType, ThreatCategory] = "overall",
    library: ThreatLibrary | None = None,
) -> ImpactSummary:
    """Summarize known impacts within a scope.

    ``scope`` is "overall", a :class:`BreachType` (primary attribution), or a
    :class:`ThreatCategory` (records whose threat mapping lands in that
    category, using ``library`` or the default library).
    """
    if isinstance(scope, BreachType):
        in_scope = [r for r in records if r.primary_breach_type is scope]
        tag = f"breach_type:{scope.value}"
    elif isinstance(scope, ThreatCategory):
        lib = library if library is not None else default_library()
        in_scope = [r for r in records if map_breach_to_threat(r, lib).category is scope]
        tag = f"threat_category:{scope.value}"
    else:
        in_scope = list(records)
        tag = "overall"

    impacts = [r.individuals_affected for r in in_scope if r.individuals_affected is not None]
    if not impacts:
        return ImpactSummary(scope=tag, count=0, total=0, min=None, median=None, mean=None, max=None)
    return ImpactSummary(
        scope=tag,
        count=len(impacts),
        total=sum(impacts),
        min=min(impacts),
        median=float(statistics.median(impacts)),
        mean=statistics.fmean(impacts),
        max=max(impacts),
    )


def load_keyword_rules(path: Union[str, Path]) -> dict[ResponseAction, tuple[str, ...]]:
    """Load a keyword-rules JSON file: map action name to substring list."""
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ArtifactError(f"cannot read keyword rules {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ArtifactError(f"keyword rules {path}: expected a JSON object")
    by_name = {action.value: action for action in ResponseAction}
    rules: dict[ResponseAction, tuple[str, ...]] = dict(DEFAULT_KEYWORD_RULES)
    for name, keywords in raw.items():
        if name not in by_name:
            raise ArtifactError(f"keyword rules {path}: unknown action {name!r}")
        if not isinstance(keywords, list) or not all(isinstance(k, str) for k in keywords):
            raise ArtifactError(f"keyword rules {path}: {name} must map to a list of strings")
        rules[by_name[name]] = tuple(k.lower() for k in keywords)
    return rules


def _csv_text(header: Sequence[str], rows: Iterable[Sequence[object]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def entity_csv_text(rows: Sequence[EntityImpactRow]) -> str:
    return _csv_text(
        ("entity_type", "total_individuals", "percent"),
        ((r.entity_type.value, r.total_individuals, r.percent_display) for r in rows),
    )


def yearly_csv_text(series: YearlySeries) -> str:
    return _csv_text(("year", "count"), ((y, series.counts[y]) for y in series.years))


def types_csv_text(counts: Mapping[BreachType, int]) -> str:
    ordered = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0].value))
    return _csv_text(("breach_type", "count"), ((bt.value, n) for bt, n in ordered))


def responses_csv_text(counts: ResponseActionCounts) -> str:
    rows = []
    for entity_type in counts.entity_types():
        for action in ResponseAction:
            rows.append((entity_type.value, action.value, counts.count(entity_type, action)))
    return _csv_text(("entity_type", "action", "count"), rows)


def stats_bundle(
    entity_rows: Sequence[EntityImpactRow],
    yearly: YearlySeries,
    type_counts: Mapping[BreachType, int],
    responses: ResponseActionCounts | None,
    snapshot_sha256: str,
) -> dict:
    """Single JSON document bundling every stats table plus the snapshot hash."""
    doc: dict = {
        "provenance": {"snapshot_sha256": snapshot_sha256},
        "entity_impact": [
            {
                "entity_type": r.entity_type.value,
                "total_individuals": r.total_individuals,
                "percent": r.percent_display,
            }
            for r in entity_rows
        ],
        "grand_total_individuals": sum(r.total_individuals for r in entity_rows),
        "breaches_per_year": {str(y): yearly.counts[y] for y in yearly.years},
        "breaches_by_type": {
            bt.value: n
            for bt, n in sorted(type_counts.items(), key=lambda kv: (-kv[1], kv[0].value))
        },
        "assumptions": [RESPONSE_COUNTING_NOTE],
    }
    if responses is not None:
        doc["response_actions"] = [
            {
                "entity_type": entity_type.value,
                "action": action.value,
                "count": responses.count(entity_type, action),
            }
            for entity_type in responses.entity_types()
            for action in ResponseAction
        ]
    return doc
